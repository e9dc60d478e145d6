// Command line front end. Every subcommand reads the same flat key = value
// config format; the few flags below override the file.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "pno/commands.hpp"

namespace {

using CommandFn = void (*)(const pno::RunConfig&);

const std::map<std::string, CommandFn>& command_table() {
  static const std::map<std::string, CommandFn> table = {
      {"gen-data", pno::cmd_gen_data},
      {"train-sdf", pno::cmd_train_sdf},
      {"train-pno", pno::cmd_train_pno},
      {"eval", pno::cmd_eval},
      {"bench", pno::cmd_bench},
      {"plan", pno::cmd_plan},
      {"check-consistency", pno::cmd_check_consistency},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eikonal value operator: data, training, and planning"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  int workers = 0;
  bool deterministic = false;

  const std::map<std::string, std::string> descriptions = {
      {"gen-data", "generate a dataset of maps with distance and value fields"},
      {"train-sdf", "train the signed distance stage on a dataset"},
      {"train-pno", "train the value stage (pno or fno architecture)"},
      {"eval", "evaluate a checkpoint on held-out maps across resolutions"},
      {"bench", "compare planners on freshly generated maps"},
      {"plan", "solve a single start/goal query on one map"},
      {"check-consistency", "measure heuristic consistency of a checkpoint"},
  };
  for (const auto& [name, fn] : command_table()) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    sub->add_option("--config", config_path, "config file with key = value lines");
    sub->add_option("--seed", seed, "master seed override");
    sub->add_option("--workers", workers, "worker thread override");
    sub->add_flag("--deterministic", deterministic,
                  "force sequential execution regardless of workers");
    (void)fn;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // bad flags are a validation failure
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    pno::RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in)
        throw pno::ValidationError("cannot open config file: " + config_path);
      pno::parse_config(in, cfg);
    }
    if (sub->count("--seed") > 0) cfg.seed = seed;
    if (sub->count("--workers") > 0) cfg.workers = workers;
    if (deterministic) cfg.deterministic = true;
    command_table().at(sub->get_name())(cfg);
  } catch (const pno::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
