#ifndef PNO_CONFIG_HPP
#define PNO_CONFIG_HPP

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "pno/grid.hpp"

namespace pno {

// Flat key=value run configuration. Every tunable of every subcommand lives
// here with its default, so a resolved dump of this struct is sufficient to
// reproduce any run. Unknown keys are rejected rather than ignored: a typo
// silently reverting a knob to its default is worse than an error.
struct RunConfig {
  std::string out_dir = "out";
  std::string data_dir = "data";
  std::uint64_t seed = 1;
  int workers = 1;
  bool deterministic = false;

  // dataset generation
  int dataset_maps = 200;
  int dataset_goals = 5;
  int dataset_height = 64;
  int dataset_width = 64;
  int dataset_heldout = 20;
  int dataset_obstacle_count_min = 6;
  int dataset_obstacle_count_max = 12;
  int dataset_obstacle_size_min = 4;
  int dataset_obstacle_size_max = 16;
  bool dataset_heuristic_targets = false;  // also write lattice cost-to-go
  int dataset_erosion_min = 0;             // eroded-variant augmentation range;
  int dataset_erosion_max = 0;             // both zero disables it

  // model hyperparameters (shared by both training stages)
  int model_channels = 24;
  int model_layers = 3;
  int model_modes = 8;
  int model_lift_hidden = 32;
  std::string model_head_hidden = "32";
  double model_beta = 64.0;
  std::string model_arch = "pno";  // pno | fno (unmasked ablation)

  // training
  int train_epochs = 40;
  int train_batch = 4;
  double train_lr = 1e-3;
  bool train_shuffle = true;
  bool train_grad_check = true;
  int train_grad_check_entries = 1;
  int train_checkpoint_every = 0;  // epochs between resume snapshots; 0 = none
  std::string train_resume;        // resume snapshot path
  std::string train_targets = "fmm";  // fmm | dijkstra value targets
  std::string train_sdf_checkpoint;   // stage-1 model; default <out_dir>/sdf.eikm

  // evaluation
  std::string eval_checkpoint;       // default <out_dir>/<arch>.eikm
  std::string eval_resolutions = "1,2,4";
  bool eval_images = true;
  std::string eval_movingai_dir;  // optional out-of-distribution .map files

  // benchmark
  std::string bench_checkpoint;
  std::string bench_map_sizes = "128,256";
  int bench_maps_per_size = 5;
  int bench_pairs_per_map = 5;
  int bench_erosion_layers = -1;  // -1: resolution-scaled default
  std::string bench_sweep_layers;  // e.g. "0,2,4,8"; empty disables the sweep
  int bench_rrt_samples = 20000;
  std::string bench_methods =
      "astar-euclid,astar-pno-eroded,astar-pno,rrt,rrt-star";

  // single-instance planning
  std::string plan_map;
  std::string plan_method = "astar-euclid";
  std::string plan_checkpoint;
  int plan_start_row = 0;
  int plan_start_col = 0;
  int plan_goal_row = 0;
  int plan_goal_col = 0;
  double plan_step = 0.25;  // descent step, in cells
  int plan_max_iters = 10000;
  int plan_erosion_layers = -1;

  // consistency harness
  std::string consistency_checkpoint;
  int consistency_maps = 10;
  int consistency_pairs = 100;
  int consistency_triples = 10000;
  std::string consistency_layers = "0,4";

  // Single source of truth for the key list: parsing, emission and the
  // unknown-key check all walk this visitor.
  template <class Self, class F>
  static void visit(Self& s, F&& f) {
    f("out_dir", s.out_dir);
    f("data_dir", s.data_dir);
    f("seed", s.seed);
    f("workers", s.workers);
    f("deterministic", s.deterministic);
    f("dataset.maps", s.dataset_maps);
    f("dataset.goals", s.dataset_goals);
    f("dataset.height", s.dataset_height);
    f("dataset.width", s.dataset_width);
    f("dataset.heldout", s.dataset_heldout);
    f("dataset.obstacle_count_min", s.dataset_obstacle_count_min);
    f("dataset.obstacle_count_max", s.dataset_obstacle_count_max);
    f("dataset.obstacle_size_min", s.dataset_obstacle_size_min);
    f("dataset.obstacle_size_max", s.dataset_obstacle_size_max);
    f("dataset.heuristic_targets", s.dataset_heuristic_targets);
    f("dataset.erosion_min", s.dataset_erosion_min);
    f("dataset.erosion_max", s.dataset_erosion_max);
    f("model.channels", s.model_channels);
    f("model.layers", s.model_layers);
    f("model.modes", s.model_modes);
    f("model.lift_hidden", s.model_lift_hidden);
    f("model.head_hidden", s.model_head_hidden);
    f("model.beta", s.model_beta);
    f("model.arch", s.model_arch);
    f("train.epochs", s.train_epochs);
    f("train.batch", s.train_batch);
    f("train.lr", s.train_lr);
    f("train.shuffle", s.train_shuffle);
    f("train.grad_check", s.train_grad_check);
    f("train.grad_check_entries", s.train_grad_check_entries);
    f("train.checkpoint_every", s.train_checkpoint_every);
    f("train.resume", s.train_resume);
    f("train.targets", s.train_targets);
    f("train.sdf_checkpoint", s.train_sdf_checkpoint);
    f("eval.checkpoint", s.eval_checkpoint);
    f("eval.resolutions", s.eval_resolutions);
    f("eval.images", s.eval_images);
    f("eval.movingai_dir", s.eval_movingai_dir);
    f("bench.checkpoint", s.bench_checkpoint);
    f("bench.map_sizes", s.bench_map_sizes);
    f("bench.maps_per_size", s.bench_maps_per_size);
    f("bench.pairs_per_map", s.bench_pairs_per_map);
    f("bench.erosion_layers", s.bench_erosion_layers);
    f("bench.sweep_layers", s.bench_sweep_layers);
    f("bench.rrt_samples", s.bench_rrt_samples);
    f("bench.methods", s.bench_methods);
    f("plan.map", s.plan_map);
    f("plan.method", s.plan_method);
    f("plan.checkpoint", s.plan_checkpoint);
    f("plan.start_row", s.plan_start_row);
    f("plan.start_col", s.plan_start_col);
    f("plan.goal_row", s.plan_goal_row);
    f("plan.goal_col", s.plan_goal_col);
    f("plan.step", s.plan_step);
    f("plan.max_iters", s.plan_max_iters);
    f("plan.erosion_layers", s.plan_erosion_layers);
    f("consistency.checkpoint", s.consistency_checkpoint);
    f("consistency.maps", s.consistency_maps);
    f("consistency.pairs", s.consistency_pairs);
    f("consistency.triples", s.consistency_triples);
    f("consistency.layers", s.consistency_layers);
  }
};

namespace cfgdetail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline void assign(const std::string& key, const std::string& text,
                   std::string& out) {
  (void)key;
  out = text;
}

inline void assign(const std::string& key, const std::string& text, bool& out) {
  if (text == "true" || text == "1")
    out = true;
  else if (text == "false" || text == "0")
    out = false;
  else
    throw ValidationError("config: bad bool for " + key + ": '" + text + "'");
}

template <class Int>
inline void assign_integer(const std::string& key, const std::string& text,
                           Int& out) {
  std::size_t used = 0;
  try {
    if constexpr (std::is_unsigned_v<Int>)
      out = static_cast<Int>(std::stoull(text, &used));
    else
      out = static_cast<Int>(std::stoll(text, &used));
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != text.size())
    throw ValidationError("config: bad integer for " + key + ": '" + text + "'");
}

inline void assign(const std::string& key, const std::string& text, int& out) {
  assign_integer(key, text, out);
}
inline void assign(const std::string& key, const std::string& text,
                   std::uint64_t& out) {
  assign_integer(key, text, out);
}

inline void assign(const std::string& key, const std::string& text, double& out) {
  std::size_t used = 0;
  try {
    out = std::stod(text, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != text.size())
    throw ValidationError("config: bad number for " + key + ": '" + text + "'");
}

inline std::string render(const std::string& v) { return v; }
inline std::string render(bool v) { return v ? "true" : "false"; }
inline std::string render(int v) { return std::to_string(v); }
inline std::string render(std::uint64_t v) { return std::to_string(v); }
inline std::string render(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace cfgdetail

// Parses `key = value` lines into cfg. Lines that are blank or start with '#'
// are skipped. Later occurrences of a key override earlier ones, which is what
// lets a caller layer a delta file over a base file.
inline void parse_config(std::istream& in, RunConfig& cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = cfgdetail::trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config: line " + std::to_string(lineno) +
                            " is not key=value: '" + stripped + "'");
    const std::string key = cfgdetail::trim(stripped.substr(0, eq));
    const std::string value = cfgdetail::trim(stripped.substr(eq + 1));
    bool known = false;
    RunConfig::visit(cfg, [&](const char* name, auto& field) {
      if (!known && key == name) {
        cfgdetail::assign(key, value, field);
        known = true;
      }
    });
    if (!known) throw ValidationError("config: unknown key '" + key + "'");
  }
}

inline RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  RunConfig cfg;
  parse_config(in, cfg);
  return cfg;
}

// Emits every key with its effective value; parsing this text back yields an
// identical config, which is what makes runs reproducible from the dump alone.
inline void write_resolved_config(std::ostream& out, const RunConfig& cfg) {
  out << "# resolved configuration\n";
  RunConfig::visit(cfg, [&](const char* name, const auto& field) {
    out << name << " = " << cfgdetail::render(field) << "\n";
  });
}

inline std::string resolved_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  write_resolved_config(out, cfg);
  return out.str();
}

// Comma-separated integer lists ("0,2,4") used by several schedule knobs.
inline std::vector<int> parse_int_list(const std::string& text,
                                       const std::string& what) {
  std::vector<int> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    token = cfgdetail::trim(token);
    if (token.empty()) continue;
    int v = 0;
    cfgdetail::assign_integer(what, token, v);
    out.push_back(v);
  }
  if (out.empty())
    throw ValidationError("config: empty list for " + what + ": '" + text + "'");
  return out;
}

inline std::vector<std::string> parse_name_list(const std::string& text) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    token = cfgdetail::trim(token);
    if (!token.empty()) out.push_back(token);
  }
  return out;
}

}  // namespace pno

#endif  // PNO_CONFIG_HPP
