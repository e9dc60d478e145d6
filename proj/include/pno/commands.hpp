#ifndef PNO_COMMANDS_HPP
#define PNO_COMMANDS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "pno/config.hpp"
#include "pno/consistency.hpp"
#include "pno/dataset.hpp"
#include "pno/rrt.hpp"

namespace pno {
namespace cmddetail {

using consdetail::fmt;  // %.17g doubles, parse back bit exact

inline int effective_workers(const RunConfig& cfg) {
  // deterministic mode forces a sequential reduction even where parallel
  // results would be merged in index order anyway
  return cfg.deterministic ? 1 : std::max(1, cfg.workers);
}

inline void write_text(const std::string& path, const std::string& text) {
  write_file(path, [&](std::ostream& o) { o << text; });
}

inline void emit_resolved(const RunConfig& cfg, const std::string& dir,
                          const std::string& command) {
  std::filesystem::create_directories(dir);
  write_file(dir + "/" + command + "-config.txt",
             [&](std::ostream& o) { write_resolved_config(o, cfg); });
}

inline OperatorConfig op_config(const RunConfig& cfg) {
  OperatorConfig oc;
  oc.channels = cfg.model_channels;
  oc.layers = cfg.model_layers;
  oc.modes = cfg.model_modes;
  oc.lift_hidden = cfg.model_lift_hidden;
  oc.head_hidden = parse_int_list(cfg.model_head_hidden, "model.head_hidden");
  return oc;
}

inline std::string sdf_checkpoint_path(const RunConfig& cfg) {
  return cfg.train_sdf_checkpoint.empty() ? cfg.out_dir + "/sdf.eikm"
                                          : cfg.train_sdf_checkpoint;
}

inline SdfModel load_sdf_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ValidationError("stage-1 checkpoint not found at " + path +
                          "; run train-sdf first");
  return load_sdf_model(in);
}

inline ValueModel load_value_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("value checkpoint not found at " + path);
  return load_value_model(in);
}

// Builds the inference pipeline from checkpoint files. The ablation arch
// carries an inert stage-1 slot that is never evaluated.
inline PnoPipeline load_pipeline(const RunConfig& cfg,
                                 const std::string& value_path) {
  PnoPipeline p{SdfModel(OperatorConfig{}), load_value_checkpoint(value_path)};
  if (p.value.arch == ValueArch::kPno)
    p.sdf = load_sdf_checkpoint(sdf_checkpoint_path(cfg));
  return p;
}

inline TrainConfig train_config(const RunConfig& cfg) {
  TrainConfig tc;
  tc.epochs = cfg.train_epochs;
  tc.batch = cfg.train_batch;
  tc.lr = cfg.train_lr;
  tc.seed = cfg.seed;
  tc.shuffle = cfg.train_shuffle;
  tc.grad_check = cfg.train_grad_check;
  tc.grad_check_entries = cfg.train_grad_check_entries;
  return tc;
}

inline std::string loss_csv(const std::vector<std::pair<int, double>>& history) {
  std::string out = "epoch,mean_loss\n";
  for (const auto& [epoch, loss] : history)
    out += std::to_string(epoch) + "," + fmt(loss) + "\n";
  return out;
}

inline GoalSpec center_safe_cell(const OccupancyGrid& g) {
  const int ci = g.height / 2, cj = g.width / 2;
  for (int radius = 0; radius < g.height + g.width; ++radius)
    for (int i = std::max(0, ci - radius);
         i <= std::min(g.height - 1, ci + radius); ++i)
      for (int j = std::max(0, cj - radius);
           j <= std::min(g.width - 1, cj + radius); ++j)
        if (g.safe(i, j)) return {i, j};
  throw ValidationError("map has no safe cell");
}

inline Heuristic oracle_heuristic(const OccupancyGrid& g, const GoalSpec& goal) {
  auto field = std::make_shared<ScalarField>(dijkstra_value(g, goal));
  return {"oracle", [field](int r, int c) { return field->at(r, c); }};
}

// Mean masked relative L2 of value predictions over (map, goal) pairs.
// Shared verbatim by train-time validation and cmd_eval so the two report
// identical numbers at the training resolution.
inline double value_metric(const ValueModel& model,
                           const std::vector<ValueSample>& samples,
                           std::vector<double>* per_pair = nullptr) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const ValueSample& s : samples) {
    Tensor F;
    std::vector<double> chi;
    CField chi_hat;
    if (model.arch == ValueArch::kPno) {
      chi = smoothed_indicator(s.sdf, model.beta);
      chi_hat = rfft2(chi, s.grid.height, s.grid.width);
      F = value_features(model, pno_inputs(s.grid, s.sdf), &chi, &chi_hat);
    }
    for (std::size_t k = 0; k < s.goals.size(); ++k) {
      ScalarField pred =
          model.arch == ValueArch::kPno
              ? value_from_features(model, F, s.goals[k])
              : value_from_features(
                    model,
                    value_features(model, fno_inputs(s.grid, s.goals[k]),
                                   nullptr, nullptr),
                    s.goals[k]);
      const std::vector<double> mask = finite_safe_mask(s.grid, s.targets[k]);
      const double err =
          masked_rel_l2(pred.values, s.targets[k].values, mask);
      if (per_pair) per_pair->push_back(err);
      sum += err;
      ++n;
    }
  }
  if (n == 0) throw ValidationError("metric: no (map, goal) pairs");
  return sum / static_cast<double>(n);
}

inline double sdf_metric(const SdfModel& model,
                         const std::vector<SdfSample>& samples) {
  double sum = 0.0;
  for (const SdfSample& s : samples) {
    const std::vector<double> ones(s.target.values.size(), 1.0);
    sum += masked_rel_l2(sdf_forward(model, s.grid).values, s.target.values, ones);
  }
  if (samples.empty()) throw ValidationError("metric: no samples");
  return sum / static_cast<double>(samples.size());
}

}  // namespace cmddetail

inline void cmd_gen_data(const RunConfig& cfg) {
  cmddetail::emit_resolved(cfg, cfg.data_dir, "gen-data");
  const DatasetManifest m = gen_dataset(cfg);
  std::cout << "gen-data: " << m.entries.size() << " entries ("
            << m.base_maps << " base maps, " << m.goals_per_map
            << " goals each) under " << cfg.data_dir << "\n";
}

inline void cmd_train_sdf(const RunConfig& cfg) {
  cmddetail::emit_resolved(cfg, cfg.out_dir, "train-sdf");
  const DatasetManifest m = load_manifest(cfg.data_dir);
  const std::vector<SdfSample> train = load_sdf_dataset(cfg.data_dir, m, false);
  const std::vector<SdfSample> held = load_sdf_dataset(cfg.data_dir, m, true);

  SdfModel model(cmddetail::op_config(cfg));
  TrainConfig tc = cmddetail::train_config(cfg);
  AdamState adam;
  if (!cfg.train_resume.empty()) {
    std::ifstream in(cfg.train_resume, std::ios::binary);
    if (!in)
      throw ValidationError("resume checkpoint not found: " + cfg.train_resume);
    ResumeInfo r;
    model = load_sdf_train_state(in, r);
    adam = std::move(r.adam);
    tc.start_epoch = r.next_epoch;
  } else {
    model.init(SplitMix64::stream(cfg.seed, 101));
  }

  std::vector<std::pair<int, double>> history;
  tc.on_epoch = [&](int epoch, double loss) {
    history.emplace_back(epoch, loss);
    std::cout << "train-sdf: epoch " << epoch << " loss " << loss << "\n";
    if (cfg.train_checkpoint_every > 0 &&
        (epoch + 1) % cfg.train_checkpoint_every == 0) {
      char name[48];
      std::snprintf(name, sizeof name, "/sdf-epoch-%05d.eikm", epoch + 1);
      write_file(cfg.out_dir + name, [&](std::ostream& o) {
        save_train_state(o, model, adam, epoch + 1);
      });
    }
  };
  train_sdf(model, train, tc, &adam);

  write_file(cfg.out_dir + "/sdf.eikm",
             [&](std::ostream& o) { save_sdf_model(o, model); });
  cmddetail::write_text(cfg.out_dir + "/sdf-loss.csv",
                        cmddetail::loss_csv(history));
  if (!held.empty()) {
    const double val = cmddetail::sdf_metric(model, held);
    cmddetail::write_text(cfg.out_dir + "/sdf-val.txt",
                          "heldout_masked_rel_l2 " + cmddetail::fmt(val) +
                              "\nheldout_maps " + std::to_string(held.size()) +
                              "\n");
    std::cout << "train-sdf: heldout masked rel-L2 " << val << "\n";
  }
}

inline void cmd_train_pno(const RunConfig& cfg) {
  cmddetail::emit_resolved(cfg, cfg.out_dir, "train-pno");
  if (cfg.model_arch != "pno" && cfg.model_arch != "fno")
    throw ValidationError("model.arch must be pno or fno");
  const bool masked = cfg.model_arch == "pno";
  const TargetKind kind = target_kind_from_name(cfg.train_targets);
  const DatasetManifest m = load_manifest(cfg.data_dir);

  // stage 2 consumes stage-1 predictions; it cannot start without them
  SdfModel sdf(OperatorConfig{});
  if (masked) sdf = cmddetail::load_sdf_checkpoint(cmddetail::sdf_checkpoint_path(cfg));

  const int workers = cmddetail::effective_workers(cfg);
  const std::vector<ValueSample> train = load_value_dataset(
      cfg.data_dir, m, false, kind, masked ? &sdf : nullptr, workers);
  const std::vector<ValueSample> held = load_value_dataset(
      cfg.data_dir, m, true, kind, masked ? &sdf : nullptr, workers);

  ValueModel model(masked ? ValueArch::kPno : ValueArch::kFno,
                   cmddetail::op_config(cfg));
  TrainConfig tc = cmddetail::train_config(cfg);
  AdamState adam;
  if (!cfg.train_resume.empty()) {
    std::ifstream in(cfg.train_resume, std::ios::binary);
    if (!in)
      throw ValidationError("resume checkpoint not found: " + cfg.train_resume);
    ResumeInfo r;
    model = load_value_train_state(in, r);
    adam = std::move(r.adam);
    tc.start_epoch = r.next_epoch;
  } else {
    model.beta = cfg.model_beta;
    model.cell_size_train = train.empty() ? 0.0 : train.front().grid.cell_size;
    model.init(SplitMix64::stream(cfg.seed, 202));
  }

  const std::string stem = cfg.out_dir + "/" + cfg.model_arch;
  std::vector<std::pair<int, double>> history;
  tc.on_epoch = [&](int epoch, double loss) {
    history.emplace_back(epoch, loss);
    std::cout << "train-" << cfg.model_arch << ": epoch " << epoch << " loss "
              << loss << "\n";
    if (cfg.train_checkpoint_every > 0 &&
        (epoch + 1) % cfg.train_checkpoint_every == 0) {
      char name[48];
      std::snprintf(name, sizeof name, "-epoch-%05d.eikm", epoch + 1);
      write_file(stem + name, [&](std::ostream& o) {
        save_train_state(o, model, adam, epoch + 1);
      });
    }
  };
  train_value(model, train, tc, &adam);

  write_file(stem + ".eikm",
             [&](std::ostream& o) { save_value_model(o, model); });
  cmddetail::write_text(stem + "-loss.csv", cmddetail::loss_csv(history));
  if (!held.empty()) {
    const double val = cmddetail::value_metric(model, held);
    cmddetail::write_text(stem + "-val.txt",
                          "heldout_masked_rel_l2 " + cmddetail::fmt(val) +
                              "\nheldout_maps " + std::to_string(held.size()) +
                              "\n");
    std::cout << "train-" << cfg.model_arch << ": heldout masked rel-L2 "
              << val << "\n";
  }
}

inline void cmd_eval(const RunConfig& cfg) {
  cmddetail::emit_resolved(cfg, cfg.out_dir, "eval");
  const DatasetManifest m = load_manifest(cfg.data_dir);
  const TargetKind kind = target_kind_from_name(cfg.train_targets);

  const std::string value_path = cfg.eval_checkpoint.empty()
                                     ? cfg.out_dir + "/" + cfg.model_arch + ".eikm"
                                     : cfg.eval_checkpoint;
  const PnoPipeline pipe = cmddetail::load_pipeline(cfg, value_path);
  const bool masked = pipe.value.arch == ValueArch::kPno;

  // held-out base maps only; eroded augmentation variants are training food
  std::vector<const DatasetEntry*> held;
  for (const DatasetEntry& e : m.entries)
    if (e.heldout && e.erosion == 0) held.push_back(&e);
  if (held.empty()) throw ValidationError("eval: dataset has no held-out maps");

  const std::vector<int> mults =
      parse_int_list(cfg.eval_resolutions, "eval.resolutions");

  std::string rows = "mult,entry,goal,rel_l2\n";
  std::string summary = "mult,pairs,mean_rel_l2\n";
  for (const int mult : mults) {
    if (mult < 1) throw ValidationError("eval: resolution multiplier must be >= 1");
    // per-entry samples computed in parallel, reduced in index order
    std::vector<ValueSample> samples(held.size());
    parallel_for(
        static_cast<int>(held.size()), cmddetail::effective_workers(cfg),
        [&](int i) {
          const DatasetEntry& e = *held[static_cast<std::size_t>(i)];
          ValueSample s;
          const OccupancyGrid base =
              load_grid(dataset_grid_path(cfg.data_dir, e.index));
          s.grid = block_upsample(base, mult);
          if (kind == TargetKind::kDijkstra && !m.heuristic_targets)
            throw ValidationError(
                "eval: dataset was generated without heuristic targets");
          for (std::size_t gi = 0; gi < e.goals.size(); ++gi) {
            const GoalSpec g = scale_goal(e.goals[gi], mult);
            s.goals.push_back(g);
            if (mult == 1) {
              // the dataset resolution is scored against the stored target
              // files, the exact fields the training run validated on
              const int gk = static_cast<int>(gi);
              s.targets.push_back(
                  load_field(kind == TargetKind::kFmm
                                 ? dataset_value_path(cfg.data_dir, e.index, gk)
                                 : dataset_dij_path(cfg.data_dir, e.index, gk),
                             FieldKind::kValue));
            } else {
              s.targets.push_back(kind == TargetKind::kFmm
                                      ? fmm_value(s.grid, g)
                                      : dijkstra_value(s.grid, g));
            }
          }
          if (masked) s.sdf = sdf_forward(pipe.sdf, s.grid);
          samples[static_cast<std::size_t>(i)] = std::move(s);
        });

    std::vector<double> per_pair;
    const double mean = cmddetail::value_metric(pipe.value, samples, &per_pair);
    std::size_t cursor = 0;
    for (const DatasetEntry* e : held)
      for (std::size_t k = 0; k < e->goals.size(); ++k)
        rows += std::to_string(mult) + "," + std::to_string(e->index) + "," +
                std::to_string(k) + "," + cmddetail::fmt(per_pair[cursor++]) +
                "\n";
    summary += std::to_string(mult) + "," + std::to_string(per_pair.size()) +
               "," + cmddetail::fmt(mean) + "\n";
    std::cout << "eval: " << mult << "x mean masked rel-L2 " << mean << "\n";

    if (cfg.eval_images && mult == 1) {
      const DatasetEntry& e = *held.front();
      const ValueSample& s = samples.front();
      ScalarField pred = pipeline_value(pipe, s.grid, s.goals.front());
      save_pgm(cfg.out_dir + "/value-pred-" + std::to_string(e.index) + ".pgm",
               pred);
      save_pgm(cfg.out_dir + "/value-oracle-" + std::to_string(e.index) + ".pgm",
               s.targets.front());
    }
  }
  cmddetail::write_text(cfg.out_dir + "/eval.csv", rows);
  cmddetail::write_text(cfg.out_dir + "/eval-summary.csv", summary);

  if (!cfg.eval_movingai_dir.empty()) {
    std::vector<std::string> files;
    for (const auto& entry :
         std::filesystem::directory_iterator(cfg.eval_movingai_dir))
      if (entry.path().extension() == ".map") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw ValidationError("eval: no .map files in " + cfg.eval_movingai_dir);
    std::string ood = "file,rel_l2\n";
    double sum = 0.0;
    for (const std::string& path : files) {
      std::ifstream in(path);
      if (!in) throw ValidationError("eval: cannot open " + path);
      ValueSample s;
      s.grid = load_movingai(in);
      const GoalSpec goal = cmddetail::center_safe_cell(s.grid);
      s.goals.push_back(goal);
      s.targets.push_back(kind == TargetKind::kFmm ? fmm_value(s.grid, goal)
                                                   : dijkstra_value(s.grid, goal));
      if (masked) s.sdf = sdf_forward(pipe.sdf, s.grid);
      const double err = cmddetail::value_metric(pipe.value, {s});
      ood += std::filesystem::path(path).filename().string() + "," +
             cmddetail::fmt(err) + "\n";
      sum += err;
    }
    ood += "mean," + cmddetail::fmt(sum / static_cast<double>(files.size())) + "\n";
    cmddetail::write_text(cfg.out_dir + "/eval-movingai.csv", ood);
  }
}

namespace cmddetail {

struct BenchRow {
  std::string method;
  bool success = false;
  long long nodes = 0;
  double length = 0.0;
  double eps = 0.0;  // valid only when success
  double wall = 0.0;
};

struct BenchInstance {
  int size = 0;
  int map_ordinal = 0;   // within its size class
  int pair_ordinal = 0;
  std::size_t grid_slot = 0;
  GoalSpec start, goal;
  double opt = 0.0;           // lattice-optimal cost for this pair
  std::uint64_t rrt_seed = 0;
};

inline BenchRow run_bench_method(const std::string& method,
                                 const OccupancyGrid& grid,
                                 const BenchInstance& inst,
                                 const PnoPipeline* pipe, const RunConfig& cfg) {
  BenchRow row;
  row.method = method;
  PlanStats stats;
  Path path;
  if (method == "astar-euclid") {
    path = astar(grid, inst.start, inst.goal,
                 euclidean_heuristic(grid, inst.goal), stats);
  } else if (method == "astar-zero") {
    path = astar(grid, inst.start, inst.goal, zero_heuristic(), stats);
  } else if (method == "astar-pno" || method == "astar-pno-eroded") {
    if (!pipe) throw ValidationError("bench: method " + method + " needs a checkpoint");
    const int layers =
        method == "astar-pno"
            ? 0
            : (cfg.bench_erosion_layers < 0 ? default_erosion_layers(grid.height)
                                            : cfg.bench_erosion_layers);
    path = astar(grid, inst.start, inst.goal,
                 make_pno_heuristic(*pipe, grid, inst.goal, layers), stats);
  } else if (method == "rrt" || method == "rrt-star") {
    RrtParams prm;
    prm.max_samples = cfg.bench_rrt_samples;
    prm.seed = inst.rrt_seed;
    path = method == "rrt" ? rrt(grid, inst.start, inst.goal, prm, stats)
                           : rrt_star(grid, inst.start, inst.goal, prm, stats);
  } else {
    throw ValidationError("bench: unknown method '" + method + "'");
  }
  row.success = stats.success;
  row.nodes = stats.nodes_expanded;
  row.length = path.length;
  row.wall = stats.wall_time;
  if (stats.success) row.eps = path.length / inst.opt;
  return row;
}

}  // namespace cmddetail

inline void cmd_bench(const RunConfig& cfg) {
  cmddetail::emit_resolved(cfg, cfg.out_dir, "bench");
  const std::vector<int> sizes = parse_int_list(cfg.bench_map_sizes, "bench.map_sizes");
  const std::vector<std::string> methods = parse_name_list(cfg.bench_methods);
  if (methods.empty()) throw ValidationError("bench: no methods configured");

  bool needs_model = !cfg.bench_sweep_layers.empty();
  for (const std::string& m : methods)
    needs_model |= m == "astar-pno" || m == "astar-pno-eroded";
  PnoPipeline pipe{SdfModel(OperatorConfig{}), ValueModel()};
  if (needs_model) {
    const std::string path = cfg.bench_checkpoint.empty()
                                 ? cfg.out_dir + "/pno.eikm"
                                 : cfg.bench_checkpoint;
    pipe = cmddetail::load_pipeline(cfg, path);
  }

  // map pool: obstacle sizes scale with resolution so physical obstacle
  // geometry matches the training distribution
  std::vector<OccupancyGrid> grids;
  std::vector<cmddetail::BenchInstance> instances;
  std::uint64_t ordinal = 0;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const int size = sizes[si];
    if (size < 8) throw ValidationError("bench: map size too small");
    const double scale =
        static_cast<double>(size) / static_cast<double>(cfg.dataset_height);
    RandomMapParams prm;
    prm.count_min = cfg.dataset_obstacle_count_min;
    prm.count_max = cfg.dataset_obstacle_count_max;
    prm.size_min = std::max(1, static_cast<int>(std::lround(
                                   cfg.dataset_obstacle_size_min * scale)));
    prm.size_max = std::max(prm.size_min,
                            static_cast<int>(std::lround(
                                cfg.dataset_obstacle_size_max * scale)));
    for (int j = 0; j < cfg.bench_maps_per_size; ++j) {
      const std::uint64_t map_seed =
          SplitMix64::stream(cfg.seed, 40000 + 100 * si + static_cast<std::uint64_t>(j));
      grids.push_back(generate_random_map(map_seed, size, size, prm));
      const OccupancyGrid& g = grids.back();
      SplitMix64 rng(SplitMix64::stream(
          cfg.seed, 50000 + 100 * si + static_cast<std::uint64_t>(j)));
      for (int p = 0; p < cfg.bench_pairs_per_map; ++p) {
        cmddetail::BenchInstance inst;
        inst.size = size;
        inst.map_ordinal = j;
        inst.pair_ordinal = p;
        inst.grid_slot = grids.size() - 1;
        inst.rrt_seed = SplitMix64::stream(cfg.seed, 90000 + ordinal);
        ++ordinal;
        // long reachable pairs make heuristic quality visible; fall back to
        // any reachable pair if the map is too fragmented
        bool found = false;
        for (int attempt = 0; attempt < 200 && !found; ++attempt) {
          const GoalSpec s{static_cast<int>(rng.uniform_int(0, g.height - 1)),
                           static_cast<int>(rng.uniform_int(0, g.width - 1))};
          const GoalSpec t{static_cast<int>(rng.uniform_int(0, g.height - 1)),
                           static_cast<int>(rng.uniform_int(0, g.width - 1))};
          if (!g.safe(s.row, s.col) || !g.safe(t.row, t.col)) continue;
          if (s.row == t.row && s.col == t.col) continue;
          const double opt = dijkstra_value(g, t).at(s.row, s.col);
          if (!std::isfinite(opt)) continue;
          if (opt < 0.3 && attempt < 150) continue;
          inst.start = s;
          inst.goal = t;
          inst.opt = opt;
          found = true;
        }
        if (found) instances.push_back(inst);
      }
    }
  }
  if (instances.empty()) throw ValidationError("bench: no usable instances");

  const int workers = cmddetail::effective_workers(cfg);
  std::vector<std::vector<cmddetail::BenchRow>> rows(instances.size());
  parallel_for(static_cast<int>(instances.size()), workers, [&](int i) {
    const cmddetail::BenchInstance& inst = instances[static_cast<std::size_t>(i)];
    for (const std::string& method : methods)
      rows[static_cast<std::size_t>(i)].push_back(cmddetail::run_bench_method(
          method, grids[inst.grid_slot], inst, needs_model ? &pipe : nullptr, cfg));
  });

  std::string csv = "size,map,pair,method,success,nodes,length,eps\n";
  std::string times = "size,map,pair,method,wall_time\n";
  std::map<std::string, std::vector<const cmddetail::BenchRow*>> by_method;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const cmddetail::BenchInstance& inst = instances[i];
    const std::string prefix = std::to_string(inst.size) + "," +
                               std::to_string(inst.map_ordinal) + "," +
                               std::to_string(inst.pair_ordinal) + ",";
    for (const cmddetail::BenchRow& r : rows[i]) {
      csv += prefix + r.method + "," + (r.success ? "1" : "0") + "," +
             std::to_string(r.nodes) + "," + cmddetail::fmt(r.length) + "," +
             (r.success ? cmddetail::fmt(r.eps) : std::string()) + "\n";
      times += prefix + r.method + "," + cmddetail::fmt(r.wall) + "\n";
      by_method[r.method].push_back(&r);
    }
  }
  std::string summary =
      "method,instances,successes,mean_nodes,mean_length,mean_eps\n";
  for (const std::string& method : methods) {
    const auto& list = by_method[method];
    long long succ = 0;
    double nodes = 0, length = 0, eps = 0;
    for (const cmddetail::BenchRow* r : list) {
      if (!r->success) continue;
      ++succ;
      nodes += static_cast<double>(r->nodes);
      length += r->length;
      eps += r->eps;
    }
    const double d = succ > 0 ? static_cast<double>(succ) : 1.0;
    summary += method + "," + std::to_string(list.size()) + "," +
               std::to_string(succ) + "," + cmddetail::fmt(nodes / d) + "," +
               cmddetail::fmt(length / d) + "," + cmddetail::fmt(eps / d) + "\n";
  }
  cmddetail::write_text(cfg.out_dir + "/bench.csv", csv);
  cmddetail::write_text(cfg.out_dir + "/bench-times.csv", times);
  cmddetail::write_text(cfg.out_dir + "/bench-summary.csv", summary);
  std::cout << "bench: " << instances.size() << " instances, "
            << methods.size() << " methods\n";

  if (!cfg.bench_sweep_layers.empty()) {
    const std::vector<int> sweep =
        parse_int_list(cfg.bench_sweep_layers, "bench.sweep_layers");
    std::vector<std::vector<cmddetail::BenchRow>> sweep_rows(instances.size());
    parallel_for(static_cast<int>(instances.size()), workers, [&](int i) {
      const cmddetail::BenchInstance& inst =
          instances[static_cast<std::size_t>(i)];
      const OccupancyGrid& g = grids[inst.grid_slot];
      for (const int layers : sweep) {
        PlanStats stats;
        Path path = astar(g, inst.start, inst.goal,
                          make_pno_heuristic(pipe, g, inst.goal, layers), stats);
        cmddetail::BenchRow r;
        r.success = stats.success;
        r.nodes = stats.nodes_expanded;
        r.eps = stats.success ? path.length / inst.opt : 0.0;
        sweep_rows[static_cast<std::size_t>(i)].push_back(r);
      }
    });
    std::string sweep_csv = "layers,instances,mean_eps,mean_nodes\n";
    for (std::size_t li = 0; li < sweep.size(); ++li) {
      double eps = 0, nodes = 0;
      long long count = 0;
      for (std::size_t i = 0; i < instances.size(); ++i) {
        const cmddetail::BenchRow& r = sweep_rows[i][li];
        if (!r.success) continue;
        ++count;
        eps += r.eps;
        nodes += static_cast<double>(r.nodes);
      }
      const double d = count > 0 ? static_cast<double>(count) : 1.0;
      sweep_csv += std::to_string(sweep[li]) + "," + std::to_string(count) +
                   "," + cmddetail::fmt(eps / d) + "," +
                   cmddetail::fmt(nodes / d) + "\n";
    }
    cmddetail::write_text(cfg.out_dir + "/bench-sweep.csv", sweep_csv);
  }
}

inline void cmd_plan(const RunConfig& cfg) {
  cmddetail::emit_resolved(cfg, cfg.out_dir, "plan");
  if (cfg.plan_map.empty()) throw ValidationError("plan: plan.map is required");
  OccupancyGrid grid;
  if (cfg.plan_map.size() > 4 &&
      cfg.plan_map.substr(cfg.plan_map.size() - 4) == ".map") {
    std::ifstream in(cfg.plan_map);
    if (!in) throw ValidationError("plan: cannot open " + cfg.plan_map);
    grid = load_movingai(in);
  } else {
    grid = load_grid(cfg.plan_map);
  }
  const GoalSpec start{cfg.plan_start_row, cfg.plan_start_col};
  const GoalSpec goal{cfg.plan_goal_row, cfg.plan_goal_col};
  validate_goal(grid, start);
  validate_goal(grid, goal);

  const auto needs_pipe = [&](const std::string& m) {
    return m == "astar-pno" || m == "astar-pno-eroded" || m == "descent-pno";
  };
  PnoPipeline pipe{SdfModel(OperatorConfig{}), ValueModel()};
  if (needs_pipe(cfg.plan_method)) {
    const std::string path = cfg.plan_checkpoint.empty()
                                 ? cfg.out_dir + "/pno.eikm"
                                 : cfg.plan_checkpoint;
    pipe = cmddetail::load_pipeline(cfg, path);
  }

  PlanStats stats;
  Path path;
  const std::string& method = cfg.plan_method;
  if (method == "astar-euclid") {
    path = astar(grid, start, goal, euclidean_heuristic(grid, goal), stats);
  } else if (method == "astar-zero") {
    path = astar(grid, start, goal, zero_heuristic(), stats);
  } else if (method == "astar-pno" || method == "astar-pno-eroded") {
    const int layers =
        method == "astar-pno"
            ? 0
            : (cfg.plan_erosion_layers < 0 ? default_erosion_layers(grid.height)
                                           : cfg.plan_erosion_layers);
    path = astar(grid, start, goal, make_pno_heuristic(pipe, grid, goal, layers),
                 stats);
  } else if (method == "descent-fmm" || method == "descent-pno") {
    const ScalarField field = method == "descent-fmm"
                                  ? fmm_value(grid, goal)
                                  : pipeline_value(pipe, grid, goal);
    path = gradient_descent_plan(field, cell_center(grid, start.row, start.col),
                                 cfg.plan_step * grid.cell_size,
                                 cfg.plan_max_iters, stats);
  } else if (method == "rrt" || method == "rrt-star") {
    RrtParams prm;
    prm.max_samples = cfg.bench_rrt_samples;
    prm.seed = cfg.seed;
    path = method == "rrt" ? rrt(grid, start, goal, prm, stats)
                           : rrt_star(grid, start, goal, prm, stats);
  } else {
    throw ValidationError("plan: unknown method '" + method + "'");
  }

  std::string waypoints = "x,y\n";
  for (const Point& p : path.waypoints)
    waypoints += cmddetail::fmt(p.x) + "," + cmddetail::fmt(p.y) + "\n";
  cmddetail::write_text(cfg.out_dir + "/plan-path.csv", waypoints);

  std::string eps_text = "n/a";
  if (stats.success) {
    if (start.row == goal.row && start.col == goal.col) {
      eps_text = cmddetail::fmt(1.0);
    } else {
      const double opt = dijkstra_value(grid, goal).at(start.row, start.col);
      if (std::isfinite(opt) && opt > 0.0)
        eps_text = cmddetail::fmt(path.length / opt);
    }
  }
  std::ostringstream report;
  report << "method " << method << "\n"
         << "success " << (stats.success ? 1 : 0) << "\n"
         << "failure_reason " << (stats.failure_reason.empty() ? "none" : stats.failure_reason)
         << "\n"
         << "path_length " << cmddetail::fmt(path.length) << "\n"
         << "nodes_expanded " << stats.nodes_expanded << "\n"
         << "epsilon_estimate " << eps_text << "\n"
         << "wall_time " << cmddetail::fmt(stats.wall_time) << "\n";
  cmddetail::write_text(cfg.out_dir + "/plan-stats.txt", report.str());
  std::cout << "plan: " << method << (stats.success ? " succeeded" : " failed")
            << ", length " << path.length << "\n";
}

inline void cmd_check_consistency(const RunConfig& cfg) {
  cmddetail::emit_resolved(cfg, cfg.out_dir, "check-consistency");
  const DatasetManifest m = load_manifest(cfg.data_dir);
  const std::string value_path = cfg.consistency_checkpoint.empty()
                                     ? cfg.out_dir + "/pno.eikm"
                                     : cfg.consistency_checkpoint;
  const PnoPipeline pipe = cmddetail::load_pipeline(cfg, value_path);
  const std::vector<int> layers =
      parse_int_list(cfg.consistency_layers, "consistency.layers");

  std::vector<const DatasetEntry*> picks;
  for (const DatasetEntry& e : m.entries)
    if (e.heldout && e.erosion == 0) picks.push_back(&e);
  if (picks.empty())
    for (const DatasetEntry& e : m.entries)
      if (e.erosion == 0) picks.push_back(&e);
  if (static_cast<int>(picks.size()) > cfg.consistency_maps)
    picks.resize(static_cast<std::size_t>(cfg.consistency_maps));
  if (picks.empty()) throw ValidationError("consistency: no maps available");

  std::string csv = "map,label," + consistency_csv_header().substr(6) + "\n";
  std::ostringstream text;
  int bound_failures = 0;
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const DatasetEntry& e = *picks[i];
    const OccupancyGrid grid = load_grid(dataset_grid_path(cfg.data_dir, e.index));
    const GoalSpec goal = e.goals.front();
    const std::uint64_t seed = SplitMix64::stream(cfg.seed, 7000 + i);

    const ErosionConsistency sweep = compare_erosion_consistency(
        pipe, grid, goal, layers, cfg.consistency_pairs, seed);
    for (std::size_t li = 0; li < layers.size(); ++li) {
      const std::string label = "pno-erosion-" + std::to_string(layers[li]);
      const ConsistencyReport& rep = sweep.reports[li];
      csv += std::to_string(e.index) + "," + consistency_csv_row(label, rep) + "\n";
      text << "map " << e.index << " " << consistency_summary(label, rep) << "\n";
      if (!rep.bound_satisfied) ++bound_failures;
    }
    const ConsistencyReport oracle_rep = measure_epsilon_consistency(
        cmddetail::oracle_heuristic(grid, goal), grid, goal,
        cfg.consistency_pairs, seed);
    csv += std::to_string(e.index) + "," +
           consistency_csv_row("oracle", oracle_rep) + "\n";
    text << "map " << e.index << " " << consistency_summary("oracle", oracle_rep)
         << "\n";
    if (!oracle_rep.bound_satisfied) ++bound_failures;
  }

  const OccupancyGrid first =
      load_grid(dataset_grid_path(cfg.data_dir, picks.front()->index));
  const TriangleReport tri = check_triangle(
      pipe, first, cfg.consistency_triples, SplitMix64::stream(cfg.seed, 9999));
  text << "triangle: " << tri.violations << " violations over " << tri.samples
       << " triples, worst margin " << tri.max_violation << "\n";
  text << "bound_failures " << bound_failures << "\n";
  csv += "all,triangle," + std::to_string(tri.violations) + "," +
         cmddetail::fmt(tri.max_violation) + "," +
         std::to_string(tri.samples) + ",,,,,\n";

  cmddetail::write_text(cfg.out_dir + "/consistency.csv", csv);
  cmddetail::write_text(cfg.out_dir + "/consistency-summary.txt", text.str());
  std::cout << "check-consistency: " << picks.size() << " maps, "
            << bound_failures << " bound failures, " << tri.violations
            << " triangle violations\n";
}

}  // namespace pno

#endif  // PNO_COMMANDS_HPP
