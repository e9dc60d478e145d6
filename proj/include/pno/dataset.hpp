#ifndef PNO_DATASET_HPP
#define PNO_DATASET_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pno/config.hpp"
#include "pno/eikonal.hpp"
#include "pno/io.hpp"
#include "pno/parallel.hpp"
#include "pno/train.hpp"

namespace pno {

// One stored map with its goals and target fields. Eroded augmentation
// variants are separate entries pointing back at their base map; they always
// inherit the base map's train/test split so no test geometry leaks into
// training in diluted form.
struct DatasetEntry {
  int index = 0;
  int base_map = 0;
  std::uint64_t map_seed = 0;
  int erosion = 0;  // layers applied on top of the base map; 0 = base
  bool heldout = false;
  std::vector<GoalSpec> goals;
};

struct DatasetManifest {
  int height = 0;
  int width = 0;
  int base_maps = 0;
  int goals_per_map = 0;
  int heldout = 0;
  bool heuristic_targets = false;
  std::vector<DatasetEntry> entries;
};

namespace datadetail {

inline std::string entry_stem(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "map_%05d", index);
  return buf;
}

}  // namespace datadetail

inline std::string dataset_grid_path(const std::string& dir, int index) {
  return dir + "/" + datadetail::entry_stem(index) + ".grid.eikf";
}
inline std::string dataset_sdf_path(const std::string& dir, int index) {
  return dir + "/" + datadetail::entry_stem(index) + ".sdf.eikf";
}
inline std::string dataset_value_path(const std::string& dir, int index,
                                      int goal) {
  return dir + "/" + datadetail::entry_stem(index) + ".g" +
         std::to_string(goal) + ".value.eikf";
}
inline std::string dataset_dij_path(const std::string& dir, int index,
                                    int goal) {
  return dir + "/" + datadetail::entry_stem(index) + ".g" +
         std::to_string(goal) + ".dij.eikf";
}
inline std::string dataset_manifest_path(const std::string& dir) {
  return dir + "/manifest.txt";
}

inline void write_manifest(std::ostream& out, const DatasetManifest& m) {
  out << "eikd 1\n";
  out << "height " << m.height << "\n";
  out << "width " << m.width << "\n";
  out << "base_maps " << m.base_maps << "\n";
  out << "goals_per_map " << m.goals_per_map << "\n";
  out << "heldout " << m.heldout << "\n";
  out << "heuristic_targets " << (m.heuristic_targets ? 1 : 0) << "\n";
  out << "entries " << m.entries.size() << "\n";
  for (const DatasetEntry& e : m.entries) {
    out << "entry " << e.index << " base " << e.base_map << " seed "
        << e.map_seed << " erosion " << e.erosion << " split "
        << (e.heldout ? "test" : "train") << " goals ";
    for (std::size_t k = 0; k < e.goals.size(); ++k) {
      if (k) out << ',';
      out << e.goals[k].row << ':' << e.goals[k].col;
    }
    out << "\n";
  }
}

inline DatasetManifest read_manifest(std::istream& in) {
  DatasetManifest m;
  std::string word;
  int version = 0;
  std::size_t count = 0;
  auto expect = [&](const char* key) {
    if (!(in >> word) || word != key)
      throw ValidationError(std::string("manifest: expected '") + key + "'");
  };
  expect("eikd");
  in >> version;
  if (version != 1) throw ValidationError("manifest: unsupported version");
  expect("height");
  in >> m.height;
  expect("width");
  in >> m.width;
  expect("base_maps");
  in >> m.base_maps;
  expect("goals_per_map");
  in >> m.goals_per_map;
  expect("heldout");
  in >> m.heldout;
  expect("heuristic_targets");
  int flag = 0;
  in >> flag;
  m.heuristic_targets = flag != 0;
  expect("entries");
  in >> count;
  if (!in) throw ValidationError("manifest: truncated header");
  m.entries.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    DatasetEntry& e = m.entries[i];
    expect("entry");
    in >> e.index;
    expect("base");
    in >> e.base_map;
    expect("seed");
    in >> e.map_seed;
    expect("erosion");
    in >> e.erosion;
    expect("split");
    in >> word;
    if (word != "train" && word != "test")
      throw ValidationError("manifest: bad split '" + word + "'");
    e.heldout = word == "test";
    expect("goals");
    in >> word;
    std::istringstream goals(word);
    std::string tok;
    while (std::getline(goals, tok, ',')) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos)
        throw ValidationError("manifest: bad goal '" + tok + "'");
      e.goals.push_back(
          {std::stoi(tok.substr(0, colon)), std::stoi(tok.substr(colon + 1))});
    }
    if (!in || e.goals.empty())
      throw ValidationError("manifest: truncated entry " + std::to_string(i));
  }
  return m;
}

inline DatasetManifest load_manifest(const std::string& dir) {
  std::ifstream in(dataset_manifest_path(dir));
  if (!in) throw ValidationError("manifest: cannot open " + dataset_manifest_path(dir));
  return read_manifest(in);
}

// Generates the synthetic corpus: random maps, per-map goals, SDF and value
// targets, optional lattice cost-to-go targets and eroded variants. Returns
// the manifest it wrote. Field computation parallelizes across entries; files
// are written sequentially in index order so output bytes do not depend on
// the worker count.
inline DatasetManifest gen_dataset(const RunConfig& cfg) {
  if (cfg.dataset_maps <= 0) throw ValidationError("dataset: maps must be positive");
  if (cfg.dataset_goals <= 0) throw ValidationError("dataset: goals must be positive");
  if (cfg.dataset_heldout < 0 || cfg.dataset_heldout >= cfg.dataset_maps)
    throw ValidationError("dataset: heldout must be in [0, maps)");
  if (cfg.dataset_erosion_min < 0 ||
      cfg.dataset_erosion_max < cfg.dataset_erosion_min)
    throw ValidationError("dataset: bad erosion range");

  RandomMapParams prm;
  prm.count_min = cfg.dataset_obstacle_count_min;
  prm.count_max = cfg.dataset_obstacle_count_max;
  prm.size_min = cfg.dataset_obstacle_size_min;
  prm.size_max = cfg.dataset_obstacle_size_max;

  DatasetManifest m;
  m.height = cfg.dataset_height;
  m.width = cfg.dataset_width;
  m.base_maps = cfg.dataset_maps;
  m.goals_per_map = cfg.dataset_goals;
  m.heldout = cfg.dataset_heldout;
  m.heuristic_targets = cfg.dataset_heuristic_targets;

  const bool eroded_variants = cfg.dataset_erosion_max > 0;
  const int n_base = cfg.dataset_maps;
  const int n_total = eroded_variants ? 2 * n_base : n_base;

  std::vector<OccupancyGrid> grids(static_cast<std::size_t>(n_total));
  m.entries.resize(static_cast<std::size_t>(n_total));
  for (int i = 0; i < n_base; ++i) {
    DatasetEntry& e = m.entries[static_cast<std::size_t>(i)];
    e.index = i;
    e.base_map = i;
    e.map_seed = SplitMix64::stream(cfg.seed, static_cast<std::uint64_t>(2 * i));
    e.erosion = 0;
    e.heldout = i >= n_base - cfg.dataset_heldout;
    grids[static_cast<std::size_t>(i)] = generate_random_map(
        e.map_seed, cfg.dataset_height, cfg.dataset_width, prm);

    // distinct safe goal cells for this map
    SplitMix64 rng(
        SplitMix64::stream(cfg.seed, static_cast<std::uint64_t>(2 * i + 1)));
    const OccupancyGrid& g = grids[static_cast<std::size_t>(i)];
    while (static_cast<int>(e.goals.size()) < cfg.dataset_goals) {
      const GoalSpec cand{
          static_cast<int>(rng.uniform_int(0, g.height - 1)),
          static_cast<int>(rng.uniform_int(0, g.width - 1))};
      if (!g.safe(cand.row, cand.col)) continue;
      bool dup = false;
      for (const GoalSpec& prev : e.goals)
        dup |= prev.row == cand.row && prev.col == cand.col;
      if (!dup) e.goals.push_back(cand);
    }
  }
  if (eroded_variants) {
    for (int i = 0; i < n_base; ++i) {
      const DatasetEntry& base = m.entries[static_cast<std::size_t>(i)];
      DatasetEntry& e = m.entries[static_cast<std::size_t>(n_base + i)];
      SplitMix64 rng(SplitMix64::stream(
          cfg.seed, static_cast<std::uint64_t>(2 * n_base + i)));
      e.index = n_base + i;
      e.base_map = i;
      e.map_seed = base.map_seed;
      e.erosion = static_cast<int>(
          rng.uniform_int(std::max(1, cfg.dataset_erosion_min),
                          cfg.dataset_erosion_max));
      e.heldout = base.heldout;
      e.goals = base.goals;  // erosion only grows the safe set
      grids[static_cast<std::size_t>(e.index)] =
          erode(grids[static_cast<std::size_t>(i)], e.erosion);
    }
  }

  std::filesystem::create_directories(cfg.data_dir);

  struct EntryFields {
    ScalarField sdf;
    std::vector<ScalarField> values;
    std::vector<ScalarField> dij;
  };
  std::vector<EntryFields> fields(static_cast<std::size_t>(n_total));
  parallel_for(n_total, cfg.deterministic ? 1 : cfg.workers, [&](int i) {
    const OccupancyGrid& g = grids[static_cast<std::size_t>(i)];
    const DatasetEntry& e = m.entries[static_cast<std::size_t>(i)];
    EntryFields& f = fields[static_cast<std::size_t>(i)];
    f.sdf = fmm_sdf(g);
    for (const GoalSpec& goal : e.goals) {
      f.values.push_back(fmm_value(g, goal));
      if (cfg.dataset_heuristic_targets) f.dij.push_back(dijkstra_value(g, goal));
    }
  });

  for (int i = 0; i < n_total; ++i) {
    const DatasetEntry& e = m.entries[static_cast<std::size_t>(i)];
    const EntryFields& f = fields[static_cast<std::size_t>(i)];
    save_grid(dataset_grid_path(cfg.data_dir, e.index),
              grids[static_cast<std::size_t>(i)]);
    save_field(dataset_sdf_path(cfg.data_dir, e.index), f.sdf);
    for (std::size_t k = 0; k < e.goals.size(); ++k) {
      save_field(dataset_value_path(cfg.data_dir, e.index, static_cast<int>(k)),
                 f.values[k]);
      if (cfg.dataset_heuristic_targets)
        save_field(dataset_dij_path(cfg.data_dir, e.index, static_cast<int>(k)),
                   f.dij[k]);
    }
  }
  write_file(dataset_manifest_path(cfg.data_dir),
             [&](std::ostream& o) { write_manifest(o, m); });
  return m;
}

enum class TargetKind { kFmm, kDijkstra };

inline TargetKind target_kind_from_name(const std::string& s) {
  if (s == "fmm") return TargetKind::kFmm;
  if (s == "dijkstra") return TargetKind::kDijkstra;
  throw ValidationError("unknown target kind '" + s + "' (fmm|dijkstra)");
}

inline std::vector<SdfSample> load_sdf_dataset(const std::string& dir,
                                               const DatasetManifest& m,
                                               bool heldout) {
  std::vector<SdfSample> out;
  for (const DatasetEntry& e : m.entries) {
    if (e.heldout != heldout) continue;
    SdfSample s;
    s.grid = load_grid(dataset_grid_path(dir, e.index));
    s.target = load_field(dataset_sdf_path(dir, e.index), FieldKind::kSdf);
    out.push_back(std::move(s));
  }
  return out;
}

// Value samples for stage-2 training. For the masked architecture the input
// SDF channel comes from the frozen stage-1 model (matching inference), so a
// stage-1 model is required; the ablation ignores it.
inline std::vector<ValueSample> load_value_dataset(const std::string& dir,
                                                   const DatasetManifest& m,
                                                   bool heldout,
                                                   TargetKind targets,
                                                   const SdfModel* stage1,
                                                   int workers = 1) {
  if (targets == TargetKind::kDijkstra && !m.heuristic_targets)
    throw ValidationError(
        "dataset was generated without lattice cost-to-go targets");
  std::vector<ValueSample> out;
  for (const DatasetEntry& e : m.entries) {
    if (e.heldout != heldout) continue;
    ValueSample s;
    s.grid = load_grid(dataset_grid_path(dir, e.index));
    s.goals = e.goals;
    for (std::size_t k = 0; k < e.goals.size(); ++k) {
      const std::string path =
          targets == TargetKind::kFmm
              ? dataset_value_path(dir, e.index, static_cast<int>(k))
              : dataset_dij_path(dir, e.index, static_cast<int>(k));
      s.targets.push_back(load_field(path, FieldKind::kValue));
    }
    out.push_back(std::move(s));
  }
  if (stage1) {
    parallel_for(static_cast<int>(out.size()), workers, [&](int i) {
      out[static_cast<std::size_t>(i)].sdf =
          sdf_forward(*stage1, out[static_cast<std::size_t>(i)].grid);
    });
  }
  return out;
}

// Super-resolution evaluation input: each cell becomes a k x k block. The
// physical domain is unchanged (cell_size shrinks by k), so value fields at
// different resolutions are directly comparable.
inline OccupancyGrid block_upsample(const OccupancyGrid& g, int k) {
  if (k < 1) throw ValidationError("upsample factor must be >= 1");
  if (k == 1) return g;
  OccupancyGrid out(g.height * k, g.width * k);
  out.cell_size = g.cell_size / k;
  for (int i = 0; i < out.height; ++i)
    for (int j = 0; j < out.width; ++j)
      out.set_safe(i, j, g.safe(i / k, j / k));
  return out;
}

inline GoalSpec scale_goal(const GoalSpec& goal, int k) {
  return {goal.row * k + k / 2, goal.col * k + k / 2};
}

}  // namespace pno

#endif  // PNO_DATASET_HPP
