#ifndef PNO_TRAIN_HPP
#define PNO_TRAIN_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pno/checkpoint.hpp"
#include "pno/model.hpp"
#include "pno/rng.hpp"

namespace pno {

// ---------------------------------------------------------------------------
// Adam over a flat view of the parameter registry. Moments are indexed by the
// registry's fixed iteration order, so they can be serialized alongside the
// model and survive a resume.
// ---------------------------------------------------------------------------

struct AdamState {
  std::vector<double> m, v;
  std::int64_t t = 0;
};

inline void adam_init(AdamState& s, const std::vector<ParamRef>& refs) {
  const std::size_t n = param_count(refs);
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  s.t = 0;
}

inline void adam_step(AdamState& s, const std::vector<ParamRef>& refs, double lr,
                      double grad_scale = 1.0) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++s.t;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(s.t));
  std::size_t off = 0;
  for (const auto& r : refs) {
    for (std::size_t k = 0; k < r.count; ++k, ++off) {
      const double g = r.grad[k] * grad_scale;
      s.m[off] = kBeta1 * s.m[off] + (1.0 - kBeta1) * g;
      s.v[off] = kBeta2 * s.v[off] + (1.0 - kBeta2) * g * g;
      r.data[k] -= lr * (s.m[off] / bc1) / (std::sqrt(s.v[off] / bc2) + kEps);
    }
  }
}

// ---------------------------------------------------------------------------
// Central finite-difference audit of analytic gradients, run before the
// first epoch. Samples entries from every parameter group; a failure means a
// backward-pass bug, so training aborts rather than burning hours on wrong
// gradients.
// ---------------------------------------------------------------------------

struct GradCheckEntry {
  std::string group;
  std::size_t index = 0;
  double analytic = 0.0;
  double fd = 0.0;
  double rel = 0.0;
};

struct GradCheckReport {
  bool ok = true;
  double worst = 0.0;
  std::string worst_group;
  std::vector<GradCheckEntry> entries;
};

// loss_fn evaluates the probe loss at the current parameters without touching
// gradients; grad_fn zeroes gradients, runs backward, and returns the loss.
// The 1e-4 denominator floor turns the test absolute (at tol * 1e-4 = 1e-8)
// for near-dead entries, which sits well above the ~1e-10 rounding noise of a
// float64 central difference on an O(1) loss.
inline GradCheckReport check_gradients(const std::vector<ParamRef>& refs,
                                       const std::function<double()>& loss_fn,
                                       const std::function<double()>& grad_fn,
                                       std::uint64_t seed, int entries_per_group = 2,
                                       double step = 1e-5, double tol = 1e-4) {
  grad_fn();
  SplitMix64 rng(seed);
  GradCheckReport rep;
  for (const auto& r : refs) {
    for (int e = 0; e < entries_per_group && r.count > 0; ++e) {
      const auto k = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(r.count) - 1));
      const double analytic = r.grad[k];
      const double old = r.data[k];
      r.data[k] = old + step;
      const double lp = loss_fn();
      r.data[k] = old - step;
      const double lm = loss_fn();
      r.data[k] = old;
      const double fd = (lp - lm) / (2.0 * step);
      const double rel = std::abs(fd - analytic) /
                         std::max({std::abs(fd), std::abs(analytic), 1e-4});
      rep.entries.push_back({r.name, k, analytic, fd, rel});
      if (rel > rep.worst) {
        rep.worst = rel;
        rep.worst_group = r.name;
      }
      if (rel > tol) rep.ok = false;
    }
  }
  return rep;
}

inline void require_gradients(const GradCheckReport& rep) {
  if (rep.ok) return;
  std::ostringstream msg;
  msg << "gradient check failed: worst group " << rep.worst_group
      << " relative error " << rep.worst;
  throw std::runtime_error(msg.str());
}

// ---------------------------------------------------------------------------
// Training loops. Single threaded with a seeded per-epoch shuffle and a fixed
// reduction order, so a (config, seed) pair fully determines the run.
// ---------------------------------------------------------------------------

struct SdfSample {
  OccupancyGrid grid;
  ScalarField target;  // signed distance, same shape as grid
};

struct ValueSample {
  OccupancyGrid grid;
  ScalarField sdf;  // stage-1 predicted sdf; inputs only, not trained through
  std::vector<GoalSpec> goals;
  std::vector<ScalarField> targets;  // one value field per goal
};

struct TrainConfig {
  int epochs = 1;       // absolute end epoch (exclusive)
  int start_epoch = 0;  // resume point; shuffles are keyed by epoch index
  int batch = 1;        // maps per optimizer step
  double lr = 1e-3;
  std::uint64_t seed = 1;
  bool shuffle = true;
  bool grad_check = true;
  int grad_check_entries = 1;
  std::function<void(int epoch, double mean_loss)> on_epoch;
};

struct TrainResult {
  std::vector<double> loss_history;  // mean per-map loss, one entry per epoch
};

namespace traindetail {

inline void shuffle_indices(std::vector<std::size_t>& v, SplitMix64 rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(v[i - 1], v[j]);
  }
}

[[noreturn]] inline void diverged(int epoch, std::size_t sample, double loss) {
  std::ostringstream msg;
  msg << "training diverged: non-finite loss " << loss << " at epoch " << epoch
      << ", sample " << sample;
  throw std::runtime_error(msg.str());
}

// Shared epoch/batch scaffolding; map_pass(sample_index, with_grad) runs one
// map and accumulates gradients when asked.
template <typename Model, typename MapPass>
TrainResult run_epochs(Model& model, std::size_t count, const TrainConfig& cfg,
                       AdamState& adam, const std::vector<ParamRef>& refs,
                       MapPass&& map_pass) {
  if (count == 0) throw ValidationError("train: empty dataset");
  if (cfg.batch < 1) throw ValidationError("train: batch must be >= 1");
  TrainResult result;
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = cfg.start_epoch; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      // each epoch's permutation must be a pure function of (seed, epoch) so
      // resumed runs replay the exact schedule of the original
      std::iota(order.begin(), order.end(), 0);
      shuffle_indices(order, SplitMix64(SplitMix64::stream(
                                 cfg.seed, static_cast<std::uint64_t>(epoch) + 1)));
    }
    double sum_loss = 0.0;
    int in_batch = 0;
    model.zero_grad();
    for (std::size_t i = 0; i < order.size(); ++i) {
      const double loss = map_pass(order[i], true);
      if (!std::isfinite(loss)) diverged(epoch, order[i], loss);
      sum_loss += loss;
      ++in_batch;
      if (in_batch == cfg.batch || i + 1 == order.size()) {
        adam_step(adam, refs, cfg.lr, 1.0 / in_batch);
        model.zero_grad();
        in_batch = 0;
      }
    }
    const double mean = sum_loss / static_cast<double>(count);
    result.loss_history.push_back(mean);
    if (cfg.on_epoch) cfg.on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace traindetail

inline TrainResult train_sdf(SdfModel& model, const std::vector<SdfSample>& data,
                             const TrainConfig& cfg, AdamState* state = nullptr) {
  if (data.empty()) throw ValidationError("train: empty dataset");
  auto refs = collect_params(model);
  AdamState local;
  AdamState& adam = state ? *state : local;
  if (adam.m.size() != param_count(refs)) adam_init(adam, refs);

  // sdf targets are supervised everywhere, including obstacle interiors
  auto sample_loss = [&](std::size_t i, bool with_grad) {
    const SdfSample& s = data[i];
    const std::vector<double> ones(s.target.values.size(), 1.0);
    if (!with_grad) {
      ScalarField pred = sdf_forward(model, s.grid);
      return masked_rel_l2(pred.values, s.target.values, ones);
    }
    SdfCache cache;
    ScalarField pred = sdf_forward(model, s.grid, &cache);
    std::vector<double> g;
    const double loss = masked_rel_l2_grad(pred.values, s.target.values, ones, g);
    sdf_backward(model, cache, g, s.grid.height, s.grid.width);
    return loss;
  };

  if (cfg.grad_check && cfg.start_epoch == 0) {
    auto loss_fn = [&] { return sample_loss(0, false); };
    auto grad_fn = [&] {
      model.zero_grad();
      return sample_loss(0, true);
    };
    require_gradients(check_gradients(refs, loss_fn, grad_fn, cfg.seed,
                                      cfg.grad_check_entries));
  }
  return traindetail::run_epochs(model, data.size(), cfg, adam, refs, sample_loss);
}

inline TrainResult train_value(ValueModel& model, const std::vector<ValueSample>& data,
                               const TrainConfig& cfg, AdamState* state = nullptr) {
  if (data.empty()) throw ValidationError("train: empty dataset");
  for (const auto& s : data)
    if (s.goals.empty() || s.goals.size() != s.targets.size())
      throw ValidationError("train: sample needs matching goals and targets");
  auto refs = collect_params(model);
  AdamState local;
  AdamState& adam = state ? *state : local;
  if (adam.m.size() != param_count(refs)) adam_init(adam, refs);

  // For the masked arch the trunk is goal independent, so each map gets one
  // trunk pass per epoch shared by all of its goals. chi is a constant input.
  struct MapCtx {
    Tensor inputs;
    std::vector<double> chi;
    CField chi_hat;
  };
  std::vector<MapCtx> ctx(data.size());
  if (model.arch == ValueArch::kPno) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      ctx[i].chi = smoothed_indicator(data[i].sdf, model.beta);
      ctx[i].chi_hat = rfft2(ctx[i].chi, data[i].grid.height, data[i].grid.width);
      ctx[i].inputs = pno_inputs(data[i].grid, data[i].sdf);
    }
  }

  auto map_pass = [&](std::size_t i, bool with_grad) {
    const ValueSample& s = data[i];
    const auto goal_count = static_cast<double>(s.goals.size());
    double lsum = 0.0;
    if (model.arch == ValueArch::kPno) {
      const MapCtx& c = ctx[i];
      TrunkCache tc;
      Tensor F = value_features(model, c.inputs, &c.chi, &c.chi_hat,
                                with_grad ? &tc : nullptr);
      Tensor gF(F.shape);
      for (std::size_t gi = 0; gi < s.goals.size(); ++gi) {
        HeadCache hc;
        ScalarField pred = value_from_features(model, F, s.goals[gi],
                                               with_grad ? &hc : nullptr);
        const std::vector<double> mask = finite_safe_mask(s.grid, s.targets[gi]);
        if (!with_grad) {
          lsum += masked_rel_l2(pred.values, s.targets[gi].values, mask);
          continue;
        }
        std::vector<double> g;
        lsum += masked_rel_l2_grad(pred.values, s.targets[gi].values, mask, g);
        Tensor gy({F.dim(0), F.dim(1), 1});
        for (std::size_t k = 0; k < g.size(); ++k) gy[k] = g[k] / goal_count;
        axpy(1.0, value_head_backward(model, hc, gy, s.goals[gi]), gF);
      }
      if (with_grad)
        trunk_backward(model.lift, model.layers, tc, &c.chi, &c.chi_hat,
                       std::move(gF));
    } else {
      // ablation: the goal enters as an input channel, so every goal needs
      // its own trunk pass
      for (std::size_t gi = 0; gi < s.goals.size(); ++gi) {
        const Tensor inputs = fno_inputs(s.grid, s.goals[gi]);
        TrunkCache tc;
        MlpCache fc;
        Tensor F = value_features(model, inputs, nullptr, nullptr,
                                  with_grad ? &tc : nullptr);
        ScalarField pred = value_from_features(model, F, s.goals[gi], nullptr,
                                               with_grad ? &fc : nullptr);
        const std::vector<double> mask = finite_safe_mask(s.grid, s.targets[gi]);
        if (!with_grad) {
          lsum += masked_rel_l2(pred.values, s.targets[gi].values, mask);
          continue;
        }
        std::vector<double> g;
        lsum += masked_rel_l2_grad(pred.values, s.targets[gi].values, mask, g);
        Tensor gy({F.dim(0), F.dim(1), 1});
        for (std::size_t k = 0; k < g.size(); ++k) gy[k] = g[k] / goal_count;
        Tensor gFg = mlp_backward(model.flat_head, fc, gy);
        trunk_backward(model.lift, model.layers, tc, nullptr, nullptr,
                       std::move(gFg));
      }
    }
    return lsum / goal_count;
  };

  if (cfg.grad_check && cfg.start_epoch == 0) {
    auto loss_fn = [&] { return map_pass(0, false); };
    auto grad_fn = [&] {
      model.zero_grad();
      return map_pass(0, true);
    };
    require_gradients(check_gradients(refs, loss_fn, grad_fn, cfg.seed,
                                      cfg.grad_check_entries));
  }
  return traindetail::run_epochs(model, data.size(), cfg, adam, refs, map_pass);
}

// ---------------------------------------------------------------------------
// Resume checkpoints: parameters plus optimizer moments, float64 payload
// (EIKF version 2) so a resumed run continues the exact trajectory. Model
// loaders skip the optimizer tensors, so these files also load as models.
// ---------------------------------------------------------------------------

template <typename Model>
inline void save_train_state(std::ostream& out, Model& model,
                             const AdamState& adam, int next_epoch,
                             const std::string& extra = "") {
  std::vector<NamedTensor> tensors = ckptdetail::dump_tensors(model);
  tensors.push_back(
      {"adam.m", {static_cast<std::uint64_t>(adam.m.size())}, adam.m});
  tensors.push_back(
      {"adam.v", {static_cast<std::uint64_t>(adam.v.size())}, adam.v});
  std::string meta = ckptdetail::model_meta(model);
  meta += "adam_t=" + std::to_string(adam.t) + "\n";
  meta += "next_epoch=" + std::to_string(next_epoch) + "\n";
  meta += extra;
  write_eikm(out, tensors, meta, /*payload_version=*/2);
}

struct ResumeInfo {
  AdamState adam;
  int next_epoch = 0;
};

inline void extract_resume(const EikmFile& f, ResumeInfo& r) {
  for (const auto& t : f.tensors) {
    if (t.name == "adam.m") r.adam.m = t.values;
    if (t.name == "adam.v") r.adam.v = t.values;
  }
  if (r.adam.m.empty() || r.adam.v.empty())
    throw std::runtime_error("eikm: checkpoint lacks optimizer state");
  r.adam.t = ckptdetail::meta_int(f.meta, "adam_t");
  r.next_epoch = ckptdetail::meta_int(f.meta, "next_epoch");
}

inline SdfModel load_sdf_train_state(std::istream& in, ResumeInfo& r) {
  EikmFile f = read_eikm(in);
  extract_resume(f, r);
  return load_sdf_model(f);
}

inline ValueModel load_value_train_state(std::istream& in, ResumeInfo& r) {
  EikmFile f = read_eikm(in);
  extract_resume(f, r);
  return load_value_model(f);
}

}  // namespace pno

#endif  // PNO_TRAIN_HPP
