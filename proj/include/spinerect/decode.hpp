#pragma once

// Turning activations into labeled vertebra centers, one decoder per
// ablation mode:
//   base             per-channel 3-D argmax of G_v
//   base+rect        per-channel 1-D argmax of Q_v
//   base+rect+order  peaks of Q-hat labeled by a single offset step
//   base+rect+optim  full iterative solve

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "centerline.hpp"
#include "errors.hpp"
#include "optimize.hpp"
#include "rectify.hpp"
#include "volume.hpp"

namespace spinerect {

enum class Mode { base, rect, order, optim };

inline std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::base: return "base";
    case Mode::rect: return "base+rect";
    case Mode::order: return "base+rect+order";
    case Mode::optim: return "base+rect+optim";
  }
  return "";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "base") return Mode::base;
  if (s == "rect" || s == "base+rect") return Mode::rect;
  if (s == "order" || s == "base+rect+order") return Mode::order;
  if (s == "optim" || s == "base+rect+optim") return Mode::optim;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected base|rect|order|optim)");
}

inline constexpr double kDefaultPresenceFraction = 0.3;

struct Prediction {
  int label{1};
  Vec3 position{};
  double activation{0.0};
  double axial{0.0};  // position along the spine axis, used for order checks
};

struct Decoded {
  Mode mode{Mode::optim};
  std::vector<Prediction> vertebrae;  // sorted by label
  std::optional<double> energy;       // only for the constrained modes
  bool plausible{true};
  std::optional<SolveResult> trace;
};

/// Labels form one consecutive run and increase along the spine axis.
inline bool anatomically_plausible(std::vector<Prediction> preds) {
  std::sort(preds.begin(), preds.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  for (std::size_t i = 1; i < preds.size(); ++i) {
    if (preds[i].label != preds[i - 1].label + 1) return false;
    if (!(preds[i].axial > preds[i - 1].axial)) return false;
  }
  return true;
}

namespace detail {
inline Decoded finish(Mode mode, std::vector<Prediction> preds) {
  std::sort(preds.begin(), preds.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  Decoded d;
  d.mode = mode;
  d.plausible = anatomically_plausible(preds);
  d.vertebrae = std::move(preds);
  return d;
}
}  // namespace detail

/// Per-channel 3-D argmax. A channel counts as detected when its peak is at
/// least `presence` times the strongest channel peak. `caudal` is the world
/// direction in which labels increase.
inline Decoded decode_base(const ActivationStack& stack, double presence = kDefaultPresenceFraction,
                           Vec3 caudal = {0.0, 0.0, 1.0}) {
  std::vector<double> peak(static_cast<std::size_t>(stack.v_max()), 0.0);
  std::vector<std::size_t> arg(peak.size(), 0);
  double global = 0.0;
  for (int v = 1; v <= stack.v_max(); ++v) {
    const auto data = stack.channel(v).data();
    const auto it = std::max_element(data.begin(), data.end());
    const auto u = static_cast<std::size_t>(v - 1);
    peak[u] = *it;
    arg[u] = static_cast<std::size_t>(it - data.begin());
    global = std::max(global, peak[u]);
  }
  std::vector<Prediction> preds;
  if (global > 0.0) {
    const auto& geo = stack.geometry();
    for (int v = 1; v <= stack.v_max(); ++v) {
      const auto u = static_cast<std::size_t>(v - 1);
      if (peak[u] < presence * global) continue;
      const std::size_t idx = arg[u];
      const std::size_t i = idx % geo.dims[0];
      const std::size_t j = (idx / geo.dims[0]) % geo.dims[1];
      const std::size_t k = idx / (geo.dims[0] * geo.dims[1]);
      const Vec3 p = geo.world(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k));
      preds.push_back({v, p, peak[u], dot(p, caudal)});
    }
  }
  return detail::finish(Mode::base, std::move(preds));
}

/// Per-channel argmax of Q_v mapped back onto the centerline.
inline Decoded decode_rect(const SignalSet& signals, const Centerline& c, double presence = kDefaultPresenceFraction) {
  double global = 0.0;
  for (const auto& q : signals.channels) {
    if (!q.values.empty()) global = std::max(global, *std::max_element(q.values.begin(), q.values.end()));
  }
  std::vector<Prediction> preds;
  if (global > 0.0) {
    for (int v = 1; v <= signals.v_max(); ++v) {
      const auto& q = signals.q(v).values;
      const auto it = std::max_element(q.begin(), q.end());
      if (*it < presence * global) continue;
      const auto z = static_cast<double>(it - q.begin());
      preds.push_back({v, map_back(z, c), *it, z});
    }
  }
  return detail::finish(Mode::rect, std::move(preds));
}

inline std::vector<Prediction> predictions_from_state(const EnergyModel& model, const LabelingState& s,
                                                      const Centerline& c) {
  std::vector<Prediction> preds;
  for (int i = 0; i < s.count(); ++i) {
    const int v = s.v_l + i;
    const double k = s.k[static_cast<std::size_t>(i)];
    preds.push_back({v, map_back(k, c), model.signals().q(v).at(k), k});
  }
  return preds;
}

/// Q-hat peaks labeled by one offset step (the solver stopped after its
/// first offset).
inline Decoded decode_order(const EnergyModel& model, const Centerline& c, const PeakConfig& peaks = {}) {
  const LabelingState s = offset_op(model, init_state(model, peaks));
  Decoded d = detail::finish(Mode::order, predictions_from_state(model, s, c));
  d.energy = s.energy;
  return d;
}

inline Decoded decode_optim(const EnergyModel& model, const Centerline& c, const SolveOptions& opts = {}) {
  SolveResult r = solve(model, opts);
  Decoded d = detail::finish(Mode::optim, predictions_from_state(model, r.best, c));
  d.energy = r.best.energy;
  d.trace = std::move(r);
  return d;
}

}  // namespace spinerect
