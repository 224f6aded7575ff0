#pragma once

// Anatomically constrained labeling on 1-D activation signals.
//
// A labeling is (v_l, k): the run of consecutive labels v_l .. v_l+N-1 placed
// at strictly increasing positions k_0 < ... < k_{N-1} along the rectified
// axis. Its energy is
//
//   L(v_l, k) = - sum_i lambda_{v_l+i} Q_{v_l+i}(k_i)
//               + sum_{interior i} R(k_i - k_{i-1}, k_{i+1} - k_i)
//
// with R(a, b) = exp(max(a/b, b/a)).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "labels.hpp"
#include "rectify.hpp"

namespace spinerect {

inline constexpr double kDefaultAnchorWeight = 2.0;
inline constexpr double kDefaultBaseWeight = 1.0;
inline constexpr int kDefaultMaxIters = 50;

/// End-of-spine labels: C1, C2, S1, S2 for the full 26-label set.
inline std::vector<int> default_anchor_labels(int v_max = kDefaultVMax) {
  std::vector<int> out;
  for (int v : {1, 2, v_max - 1, v_max}) {
    if (v >= 1 && v <= v_max && std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

struct EnergyConfig {
  std::vector<double> lambda;     // lambda[v-1]
  bool reg_range_literal{false};  // regularize interior points 2..N-2 instead of 1..N-2

  static EnergyConfig uniform(int v_max = kDefaultVMax, double weight = kDefaultBaseWeight) {
    return EnergyConfig{std::vector<double>(static_cast<std::size_t>(v_max), weight), false};
  }

  static EnergyConfig with_anchors(int v_max = kDefaultVMax, double anchor_weight = kDefaultAnchorWeight,
                                   double base_weight = kDefaultBaseWeight,
                                   std::optional<std::vector<int>> anchors = std::nullopt) {
    if (!anchors) anchors = default_anchor_labels(v_max);
    EnergyConfig cfg = uniform(v_max, base_weight);
    for (int a : *anchors) {
      if (a < 1 || a > v_max) throw ConfigError("anchor label out of range: " + std::to_string(a));
      cfg.lambda[static_cast<std::size_t>(a - 1)] = anchor_weight;
    }
    return cfg;
  }

  int v_max() const { return static_cast<int>(lambda.size()); }
  double weight(int v) const { return lambda[static_cast<std::size_t>(v - 1)]; }
};

struct LabelingState {
  int v_l{1};
  std::vector<double> k;
  double energy{std::numeric_limits<double>::infinity()};

  int count() const { return static_cast<int>(k.size()); }
  int highest_label() const { return v_l + count() - 1; }
};

/// Neighbor-gap dissimilarity penalty.
inline double regularizer(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("regularizer: gaps must be positive");
  return std::exp(std::max(a / b, b / a));
}

/// Evaluates the labeling energy over one case's signals. Holds a pointer to
/// the signals; they must outlive the model.
class EnergyModel {
 public:
  EnergyModel(const SignalSet& signals, EnergyConfig cfg) : signals_(&signals), cfg_(std::move(cfg)) {
    if (cfg_.v_max() != signals.v_max()) {
      throw ConfigError("energy: lambda has " + std::to_string(cfg_.v_max()) + " weights but there are " +
                        std::to_string(signals.v_max()) + " channels");
    }
    for (const auto& q : signals.channels) {
      if (q.size() != signals.length()) throw InputError("energy: channel signals differ in length");
    }
  }

  const SignalSet& signals() const { return *signals_; }
  const EnergyConfig& config() const { return cfg_; }
  int v_max() const { return cfg_.v_max(); }
  std::size_t length() const { return signals_->length(); }

  bool feasible(int v_l, std::span<const double> k) const noexcept {
    const auto n = static_cast<int>(k.size());
    if (n < 1 || v_l < 1 || v_l + n - 1 > v_max()) return false;
    const double last = static_cast<double>(length()) - 1.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (!(k[i] >= 0.0 && k[i] <= last)) return false;
      if (i > 0 && !(k[i] > k[i - 1])) return false;
    }
    return true;
  }

  void check(int v_l, std::span<const double> k) const {
    if (!feasible(v_l, k)) {
      throw ContractViolation("labeling (v_l=" + std::to_string(v_l) + ", N=" + std::to_string(k.size()) +
                              ") violates the consecutive-label / ordering constraints");
    }
  }

  double evaluate(int v_l, std::span<const double> k) const {
    check(v_l, k);
    const auto n = static_cast<int>(k.size());
    double activation = 0.0;
    for (int i = 0; i < n; ++i) {
      const int v = v_l + i;
      activation += cfg_.weight(v) * signals_->q(v).at(k[static_cast<std::size_t>(i)]);
    }
    double reg = 0.0;
    const int first = cfg_.reg_range_literal ? 2 : 1;
    for (int i = first; i <= n - 2; ++i) {
      const auto u = static_cast<std::size_t>(i);
      reg += regularizer(k[u] - k[u - 1], k[u + 1] - k[u]);
    }
    return -activation + reg;
  }

  LabelingState make_state(int v_l, std::vector<double> k) const {
    const double e = evaluate(v_l, k);
    return LabelingState{v_l, std::move(k), e};
  }

 private:
  const SignalSet* signals_;
  EnergyConfig cfg_;
};

inline double evaluate_energy(const SignalSet& signals, const LabelingState& state, const EnergyConfig& cfg) {
  return EnergyModel(signals, cfg).evaluate(state.v_l, state.k);
}

// ---------------------------------------------------------------------------
// Peak finding

inline constexpr double kDefaultPeakSeparationMm = 10.0;
inline constexpr double kDefaultPeakProminence = 0.1;  // fraction of the global max

struct PeakConfig {
  double min_separation_mm{kDefaultPeakSeparationMm};
  double min_prominence_fraction{kDefaultPeakProminence};
};

/// Interior local maxima (>= both neighbors, > at least one) that pass the
/// prominence filter, thinned to the minimum separation by descending
/// height. Returned in increasing position.
inline std::vector<std::size_t> find_peaks(const Signal1D& q, const PeakConfig& cfg = {}) {
  const auto& v = q.values;
  const std::size_t n = v.size();
  std::vector<std::size_t> peaks;
  if (n < 3) return peaks;
  const double global_max = *std::max_element(v.begin(), v.end());
  if (!(global_max > 0.0)) return peaks;
  const double min_prom = cfg.min_prominence_fraction * global_max;

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(v[i] >= v[i - 1] && v[i] >= v[i + 1] && (v[i] > v[i - 1] || v[i] > v[i + 1]))) continue;
    double left_min = v[i];
    for (std::size_t j = i; j-- > 0;) {
      if (v[j] > v[i]) break;
      left_min = std::min(left_min, v[j]);
    }
    double right_min = v[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (v[j] > v[i]) break;
      right_min = std::min(right_min, v[j]);
    }
    if (v[i] - std::max(left_min, right_min) >= min_prom) peaks.push_back(i);
  }

  std::vector<std::size_t> by_height = peaks;
  std::stable_sort(by_height.begin(), by_height.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  std::vector<std::size_t> kept;
  for (std::size_t p : by_height) {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](std::size_t o) {
      const double gap = std::abs(static_cast<double>(p) - static_cast<double>(o)) * q.delta;
      return gap >= cfg.min_separation_mm;
    });
    if (clear) kept.push_back(p);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

// ---------------------------------------------------------------------------
// Operations

/// v_l = 1 and k = peaks of the combined signal. When there are more peaks
/// than labels, the strongest v_max peaks are kept.
inline LabelingState init_state(const EnergyModel& model, const PeakConfig& peaks = {}) {
  const Signal1D& q_hat = model.signals().combined;
  std::vector<std::size_t> idx = find_peaks(q_hat, peaks);
  if (idx.empty()) throw NoVertebraDetectedError("no local maxima in the combined 1-D signal");
  if (idx.size() > static_cast<std::size_t>(model.v_max())) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return q_hat.values[a] > q_hat.values[b]; });
    idx.resize(static_cast<std::size_t>(model.v_max()));
    std::sort(idx.begin(), idx.end());
  }
  std::vector<double> k(idx.begin(), idx.end());
  return model.make_state(1, std::move(k));
}

/// Exhaustive search over the lowest label with k fixed; ties go to the
/// smaller v_l.
inline LabelingState offset_op(const EnergyModel& model, const LabelingState& state) {
  const int n = state.count();
  if (n < 1) throw InputError("offset: empty labeling");
  if (n > model.v_max()) {
    throw InfeasibleError("offset: " + std::to_string(n) + " positions exceed " + std::to_string(model.v_max()) +
                          " labels");
  }
  LabelingState best = state;
  best.energy = std::numeric_limits<double>::infinity();
  for (int v_l = 1; v_l + n - 1 <= model.v_max(); ++v_l) {
    const double e = model.evaluate(v_l, state.k);
    if (e < best.energy) {
      best.energy = e;
      best.v_l = v_l;
    }
  }
  return best;
}

inline const std::vector<double>& default_step_schedule() {
  static const std::vector<double> schedule{4.0, 2.0, 1.0};
  return schedule;
}

/// Coordinate-wise hill climbing on k with v_l fixed. For each step of the
/// schedule, sweeps i = 0..N-1 trying k_i - step then k_i + step and takes
/// the first strictly improving move that keeps the ordering; repeats until
/// a sweep accepts nothing.
inline LabelingState finetune_op(const EnergyModel& model, const LabelingState& state,
                                 std::span<const double> step_schedule = default_step_schedule()) {
  LabelingState cur = state;
  cur.energy = model.evaluate(cur.v_l, cur.k);
  const double last = static_cast<double>(model.length()) - 1.0;
  const auto n = cur.k.size();
  for (double step : step_schedule) {
    if (!(step > 0.0)) continue;
    bool moved = true;
    while (moved) {
      moved = false;
      for (std::size_t i = 0; i < n; ++i) {
        const double original = cur.k[i];
        for (double dir : {-1.0, 1.0}) {
          const double cand = original + dir * step;
          if (cand < 0.0 || cand > last) continue;
          if (i > 0 && !(cand > cur.k[i - 1])) continue;
          if (i + 1 < n && !(cand < cur.k[i + 1])) continue;
          cur.k[i] = cand;
          const double e = model.evaluate(cur.v_l, cur.k);
          if (e < cur.energy) {
            cur.energy = e;
            moved = true;
            break;
          }
          cur.k[i] = original;
        }
      }
    }
  }
  return cur;
}

/// k with the midpoint of (k_u, k_{u+1}) inserted after position u.
inline std::vector<double> expand_positions(std::span<const double> k, std::size_t u) {
  if (u + 1 >= k.size()) throw RangeError("expansion: insertion index out of range");
  std::vector<double> out;
  out.reserve(k.size() + 1);
  out.insert(out.end(), k.begin(), k.begin() + static_cast<std::ptrdiff_t>(u) + 1);
  out.push_back(0.5 * (k[u] + k[u + 1]));
  out.insert(out.end(), k.begin() + static_cast<std::ptrdiff_t>(u) + 1, k.end());
  return out;
}

enum class ExpansionScoring {
  fixed_offset,  // score each insertion with the current v_l
  reoffset,      // score each insertion with its best v_l
};

/// Inserts one vertebra at the gap midpoint that minimizes the energy. The
/// best candidate is returned even when it is worse than `state`. No-op for
/// N < 2 or when N + 1 labels no longer fit.
inline LabelingState expansion_op(const EnergyModel& model, const LabelingState& state,
                                  ExpansionScoring scoring = ExpansionScoring::fixed_offset) {
  const int n = state.count();
  if (n < 2 || n + 1 > model.v_max()) return state;
  LabelingState best;
  best.energy = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u + 1 < state.k.size(); ++u) {
    std::vector<double> cand = expand_positions(state.k, u);
    if (!(cand[u + 1] > cand[u] && cand[u + 2] > cand[u + 1])) continue;
    int lo = state.v_l;
    int hi = state.v_l;
    // The grown run must still end at or below v_max.
    if (lo + n > model.v_max()) lo = hi = model.v_max() - n;
    if (scoring == ExpansionScoring::reoffset) {
      lo = 1;
      hi = model.v_max() - n;
    }
    for (int v_l = lo; v_l <= hi; ++v_l) {
      const double e = model.evaluate(v_l, cand);
      if (e < best.energy) best = LabelingState{v_l, cand, e};
    }
  }
  return best.k.empty() ? state : best;
}

struct SolveOptions {
  PeakConfig peaks{};
  std::vector<double> step_schedule{default_step_schedule()};
  int max_iters{kDefaultMaxIters};
  ExpansionScoring expansion{ExpansionScoring::fixed_offset};
};

struct SolveResult {
  LabelingState best;
  std::vector<double> accepted_energies;  // L_min after each accepted offset
  int iterations{0};
  bool converged{false};  // stopped on an energy increase rather than the iteration cap
};

/// Iterative scheme: offset, stop once the post-offset energy no longer
/// improves on L_min, otherwise fine-tune and expand. Returns the lowest
/// energy labeling seen.
inline SolveResult solve(const EnergyModel& model, const SolveOptions& opts = {}) {
  SolveResult result;
  LabelingState state = init_state(model, opts.peaks);
  double l_min = std::numeric_limits<double>::infinity();
  auto observe = [&](const LabelingState& s) {
    if (s.energy < result.best.energy) result.best = s;
  };
  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    result.iterations = iter;
    state = offset_op(model, state);
    if (!(state.energy < l_min)) {
      result.converged = true;
      return result;
    }
    l_min = state.energy;
    result.accepted_energies.push_back(l_min);
    observe(state);

    state = finetune_op(model, state, opts.step_schedule);
    observe(state);
    state = expansion_op(model, state, opts.expansion);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

inline constexpr double kDefaultBruteForceBudget = 5e7;

/// Number of (v_l, k) states brute_force_solve would visit.
inline double brute_force_space(int v_max, std::size_t length, int max_n, std::size_t grid_step) {
  const std::size_t m = length == 0 ? 0 : (length - 1) / grid_step + 1;
  double total = 0.0;
  for (int n = 1; n <= std::min(max_n, v_max); ++n) {
    total += static_cast<double>(v_max - n + 1) * binomial(m, static_cast<std::size_t>(n));
  }
  return total;
}

/// Global minimum over N <= max_N, every v_l, and every increasing k on the
/// grid {0, g, 2g, ...}. Ties keep the first state found (smaller N, then
/// smaller v_l, then lexicographically smaller k).
inline LabelingState brute_force_solve(const EnergyModel& model, int max_n, std::size_t grid_step = 1,
                                       double budget = kDefaultBruteForceBudget) {
  if (grid_step == 0) throw InputError("brute force: grid_step must be >= 1");
  if (max_n < 1) throw InputError("brute force: max_N must be >= 1");
  const double space = brute_force_space(model.v_max(), model.length(), max_n, grid_step);
  if (space > budget) {
    throw BudgetExceededError("brute force: " + std::to_string(space) + " states exceed budget " +
                              std::to_string(budget));
  }
  std::vector<std::size_t> grid;
  for (std::size_t p = 0; p < model.length(); p += grid_step) grid.push_back(p);

  const auto& cfg = model.config();
  const int first_center = cfg.reg_range_literal ? 2 : 1;
  double best_e = std::numeric_limits<double>::infinity();
  int best_v = 0;
  std::vector<std::size_t> best_k;
  std::vector<std::size_t> k;

  for (int n = 1; n <= std::min(max_n, model.v_max()); ++n) {
    for (int v_l = 1; v_l + n - 1 <= model.v_max(); ++v_l) {
      k.assign(static_cast<std::size_t>(n), 0);
      // Depth-first over increasing grid indices with running partial energy.
      auto recurse = [&](auto&& self, int depth, std::size_t start, double partial) -> void {
        if (depth == n) {
          if (partial < best_e) {
            best_e = partial;
            best_v = v_l;
            best_k = k;
          }
          return;
        }
        const int v = v_l + depth;
        const auto& q = model.signals().q(v).values;
        for (std::size_t g = start; g + static_cast<std::size_t>(n - depth) <= grid.size(); ++g) {
          const std::size_t pos = grid[g];
          k[static_cast<std::size_t>(depth)] = pos;
          double e = partial - cfg.weight(v) * q[pos];
          const int center = depth - 1;
          if (depth >= 2 && center >= first_center) {
            const auto c = static_cast<std::size_t>(center);
            e += regularizer(static_cast<double>(k[c] - k[c - 1]), static_cast<double>(k[c + 1] - k[c]));
          }
          self(self, depth + 1, g + 1, e);
        }
      };
      recurse(recurse, 0, 0, 0.0);
    }
  }
  if (best_k.empty()) throw NoVertebraDetectedError("brute force: empty search space");
  return model.make_state(best_v, std::vector<double>(best_k.begin(), best_k.end()));
}

}  // namespace spinerect
