#pragma once

// Synthetic spine phantoms: a curved centerline, anatomically ordered
// vertebra centers along it, and an activation stack rendered from those
// centers with optional corruption (label shift, dropout, jitter, field of
// view crop, background clutter).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "heatmap.hpp"
#include "labels.hpp"
#include "volume.hpp"

namespace spinerect {

struct NoiseSpec {
  double label_shift_prob{0.0};  // channel fires strongest at a neighboring vertebra
  double shift_residual{0.7};    // amplitude left at the channel's own vertebra when shifted
  double dropout_prob{0.0};      // channel zeroed entirely
  double jitter_sigma_mm{0.0};   // per-blob perturbation of rendered centers
  std::optional<std::pair<double, double>> crop;  // kept z range as fractions of the volume extent
  double background_noise{0.0};  // peak amplitude of broad random clutter blobs

  bool is_clean() const {
    return label_shift_prob == 0.0 && dropout_prob == 0.0 && jitter_sigma_mm == 0.0 && !crop &&
           background_noise == 0.0;
  }

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) throw InfeasibleSpecError(std::string("noise: ") + name + " must be in [0,1]");
    };
    prob(label_shift_prob, "label_shift_prob");
    prob(dropout_prob, "dropout_prob");
    prob(shift_residual, "shift_residual");
    if (!(jitter_sigma_mm >= 0.0)) throw InfeasibleSpecError("noise: jitter_sigma_mm must be >= 0");
    if (!(background_noise >= 0.0)) throw InfeasibleSpecError("noise: background_noise must be >= 0");
    if (crop && !(crop->first >= 0.0 && crop->first < crop->second && crop->second <= 1.0)) {
      throw InfeasibleSpecError("noise: crop must satisfy 0 <= lo < hi <= 1");
    }
  }
};

struct CurveSpec {
  double amplitude_mm{0.0};      // lateral (x) sinusoid amplitude
  double wavelength_mm{500.0};
  double phase{0.0};             // radians
  double bow_mm{0.0};            // single half-wave in y over the run
};

struct PhantomSpec {
  std::uint64_t seed{0};
  int start_label{8};  // T1
  int count{12};
  double gap_min_mm{18.0};
  double gap_max_mm{32.0};
  CurveSpec curve{};
  Vec3 spacing{2.0, 2.0, 2.0};
  Dims dims{0, 0, 0};  // all zero: fit the volume to the run
  Vec3 origin{};       // used only with explicit dims
  double sigma_mm{4.0};
  NoiseSpec noise{};
  int v_max{kDefaultVMax};

  void validate() const {
    if (count < 1) throw InfeasibleSpecError("phantom: count must be >= 1");
    if (start_label < 1 || start_label + count - 1 > v_max) {
      throw InfeasibleSpecError("phantom: labels " + std::to_string(start_label) + ".." +
                                std::to_string(start_label + count - 1) + " exceed 1.." + std::to_string(v_max));
    }
    if (!(gap_min_mm > 0.0 && gap_min_mm <= gap_max_mm)) throw InfeasibleSpecError("phantom: bad gap range");
    if (!(sigma_mm > 0.0)) throw InfeasibleSpecError("phantom: sigma must be > 0");
    if (!(spacing.x > 0.0 && spacing.y > 0.0 && spacing.z > 0.0)) throw InfeasibleSpecError("phantom: bad spacing");
    if (!(curve.wavelength_mm > 0.0)) throw InfeasibleSpecError("phantom: wavelength must be > 0");
    noise.validate();
  }
};

struct Phantom {
  ActivationStack stack;
  std::vector<VertebraAnnotation> truth;
};

namespace detail {

struct CurveSampler {
  const CurveSpec& curve;
  double span;

  Vec3 operator()(double z) const {
    const double x = curve.amplitude_mm * std::sin(2.0 * std::numbers::pi * z / curve.wavelength_mm + curve.phase);
    const double y = span > 0.0 ? curve.bow_mm * std::sin(std::numbers::pi * std::clamp(z / span, 0.0, 1.0)) : 0.0;
    return {x, y, z};
  }
};

/// Gaps between consecutive labels: a linear cranial-to-caudal ramp over
/// [gap_min, gap_max] with a few percent of random variation, kept
/// non-decreasing.
inline std::vector<double> vertebra_gaps(const PhantomSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> wobble(-0.04, 0.04);
  std::vector<double> gaps;
  const double denom = std::max(1, spec.v_max - 2);
  for (int v = spec.start_label; v < spec.start_label + spec.count - 1; ++v) {
    const double base = spec.gap_min_mm + (spec.gap_max_mm - spec.gap_min_mm) * (v - 1) / denom;
    gaps.push_back(std::clamp(base * (1.0 + wobble(rng)), spec.gap_min_mm, spec.gap_max_mm));
  }
  std::sort(gaps.begin(), gaps.end());
  return gaps;
}

/// Walks the curve from z = 0 placing centers at the given arc-length gaps.
inline std::vector<Vec3> place_centers(const CurveSpec& curve, const std::vector<double>& gaps) {
  double total = 0.0;
  for (double g : gaps) total += g;
  const CurveSampler sample{curve, total};
  std::vector<Vec3> centers{sample(0.0)};
  const double dz = 0.05;
  double z = 0.0;
  Vec3 prev = centers.front();
  for (double g : gaps) {
    double walked = 0.0;
    while (true) {
      const Vec3 next = sample(z + dz);
      const double seg = distance(prev, next);
      if (walked + seg >= g) {
        const double f = (g - walked) / seg;
        const double zc = z + f * dz;
        prev = sample(zc);
        z = zc;
        break;
      }
      walked += seg;
      prev = next;
      z += dz;
    }
    centers.push_back(prev);
  }
  return centers;
}

}  // namespace detail

/// Renders the phantom. Deterministic in spec (including seed). Truth holds
/// the uncorrupted centers of vertebrae inside the field of view.
inline Phantom generate(const PhantomSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const std::vector<double> gaps = detail::vertebra_gaps(spec, rng);
  const std::vector<Vec3> centers = detail::place_centers(spec.curve, gaps);

  Geometry geo;
  geo.spacing = spec.spacing;
  if (spec.dims == Dims{0, 0, 0}) {
    Vec3 lo = centers.front(), hi = centers.front();
    for (const auto& c : centers) {
      lo = {std::min(lo.x, c.x), std::min(lo.y, c.y), std::min(lo.z, c.z)};
      hi = {std::max(hi.x, c.x), std::max(hi.y, c.y), std::max(hi.z, c.z)};
    }
    const double margin = kGaussianTruncation * spec.sigma_mm + 10.0;
    lo -= Vec3{margin, margin, margin};
    hi += Vec3{margin, margin, margin};
    geo.origin = lo;
    geo.dims = {static_cast<std::size_t>(std::ceil((hi.x - lo.x) / geo.spacing.x)) + 1,
                static_cast<std::size_t>(std::ceil((hi.y - lo.y) / geo.spacing.y)) + 1,
                static_cast<std::size_t>(std::ceil((hi.z - lo.z) / geo.spacing.z)) + 1};
  } else {
    geo.dims = spec.dims;
    geo.origin = spec.origin;
    geo.validate();
    for (const auto& c : centers) {
      if (!inside_bounds(geo, c)) throw InfeasibleSpecError("phantom: volume does not contain the spine run");
    }
  }

  if (spec.noise.crop) {
    const auto nz = static_cast<double>(geo.dims[2] - 1);
    const auto k0 = static_cast<std::size_t>(std::floor(spec.noise.crop->first * nz));
    const auto k1 = static_cast<std::size_t>(std::ceil(spec.noise.crop->second * nz));
    geo.origin.z += static_cast<double>(k0) * geo.spacing.z;
    geo.dims[2] = k1 - k0 + 1;
  }

  std::vector<VertebraAnnotation> all;
  for (int i = 0; i < spec.count; ++i) all.push_back({spec.start_label + i, centers[static_cast<std::size_t>(i)]});
  std::vector<VertebraAnnotation> truth;
  for (const auto& a : all) {
    if (inside_bounds(geo, a.center)) truth.push_back(a);
  }

  if (spec.noise.is_clean()) {
    return Phantom{render_gaussians(truth, geo, spec.sigma_mm, spec.v_max).stack, truth};
  }

  const NoiseSpec& noise = spec.noise;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto jittered = [&](const Vec3& c) {
    if (noise.jitter_sigma_mm <= 0.0) return c;
    const Vec3 d{gauss(rng), gauss(rng), gauss(rng)};
    return c + d * noise.jitter_sigma_mm;
  };

  ActivationStack stack = ActivationStack::zeros(geo, spec.v_max);
  // Corruption draws cover the whole run so cropping does not change the
  // random stream of the remaining vertebrae.
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int v = all[i].label;
    const bool dropped = unit(rng) < noise.dropout_prob;
    const bool shifted = unit(rng) < noise.label_shift_prob;
    const double side = unit(rng);
    const Vec3 own = jittered(all[i].center);
    const Vec3 other_jitter = jittered(Vec3{});
    if (dropped) continue;
    VolumeGrid& channel = stack.channel(v);
    std::vector<std::size_t> neighbors;
    if (i > 0) neighbors.push_back(i - 1);
    if (i + 1 < all.size()) neighbors.push_back(i + 1);
    if (shifted && !neighbors.empty()) {
      const std::size_t n = neighbors[std::min(neighbors.size() - 1, static_cast<std::size_t>(side * neighbors.size()))];
      add_gaussian(channel, all[n].center + other_jitter, spec.sigma_mm, 1.0);
      add_gaussian(channel, own, spec.sigma_mm, noise.shift_residual);
    } else {
      add_gaussian(channel, own, spec.sigma_mm, 1.0);
    }
  }

  if (noise.background_noise > 0.0) {
    const Vec3 lo = geo.origin;
    const Vec3 hi = geo.upper_corner();
    for (int v = 1; v <= spec.v_max; ++v) {
      for (int b = 0; b < 2; ++b) {
        const Vec3 c{lo.x + unit(rng) * (hi.x - lo.x), lo.y + unit(rng) * (hi.y - lo.y),
                     lo.z + unit(rng) * (hi.z - lo.z)};
        add_gaussian(stack.channel(v), c, 15.0, noise.background_noise * unit(rng));
      }
    }
  }
  return Phantom{std::move(stack), truth};
}

// --- corpus sampling -------------------------------------------------------

struct PhantomRanges {
  int count_min{6};
  int count_max{17};
  double amplitude_max_mm{30.0};
  double wavelength_min_mm{300.0};
  double wavelength_max_mm{700.0};
  double bow_max_mm{15.0};
  bool require_anchor{false};  // run starts at C1 or ends at S2
  NoiseSpec noise{};
};

/// Draws a random phantom spec (region run and curve) from `seed`.
inline PhantomSpec sample_phantom_spec(std::uint64_t seed, const PhantomRanges& ranges, int v_max = kDefaultVMax) {
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_int = [&](int lo, int hi) { return lo + static_cast<int>(std::floor(unit(rng) * (hi - lo + 1))); };
  PhantomSpec s;
  s.seed = seed;
  s.v_max = v_max;
  s.count = std::clamp(uniform_int(ranges.count_min, ranges.count_max), 1, v_max);
  const bool at_top = unit(rng) < 0.5;
  if (ranges.require_anchor) {
    s.start_label = at_top ? 1 : v_max - s.count + 1;
  } else {
    s.start_label = uniform_int(1, v_max - s.count + 1);
  }
  s.curve.amplitude_mm = unit(rng) * ranges.amplitude_max_mm;
  s.curve.wavelength_mm = ranges.wavelength_min_mm + unit(rng) * (ranges.wavelength_max_mm - ranges.wavelength_min_mm);
  s.curve.phase = unit(rng) * 2.0 * std::numbers::pi;
  s.curve.bow_mm = (2.0 * unit(rng) - 1.0) * ranges.bow_max_mm;
  s.noise = ranges.noise;
  return s;
}

// --- JSON echo ---------------------------------------------------------------

inline nlohmann::json phantom_spec_to_json(const PhantomSpec& s) {
  nlohmann::json j;
  j["seed"] = s.seed;
  j["start_label"] = s.start_label;
  j["start_name"] = label_name(s.start_label);
  j["count"] = s.count;
  j["gap_min_mm"] = s.gap_min_mm;
  j["gap_max_mm"] = s.gap_max_mm;
  j["curve"] = {{"amplitude_mm", s.curve.amplitude_mm},
                {"wavelength_mm", s.curve.wavelength_mm},
                {"phase", s.curve.phase},
                {"bow_mm", s.curve.bow_mm}};
  j["spacing_mm"] = {s.spacing.x, s.spacing.y, s.spacing.z};
  j["dims"] = {s.dims[0], s.dims[1], s.dims[2]};
  j["origin_mm"] = {s.origin.x, s.origin.y, s.origin.z};
  j["sigma_mm"] = s.sigma_mm;
  j["v_max"] = s.v_max;
  nlohmann::json n;
  n["label_shift_prob"] = s.noise.label_shift_prob;
  n["shift_residual"] = s.noise.shift_residual;
  n["dropout_prob"] = s.noise.dropout_prob;
  n["jitter_sigma_mm"] = s.noise.jitter_sigma_mm;
  n["crop"] = s.noise.crop ? nlohmann::json{s.noise.crop->first, s.noise.crop->second} : nlohmann::json(nullptr);
  n["background_noise"] = s.noise.background_noise;
  j["noise"] = std::move(n);
  return j;
}

inline PhantomSpec phantom_spec_from_json(const nlohmann::json& j) {
  PhantomSpec s;
  try {
    s.seed = j.value("seed", s.seed);
    if (j.contains("start_name")) {
      const auto v = label_from_name(j.at("start_name").get<std::string>());
      if (!v) throw InfeasibleSpecError("phantom: unknown start_name");
      s.start_label = *v;
    }
    s.start_label = j.value("start_label", s.start_label);
    s.count = j.value("count", s.count);
    s.gap_min_mm = j.value("gap_min_mm", s.gap_min_mm);
    s.gap_max_mm = j.value("gap_max_mm", s.gap_max_mm);
    if (j.contains("curve")) {
      const auto& c = j.at("curve");
      s.curve.amplitude_mm = c.value("amplitude_mm", s.curve.amplitude_mm);
      s.curve.wavelength_mm = c.value("wavelength_mm", s.curve.wavelength_mm);
      s.curve.phase = c.value("phase", s.curve.phase);
      s.curve.bow_mm = c.value("bow_mm", s.curve.bow_mm);
    }
    if (j.contains("spacing_mm")) {
      const auto& a = j.at("spacing_mm");
      s.spacing = {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
    }
    if (j.contains("dims")) {
      const auto& a = j.at("dims");
      s.dims = {a.at(0).get<std::size_t>(), a.at(1).get<std::size_t>(), a.at(2).get<std::size_t>()};
    }
    if (j.contains("origin_mm")) {
      const auto& a = j.at("origin_mm");
      s.origin = {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
    }
    s.sigma_mm = j.value("sigma_mm", s.sigma_mm);
    s.v_max = j.value("v_max", s.v_max);
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      s.noise.label_shift_prob = n.value("label_shift_prob", 0.0);
      s.noise.shift_residual = n.value("shift_residual", s.noise.shift_residual);
      s.noise.dropout_prob = n.value("dropout_prob", 0.0);
      s.noise.jitter_sigma_mm = n.value("jitter_sigma_mm", 0.0);
      if (n.contains("crop") && !n.at("crop").is_null()) {
        s.noise.crop = std::make_pair(n.at("crop").at(0).get<double>(), n.at("crop").at(1).get<double>());
      }
      s.noise.background_noise = n.value("background_noise", 0.0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InfeasibleSpecError(std::string("phantom spec: ") + e.what());
  }
  return s;
}

}  // namespace spinerect
