#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "format.hpp"
#include "labels.hpp"
#include "vec3.hpp"
#include "volume.hpp"

namespace spinerect {

/// A labeled vertebra center in world mm.
struct VertebraAnnotation {
  int label{1};
  Vec3 center{};

  friend bool operator==(const VertebraAnnotation&, const VertebraAnnotation&) = default;
};

inline constexpr double kDefaultHeatmapSigma = 8.0;
inline constexpr double kGaussianTruncation = 3.0;  // in sigmas

/// Adds amplitude * exp(-|p - c|^2 / 2 sigma^2) to every voxel within
/// 3 sigma of c.
inline void add_gaussian(VolumeGrid& g, const Vec3& c, double sigma, double amplitude = 1.0) {
  const auto& geo = g.geometry();
  const double radius = kGaussianTruncation * sigma;
  const double r2 = radius * radius;
  const Vec3 lo = geo.to_voxel(c - Vec3{radius, radius, radius});
  const Vec3 hi = geo.to_voxel(c + Vec3{radius, radius, radius});
  auto clamp_range = [](double a, double b, std::size_t n, std::size_t& first, std::size_t& last) {
    const double f = std::max(0.0, std::ceil(a));
    const double l = std::min(static_cast<double>(n) - 1.0, std::floor(b));
    if (f > l) return false;
    first = static_cast<std::size_t>(f);
    last = static_cast<std::size_t>(l);
    return true;
  };
  std::size_t i0, i1, j0, j1, k0, k1;
  if (!clamp_range(lo.x, hi.x, geo.dims[0], i0, i1) || !clamp_range(lo.y, hi.y, geo.dims[1], j0, j1) ||
      !clamp_range(lo.z, hi.z, geo.dims[2], k0, k1)) {
    return;
  }
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (std::size_t k = k0; k <= k1; ++k) {
    for (std::size_t j = j0; j <= j1; ++j) {
      for (std::size_t i = i0; i <= i1; ++i) {
        const Vec3 p = geo.world(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k));
        const Vec3 d = p - c;
        const double d2 = dot(d, d);
        if (d2 > r2) continue;
        g.at(i, j, k) += amplitude * std::exp(-d2 * inv);
      }
    }
  }
}

inline bool inside_bounds(const Geometry& geo, const Vec3& p) {
  const Vec3 u = geo.to_voxel(p);
  return u.x >= 0.0 && u.y >= 0.0 && u.z >= 0.0 && u.x <= static_cast<double>(geo.dims[0] - 1) &&
         u.y <= static_cast<double>(geo.dims[1] - 1) && u.z <= static_cast<double>(geo.dims[2] - 1);
}

struct RenderedStack {
  ActivationStack stack;
  /// Labels whose center lies outside the grid; only their tails were rendered.
  std::vector<int> outside_labels;
};

/// Ground-truth style activation maps: channel v holds a unit-peak Gaussian
/// around annotation v, zeros when v is not annotated.
inline RenderedStack render_gaussians(const std::vector<VertebraAnnotation>& annotations, const Geometry& geometry,
                                      double sigma = kDefaultHeatmapSigma, int v_max = kDefaultVMax) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("render_gaussians: sigma must be > 0");
  geometry.validate();
  std::set<int> seen;
  for (const auto& a : annotations) {
    if (a.label < 1 || a.label > v_max) throw InputError("render_gaussians: label out of range: " + std::to_string(a.label));
    if (!seen.insert(a.label).second) throw InputError("render_gaussians: duplicate label " + std::to_string(a.label));
    if (!is_finite(a.center)) throw InputError("render_gaussians: non-finite center");
  }
  RenderedStack out{ActivationStack::zeros(geometry, v_max), {}};
  for (const auto& a : annotations) {
    if (!inside_bounds(geometry, a.center)) out.outside_labels.push_back(a.label);
    add_gaussian(out.stack.channel(a.label), a.center, sigma);
  }
  return out;
}

/// Ground truth must be unique and consecutive in label.
inline void validate_truth(const std::vector<VertebraAnnotation>& annotations, int v_max = kDefaultVMax) {
  std::vector<int> labels;
  for (const auto& a : annotations) labels.push_back(a.label);
  std::sort(labels.begin(), labels.end());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1 || labels[i] > v_max) throw InputError("annotation label out of range");
    if (i > 0 && labels[i] == labels[i - 1]) throw InputError("duplicate annotation label " + std::to_string(labels[i]));
    if (i > 0 && labels[i] != labels[i - 1] + 1) throw InputError("annotation labels are not consecutive");
  }
}

// --- annotation JSON: [{"label", "label_name", "x_mm", "y_mm", "z_mm"}] ---

inline nlohmann::json annotations_to_json(const std::vector<VertebraAnnotation>& annotations) {
  auto arr = nlohmann::json::array();
  for (const auto& a : annotations) {
    arr.push_back({{"label", a.label},
                   {"label_name", label_name(a.label)},
                   {"x_mm", round_sig(a.center.x)},
                   {"y_mm", round_sig(a.center.y)},
                   {"z_mm", round_sig(a.center.z)}});
  }
  return arr;
}

inline std::vector<VertebraAnnotation> annotations_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InputError("annotations: expected a JSON list");
  std::vector<VertebraAnnotation> out;
  for (const auto& e : j) {
    try {
      VertebraAnnotation a;
      if (e.contains("label")) {
        a.label = e.at("label").get<int>();
      } else {
        const auto v = label_from_name(e.at("label_name").get<std::string>());
        if (!v) throw InputError("annotations: unknown label_name");
        a.label = *v;
      }
      a.center = {e.at("x_mm").get<double>(), e.at("y_mm").get<double>(), e.at("z_mm").get<double>()};
      out.push_back(a);
    } catch (const nlohmann::json::exception& ex) {
      throw InputError(std::string("annotations: ") + ex.what());
    }
  }
  return out;
}

inline std::vector<VertebraAnnotation> read_annotations(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path.string());
  try {
    return annotations_from_json(nlohmann::json::parse(is));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline void write_annotations(const std::vector<VertebraAnnotation>& annotations, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open " + path.string() + " for writing");
  os << annotations_to_json(annotations).dump(2) << '\n';
}

}  // namespace spinerect
