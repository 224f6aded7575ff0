#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "labels.hpp"
#include "vec3.hpp"

namespace spinerect {

using Dims = std::array<std::size_t, 3>;

/// Placement of a voxel grid in world (mm) space. Axis-aligned: voxel
/// (i,j,k) sits at origin + (i,j,k) * spacing.
struct Geometry {
  Dims dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{};

  std::size_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }

  Vec3 world(double i, double j, double k) const {
    return origin + hadamard({i, j, k}, spacing);
  }

  Vec3 to_voxel(const Vec3& p) const {
    const Vec3 d = p - origin;
    return {d.x / spacing.x, d.y / spacing.y, d.z / spacing.z};
  }

  /// World-space corner of the last voxel center.
  Vec3 upper_corner() const {
    return world(static_cast<double>(dims[0] - 1), static_cast<double>(dims[1] - 1),
                 static_cast<double>(dims[2] - 1));
  }

  void validate() const {
    if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0) throw InputError("geometry: all dims must be >= 1");
    if (!(spacing.x > 0.0 && spacing.y > 0.0 && spacing.z > 0.0) || !is_finite(spacing)) {
      throw InputError("geometry: spacing must be positive and finite");
    }
    if (!is_finite(origin)) throw InputError("geometry: origin must be finite");
  }

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

/// Dense scalar field on a Geometry. Values are non-negative activations,
/// x-fastest storage.
class VolumeGrid {
 public:
  explicit VolumeGrid(Geometry geometry) : geometry_(std::move(geometry)) {
    geometry_.validate();
    data_.assign(geometry_.voxel_count(), 0.0);
  }

  VolumeGrid(Geometry geometry, std::vector<double> data)
      : geometry_(std::move(geometry)), data_(std::move(data)) {
    geometry_.validate();
    if (data_.size() != geometry_.voxel_count()) {
      throw InputError("volume: data length " + std::to_string(data_.size()) + " does not match dims (" +
                       std::to_string(geometry_.voxel_count()) + ")");
    }
    for (double v : data_) {
      if (!std::isfinite(v)) throw NonFiniteError("volume: non-finite voxel value");
    }
  }

  const Geometry& geometry() const { return geometry_; }
  const Dims& dims() const { return geometry_.dims; }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + geometry_.dims[0] * (j + geometry_.dims[1] * k);
  }

  double at(std::size_t i, std::size_t j, std::size_t k) const { return data_[index(i, j, k)]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) { return data_[index(i, j, k)]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double max_value() const { return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end()); }

  friend bool operator==(const VolumeGrid&, const VolumeGrid&) = default;

 private:
  Geometry geometry_;
  std::vector<double> data_;
};

/// Precomputed 2x2x2 interpolation stencil for one world point. Grids that
/// share a geometry can reuse it, which is how the rectifier samples all
/// channels at once.
struct TrilinearStencil {
  bool inside{false};
  std::array<std::size_t, 8> offsets{};
  std::array<double, 8> weights{};
  std::array<std::size_t, 3> base{};  // lower corner voxel

  double apply(std::span<const double> data) const {
    if (!inside) return 0.0;
    double acc = 0.0;
    for (int c = 0; c < 8; ++c) acc += weights[c] * data[offsets[c]];
    return acc;
  }
};

inline TrilinearStencil make_stencil(const Geometry& g, const Vec3& p) {
  TrilinearStencil s;
  const Vec3 u = g.to_voxel(p);
  const std::array<double, 3> uc{u.x, u.y, u.z};
  std::array<std::size_t, 3> i0{};
  std::array<double, 3> frac{};
  for (int a = 0; a < 3; ++a) {
    const double hi = static_cast<double>(g.dims[a] - 1);
    // Outside the hull of voxel centers the field is zero; NaN fails here too.
    if (!(uc[a] >= 0.0 && uc[a] <= hi)) return s;
    if (g.dims[a] == 1) {
      i0[a] = 0;
      frac[a] = 0.0;
      continue;
    }
    const double fl = std::min(std::floor(uc[a]), hi - 1.0);
    i0[a] = static_cast<std::size_t>(fl);
    frac[a] = uc[a] - fl;
  }
  const std::size_t sx = 1;
  const std::size_t sy = g.dims[0];
  const std::size_t sz = g.dims[0] * g.dims[1];
  const std::size_t dx = g.dims[0] > 1 ? sx : 0;
  const std::size_t dy = g.dims[1] > 1 ? sy : 0;
  const std::size_t dz = g.dims[2] > 1 ? sz : 0;
  const std::size_t b = i0[0] * sx + i0[1] * sy + i0[2] * sz;
  const double fx = frac[0], fy = frac[1], fz = frac[2];
  s.offsets = {b, b + dx, b + dy, b + dx + dy, b + dz, b + dx + dz, b + dy + dz, b + dx + dy + dz};
  s.weights = {(1 - fx) * (1 - fy) * (1 - fz), fx * (1 - fy) * (1 - fz), (1 - fx) * fy * (1 - fz),
               fx * fy * (1 - fz),             (1 - fx) * (1 - fy) * fz, fx * (1 - fy) * fz,
               (1 - fx) * fy * fz,             fx * fy * fz};
  s.base = i0;
  s.inside = true;
  return s;
}

/// Linear interpolation of g at world point p; zero outside the box spanned
/// by the voxel centers.
inline double trilinear_sample(const VolumeGrid& g, const Vec3& p) {
  return make_stencil(g.geometry(), p).apply(g.data());
}

/// Per-label activation volumes G_1..G_vmax sharing one geometry.
class ActivationStack {
 public:
  ActivationStack(std::vector<VolumeGrid> channels, int v_max = kDefaultVMax)
      : channels_(std::move(channels)), v_max_(v_max) {
    if (v_max_ < 1) throw InputError("activation stack: v_max must be >= 1");
    if (channels_.size() != static_cast<std::size_t>(v_max_)) {
      throw InputError("activation stack: expected " + std::to_string(v_max_) + " channels, got " +
                       std::to_string(channels_.size()));
    }
    for (const auto& c : channels_) {
      if (!(c.geometry() == channels_.front().geometry())) {
        throw InputError("activation stack: channels do not share geometry");
      }
    }
  }

  /// All-zero stack.
  static ActivationStack zeros(const Geometry& geometry, int v_max = kDefaultVMax) {
    return ActivationStack(std::vector<VolumeGrid>(static_cast<std::size_t>(std::max(v_max, 0)), VolumeGrid(geometry)),
                           v_max);
  }

  int v_max() const { return v_max_; }
  const Geometry& geometry() const { return channels_.front().geometry(); }

  /// 1-based label access.
  const VolumeGrid& channel(int v) const { return channels_.at(static_cast<std::size_t>(v - 1)); }
  VolumeGrid& channel(int v) { return channels_.at(static_cast<std::size_t>(v - 1)); }

  std::span<const VolumeGrid> channels() const { return channels_; }

  friend bool operator==(const ActivationStack&, const ActivationStack&) = default;

 private:
  std::vector<VolumeGrid> channels_;
  int v_max_;
};

/// Sum of all channels: activation for "any vertebra center".
inline VolumeGrid combine_channels(const ActivationStack& s) {
  VolumeGrid out(s.geometry());
  auto dst = out.data();
  for (const auto& c : s.channels()) {
    auto src = c.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  return out;
}

/// Voxel index bounding box of the non-zero support of a grid.
struct SupportBox {
  bool empty{true};
  Dims lo{};
  Dims hi{};
};

inline SupportBox support_box(const VolumeGrid& g) {
  SupportBox box;
  const auto& d = g.dims();
  const auto data = g.data();
  std::size_t idx = 0;
  for (std::size_t k = 0; k < d[2]; ++k) {
    for (std::size_t j = 0; j < d[1]; ++j) {
      for (std::size_t i = 0; i < d[0]; ++i, ++idx) {
        if (data[idx] == 0.0) continue;
        if (box.empty) {
          box.lo = {i, j, k};
          box.hi = {i, j, k};
          box.empty = false;
          continue;
        }
        box.lo = {std::min(box.lo[0], i), std::min(box.lo[1], j), std::min(box.lo[2], k)};
        box.hi = {std::max(box.hi[0], i), std::max(box.hi[1], j), std::max(box.hi[2], k)};
      }
    }
  }
  return box;
}

}  // namespace spinerect
