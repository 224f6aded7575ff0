#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "centerline.hpp"
#include "errors.hpp"
#include "volume.hpp"

namespace spinerect {

inline constexpr double kDefaultDelta = 1.0;
inline constexpr double kDefaultCrossHalfExtent = 48.0;
inline constexpr double kDefaultSignalSigma = 2.0;  // samples

struct RectifyParams {
  double delta{kDefaultDelta};                        // in-plane sampling step, mm
  double cross_half_extent{kDefaultCrossHalfExtent};  // half width of the normal plane, mm

  int half_count() const { return static_cast<int>(std::floor(cross_half_extent / delta + 1e-9)); }

  void validate() const {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw InputError("rectify: delta must be > 0");
    if (!(cross_half_extent > 0.0) || !std::isfinite(cross_half_extent)) {
      throw InputError("rectify: cross_half_extent must be > 0");
    }
  }
};

/// Channels resampled in the centerline's normal planes. Each grid lives in
/// rectified coordinates: x along e1, y along e2 (both centered on the
/// curve), z indexing centerline samples.
struct RectifiedStack {
  std::vector<VolumeGrid> channels;
  VolumeGrid combined;
  double delta{kDefaultDelta};
  double cross_half_extent{kDefaultCrossHalfExtent};
  std::size_t length{0};
};

/// 1-D activation along the rectified spine axis.
struct Signal1D {
  std::vector<double> values;
  double delta{kDefaultCenterlineStep};  // mm per sample

  std::size_t size() const { return values.size(); }

  /// Linear interpolation at fractional sample position k in [0, size-1].
  double at(double k) const {
    const double last = static_cast<double>(values.size()) - 1.0;
    if (values.empty() || !(k >= 0.0 && k <= last)) throw RangeError("signal: position out of range");
    const auto i = static_cast<std::size_t>(std::floor(k));
    if (i + 1 >= values.size()) return values[i];
    const double f = k - static_cast<double>(i);
    return f == 0.0 ? values[i] : values[i] * (1.0 - f) + values[i + 1] * f;
  }
};

/// Q_1..Q_vmax plus the combined signal.
struct SignalSet {
  std::vector<Signal1D> channels;
  Signal1D combined;

  int v_max() const { return static_cast<int>(channels.size()); }
  const Signal1D& q(int v) const { return channels.at(static_cast<std::size_t>(v - 1)); }
  std::size_t length() const { return combined.size(); }
};

inline Geometry rectified_geometry(const Centerline& c, const RectifyParams& p) {
  const int n = p.half_count();
  Geometry g;
  g.dims = {static_cast<std::size_t>(2 * n + 1), static_cast<std::size_t>(2 * n + 1), c.size()};
  g.spacing = {p.delta, p.delta, c.step};
  g.origin = {-n * p.delta, -n * p.delta, 0.0};
  return g;
}

inline void check_centerline(const Centerline& c) {
  if (!c.has_frames || c.samples.size() < 2) throw InputError("rectify: centerline needs >= 2 samples with frames");
}

/// World position of rectified sample (x_off, y_off) in plane z'.
inline Vec3 rectified_to_world(const FrameSample& s, double delta, int x_off, int y_off) {
  return s.point + s.e1 * (delta * x_off) + s.e2 * (delta * y_off);
}

/// Resamples one channel in the normal planes of c.
inline VolumeGrid rectify_channel(const VolumeGrid& g, const Centerline& c, const RectifyParams& p) {
  check_centerline(c);
  p.validate();
  VolumeGrid out(rectified_geometry(c, p));
  const int n = p.half_count();
  for (std::size_t z = 0; z < c.size(); ++z) {
    const auto& s = c.samples[z];
    for (int y = -n; y <= n; ++y) {
      for (int x = -n; x <= n; ++x) {
        out.at(static_cast<std::size_t>(x + n), static_cast<std::size_t>(y + n), z) =
            trilinear_sample(g, rectified_to_world(s, p.delta, x, y));
      }
    }
  }
  return out;
}

inline RectifiedStack rectify_stack(const ActivationStack& s, const Centerline& c, const RectifyParams& p = {}) {
  check_centerline(c);
  p.validate();
  std::vector<VolumeGrid> channels;
  channels.reserve(s.channels().size());
  for (const auto& g : s.channels()) channels.push_back(rectify_channel(g, c, p));
  VolumeGrid combined = rectify_channel(combine_channels(s), c, p);
  return RectifiedStack{std::move(channels), std::move(combined), p.delta, p.cross_half_extent, c.size()};
}

/// Gaussian smoothing with edge clamping; sigma in samples, 0 disables.
inline std::vector<double> gaussian_smooth(const std::vector<double>& v, double sigma) {
  if (!(sigma > 0.0) || v.empty()) return v;
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i * i) / (sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (auto& w : kernel) w /= sum;
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  std::vector<double> out(v.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = -radius; j <= radius; ++j) {
      const std::ptrdiff_t idx = std::clamp<std::ptrdiff_t>(i + j, 0, n - 1);
      acc += kernel[static_cast<std::size_t>(j + radius)] * v[static_cast<std::size_t>(idx)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

/// Sums a rectified grid over its normal plane, one value per z'.
inline std::vector<double> plane_sums(const VolumeGrid& r) {
  const auto& d = r.dims();
  std::vector<double> q(d[2], 0.0);
  const auto data = r.data();
  const std::size_t plane = d[0] * d[1];
  for (std::size_t z = 0; z < d[2]; ++z) {
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += data[z * plane + i];
    q[z] = acc;
  }
  return q;
}

/// Q_v(z') = sum over the normal plane of G'_v, optionally Gaussian smoothed.
inline SignalSet aggregate_1d(const RectifiedStack& r, double step, double smooth_sigma = kDefaultSignalSigma) {
  SignalSet out;
  for (const auto& g : r.channels) out.channels.push_back({gaussian_smooth(plane_sums(g), smooth_sigma), step});
  out.combined = {gaussian_smooth(plane_sums(r.combined), smooth_sigma), step};
  return out;
}

/// Equivalent to aggregate_1d(rectify_stack(s, c, p)) without materializing
/// the rectified volumes. The interpolation stencil is computed once per
/// sample point and channels whose support misses a plane are skipped.
inline SignalSet compute_signals(const ActivationStack& s, const Centerline& c, const RectifyParams& p = {},
                                 double smooth_sigma = kDefaultSignalSigma) {
  check_centerline(c);
  p.validate();
  const auto& geo = s.geometry();
  const VolumeGrid combined = combine_channels(s);
  const int n = p.half_count();
  const int v_max = s.v_max();

  std::vector<SupportBox> boxes;
  boxes.reserve(static_cast<std::size_t>(v_max) + 1);
  for (const auto& g : s.channels()) boxes.push_back(support_box(g));
  boxes.push_back(support_box(combined));

  std::vector<const VolumeGrid*> grids;
  for (const auto& g : s.channels()) grids.push_back(&g);
  grids.push_back(&combined);

  std::vector<std::vector<double>> sums(grids.size(), std::vector<double>(c.size(), 0.0));
  std::vector<std::size_t> active;
  const double reach = n * p.delta;
  for (std::size_t z = 0; z < c.size(); ++z) {
    const auto& fs = c.samples[z];
    // Voxel-space bounding box of this normal plane.
    const Vec3 ext{reach * (std::abs(fs.e1.x) + std::abs(fs.e2.x)), reach * (std::abs(fs.e1.y) + std::abs(fs.e2.y)),
                   reach * (std::abs(fs.e1.z) + std::abs(fs.e2.z))};
    const Vec3 lo = geo.to_voxel(fs.point - ext);
    const Vec3 hi = geo.to_voxel(fs.point + ext);
    active.clear();
    for (std::size_t ch = 0; ch < boxes.size(); ++ch) {
      const auto& b = boxes[ch];
      if (b.empty) continue;
      if (std::floor(lo.x) > static_cast<double>(b.hi[0]) || std::ceil(hi.x) < static_cast<double>(b.lo[0]) ||
          std::floor(lo.y) > static_cast<double>(b.hi[1]) || std::ceil(hi.y) < static_cast<double>(b.lo[1]) ||
          std::floor(lo.z) > static_cast<double>(b.hi[2]) || std::ceil(hi.z) < static_cast<double>(b.lo[2])) {
        continue;
      }
      active.push_back(ch);
    }
    if (active.empty()) continue;
    for (int y = -n; y <= n; ++y) {
      for (int x = -n; x <= n; ++x) {
        const TrilinearStencil st = make_stencil(geo, rectified_to_world(fs, p.delta, x, y));
        if (!st.inside) continue;
        for (std::size_t ch : active) sums[ch][z] += st.apply(grids[ch]->data());
      }
    }
  }

  SignalSet out;
  for (int v = 0; v < v_max; ++v) {
    out.channels.push_back({gaussian_smooth(sums[static_cast<std::size_t>(v)], smooth_sigma), c.step});
  }
  out.combined = {gaussian_smooth(sums.back(), smooth_sigma), c.step};
  return out;
}

/// World position of a (fractional) rectified index z'. Detections are
/// placed on the centerline itself.
inline Vec3 map_back(double z_prime, const Centerline& c) {
  const double last = static_cast<double>(c.size()) - 1.0;
  if (c.samples.empty() || !(z_prime >= 0.0 && z_prime <= last)) {
    throw RangeError("map_back: index " + std::to_string(z_prime) + " outside [0, " + std::to_string(last) + "]");
  }
  return point_at(c, z_prime * c.step);
}

/// CSV with columns z_index, t_mm, q_hat, q_01..q_<vmax>.
inline void write_signals_csv(const SignalSet& s, std::ostream& os) {
  os << "z_index,t_mm,q_hat";
  for (int v = 1; v <= s.v_max(); ++v) os << ",q_" << (v < 10 ? "0" : "") << v;
  os << '\n';
  os.precision(9);
  for (std::size_t z = 0; z < s.length(); ++z) {
    os << z << ',' << static_cast<double>(z) * s.combined.delta << ',' << s.combined.values[z];
    for (const auto& q : s.channels) os << ',' << q.values[z];
    os << '\n';
  }
}

}  // namespace spinerect
