#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <span>
#include <vector>

#include "errors.hpp"
#include "vec3.hpp"
#include "volume.hpp"

namespace spinerect {

inline constexpr double kDefaultCenterlineThreshold = 0.5;
inline constexpr double kDefaultCenterlineStep = 1.0;
inline constexpr int kDefaultSmoothWindow = 11;
inline constexpr double kDefaultCenterlineExtension = 10.0;  // mm past each traced end

/// One sample of the spine curve with its moving frame. e3 is the tangent;
/// e1, e2 span the normal plane.
struct FrameSample {
  double t{0.0};
  Vec3 point{};
  Vec3 e1{};
  Vec3 e2{};
  Vec3 e3{};
};

/// Arc-length parameterized spine curve, t_i = i * step.
struct Centerline {
  std::vector<FrameSample> samples;
  double step{kDefaultCenterlineStep};
  bool has_frames{false};

  std::size_t size() const { return samples.size(); }
  double length() const { return samples.empty() ? 0.0 : samples.back().t; }
};

/// Mass centers of the axial slices of `g_hat`: for every z slice with at
/// least one voxel strictly above `threshold`, the mean world position of
/// those voxels. Ordered by increasing z; empty slices are skipped.
inline std::vector<Vec3> trace_centerline(const VolumeGrid& g_hat, double threshold = kDefaultCenterlineThreshold) {
  const auto& geo = g_hat.geometry();
  const auto& d = geo.dims;
  std::vector<Vec3> polyline;
  for (std::size_t k = 0; k < d[2]; ++k) {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < d[1]; ++j) {
      for (std::size_t i = 0; i < d[0]; ++i) {
        if (g_hat.at(i, j, k) > threshold) {
          sx += static_cast<double>(i);
          sy += static_cast<double>(j);
          ++n;
        }
      }
    }
    if (n == 0) continue;
    const double dn = static_cast<double>(n);
    polyline.push_back(geo.world(sx / dn, sy / dn, static_cast<double>(k)));
  }
  if (polyline.size() < 2) {
    throw CenterlineUndefinedError("centerline: only " + std::to_string(polyline.size()) +
                                   " axial slice(s) exceed the activation threshold");
  }
  return polyline;
}

/// Prolongs the polyline by `length_mm` at both ends along the chord of
/// its first / last few points, so structures at the traced ends are
/// resampled with their full falloff.
inline std::vector<Vec3> extend_polyline(std::vector<Vec3> polyline, double length_mm, std::size_t chord = 5) {
  if (polyline.size() < 2 || !(length_mm > 0.0)) return polyline;
  const std::size_t m = std::min(chord, polyline.size() - 1);
  const Vec3 head = normalized(polyline[0] - polyline[m]);
  const Vec3 tail = normalized(polyline.back() - polyline[polyline.size() - 1 - m]);
  polyline.insert(polyline.begin(), polyline.front() + head * length_mm);
  polyline.push_back(polyline.back() + tail * length_mm);
  return polyline;
}

/// Moving-average smoothing (window shrinks symmetrically at the ends so
/// endpoints stay put), then resampling at uniform arc length `step`.
inline Centerline resample_and_smooth(std::span<const Vec3> polyline, double step = kDefaultCenterlineStep,
                                      int smooth_window = kDefaultSmoothWindow) {
  if (polyline.size() < 2) throw CenterlineUndefinedError("centerline: need at least 2 points");
  if (!(step > 0.0)) throw InputError("centerline: step must be > 0");
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(polyline.size());
  const std::ptrdiff_t half = std::max(0, smooth_window) / 2;

  std::vector<Vec3> smooth(polyline.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t h = std::min({half, i, n - 1 - i});
    Vec3 acc{};
    for (std::ptrdiff_t j = i - h; j <= i + h; ++j) acc += polyline[static_cast<std::size_t>(j)];
    smooth[static_cast<std::size_t>(i)] = acc / static_cast<double>(2 * h + 1);
  }

  std::vector<double> cum(smooth.size(), 0.0);
  for (std::size_t i = 1; i < smooth.size(); ++i) cum[i] = cum[i - 1] + distance(smooth[i], smooth[i - 1]);
  const double total = cum.back();
  if (!(total > 0.0)) throw CenterlineUndefinedError("centerline: polyline has zero length");

  Centerline c;
  c.step = step;
  const auto count = static_cast<std::size_t>(std::floor(total / step + 1e-9)) + 1;
  c.samples.reserve(count);
  std::size_t seg = 0;
  for (std::size_t s = 0; s < count; ++s) {
    const double t = static_cast<double>(s) * step;
    while (seg + 2 < cum.size() && cum[seg + 1] < t) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double f = len > 0.0 ? std::clamp((t - cum[seg]) / len, 0.0, 1.0) : 0.0;
    c.samples.push_back(FrameSample{t, smooth[seg] + (smooth[seg + 1] - smooth[seg]) * f, {}, {}, {}});
  }
  return c;
}

/// Fills the moving frames: e3 = finite-difference tangent along increasing
/// t, e2 = unit normal-plane direction closest to the image y axis,
/// e1 = e2 x e3.
inline Centerline compute_frames(Centerline c) {
  const std::size_t n = c.samples.size();
  if (n < 2) throw CenterlineUndefinedError("centerline: need at least 2 samples for frames");
  const Vec3 y_axis{0.0, 1.0, 0.0};
  const Vec3 x_axis{1.0, 0.0, 0.0};
  const double degenerate_cos = std::cos(std::numbers::pi / 180.0);

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? n - 1 : i + 1;
    Vec3 tangent = normalized(c.samples[b].point - c.samples[a].point);
    if (norm(tangent) == 0.0) tangent = i > 0 ? c.samples[i - 1].e3 : Vec3{0.0, 0.0, 1.0};
    auto& s = c.samples[i];
    s.e3 = tangent;

    Vec3 reference = y_axis;
    if (std::abs(dot(tangent, y_axis)) > degenerate_cos) {
      // Minimum-angle rule is undefined; carry the previous e2 forward.
      reference = i > 0 ? c.samples[i - 1].e2 : x_axis;
    }
    Vec3 e2 = normalized(reference - tangent * dot(reference, tangent));
    if (norm(e2) == 0.0) e2 = normalized(x_axis - tangent * dot(x_axis, tangent));
    s.e2 = e2;
    s.e1 = cross(e2, tangent);
  }
  c.has_frames = true;
  return c;
}

/// Position on the curve at arc length t, linear between samples.
inline Vec3 point_at(const Centerline& c, double t) {
  if (c.samples.empty()) throw RangeError("centerline: empty");
  const double u = t / c.step;
  const double last = static_cast<double>(c.samples.size() - 1);
  if (!(u >= 0.0 && u <= last)) throw RangeError("centerline: t out of range");
  const auto i = static_cast<std::size_t>(std::min(std::floor(u), std::max(last - 1.0, 0.0)));
  if (i + 1 >= c.samples.size()) return c.samples[i].point;
  const double f = u - static_cast<double>(i);
  return c.samples[i].point + (c.samples[i + 1].point - c.samples[i].point) * f;
}

/// Debug dump: t,px,py,pz,e1x,e1y,e1z,e2x,e2y,e2z,e3x,e3y,e3z.
inline void write_centerline_csv(const Centerline& c, std::ostream& os) {
  os << "t,px,py,pz,e1x,e1y,e1z,e2x,e2y,e2z,e3x,e3y,e3z\n";
  os.precision(9);
  for (const auto& s : c.samples) {
    os << s.t << ',' << s.point.x << ',' << s.point.y << ',' << s.point.z << ',' << s.e1.x << ',' << s.e1.y << ','
       << s.e1.z << ',' << s.e2.x << ',' << s.e2.y << ',' << s.e2.z << ',' << s.e3.x << ',' << s.e3.y << ','
       << s.e3.z << '\n';
  }
}

}  // namespace spinerect
