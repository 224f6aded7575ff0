#pragma once

// Identification rate and localization error.
//
// Truth vertebra v counts as identified when a prediction labeled v exists,
// that prediction is the nearest prediction to truth v, truth v is the
// nearest truth to it, and the two are within 20 mm. Exact distance ties
// count as nearest for every tied candidate. Errors are averaged over
// identified vertebrae only; standard deviations are population (divide by n).

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "decode.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "heatmap.hpp"
#include "labels.hpp"

namespace spinerect {

inline constexpr double kIdentificationRadiusMm = 20.0;

struct LabeledPoint {
  int label{1};
  Vec3 position{};
};

struct MatchOutcome {
  int label{1};
  bool identified{false};
  double error_mm{std::numeric_limits<double>::quiet_NaN()};  // NaN when no prediction carries the label
};

inline std::vector<MatchOutcome> identify_matches(std::span<const LabeledPoint> pred,
                                                  std::span<const LabeledPoint> truth,
                                                  double radius_mm = kIdentificationRadiusMm) {
  auto check_unique = [](std::span<const LabeledPoint> pts, const char* what) {
    std::set<int> seen;
    for (const auto& p : pts) {
      if (!seen.insert(p.label).second) {
        throw InputError(std::string("identify_matches: duplicate label ") + std::to_string(p.label) + " in " + what);
      }
    }
  };
  check_unique(pred, "predictions");
  check_unique(truth, "truth");

  std::vector<MatchOutcome> out;
  out.reserve(truth.size());
  for (const auto& t : truth) {
    MatchOutcome o{t.label, false, std::numeric_limits<double>::quiet_NaN()};
    const auto it = std::find_if(pred.begin(), pred.end(), [&](const auto& p) { return p.label == t.label; });
    if (it != pred.end()) {
      const double d = distance(it->position, t.position);
      o.error_mm = d;
      const bool pred_is_nearest =
          std::all_of(pred.begin(), pred.end(), [&](const auto& p) { return d <= distance(p.position, t.position); });
      const bool truth_is_nearest = std::all_of(
          truth.begin(), truth.end(), [&](const auto& q) { return d <= distance(q.position, it->position); });
      o.identified = pred_is_nearest && truth_is_nearest && d <= radius_mm;
    }
    out.push_back(o);
  }
  return out;
}

inline std::vector<LabeledPoint> to_points(std::span<const Prediction> preds) {
  std::vector<LabeledPoint> out;
  for (const auto& p : preds) out.push_back({p.label, p.position});
  return out;
}

inline std::vector<LabeledPoint> to_points(std::span<const VertebraAnnotation> truth) {
  std::vector<LabeledPoint> out;
  for (const auto& a : truth) out.push_back({a.label, a.center});
  return out;
}

struct RegionStats {
  std::size_t identified{0};
  std::size_t total{0};
  std::optional<double> id_rate;        // empty when total == 0
  std::optional<double> mean_error_mm;  // empty when nothing identified
  std::optional<double> std_error_mm;
};

struct EvalReport {
  // Keys: Cervical, Thoracic, Lumbar, Sacrum, All.
  std::map<std::string, RegionStats> regions;
  // Per label 1..26: (identified, total).
  std::array<std::pair<std::size_t, std::size_t>, kDefaultVMax> per_vertebra{};

  const RegionStats& all() const { return regions.at("All"); }
};

inline const std::array<std::string, 5>& report_region_order() {
  static const std::array<std::string, 5> order{"Cervical", "Thoracic", "Lumbar", "Sacrum", "All"};
  return order;
}

/// Aggregates outcomes (from any number of cases) per region and overall.
inline EvalReport report(std::span<const MatchOutcome> outcomes) {
  std::map<std::string, std::vector<double>> errors;
  EvalReport r;
  for (const auto& name : report_region_order()) r.regions[name] = {};
  for (const auto& o : outcomes) {
    const std::string region(region_name(region_of(o.label)));
    for (const std::string& key : {region, std::string("All")}) {
      auto& s = r.regions[key];
      ++s.total;
      if (o.identified) {
        ++s.identified;
        errors[key].push_back(o.error_mm);
      }
    }
    if (o.label >= 1 && o.label <= kDefaultVMax) {
      auto& pv = r.per_vertebra[static_cast<std::size_t>(o.label - 1)];
      ++pv.second;
      if (o.identified) ++pv.first;
    }
  }
  for (auto& [key, s] : r.regions) {
    if (s.total > 0) s.id_rate = static_cast<double>(s.identified) / static_cast<double>(s.total);
    const auto& e = errors[key];
    if (e.empty()) continue;
    double mean = 0.0;
    for (double x : e) mean += x;
    mean /= static_cast<double>(e.size());
    double var = 0.0;
    for (double x : e) var += (x - mean) * (x - mean);
    var /= static_cast<double>(e.size());
    s.mean_error_mm = mean;
    s.std_error_mm = std::sqrt(var);
  }
  return r;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(round_sig(*v)) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["std_convention"] = "population";
  j["identification_radius_mm"] = kIdentificationRadiusMm;
  for (const auto& name : report_region_order()) {
    const auto& s = r.regions.at(name);
    j["regions"][name] = {{"identified", s.identified},
                          {"total", s.total},
                          {"id_rate", opt(s.id_rate)},
                          {"mean_error_mm", opt(s.mean_error_mm)},
                          {"std_error_mm", opt(s.std_error_mm)}};
  }
  auto per = nlohmann::json::array();
  for (int v = 1; v <= kDefaultVMax; ++v) {
    const auto& [id, total] = r.per_vertebra[static_cast<std::size_t>(v - 1)];
    if (total == 0) continue;
    per.push_back({{"label", v},
                   {"name", label_name(v)},
                   {"identified", id},
                   {"total", total},
                   {"id_rate", round_sig(static_cast<double>(id) / static_cast<double>(total))}});
  }
  j["per_vertebra"] = std::move(per);
  return j;
}

/// Aligned text table: one row per region with mean error, std and id rate.
inline std::string report_table(const EvalReport& r, const std::string& title = "") {
  std::ostringstream os;
  if (!title.empty()) os << title << '\n';
  os << "(std: population; errors over identified vertebrae; id radius 20 mm)\n";
  os << std::left << std::setw(10) << "Region" << std::right << std::setw(12) << "MeanErr" << std::setw(10) << "Std"
     << std::setw(10) << "IdRate" << std::setw(12) << "Count" << '\n';
  auto cell = [](const std::optional<double>& v, double scale, int prec) {
    if (!v) return std::string("n/a");
    std::ostringstream c;
    c << std::fixed << std::setprecision(prec) << *v * scale;
    return c.str();
  };
  for (const auto& name : report_region_order()) {
    const auto& s = r.regions.at(name);
    os << std::left << std::setw(10) << name << std::right << std::setw(12) << cell(s.mean_error_mm, 1.0, 2)
       << std::setw(10) << cell(s.std_error_mm, 1.0, 2) << std::setw(10) << cell(s.id_rate, 100.0, 1)
       << std::setw(12) << (std::to_string(s.identified) + "/" + std::to_string(s.total)) << '\n';
  }
  return os.str();
}

}  // namespace spinerect
