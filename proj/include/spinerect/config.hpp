#pragma once

// Run configuration: every pipeline tunable, loadable from a key = value file.
//
//   # comment
//   mode = optim
//   delta = 1.0
//   step_schedule = [4, 2, 1]
//   anchor_labels = C1, C2, S1, S2

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "centerline.hpp"
#include "decode.hpp"
#include "errors.hpp"
#include "labels.hpp"
#include "optimize.hpp"
#include "rectify.hpp"

namespace spinerect {

struct RunConfig {
  Mode mode{Mode::optim};

  double centerline_threshold{kDefaultCenterlineThreshold};
  double centerline_step{kDefaultCenterlineStep};
  int smooth_window{kDefaultSmoothWindow};
  double centerline_extension{kDefaultCenterlineExtension};
  bool caudal_positive_z{true};  // labels increase toward +z

  RectifyParams rectify{};
  double sigma_smooth{kDefaultSignalSigma};

  PeakConfig peaks{};
  double anchor_weight{kDefaultAnchorWeight};
  double base_weight{kDefaultBaseWeight};
  std::vector<int> anchor_labels{default_anchor_labels()};
  bool reg_range_literal{false};
  std::vector<double> step_schedule{default_step_schedule()};
  int max_iters{kDefaultMaxIters};
  ExpansionScoring expansion{ExpansionScoring::fixed_offset};
  double presence_threshold{kDefaultPresenceFraction};

  std::uint64_t seed{0};
  int jobs{1};

  EnergyConfig energy_config(int v_max = kDefaultVMax) const {
    std::vector<int> anchors;
    for (int a : anchor_labels) {
      if (a <= v_max) anchors.push_back(a);
    }
    EnergyConfig cfg = EnergyConfig::with_anchors(v_max, anchor_weight, base_weight, anchors);
    cfg.reg_range_literal = reg_range_literal;
    return cfg;
  }

  SolveOptions solve_options() const { return SolveOptions{peaks, step_schedule, max_iters, expansion}; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be > 0");
    };
    positive(centerline_threshold, "centerline_threshold");
    positive(centerline_step, "centerline_step");
    positive(rectify.delta, "delta");
    positive(rectify.cross_half_extent, "cross_half_extent");
    if (!(centerline_extension >= 0.0)) throw ConfigError("centerline_extension must be >= 0");
    if (smooth_window < 1) throw ConfigError("smooth_window must be >= 1");
    if (!(sigma_smooth >= 0.0)) throw ConfigError("sigma_smooth must be >= 0");
    if (!(peaks.min_separation_mm >= 0.0)) throw ConfigError("peak_separation_mm must be >= 0");
    if (!(peaks.min_prominence_fraction >= 0.0 && peaks.min_prominence_fraction <= 1.0)) {
      throw ConfigError("peak_prominence must be in [0,1]");
    }
    positive(anchor_weight, "anchor_weight");
    positive(base_weight, "base_weight");
    for (int a : anchor_labels) {
      if (a < 1 || a > kDefaultVMax) throw ConfigError("anchor label out of range");
    }
    if (step_schedule.empty()) throw ConfigError("step_schedule must not be empty");
    for (double s : step_schedule) positive(s, "step_schedule entries");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
    if (!(presence_threshold >= 0.0 && presence_threshold <= 1.0)) {
      throw ConfigError("presence_threshold must be in [0,1]");
    }
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string unquote(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + ": expected a number, got '" + v + "'");
  }
}

inline int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError("config: " + key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("config: " + key + ": expected true/false, got '" + v + "'");
}

inline std::vector<std::string> parse_list(std::string v) {
  v = trim(v);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ConfigError("config: unterminated list '" + v + "'");
    v = v.substr(1, v.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = unquote(trim(item));
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline int parse_label(const std::string& key, const std::string& v) {
  if (const auto l = label_from_name(v)) return *l;
  return parse_int(key, v);
}

}  // namespace detail

/// Applies one key = value setting. Unknown keys are an error.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& raw) {
  using namespace detail;
  const std::string v = unquote(trim(raw));
  if (key == "mode") cfg.mode = parse_mode(v);
  else if (key == "centerline_threshold" || key == "threshold") cfg.centerline_threshold = parse_double(key, v);
  else if (key == "centerline_step") cfg.centerline_step = parse_double(key, v);
  else if (key == "smooth_window") cfg.smooth_window = parse_int(key, v);
  else if (key == "centerline_extension") cfg.centerline_extension = parse_double(key, v);
  else if (key == "caudal_direction") {
    if (v == "+z") cfg.caudal_positive_z = true;
    else if (v == "-z") cfg.caudal_positive_z = false;
    else throw ConfigError("config: caudal_direction must be +z or -z");
  } else if (key == "delta") cfg.rectify.delta = parse_double(key, v);
  else if (key == "cross_half_extent") cfg.rectify.cross_half_extent = parse_double(key, v);
  else if (key == "sigma_smooth") cfg.sigma_smooth = parse_double(key, v);
  else if (key == "peak_separation_mm") cfg.peaks.min_separation_mm = parse_double(key, v);
  else if (key == "peak_prominence") cfg.peaks.min_prominence_fraction = parse_double(key, v);
  else if (key == "anchor_weight") cfg.anchor_weight = parse_double(key, v);
  else if (key == "base_weight") cfg.base_weight = parse_double(key, v);
  else if (key == "anchor_labels") {
    cfg.anchor_labels.clear();
    for (const auto& item : parse_list(raw)) cfg.anchor_labels.push_back(parse_label(key, item));
  } else if (key == "reg_range_literal") cfg.reg_range_literal = parse_bool(key, v);
  else if (key == "step_schedule") {
    cfg.step_schedule.clear();
    for (const auto& item : parse_list(raw)) cfg.step_schedule.push_back(parse_double(key, item));
  } else if (key == "max_iters") cfg.max_iters = parse_int(key, v);
  else if (key == "expansion") {
    if (v == "fixed") cfg.expansion = ExpansionScoring::fixed_offset;
    else if (v == "reoffset") cfg.expansion = ExpansionScoring::reoffset;
    else throw ConfigError("config: expansion must be fixed or reoffset");
  } else if (key == "presence_threshold") cfg.presence_threshold = parse_double(key, v);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_double(key, v));
  else if (key == "jobs") cfg.jobs = parse_int(key, v);
  else throw ConfigError("config: unknown key '" + key + "'");
}

inline RunConfig parse_config(std::istream& is, RunConfig cfg = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty() || line.front() == '[') continue;  // blank or TOML table header
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig cfg = {}) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  return parse_config(is, std::move(cfg));
}

}  // namespace spinerect
