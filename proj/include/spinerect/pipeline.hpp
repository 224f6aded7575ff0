#pragma once

// End-to-end case processing: stack -> centerline -> 1-D signals -> labels.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "centerline.hpp"
#include "config.hpp"
#include "decode.hpp"
#include "format.hpp"
#include "labels.hpp"
#include "rectify.hpp"
#include "volume.hpp"

namespace spinerect {

/// Everything the 1-D decoders need from one case.
struct CaseAnalysis {
  Centerline centerline;
  SignalSet signals;
};

inline Centerline extract_centerline(const VolumeGrid& g_hat, const RunConfig& cfg) {
  std::vector<Vec3> poly = trace_centerline(g_hat, cfg.centerline_threshold);
  if (!cfg.caudal_positive_z) std::reverse(poly.begin(), poly.end());
  poly = extend_polyline(std::move(poly), cfg.centerline_extension);
  return compute_frames(resample_and_smooth(poly, cfg.centerline_step, cfg.smooth_window));
}

inline CaseAnalysis analyze_case(const ActivationStack& stack, const RunConfig& cfg) {
  CaseAnalysis a{extract_centerline(combine_channels(stack), cfg), {}};
  a.signals = compute_signals(stack, a.centerline, cfg.rectify, cfg.sigma_smooth);
  return a;
}

inline Decoded decode_mode(const ActivationStack& stack, const CaseAnalysis& a, const RunConfig& cfg, Mode mode) {
  switch (mode) {
    case Mode::base:
      return decode_base(stack, cfg.presence_threshold, {0.0, 0.0, cfg.caudal_positive_z ? 1.0 : -1.0});
    case Mode::rect:
      return decode_rect(a.signals, a.centerline, cfg.presence_threshold);
    case Mode::order:
      return decode_order(EnergyModel(a.signals, cfg.energy_config(stack.v_max())), a.centerline, cfg.peaks);
    case Mode::optim:
      return decode_optim(EnergyModel(a.signals, cfg.energy_config(stack.v_max())), a.centerline,
                          cfg.solve_options());
  }
  throw ConfigError("unknown mode");
}

/// Runs cfg.mode on one stack. The base mode skips rectification.
inline Decoded infer(const ActivationStack& stack, const RunConfig& cfg) {
  if (cfg.mode == Mode::base) return decode_mode(stack, CaseAnalysis{}, cfg, Mode::base);
  return decode_mode(stack, analyze_case(stack, cfg), cfg, cfg.mode);
}

inline nlohmann::json predictions_to_json(const std::string& case_name, const Decoded& d) {
  nlohmann::json j;
  j["case"] = case_name;
  j["mode"] = std::string(mode_name(d.mode));
  j["energy"] = d.energy ? nlohmann::json(round_sig(*d.energy)) : nlohmann::json(nullptr);
  j["anatomically_plausible"] = d.plausible;
  auto arr = nlohmann::json::array();
  for (const auto& p : d.vertebrae) {
    arr.push_back({{"label", p.label},
                   {"name", label_name(p.label)},
                   {"x_mm", round_sig(p.position.x)},
                   {"y_mm", round_sig(p.position.y)},
                   {"z_mm", round_sig(p.position.z)},
                   {"activation", round_sig(p.activation)}});
  }
  j["vertebrae"] = std::move(arr);
  return j;
}

inline std::vector<Prediction> predictions_from_json(const nlohmann::json& j) {
  std::vector<Prediction> out;
  try {
    for (const auto& e : j.at("vertebrae")) {
      Prediction p;
      p.label = e.at("label").get<int>();
      p.position = {e.at("x_mm").get<double>(), e.at("y_mm").get<double>(), e.at("z_mm").get<double>()};
      p.activation = e.value("activation", 0.0);
      out.push_back(p);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("predictions: ") + ex.what());
  }
  return out;
}

inline std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path.string());
  try {
    return predictions_from_json(nlohmann::json::parse(is));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace spinerect
