#pragma once

// Signals CSV reader and a minimal SVG line chart for Q-hat / Q_v.

#include <algorithm>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "format.hpp"
#include "labels.hpp"
#include "rectify.hpp"

namespace spinerect {

/// Parses the CSV written by write_signals_csv.
inline SignalSet read_signals_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("signals csv: empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[0] != "z_index" || header[1] != "t_mm" || header[2] != "q_hat") {
    throw InputError("signals csv: expected header z_index,t_mm,q_hat,...");
  }
  const std::size_t channels = header.size() - 3;
  SignalSet s;
  s.channels.resize(channels);
  std::vector<double> t;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InputError("signals csv: bad number on row " + std::to_string(row));
      }
    }
    if (vals.size() != header.size()) throw InputError("signals csv: wrong column count on row " + std::to_string(row));
    t.push_back(vals[1]);
    s.combined.values.push_back(vals[2]);
    for (std::size_t c = 0; c < channels; ++c) s.channels[c].values.push_back(vals[3 + c]);
  }
  const double delta = t.size() >= 2 ? t[1] - t[0] : kDefaultCenterlineStep;
  s.combined.delta = delta;
  for (auto& c : s.channels) c.delta = delta;
  return s;
}

/// SVG chart of Q-hat (black) and the selected channels, with `marks`
/// (sample indices) drawn as circles on Q-hat.
inline std::string render_signals_svg(const SignalSet& s, const std::vector<int>& channels,
                                      const std::vector<std::size_t>& marks, int width = 900, int height = 360) {
  const double pad = 40.0;
  const std::size_t n = s.length();
  double ymax = 0.0;
  for (double v : s.combined.values) ymax = std::max(ymax, v);
  for (int ch : channels) {
    if (ch < 1 || ch > s.v_max()) throw InputError("plot: channel " + std::to_string(ch) + " out of range");
    for (double v : s.q(ch).values) ymax = std::max(ymax, v);
  }
  if (ymax <= 0.0) ymax = 1.0;
  auto px = [&](double i) { return pad + (n > 1 ? i / static_cast<double>(n - 1) : 0.0) * (width - 2 * pad); };
  auto py = [&](double v) { return height - pad - v / ymax * (height - 2 * pad); };
  auto polyline = [&](const std::vector<double>& vals, const std::string& color, const std::string& cls) {
    std::ostringstream os;
    os << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < vals.size(); ++i) {
      os << format_sig(px(static_cast<double>(i)), 5) << ',' << format_sig(py(vals[i]), 5) << ' ';
    }
    os << "\"/>\n";
    return os.str();
  };
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << height - pad << "\" x2=\"" << width - pad << "\" y2=\"" << height - pad
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << height - pad
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 8 << "\" font-size=\"12\" text-anchor=\"middle\">z' (mm: "
     << format_sig(static_cast<double>(n > 0 ? n - 1 : 0) * s.combined.delta, 4) << " total)</text>\n";
  os << polyline(s.combined.values, "black", "q_hat");
  for (std::size_t i = 0; i < channels.size(); ++i) {
    os << polyline(s.q(channels[i]).values, palette[i % 7], "q_" + label_name(channels[i]));
  }
  for (std::size_t m : marks) {
    if (m >= n) continue;
    os << "<circle class=\"peak\" cx=\"" << format_sig(px(static_cast<double>(m)), 5) << "\" cy=\""
       << format_sig(py(s.combined.values[m]), 5) << "\" r=\"4\" fill=\"red\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace spinerect
