// spinerect: synthetic phantoms, inference, evaluation, rectification, plots.
//
//   spinerect synth   --out data --cases 20 --seed 7 --label-shift 0.2
//   spinerect infer   data --out pred --mode optim --jobs 4
//   spinerect eval    pred data --out report
//   spinerect rectify data/case_000 --out rect --dump-centerline
//   spinerect plot    rect/signals.csv --out q.svg --channels T1,T2

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinerect/spinerect.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spinerect;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitCase = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open " + path.string() + " for writing");
  os << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// Runs fn(i) for i in [0, n) on at most `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto width = static_cast<std::size_t>(std::max(1, jobs));
  if (width == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(width, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string case_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case_%03zu", i);
  return buf;
}

// A case directory holds stack/. A dataset directory holds case directories.
std::vector<fs::path> list_cases(const fs::path& input) {
  if (!fs::is_directory(input)) throw InputError("not a directory: " + input.string());
  if (fs::is_directory(input / "stack")) return {input};
  std::vector<fs::path> cases;
  for (const auto& e : fs::directory_iterator(input)) {
    if (e.is_directory() && fs::is_directory(e.path() / "stack")) cases.push_back(e.path());
  }
  std::sort(cases.begin(), cases.end());
  if (cases.empty()) throw InputError("no case directories (with stack/) under " + input.string());
  return cases;
}

std::vector<int> parse_label_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (const auto v = label_from_name(item)) {
      out.push_back(*v);
    } else {
      try {
        out.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw UsageError("unknown label '" + item + "'");
      }
    }
  }
  return out;
}

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::optional<int> jobs;

  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : load_config(config);
    if (seed) cfg.seed = *seed;
    if (!mode.empty()) cfg.mode = parse_mode(mode);
    if (jobs) cfg.jobs = *jobs;
    cfg.validate();
    return cfg;
  }
};

void add_common(CLI::App* sub, CommonOptions& o, bool with_mode) {
  sub->add_option("--config", o.config, "key = value config file")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "random seed");
  if (with_mode) sub->add_option("--mode", o.mode, "base | rect | order | optim");
  sub->add_option("--jobs", o.jobs, "worker threads");
}

// --- synth ------------------------------------------------------------------

struct SynthOptions {
  std::string out;
  int cases{1};
  std::string spec_file;
  std::string start;
  std::optional<int> count;
  std::optional<double> amplitude;
  std::optional<double> bow;
  bool anchored{false};
  double label_shift{0.0};
  double dropout{0.0};
  double jitter{0.0};
  std::vector<double> crop;
  double background{0.0};
  std::optional<double> sigma;
};

int run_synth(const SynthOptions& o, const CommonOptions& common) {
  const RunConfig cfg = common.resolve();
  if (o.cases < 1) throw UsageError("--cases must be >= 1");
  if (o.count && *o.count < 1) throw UsageError("--count must be >= 1");

  NoiseSpec noise;
  noise.label_shift_prob = o.label_shift;
  noise.dropout_prob = o.dropout;
  noise.jitter_sigma_mm = o.jitter;
  noise.background_noise = o.background;
  if (!o.crop.empty()) {
    if (o.crop.size() != 2) throw UsageError("--crop takes two fractions: lo hi");
    noise.crop = std::pair{o.crop[0], o.crop[1]};
  }

  std::optional<PhantomSpec> fixed;
  if (!o.spec_file.empty()) {
    std::ifstream is(o.spec_file);
    if (!is) throw UsageError("cannot open " + o.spec_file);
    try {
      fixed = phantom_spec_from_json(json::parse(is));
    } catch (const json::exception& e) {
      throw UsageError(o.spec_file + ": " + e.what());
    }
  } else if (o.count || !o.start.empty()) {
    fixed = PhantomSpec{};
  }
  if (fixed) {
    if (!o.start.empty()) {
      const auto v = label_from_name(o.start);
      if (!v) throw UsageError("unknown --start label '" + o.start + "'");
      fixed->start_label = *v;
    }
    if (o.count) fixed->count = *o.count;
    if (o.amplitude) fixed->curve.amplitude_mm = *o.amplitude;
    if (o.bow) fixed->curve.bow_mm = *o.bow;
    if (o.spec_file.empty() || noise.label_shift_prob > 0 || noise.dropout_prob > 0 || noise.jitter_sigma_mm > 0 ||
        noise.crop || noise.background_noise > 0) {
      fixed->noise = noise;
    }
    if (o.sigma) fixed->sigma_mm = *o.sigma;
    fixed->validate();
  }

  PhantomRanges ranges;
  ranges.noise = noise;
  ranges.require_anchor = o.anchored;
  if (o.amplitude) ranges.amplitude_max_mm = *o.amplitude;
  if (o.bow) ranges.bow_max_mm = *o.bow;

  std::vector<PhantomSpec> specs;
  for (int i = 0; i < o.cases; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    PhantomSpec s = fixed ? *fixed : sample_phantom_spec(seed, ranges);
    s.seed = seed;
    if (o.sigma) s.sigma_mm = *o.sigma;
    s.validate();
    specs.push_back(s);
  }

  const fs::path out(o.out);
  std::vector<std::string> errors(specs.size());
  parallel_for(specs.size(), cfg.jobs, [&](std::size_t i) {
    try {
      const Phantom p = generate(specs[i]);
      const fs::path dir = out / case_name(i);
      write_stack(p.stack, dir / "stack");
      write_annotations(p.truth, dir / "truth.json");
      write_json(dir / "phantom.json", phantom_spec_to_json(specs[i]));
    } catch (const InfeasibleSpecError& e) {
      errors[i] = std::string("infeasible: ") + e.what();
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  int code = kExitOk;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i].empty()) continue;
    std::cerr << case_name(i) << ": " << errors[i] << '\n';
    code = kExitUsage;
  }
  if (code == kExitOk) std::cerr << "wrote " << specs.size() << " case(s) to " << out.string() << '\n';
  return code;
}

// --- infer ------------------------------------------------------------------

struct CaseStatus {
  std::string status{"ok"};
  std::string message;
  std::size_t vertebrae{0};
};

CaseStatus infer_case(const fs::path& case_dir, const fs::path& out_dir, const RunConfig& cfg) {
  CaseStatus st;
  const std::string name = case_dir.filename().string();
  try {
    const ActivationStack stack = read_stack(case_dir / "stack");
    const Decoded d = infer(stack, cfg);
    if (d.vertebrae.empty()) throw NoVertebraDetectedError("no channel exceeds the presence threshold");
    write_json(out_dir / "predictions.json", predictions_to_json(name, d));
    st.vertebrae = d.vertebrae.size();
  } catch (const NoVertebraDetectedError& e) {
    st = {"no_vertebra", e.what(), 0};
  } catch (const CenterlineUndefinedError& e) {
    st = {"no_vertebra", std::string("centerline undefined: ") + e.what(), 0};
  } catch (const std::exception& e) {
    st = {"error", e.what(), 0};
  }
  json j{{"case", name}, {"mode", std::string(mode_name(cfg.mode))}, {"status", st.status}};
  j["message"] = st.message;
  j["vertebrae"] = st.vertebrae;
  write_json(out_dir / "status.json", j);
  return st;
}

int run_infer(const std::string& input, const std::string& out, const CommonOptions& common) {
  const RunConfig cfg = common.resolve();
  const std::vector<fs::path> cases = list_cases(input);
  const fs::path out_root(out);
  std::vector<CaseStatus> status(cases.size());
  parallel_for(cases.size(), cfg.jobs, [&](std::size_t i) {
    status[i] = infer_case(cases[i], out_root / cases[i].filename(), cfg);
  });

  json summary{{"mode", std::string(mode_name(cfg.mode))}};
  auto arr = json::array();
  int failed = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const std::string name = cases[i].filename().string();
    arr.push_back({{"case", name}, {"status", status[i].status}});
    if (status[i].status != "ok") {
      ++failed;
      std::cerr << name << ": " << status[i].status << ": " << status[i].message << '\n';
    }
  }
  summary["cases"] = std::move(arr);
  summary["failed"] = failed;
  write_json(out_root / "status.json", summary);
  std::cerr << cases.size() - static_cast<std::size_t>(failed) << "/" << cases.size() << " case(s) ok\n";
  return failed > 0 ? kExitCase : kExitOk;
}

// --- eval -------------------------------------------------------------------

// Case name -> file, from a case directory or a directory of case directories.
std::map<std::string, fs::path> collect(const fs::path& root, const std::vector<std::string>& names) {
  std::map<std::string, fs::path> out;
  auto pick = [&](const fs::path& dir) -> std::optional<fs::path> {
    for (const auto& n : names) {
      if (fs::is_regular_file(dir / n)) return dir / n;
    }
    return std::nullopt;
  };
  if (!fs::is_directory(root)) throw InputError("not a directory: " + root.string());
  if (const auto f = pick(root)) {
    out[root.filename().string()] = *f;
    return out;
  }
  for (const auto& e : fs::directory_iterator(root)) {
    if (!e.is_directory()) continue;
    if (const auto f = pick(e.path())) out[e.path().filename().string()] = *f;
  }
  return out;
}

int run_eval(const std::string& pred_dir, const std::string& truth_dir, const std::string& out) {
  const auto preds = collect(pred_dir, {"predictions.json", "truth.json"});
  const auto truths = collect(truth_dir, {"truth.json"});
  std::vector<std::string> missing_pred, missing_truth;
  for (const auto& [name, _] : truths) {
    if (!preds.count(name)) missing_pred.push_back(name);
  }
  for (const auto& [name, _] : preds) {
    if (!truths.count(name)) missing_truth.push_back(name);
  }
  if (!missing_pred.empty() || !missing_truth.empty()) {
    for (const auto& n : missing_pred) std::cerr << "missing predictions for case " << n << '\n';
    for (const auto& n : missing_truth) std::cerr << "missing truth for case " << n << '\n';
    return kExitUsage;
  }
  if (truths.empty()) throw InputError("no cases found under " + truth_dir);

  std::vector<MatchOutcome> all;
  json per_case = json::object();
  for (const auto& [name, truth_file] : truths) {
    const auto truth = read_annotations(truth_file);
    std::vector<LabeledPoint> pred_pts;
    if (preds.at(name).filename() == "truth.json") {
      pred_pts = to_points(std::span<const VertebraAnnotation>(read_annotations(preds.at(name))));
    } else {
      const auto p = read_predictions(preds.at(name));
      pred_pts = to_points(std::span<const Prediction>(p));
    }
    const auto truth_pts = to_points(std::span<const VertebraAnnotation>(truth));
    const auto outcomes = identify_matches(pred_pts, truth_pts);
    std::size_t ok = 0;
    for (const auto& o : outcomes) ok += o.identified ? 1 : 0;
    per_case[name] = {{"identified", ok}, {"total", outcomes.size()}};
    all.insert(all.end(), outcomes.begin(), outcomes.end());
  }
  const EvalReport r = report(all);
  json j = report_to_json(r);
  j["cases"] = std::move(per_case);
  const std::string table = report_table(r, "cases: " + std::to_string(truths.size()));
  write_json(fs::path(out) / "report.json", j);
  write_text(fs::path(out) / "report.txt", table);
  std::cout << table;
  return kExitOk;
}

// --- rectify ----------------------------------------------------------------

int run_rectify(const std::string& case_dir, const std::string& out, bool dump_centerline, bool volumes,
                const CommonOptions& common) {
  const RunConfig cfg = common.resolve();
  const fs::path dir(case_dir);
  const ActivationStack stack = read_stack(fs::is_directory(dir / "stack") ? dir / "stack" : dir);
  const fs::path out_dir(out);
  CaseAnalysis a;
  try {
    a = analyze_case(stack, cfg);
  } catch (const CenterlineUndefinedError& e) {
    std::cerr << "centerline undefined: " << e.what() << '\n';
    return kExitCase;
  }
  std::ostringstream csv;
  write_signals_csv(a.signals, csv);
  write_text(out_dir / "signals.csv", csv.str());
  if (dump_centerline) {
    std::ostringstream c;
    write_centerline_csv(a.centerline, c);
    write_text(out_dir / "centerline.csv", c.str());
  }
  if (volumes) {
    fs::create_directories(out_dir / "rectified");
    for (int v = 1; v <= stack.v_max(); ++v) {
      write_volume(rectify_channel(stack.channel(v), a.centerline, cfg.rectify),
                   out_dir / "rectified" / channel_file_name(v));
    }
    write_volume(rectify_channel(combine_channels(stack), a.centerline, cfg.rectify),
                 out_dir / "rectified" / "combined.vgf");
  }
  std::cerr << "centerline " << a.centerline.size() << " samples, " << format_sig(a.centerline.length(), 4)
            << " mm\n";
  return kExitOk;
}

// --- plot -------------------------------------------------------------------

int run_plot(const std::string& csv_file, const std::string& out, const std::string& channels,
             const CommonOptions& common) {
  const RunConfig cfg = common.resolve();
  std::ifstream is(csv_file);
  if (!is) throw InputError("cannot open " + csv_file);
  const SignalSet s = read_signals_csv(is);
  std::vector<std::size_t> marks;
  if (s.v_max() >= 1) {
    try {
      const EnergyModel model(s, cfg.energy_config(s.v_max()));
      for (double k : init_state(model, cfg.peaks).k) marks.push_back(static_cast<std::size_t>(k));
    } catch (const NoVertebraDetectedError&) {
      std::cerr << "no peaks in q_hat\n";
    }
  }
  write_text(out, render_signals_svg(s, parse_label_list(channels), marks));
  std::cerr << marks.size() << " peak(s) marked\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vertebra identification by spine rectification and constrained labeling"};
  app.require_subcommand(1);

  CommonOptions common;
  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic phantom cases");
  add_common(synth_cmd, common, false);
  synth_cmd->add_option("--out", synth.out, "output dataset directory")->required();
  synth_cmd->add_option("--cases", synth.cases, "number of cases");
  synth_cmd->add_option("--spec", synth.spec_file, "phantom spec JSON (as echoed in phantom.json)");
  synth_cmd->add_option("--start", synth.start, "first label of a fixed run, e.g. T1");
  synth_cmd->add_option("--count", synth.count, "vertebrae in a fixed run");
  synth_cmd->add_option("--amplitude", synth.amplitude, "lateral curve amplitude mm (max when random)");
  synth_cmd->add_option("--bow", synth.bow, "sagittal bow mm (max when random)");
  synth_cmd->add_flag("--anchored", synth.anchored, "random runs start at C1 or end at S2");
  synth_cmd->add_option("--label-shift", synth.label_shift, "label shift probability");
  synth_cmd->add_option("--dropout", synth.dropout, "channel dropout probability");
  synth_cmd->add_option("--jitter", synth.jitter, "center jitter sigma mm");
  synth_cmd->add_option("--crop", synth.crop, "kept z range as fractions: lo hi")->expected(2);
  synth_cmd->add_option("--background", synth.background, "background clutter amplitude");
  synth_cmd->add_option("--sigma", synth.sigma, "blob sigma mm");

  CommonOptions infer_opts;
  std::string infer_in, infer_out;
  auto* infer_cmd = app.add_subcommand("infer", "label vertebrae in one case or a dataset");
  add_common(infer_cmd, infer_opts, true);
  infer_cmd->add_option("input", infer_in, "case directory or dataset directory")->required();
  infer_cmd->add_option("--out", infer_out, "output directory")->required();

  std::string eval_pred, eval_truth, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "identification rate and localization error");
  eval_cmd->add_option("pred", eval_pred, "predictions directory")->required();
  eval_cmd->add_option("truth", eval_truth, "truth dataset directory")->required();
  eval_cmd->add_option("--out", eval_out, "report directory")->required();

  CommonOptions rect_opts;
  std::string rect_in, rect_out;
  bool dump_centerline = false, rect_volumes = false;
  auto* rect_cmd = app.add_subcommand("rectify", "centerline, rectified volumes and 1-D signals of a case");
  add_common(rect_cmd, rect_opts, false);
  rect_cmd->add_option("case", rect_in, "case directory")->required();
  rect_cmd->add_option("--out", rect_out, "output directory")->required();
  rect_cmd->add_flag("--dump-centerline", dump_centerline, "write centerline.csv");
  rect_cmd->add_flag("--volumes", rect_volumes, "write rectified channel volumes");

  CommonOptions plot_opts;
  std::string plot_in, plot_out, plot_channels;
  auto* plot_cmd = app.add_subcommand("plot", "SVG chart of a signals CSV");
  add_common(plot_cmd, plot_opts, false);
  plot_cmd->add_option("signals", plot_in, "signals.csv from rectify")->required();
  plot_cmd->add_option("--out", plot_out, "output SVG")->required();
  plot_cmd->add_option("--channels", plot_channels, "channels to draw, e.g. T1,T2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth_cmd) return run_synth(synth, common);
    if (*infer_cmd) return run_infer(infer_in, infer_out, infer_opts);
    if (*eval_cmd) return run_eval(eval_pred, eval_truth, eval_out);
    if (*rect_cmd) return run_rectify(rect_in, rect_out, dump_centerline, rect_volumes, rect_opts);
    if (*plot_cmd) return run_plot(plot_in, plot_out, plot_channels, plot_opts);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InfeasibleSpecError& e) {
    std::cerr << "infeasible spec: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCase;
  }
  return kExitUsage;
}
