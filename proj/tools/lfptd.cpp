// Command-line front end: one subcommand per pipeline stage plus the batch
// pipeline. Exit codes: 0 success, 1 runtime or per-subject failure, 2 usage.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lfptd/classify.hpp"
#include "lfptd/density.hpp"
#include "lfptd/io.hpp"
#include "lfptd/pipeline.hpp"
#include "lfptd/preprocess.hpp"
#include "lfptd/sdp.hpp"
#include "lfptd/stats.hpp"
#include "lfptd/synth.hpp"
#include "lfptd/validate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Bad combination of otherwise well-formed arguments.
struct UsageError : lfptd::Error {
  using lfptd::Error::Error;
};

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
};

lfptd::PipelineConfig effective_config(const Globals& g) {
  lfptd::PipelineConfig cfg = g.config_path.empty() ? lfptd::PipelineConfig{} : lfptd::load_pipeline_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (g.jobs) cfg.jobs = *g.jobs;
  return cfg;
}

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

void emit(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw lfptd::Error("cannot write " + path);
  out << text;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw lfptd::Error("cannot write " + path);
  out << text;
}

lfptd::Site site_arg(const std::string& text) {
  try {
    return lfptd::parse_site(text);
  } catch (const lfptd::Error&) {
    throw UsageError("unknown column '" + text + "' (expected hip or nac)");
  }
}

std::vector<lfptd::Site> sites_arg(const std::string& text) {
  if (text == "both") return {lfptd::Site::Hip, lfptd::Site::Nac};
  return {site_arg(text)};
}

json test_json(const lfptd::TestResult& r) {
  return {{"test", r.test_name},
          {"statistic", number(r.statistic)},
          {"p_value", number(r.p_value)},
          {"sided", r.sided == lfptd::Sided::One ? "one" : "two"}};
}

json classification_json(const lfptd::ClassificationResult& r) {
  json scores = json::object();
  for (const auto& [k, v] : r.scores) scores[k] = number(v);
  return {{"method", lfptd::to_string(r.method)},
          {"predicted", lfptd::to_string(r.predicted)},
          {"ambiguous", r.ambiguous},
          {"scores", scores}};
}

lfptd::SessionRecord load_session(const std::string& path, bool filter, const lfptd::PipelineConfig& cfg) {
  auto rec = lfptd::read_session(path);
  return filter ? lfptd::preprocess(rec, cfg.filter) : rec;
}

// ---- subcommands -----------------------------------------------------------

struct PreprocessArgs {
  std::string in, out;
  std::optional<double> low, high;
  std::optional<int> order;
};

int run_preprocess(const PreprocessArgs& a, const Globals& g) {
  auto spec = effective_config(g).filter;
  if (a.low) spec.low_cut_hz = *a.low;
  if (a.high) spec.high_cut_hz = *a.high;
  if (a.order) spec.order = *a.order;
  const auto rec = lfptd::read_session(a.in);
  lfptd::write_session(a.out, lfptd::preprocess(rec, spec));
  return 0;
}

struct ValidateArgs {
  std::string in, report, column = "both";
  std::optional<double> window;
  std::size_t max_windows = 0;
};

int run_validate(const ValidateArgs& a, const Globals& g) {
  const auto cfg = effective_config(g);
  lfptd::ValidationOptions opt;
  opt.window_seconds = a.window.value_or(cfg.window_seconds);
  opt.max_windows = a.max_windows;
  opt.seed = cfg.seed;
  json channels = json::array();
  for (const auto site : sites_arg(a.column)) {
    const auto sig = lfptd::read_channel(a.in, site);
    const auto rep = lfptd::validate_signal(sig, opt);
    json windows = json::array();
    for (const auto& w : rep.windows) {
      windows.push_back({{"start_s", w.start_seconds},
                         {"hurst", number(w.hurst)},
                         {"surrogate_hurst", number(w.surrogate_hurst)},
                         {"lambda", number(w.lambda)},
                         {"r1", number(w.r1)}});
    }
    channels.push_back({{"column", lfptd::to_string(site)},
                        {"windows", windows},
                        {"mean_hurst", number(rep.mean_hurst)},
                        {"mean_surrogate_hurst", number(rep.mean_surrogate_hurst)},
                        {"mean_lambda", number(rep.mean_lambda)},
                        {"mean_r1", number(rep.mean_r1)},
                        {"gate_passed", lfptd::validate_gate(rep.mean_hurst, rep.mean_lambda, rep.mean_r1, cfg.gate)},
                        {"warnings", rep.warnings}});
  }
  emit({{"input", a.in}, {"window_s", opt.window_seconds}, {"channels", channels}}, a.report);
  return 0;
}

struct FitArgs {
  std::string in, out, column = "hip";
};

int run_fit(const FitArgs& a, const Globals&) {
  const auto sig = lfptd::read_channel(a.in, site_arg(a.column));
  const auto g1 = lfptd::fit_gauss1d(sig);
  const auto sel = lfptd::select_model(sig);
  json ll = json::object();
  for (const auto f : lfptd::ModelSelection::kFamilies) ll[std::string(lfptd::to_string(f))] = number(sel.log_likelihood_of(f));
  emit({{"column", lfptd::to_string(site_arg(a.column))},
        {"gauss1d", {{"mu", number(g1.mu)}, {"sigma", number(g1.sigma)}}},
        {"model_selection", {{"winner", lfptd::to_string(sel.winner)}, {"log_likelihood", ll}}}},
       a.out);
  return 0;
}

struct KldArgs {
  std::string pre, post, out, mode = "discrete1d";
  std::optional<std::size_t> bins;
  std::optional<double> window;
  bool filter = false;
};

int run_kld(const KldArgs& a, const Globals& g) {
  const auto cfg = effective_config(g);
  const auto pre = load_session(a.pre, a.filter, cfg);
  const auto post = load_session(a.post, a.filter, cfg);
  json j;
  j["mode"] = a.mode;
  if (a.mode == "discrete1d") {
    const lfptd::Kld1dOptions opt{a.window.value_or(cfg.window_seconds), a.bins.value_or(cfg.bins)};
    j["k_hip_bits"] = number(lfptd::kld1d_score(pre.hip(), post.hip(), opt));
    j["k_nac_bits"] = number(lfptd::kld1d_score(pre.nac(), post.nac(), opt));
  } else if (a.mode == "gauss2d") {
    j["k_2d_nats"] = number(lfptd::kld2d_score(pre, post));
  } else {
    throw UsageError("unknown mode '" + a.mode + "' (expected discrete1d or gauss2d)");
  }
  emit(j, a.out);
  return 0;
}

struct ClassifyArgs {
  std::string pre, post, thresholds, out, method = "all";
  bool filter = false;
};

int run_classify(const ClassifyArgs& a, const Globals& g) {
  const auto cfg = effective_config(g);
  const auto th = a.thresholds.empty() ? cfg.thresholds : lfptd::load_thresholds(a.thresholds);
  const auto pre = load_session(a.pre, a.filter, cfg);
  const auto post = load_session(a.post, a.filter, cfg);
  const lfptd::Kld1dOptions opt{cfg.window_seconds, cfg.bins};

  std::vector<lfptd::ClassificationResult> results;
  if (a.method == "corr" || a.method == "all") results.push_back(lfptd::classify_by_correlation(pre, post, th));
  if (a.method == "kld1d" || a.method == "all") results.push_back(lfptd::classify_by_kld1d(pre, post, th, opt));
  if (a.method == "kld2d" || a.method == "all") results.push_back(lfptd::classify_by_kld2d(pre, post, th));
  if (results.empty()) throw UsageError("unknown method '" + a.method + "' (expected corr, kld1d, kld2d or all)");

  if (results.size() == 1) {
    emit(classification_json(results.front()), a.out);
  } else {
    json arr = json::array();
    for (const auto& r : results) arr.push_back(classification_json(r));
    emit(arr, a.out);
  }
  return 0;
}

struct CalibrateArgs {
  std::string cohort, out;
};

int run_calibrate(const CalibrateArgs& a, const Globals& g) {
  const auto cfg = effective_config(g);
  std::vector<fs::path> csvs;
  for (const auto& e : fs::directory_iterator(a.cohort)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") csvs.push_back(e.path());
  }
  std::sort(csvs.begin(), csvs.end());

  struct Pair {
    std::optional<fs::path> pre, post;
    std::optional<lfptd::Treatment> truth;
  };
  std::map<std::string, Pair> subjects;
  for (const auto& csv : csvs) {
    const auto meta = lfptd::read_session_meta(lfptd::sidecar_path(csv));
    auto& p = subjects[meta.subject_id];
    (meta.phase == lfptd::Phase::Pre ? p.pre : p.post) = csv;
    if (meta.treatment) p.truth = meta.treatment;
  }

  const lfptd::Kld1dOptions opt{cfg.window_seconds, cfg.bins};
  std::vector<lfptd::LabeledScores> labeled;
  for (const auto& [id, p] : subjects) {
    if (!p.pre || !p.post || !p.truth) {
      std::cerr << "skipping " << id << ": needs a labeled PRE and POST session\n";
      continue;
    }
    const auto pre = load_session(p.pre->string(), true, cfg);
    const auto post = load_session(p.post->string(), true, cfg);
    labeled.push_back({*p.truth, lfptd::score_subject(pre, post, opt)});
  }
  const auto th = lfptd::calibrate(labeled);
  const std::string text = lfptd::to_json(th);
  if (a.out.empty() || a.out == "-") {
    std::cout << text;
  } else {
    write_text(a.out, text);
  }
  return 0;
}

struct SdpArgs {
  std::string in, out, out_csv, column = "hip";
  std::size_t lag = 1;
  double theta = 45.0, zeta = 90.0;
  int width = 512;
};

int run_sdp(const SdpArgs& a, const Globals&) {
  if (a.out.empty() && a.out_csv.empty()) throw UsageError("sdp needs --out and/or --out-csv");
  const auto sig = lfptd::read_channel(a.in, site_arg(a.column));
  const lfptd::SdpConfig cfg{a.lag, a.theta, a.zeta};
  try {
    cfg.validate();
  } catch (const lfptd::Error& e) {
    throw UsageError(e.what());
  }
  if (cfg.overlapping_sectors()) std::cerr << "note: zeta exceeds 2*theta, neighbouring sectors overlap\n";
  const std::size_t base = sig.size() > a.lag ? sig.size() - a.lag : 0;
  const auto dots = lfptd::sdp_transform(sig, cfg, lfptd::render_stride(base, 100000));
  if (!a.out.empty()) write_text(a.out, lfptd::sdp_render(dots, a.width));
  if (!a.out_csv.empty()) {
    std::string text = "radius,angle_deg\n";
    char buf[64];
    for (const auto& d : dots.dots) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", d.radius, d.angle_deg);
      text += buf;
    }
    write_text(a.out_csv, text);
  }
  return 0;
}

struct SynthArgs {
  std::vector<std::string> profiles;
  std::string out;
  std::size_t subjects = 5;
  double duration = 600.0;
  double fs = 1000.0;
};

int run_synth(const SynthArgs& a, const Globals& g) {
  lfptd::CohortOptions opt;
  opt.subjects_per_group = a.subjects;
  opt.duration_s = a.duration;
  opt.fs = a.fs;
  if (g.seed) opt.seed = *g.seed;
  opt.profiles.clear();
  for (const auto& p : a.profiles) {
    if (p == "all") {
      for (const auto t : {lfptd::Treatment::Saline, lfptd::Treatment::Morphine, lfptd::Treatment::Food}) {
        opt.profiles.push_back(lfptd::EffectProfile::defaults(t));
      }
      continue;
    }
    try {
      opt.profiles.push_back(lfptd::EffectProfile::defaults(lfptd::parse_treatment(p)));
    } catch (const lfptd::Error&) {
      throw UsageError("unknown profile '" + p + "' (expected saline, morphine, food or all)");
    }
  }
  lfptd::write_cohort(a.out, lfptd::gen_cohort(opt));
  return 0;
}

struct PipelineArgs {
  std::string cohort, out;
};

int run_pipeline_cmd(const PipelineArgs& a, const Globals& g) {
  const auto report = lfptd::run_pipeline(a.cohort, a.out, effective_config(g));
  for (const auto& s : report.subjects) {
    std::cout << s.subject_id << ": " << lfptd::to_string(s.status);
    if (s.error) {
      std::cout << " (" << s.error->file;
      if (s.error->line) std::cout << ":" << *s.error->line;
      std::cout << ": " << s.error->message << ")";
    }
    for (const auto& r : s.results) std::cout << " " << lfptd::to_string(r.method) << "=" << lfptd::to_string(r.predicted);
    std::cout << "\n";
  }
  for (const auto& m : report.accuracy) {
    const auto acc = m.accuracy();
    std::cout << "accuracy " << lfptd::to_string(m.method) << ": ";
    if (acc) {
      std::cout << m.correct << "/" << m.total << "\n";
    } else {
      std::cout << "n/a\n";
    }
  }
  std::cout << "report: " << (fs::path(a.out) / "report.json").string() << "\n";
  return report.error_count() > 0 ? kExitFailure : 0;
}

struct StatsArgs {
  std::string test, out, alternative = "two-sided";
  std::vector<std::string> groups;
  bool paired = false;
  bool equal_variance = false;
};

int run_stats(const StatsArgs& a, const Globals&) {
  lfptd::Alternative alt;
  if (a.alternative == "two-sided") {
    alt = lfptd::Alternative::TwoSided;
  } else if (a.alternative == "less") {
    alt = lfptd::Alternative::Less;
  } else if (a.alternative == "greater") {
    alt = lfptd::Alternative::Greater;
  } else {
    throw UsageError("unknown alternative '" + a.alternative + "'");
  }

  std::vector<std::vector<double>> groups;
  for (const auto& path : a.groups) groups.push_back(lfptd::read_numeric_column(path));
  const auto need_two = [&] {
    if (groups.size() != 2) throw UsageError("--test " + a.test + " needs exactly two groups");
  };

  if (a.test == "ks") {
    json arr = json::array();
    for (std::size_t i = 0; i < groups.size(); ++i) {
      auto r = test_json(lfptd::ks_normality(groups[i]));
      r["group"] = a.groups[i];
      arr.push_back(r);
    }
    emit(arr, a.out);
  } else if (a.test == "t") {
    need_two();
    emit(test_json(lfptd::t_test(groups[0], groups[1], {a.paired, alt, a.equal_variance})), a.out);
  } else if (a.test == "mwu") {
    need_two();
    emit(test_json(lfptd::mann_whitney_u(groups[0], groups[1], alt)), a.out);
  } else if (a.test == "wilcoxon") {
    need_two();
    emit(test_json(lfptd::wilcoxon_signed(groups[0], groups[1], alt)), a.out);
  } else if (a.test == "anova") {
    if (groups.size() < 2) throw UsageError("--test anova needs at least two groups");
    const auto res = lfptd::anova_tukey(groups);
    json pairs = json::array();
    for (const auto& [ij, r] : res.pairwise) {
      auto e = test_json(r);
      e["groups"] = {a.groups[ij.first], a.groups[ij.second]};
      pairs.push_back(e);
    }
    emit({{"omnibus", test_json(res.omnibus)}, {"pairwise", pairs}}, a.out);
  } else {
    throw UsageError("unknown test '" + a.test + "' (expected ks, t, mwu, wilcoxon or anova)");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-domain LFP analysis: preprocessing, validation, divergence scoring and classification"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "Pipeline configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for surrogates and synthetic data");
  app.add_option("--jobs", g.jobs, "Worker threads for the pipeline (0 = all cores)");

  int code = 0;

  PreprocessArgs pa;
  auto* pre = app.add_subcommand("preprocess", "Zero-phase band-pass plus 3-sigma clamp of a session");
  pre->add_option("--in", pa.in, "Session CSV")->required()->check(CLI::ExistingFile);
  pre->add_option("--out", pa.out, "Output session CSV (sidecar written alongside)")->required();
  pre->add_option("--low", pa.low, "Low cutoff in Hz");
  pre->add_option("--high", pa.high, "High cutoff in Hz");
  pre->add_option("--order", pa.order, "Butterworth order per edge");
  pre->callback([&] { code = run_preprocess(pa, g); });

  ValidateArgs va;
  auto* val = app.add_subcommand("validate", "Windowed Hurst, Lyapunov and autocorrelation");
  val->add_option("--in", va.in, "Session CSV")->required()->check(CLI::ExistingFile);
  val->add_option("--window", va.window, "Window length in seconds");
  val->add_option("--report", va.report, "Output JSON (default stdout)");
  val->add_option("--column", va.column, "hip, nac or both");
  val->add_option("--max-windows", va.max_windows, "Evenly spaced subset of windows (0 = all)");
  val->callback([&] { code = run_validate(va, g); });

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Gaussian MLE and model selection for one channel");
  fit->add_option("--in", fa.in, "Session CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--column", fa.column, "hip or nac");
  fit->add_option("--out", fa.out, "Output JSON (default stdout)");
  fit->callback([&] { code = run_fit(fa, g); });

  KldArgs ka;
  auto* kld = app.add_subcommand("kld", "Divergence scores between a PRE and a POST session");
  kld->add_option("--pre", ka.pre, "PRE session CSV")->required()->check(CLI::ExistingFile);
  kld->add_option("--post", ka.post, "POST session CSV")->required()->check(CLI::ExistingFile);
  kld->add_option("--mode", ka.mode, "discrete1d or gauss2d");
  kld->add_option("--bins", ka.bins, "Histogram bins");
  kld->add_option("--window", ka.window, "Window length in seconds");
  kld->add_flag("--preprocess", ka.filter, "Filter and clamp both sessions first");
  kld->add_option("--out", ka.out, "Output JSON (default stdout)");
  kld->callback([&] { code = run_kld(ka, g); });

  ClassifyArgs ca;
  auto* cls = app.add_subcommand("classify", "Treatment verdict for one subject");
  cls->add_option("--method", ca.method, "corr, kld1d, kld2d or all");
  cls->add_option("--pre", ca.pre, "PRE session CSV")->required()->check(CLI::ExistingFile);
  cls->add_option("--post", ca.post, "POST session CSV")->required()->check(CLI::ExistingFile);
  cls->add_option("--thresholds", ca.thresholds, "Thresholds JSON")->check(CLI::ExistingFile);
  cls->add_flag("--preprocess", ca.filter, "Filter and clamp both sessions first");
  cls->add_option("--out", ca.out, "Output JSON (default stdout)");
  cls->callback([&] { code = run_classify(ca, g); });

  CalibrateArgs cla;
  auto* cal = app.add_subcommand("calibrate", "Fit decision thresholds on a labeled cohort");
  cal->add_option("--cohort", cla.cohort, "Cohort directory")->required()->check(CLI::ExistingDirectory);
  cal->add_option("--out", cla.out, "Thresholds JSON (default stdout)");
  cal->callback([&] { code = run_calibrate(cla, g); });

  SdpArgs sa;
  auto* sdp = app.add_subcommand("sdp", "Symmetrized dot pattern of one channel");
  sdp->add_option("--in", sa.in, "Session CSV")->required()->check(CLI::ExistingFile);
  sdp->add_option("--column", sa.column, "hip or nac");
  sdp->add_option("--L", sa.lag, "Lag in samples");
  sdp->add_option("--theta", sa.theta, "Symmetry angle in degrees");
  sdp->add_option("--zeta", sa.zeta, "Angular gain in degrees");
  sdp->add_option("--width", sa.width, "SVG width in pixels");
  sdp->add_option("--out", sa.out, "Output SVG");
  sdp->add_option("--out-csv", sa.out_csv, "Output radius,angle_deg rows");
  sdp->callback([&] { code = run_sdp(sa, g); });

  SynthArgs ya;
  auto* syn = app.add_subcommand("synth", "Write a synthetic labeled cohort");
  syn->add_option("--profile", ya.profiles, "saline, morphine, food or all (repeatable)")->required();
  syn->add_option("--subjects", ya.subjects, "Subjects per profile");
  syn->add_option("--duration", ya.duration, "Session length in seconds");
  syn->add_option("--fs", ya.fs, "Sampling rate in Hz");
  syn->add_option("--out", ya.out, "Output directory")->required();
  syn->callback([&] { code = run_synth(ya, g); });

  PipelineArgs pia;
  auto* pip = app.add_subcommand("pipeline", "Batch run over a cohort directory");
  pip->add_option("--cohort", pia.cohort, "Cohort directory")->required()->check(CLI::ExistingDirectory);
  pip->add_option("--out", pia.out, "Output directory")->required();
  pip->callback([&] { code = run_pipeline_cmd(pia, g); });

  StatsArgs sta;
  auto* st = app.add_subcommand("stats", "Hypothesis tests on one-column numeric files");
  st->add_option("--test", sta.test, "ks, t, mwu, wilcoxon or anova")->required();
  st->add_option("--groups", sta.groups, "One file per group")->required();
  st->add_flag("--paired", sta.paired, "Paired t-test");
  st->add_flag("--equal-variance", sta.equal_variance, "Pooled-variance t-test");
  st->add_option("--alternative", sta.alternative, "two-sided, less or greater");
  st->add_option("--out", sta.out, "Output JSON (default stdout)");
  st->callback([&] { code = run_stats(sta, g); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return code;
}
