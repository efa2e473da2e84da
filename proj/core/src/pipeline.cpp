#include "lfptd/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "lfptd/io.hpp"
#include "lfptd/random.hpp"
#include "lfptd/stats.hpp"
#include "lfptd/validate.hpp"

namespace lfptd {

using nlohmann::json;

namespace {

// Reads `key` into `target` when present; marks it consumed.
template <typename T>
void take(const json& obj, const char* key, T& target, std::vector<std::string>& seen) {
  if (auto it = obj.find(key); it != obj.end()) {
    target = it->get<T>();
    seen.emplace_back(key);
  }
}

void reject_unknown(const json& obj, const std::vector<std::string>& seen, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
      throw Error("unknown config key " + where + key);
    }
  }
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error("config " + (where.empty() ? std::string("root") : where) + " must be an object");
}

Thresholds thresholds_from(const json& j, const std::string& where) {
  require_object(j, where);
  Thresholds th;
  std::vector<std::string> seen;
  take(j, "hip_kld_t", th.hip_kld_t, seen);
  take(j, "nac_kld_t", th.nac_kld_t, seen);
  take(j, "food_2d", th.food_2d, seen);
  take(j, "morphine_2d", th.morphine_2d, seen);
  take(j, "corr_band", th.corr_band, seen);
  reject_unknown(j, seen, where);
  th.validate();
  return th;
}

json thresholds_json(const Thresholds& th) {
  return {{"hip_kld_t", th.hip_kld_t},
          {"nac_kld_t", th.nac_kld_t},
          {"food_2d", th.food_2d},
          {"morphine_2d", th.morphine_2d},
          {"corr_band", th.corr_band}};
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed JSON: ") + e.what());
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << bytes;
  if (!out) throw Error("cannot write " + path.string());
}

// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct SessionFile {
  std::filesystem::path csv;
  SessionMeta meta;
};

struct SubjectJob {
  std::string subject_id;
  std::optional<SessionFile> pre;
  std::optional<SessionFile> post;
  std::optional<SubjectError> error;  // set during discovery
  std::optional<Treatment> treatment;
};

std::vector<SubjectJob> discover(const std::filesystem::path& cohort_dir) {
  if (!std::filesystem::is_directory(cohort_dir)) throw Error("not a directory: " + cohort_dir.string());
  std::vector<std::filesystem::path> csvs;
  for (const auto& entry : std::filesystem::directory_iterator(cohort_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") csvs.push_back(entry.path());
  }
  std::sort(csvs.begin(), csvs.end());

  std::map<std::string, SubjectJob> by_id;
  for (const auto& csv : csvs) {
    const std::string file = csv.filename().string();
    SessionMeta meta;
    try {
      meta = read_session_meta(sidecar_path(csv));
    } catch (const Error& e) {
      // Without a sidecar the subject is unknown; key the entry by file stem.
      auto& job = by_id[csv.stem().string()];
      job.subject_id = csv.stem().string();
      if (!job.error) job.error = SubjectError{file, std::nullopt, e.what()};
      continue;
    }
    auto& job = by_id[meta.subject_id];
    job.subject_id = meta.subject_id;
    if (meta.treatment) job.treatment = meta.treatment;
    auto& slot = meta.phase == Phase::Pre ? job.pre : job.post;
    if (slot) {
      if (!job.error) {
        job.error = SubjectError{file, std::nullopt,
                                 "duplicate " + std::string(to_string(meta.phase)) + " session for " + meta.subject_id};
      }
      continue;
    }
    slot = SessionFile{csv, meta};
  }

  std::vector<SubjectJob> jobs;
  for (auto& [id, job] : by_id) {
    if (!job.error && (!job.pre || !job.post)) {
      const auto& have = job.pre ? *job.pre : *job.post;
      job.error = SubjectError{have.csv.filename().string(), std::nullopt,
                               std::string("missing ") + (job.pre ? "POST" : "PRE") + " session"};
    }
    jobs.push_back(std::move(job));
  }
  return jobs;
}

std::string svg_name(const std::string& subject, Phase phase, Site site) {
  std::string name = subject + "_" + std::string(to_string(phase)) + "_" + std::string(to_string(site)) + ".svg";
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.') return static_cast<char>(std::tolower(c));
    return '_';
  });
  return name;
}

SessionSummary summarize_session(const SessionRecord& rec, const std::string& file,
                                 const std::filesystem::path& out_dir, const PipelineConfig& cfg) {
  SessionSummary s;
  s.phase = rec.phase();
  s.file = file;
  for (std::size_t c = 0; c < 2; ++c) {
    const Site site = c == 0 ? Site::Hip : Site::Nac;
    const Signal& sig = rec.channel(site);
    auto& ch = s.channels[c];
    ch.site = site;

    ValidationOptions vo;
    vo.window_seconds = cfg.window_seconds;
    vo.max_windows = cfg.validation_windows;
    vo.seed = derive_seed(cfg.seed, stable_hash(rec.subject_id() + "/" + std::string(to_string(rec.phase())) + "/" +
                                                std::string(to_string(site))));
    const auto v = validate_signal(sig, vo);
    ch.hurst = v.mean_hurst;
    ch.surrogate_hurst = v.mean_surrogate_hurst;
    ch.lambda = v.mean_lambda;
    ch.r1 = v.mean_r1;
    ch.gate_passed = validate_gate(ch.hurst, ch.lambda, ch.r1, cfg.gate);

    ch.fit = fit_gauss1d(sig);
    ch.family = select_model(sig).winner;

    const std::size_t base = sig.size() - cfg.sdp.lag;
    const auto dots = sdp_transform(sig, cfg.sdp, render_stride(base, cfg.sdp_max_points));
    ch.svg = "sdp/" + svg_name(rec.subject_id(), rec.phase(), site);
    write_file(out_dir / ch.svg, sdp_render(dots, cfg.sdp_width_px));
  }

  const std::vector<std::vector<double>> cols{rec.hip().values(), rec.nac().values()};
  const auto joint = fit_gauss_nd(cols);
  s.joint_mu = {joint.mu()(0), joint.mu()(1)};
  s.joint_cov = {joint.sigma()(0, 0), joint.sigma()(0, 1), joint.sigma()(1, 1)};

  // Histogram comparison needs far fewer points than the full recording.
  const std::size_t stride = render_stride(rec.hip().size() - cfg.sdp.lag, 20000);
  s.sdp_dissimilarity = sdp_compare(rec.hip(), rec.nac(), cfg.sdp, stride).dissimilarity;
  return s;
}

SubjectReport process_subject(const SubjectJob& job, const std::filesystem::path& out_dir,
                              const PipelineConfig& cfg) {
  SubjectReport rep;
  rep.subject_id = job.subject_id;
  rep.treatment = job.treatment;
  if (job.error) {
    rep.error = job.error;
    return rep;
  }

  std::string current = job.pre->csv.filename().string();
  try {
    const auto pre_raw = read_session(job.pre->csv);
    current = job.post->csv.filename().string();
    const auto post_raw = read_session(job.post->csv);
    current = job.pre->csv.filename().string();

    const auto pre = preprocess(pre_raw, cfg.filter);
    const auto post = preprocess(post_raw, cfg.filter);
    rep.sessions.push_back(summarize_session(pre, job.pre->csv.filename().string(), out_dir, cfg));
    current = job.post->csv.filename().string();
    rep.sessions.push_back(summarize_session(post, job.post->csv.filename().string(), out_dir, cfg));

    if (!rep.sessions[0].gate_passed() || !rep.sessions[1].gate_passed()) {
      rep.status = SubjectStatus::Rejected;
      return rep;
    }

    const Kld1dOptions kopt{cfg.window_seconds, cfg.bins};
    rep.scores = score_subject(pre, post, kopt);
    rep.results.push_back(decide_correlation(rep.scores.r_post, cfg.thresholds));
    rep.results.back().scores["r_pre"] = rep.scores.r_pre;
    rep.results.push_back(decide_kld1d(rep.scores.k_hip, rep.scores.k_nac, cfg.thresholds));
    rep.results.push_back(decide_kld2d(rep.scores.k_2d, cfg.thresholds));
    rep.variance[0] = compare_variance(pre.hip(), post.hip(), cfg.window_seconds);
    rep.variance[1] = compare_variance(pre.nac(), post.nac(), cfg.window_seconds);
    rep.status = SubjectStatus::Classified;
  } catch (const CsvError& e) {
    rep.sessions.clear();
    rep.error = SubjectError{current, e.line(), e.what()};
  } catch (const Error& e) {
    rep.sessions.clear();
    rep.error = SubjectError{current, std::nullopt, e.what()};
  }
  return rep;
}

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json channel_json(const ChannelSummary& ch) {
  return {{"site", to_string(ch.site)},
          {"validation",
           {{"hurst", number(ch.hurst)},
            {"surrogate_hurst", number(ch.surrogate_hurst)},
            {"lambda", number(ch.lambda)},
            {"r1", number(ch.r1)},
            {"gate_passed", ch.gate_passed}}},
          {"density", {{"mu", number(ch.fit.mu)}, {"sigma", number(ch.fit.sigma)}, {"family", to_string(ch.family)}}},
          {"sdp_svg", ch.svg}};
}

json session_json(const SessionSummary& s) {
  return {{"phase", to_string(s.phase)},
          {"file", s.file},
          {"channels", {channel_json(s.channels[0]), channel_json(s.channels[1])}},
          {"joint_density",
           {{"mu", {number(s.joint_mu[0]), number(s.joint_mu[1])}},
            {"cov", {{number(s.joint_cov[0]), number(s.joint_cov[1])}, {number(s.joint_cov[1]), number(s.joint_cov[2])}}}}},
          {"sdp_dissimilarity_bits", number(s.sdp_dissimilarity)},
          {"gate_passed", s.gate_passed()}};
}

json subject_json(const SubjectReport& r) {
  json j;
  j["subject_id"] = r.subject_id;
  j["treatment"] = r.treatment ? json(to_string(*r.treatment)) : json(nullptr);
  j["status"] = to_string(r.status);
  if (r.error) {
    j["error"] = {{"file", r.error->file},
                  {"line", r.error->line ? json(*r.error->line) : json(nullptr)},
                  {"message", r.error->message}};
  }
  json sessions = json::array();
  for (const auto& s : r.sessions) sessions.push_back(session_json(s));
  j["sessions"] = std::move(sessions);
  if (r.status == SubjectStatus::Classified) {
    j["scores"] = {{"r_pre", number(r.scores.r_pre)},
                   {"r_post", number(r.scores.r_post)},
                   {"k_hip_bits", number(r.scores.k_hip)},
                   {"k_nac_bits", number(r.scores.k_nac)},
                   {"k_2d_nats", number(r.scores.k_2d)}};
    j["variance"] = {{"HIP", {{"direction", to_string(r.variance[0].direction)}, {"p_value", number(r.variance[0].p_value)}}},
                     {"NAC", {{"direction", to_string(r.variance[1].direction)}, {"p_value", number(r.variance[1].p_value)}}}};
    json cls = json::object();
    for (const auto& res : r.results) {
      json scores = json::object();
      for (const auto& [k, v] : res.scores) scores[k] = number(v);
      json entry = {{"predicted", to_string(res.predicted)}, {"ambiguous", res.ambiguous}, {"scores", scores}};
      if (r.treatment) entry["correct"] = verdict_matches(res.method, res.predicted, *r.treatment);
      cls[std::string(to_string(res.method))] = std::move(entry);
    }
    j["classification"] = std::move(cls);
  }
  return j;
}

}  // namespace

bool validate_gate(double hurst, double lambda, double r1, const GateThresholds& gate) {
  return hurst > gate.min_hurst && r1 > gate.min_r1 && lambda < gate.max_lambda;
}

void PipelineConfig::validate() const {
  if (!(window_seconds > 0.0)) throw Error("window_seconds must be positive");
  if (bins < 2) throw Error("bins must be at least 2");
  if (sdp_width_px < 64) throw Error("sdp_width_px must be at least 64");
  if (sdp_max_points == 0) throw Error("sdp_max_points must be positive");
  if (filter.order < 1 || !(filter.low_cut_hz > 0.0) || !(filter.low_cut_hz < filter.high_cut_hz)) {
    throw Error("filter needs order >= 1 and 0 < low_cut_hz < high_cut_hz");
  }
  thresholds.validate();
  sdp.validate();
}

PipelineConfig pipeline_config_from_json(std::string_view text) {
  const json root = parse_json(text);
  require_object(root, "");
  PipelineConfig cfg;
  std::vector<std::string> seen;
  if (auto it = root.find("filter"); it != root.end()) {
    require_object(*it, "filter");
    std::vector<std::string> fs;
    take(*it, "low_cut_hz", cfg.filter.low_cut_hz, fs);
    take(*it, "high_cut_hz", cfg.filter.high_cut_hz, fs);
    take(*it, "order", cfg.filter.order, fs);
    reject_unknown(*it, fs, "filter.");
    seen.emplace_back("filter");
  }
  if (auto it = root.find("thresholds"); it != root.end()) {
    cfg.thresholds = thresholds_from(*it, "thresholds.");
    seen.emplace_back("thresholds");
  }
  if (auto it = root.find("sdp"); it != root.end()) {
    require_object(*it, "sdp");
    std::vector<std::string> ss;
    take(*it, "lag", cfg.sdp.lag, ss);
    take(*it, "theta_deg", cfg.sdp.theta_deg, ss);
    take(*it, "zeta_deg", cfg.sdp.zeta_deg, ss);
    take(*it, "max_points", cfg.sdp_max_points, ss);
    take(*it, "width_px", cfg.sdp_width_px, ss);
    reject_unknown(*it, ss, "sdp.");
    seen.emplace_back("sdp");
  }
  if (auto it = root.find("gate"); it != root.end()) {
    require_object(*it, "gate");
    std::vector<std::string> gs;
    take(*it, "min_hurst", cfg.gate.min_hurst, gs);
    take(*it, "min_r1", cfg.gate.min_r1, gs);
    take(*it, "max_lambda", cfg.gate.max_lambda, gs);
    reject_unknown(*it, gs, "gate.");
    seen.emplace_back("gate");
  }
  try {
    take(root, "window_seconds", cfg.window_seconds, seen);
    take(root, "bins", cfg.bins, seen);
    take(root, "seed", cfg.seed, seen);
    take(root, "validation_windows", cfg.validation_windows, seen);
    take(root, "jobs", cfg.jobs, seen);
  } catch (const json::exception& e) {
    throw Error(std::string("bad config value: ") + e.what());
  }
  reject_unknown(root, seen, "");
  cfg.validate();
  return cfg;
}

std::string to_json(const PipelineConfig& cfg) {
  const json j = {
      {"filter", {{"low_cut_hz", cfg.filter.low_cut_hz}, {"high_cut_hz", cfg.filter.high_cut_hz}, {"order", cfg.filter.order}}},
      {"window_seconds", cfg.window_seconds},
      {"bins", cfg.bins},
      {"thresholds", thresholds_json(cfg.thresholds)},
      {"sdp",
       {{"lag", cfg.sdp.lag},
        {"theta_deg", cfg.sdp.theta_deg},
        {"zeta_deg", cfg.sdp.zeta_deg},
        {"max_points", cfg.sdp_max_points},
        {"width_px", cfg.sdp_width_px}}},
      {"seed", cfg.seed},
      {"gate", {{"min_hurst", cfg.gate.min_hurst}, {"min_r1", cfg.gate.min_r1}, {"max_lambda", cfg.gate.max_lambda}}},
      {"validation_windows", cfg.validation_windows},
      {"jobs", cfg.jobs}};
  return j.dump(2) + "\n";
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return pipeline_config_from_json(slurp(path));
}

Thresholds thresholds_from_json(std::string_view text) {
  try {
    return thresholds_from(parse_json(text), "");
  } catch (const json::exception& e) {
    throw Error(std::string("bad threshold value: ") + e.what());
  }
}

std::string to_json(const Thresholds& thresholds) { return thresholds_json(thresholds).dump(2) + "\n"; }

Thresholds load_thresholds(const std::filesystem::path& path) { return thresholds_from_json(slurp(path)); }

std::string_view to_string(SubjectStatus status) {
  switch (status) {
    case SubjectStatus::Classified:
      return "CLASSIFIED";
    case SubjectStatus::Rejected:
      return "REJECTED";
    case SubjectStatus::Error:
      return "ERROR";
  }
  return "ERROR";
}

std::size_t PipelineReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(subjects.begin(), subjects.end(),
                                                [](const SubjectReport& s) { return s.status == SubjectStatus::Error; }));
}

PipelineReport run_pipeline(const std::filesystem::path& cohort_dir, const std::filesystem::path& out_dir,
                            const PipelineConfig& config) {
  config.validate();
  const auto jobs = discover(cohort_dir);
  std::filesystem::create_directories(out_dir / "sdp");

  PipelineReport report;
  report.subjects.resize(jobs.size());
  std::size_t workers = config.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.jobs;
  workers = std::min(workers, std::max<std::size_t>(1, jobs.size()));

  // Each worker writes only its own slot; results stay in discovery order.
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      report.subjects[i] = process_subject(jobs[i], out_dir, config);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  report.accuracy = {MethodAccuracy{Method::Corr}, MethodAccuracy{Method::Kld1d}, MethodAccuracy{Method::Kld2d}};
  for (const auto& s : report.subjects) {
    if (s.status != SubjectStatus::Classified || !s.treatment) continue;
    for (std::size_t m = 0; m < s.results.size(); ++m) {
      ++report.accuracy[m].total;
      if (verdict_matches(s.results[m].method, s.results[m].predicted, *s.treatment)) ++report.accuracy[m].correct;
    }
  }

  write_file(out_dir / "report.json", report_to_json(report));
  return report;
}

std::string report_to_json(const PipelineReport& report) {
  json subjects = json::array();
  for (const auto& s : report.subjects) subjects.push_back(subject_json(s));
  json accuracy = json::object();
  for (const auto& a : report.accuracy) {
    const auto acc = a.accuracy();
    accuracy[std::string(to_string(a.method))] = {
        {"correct", a.correct}, {"total", a.total}, {"accuracy", acc ? json(*acc) : json(nullptr)}};
  }
  const auto count = [&](SubjectStatus st) {
    return std::count_if(report.subjects.begin(), report.subjects.end(),
                         [st](const SubjectReport& s) { return s.status == st; });
  };
  const json root = {{"subjects", std::move(subjects)},
                     {"cohort",
                      {{"accuracy", std::move(accuracy)},
                       {"subjects", report.subjects.size()},
                       {"classified", count(SubjectStatus::Classified)},
                       {"rejected", count(SubjectStatus::Rejected)},
                       {"errors", count(SubjectStatus::Error)}}}};
  return root.dump(2) + "\n";
}

}  // namespace lfptd
