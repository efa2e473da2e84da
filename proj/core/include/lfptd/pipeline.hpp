#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lfptd/classify.hpp"
#include "lfptd/density.hpp"
#include "lfptd/preprocess.hpp"
#include "lfptd/sdp.hpp"
#include "lfptd/signal.hpp"

namespace lfptd {

/// Minimum evidence that a recording carries structured signal.
struct GateThresholds {
  double min_hurst = 0.5;   // strict
  double min_r1 = 0.2;      // strict
  double max_lambda = 0.5;  // per sample, strict
};

/// Passes iff H > min_hurst, r(1) > min_r1 and lambda < max_lambda.
bool validate_gate(double hurst, double lambda, double r1, const GateThresholds& gate = {});

struct PipelineConfig {
  FilterSpec filter;
  double window_seconds = 5.0;
  std::size_t bins = 256;
  Thresholds thresholds;
  SdpConfig sdp;
  std::uint64_t seed = 0;
  GateThresholds gate;
  std::size_t validation_windows = 4;  // evenly spaced windows per channel; 0 = all
  std::size_t sdp_max_points = 500;    // base indices per emitted SVG
  int sdp_width_px = 512;
  std::size_t jobs = 1;                // 0 = hardware concurrency

  void validate() const;
};

/// JSON round trip. Absent keys keep their defaults; unknown keys throw.
PipelineConfig pipeline_config_from_json(std::string_view text);
std::string to_json(const PipelineConfig& config);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

Thresholds thresholds_from_json(std::string_view text);
std::string to_json(const Thresholds& thresholds);
Thresholds load_thresholds(const std::filesystem::path& path);

struct ChannelSummary {
  Site site = Site::Hip;
  double hurst = 0.0;
  double surrogate_hurst = 0.0;
  double lambda = 0.0;
  double r1 = 0.0;
  bool gate_passed = false;
  Gauss1D fit;
  Family family = Family::Gaussian;
  std::string svg;  // relative to the output directory
};

struct SessionSummary {
  Phase phase = Phase::Pre;
  std::string file;  // CSV file name inside the cohort directory
  std::array<ChannelSummary, 2> channels;  // HIP, NAc
  std::array<double, 2> joint_mu{};
  std::array<double, 3> joint_cov{};  // var(HIP), cov, var(NAc)
  double sdp_dissimilarity = 0.0;      // bits, HIP vs NAc
  bool gate_passed() const { return channels[0].gate_passed && channels[1].gate_passed; }
};

struct SubjectError {
  std::string file;
  std::optional<std::size_t> line;
  std::string message;
};

enum class SubjectStatus { Classified, Rejected, Error };
std::string_view to_string(SubjectStatus status);

struct SubjectReport {
  std::string subject_id;
  std::optional<Treatment> treatment;
  SubjectStatus status = SubjectStatus::Error;
  std::optional<SubjectError> error;
  std::vector<SessionSummary> sessions;  // PRE then POST
  SubjectScores scores;
  std::array<VarianceComparison, 2> variance{};  // POST vs PRE sigma, HIP then NAc
  std::vector<ClassificationResult> results;     // CORR, KLD1D, KLD2D
};

struct MethodAccuracy {
  Method method = Method::Corr;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::optional<double> accuracy() const {
    if (total == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(total);
  }
};

struct PipelineReport {
  std::vector<SubjectReport> subjects;  // sorted by subject_id
  std::array<MethodAccuracy, 3> accuracy{};
  std::size_t error_count() const;
};

/// Processes every `<stem>.csv` + `<stem>.json` session in `cohort_dir`:
/// preprocess, validate and gate, density fits, the three classifiers and SDP
/// emission. Writes `report.json` and `sdp/*.svg` under `out_dir`. Failures are
/// confined to the subject they belong to. Output bytes depend only on the
/// inputs and `config`.
PipelineReport run_pipeline(const std::filesystem::path& cohort_dir, const std::filesystem::path& out_dir,
                            const PipelineConfig& config);

/// Stable (sorted-key) JSON rendering of a report.
std::string report_to_json(const PipelineReport& report);

}  // namespace lfptd
