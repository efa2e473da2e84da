#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lfptd/signal.hpp"

namespace lfptd {

/// Decision thresholds. Defaults are the published calibrations; `calibrate`
/// refits them on a labeled cohort.
struct Thresholds {
  double hip_kld_t = 1000.0;
  double nac_kld_t = 900.0;
  double food_2d = 0.3050;
  double morphine_2d = 0.1341;
  double corr_band = 0.1;

  void validate() const;
};

enum class Method { Corr, Kld1d, Kld2d };
std::string_view to_string(Method method);

/// A treatment label, or NotFood when the correlation rule can only exclude
/// food (saline and morphine are indistinguishable by that rule).
enum class Verdict { Saline, Morphine, Food, NotFood };
std::string_view to_string(Verdict verdict);
Verdict to_verdict(Treatment treatment);

/// True when `verdict` is consistent with `truth` under `method`.
bool verdict_matches(Method method, Verdict verdict, Treatment truth);

struct ClassificationResult {
  Verdict predicted = Verdict::Saline;
  Method method = Method::Kld1d;
  std::map<std::string, double> scores;
  bool ambiguous = false;  // kld1d: both site thresholds exceeded
};

/// Pearson correlation of two equal-length non-constant signals.
double pearson(std::span<const double> x, std::span<const double> y);
inline double pearson(const Signal& x, const Signal& y) { return pearson(x.samples(), y.samples()); }

struct Kld1dOptions {
  double window_seconds = 5.0;
  std::size_t bins = 256;
};

/// Sum over paired windows of the JSD (bits) between per-window histograms
/// sharing edges (pooled mean +/- 6 sd).
double kld1d_score(const Signal& pre, const Signal& post, const Kld1dOptions& options = {});

/// KLD (nats) from the 2-D Gaussian fitted to pre (hip, nac) to the one fitted
/// to post.
double kld2d_score(const SessionRecord& pre, const SessionRecord& post);

/// Rule application without signals, used by the classifiers and calibration.
ClassificationResult decide_correlation(double r_post, const Thresholds& th);
ClassificationResult decide_kld1d(double k_hip, double k_nac, const Thresholds& th);
ClassificationResult decide_kld2d(double k, const Thresholds& th);

ClassificationResult classify_by_correlation(const SessionRecord& pre, const SessionRecord& post,
                                             const Thresholds& th);
ClassificationResult classify_by_kld1d(const SessionRecord& pre, const SessionRecord& post, const Thresholds& th,
                                       const Kld1dOptions& options = {});
ClassificationResult classify_by_kld2d(const SessionRecord& pre, const SessionRecord& post, const Thresholds& th);

enum class VarianceDirection { Increased, Decreased, Unchanged };
std::string_view to_string(VarianceDirection direction);

struct VarianceComparison {
  VarianceDirection direction = VarianceDirection::Unchanged;
  double p_value = 1.0;
};

/// Welch t-test, one-sided in the observed direction, on per-window fitted
/// sigmas; Unchanged when p >= 0.05.
VarianceComparison compare_variance(const Signal& pre, const Signal& post, double window_seconds = 5.0);

/// All scores the three classifiers need for one subject.
struct SubjectScores {
  double r_pre = 0.0;
  double r_post = 0.0;
  double k_hip = 0.0;
  double k_nac = 0.0;
  double k_2d = 0.0;
};

SubjectScores score_subject(const SessionRecord& pre, const SessionRecord& post, const Kld1dOptions& options = {});

struct LabeledScores {
  Treatment truth;
  SubjectScores scores;
};

/// Max-margin thresholds: the midpoint between the closest scores of the groups
/// each threshold separates. Throws when a group is missing or the score ranges
/// overlap in the direction the rules require.
Thresholds calibrate(const std::vector<LabeledScores>& cohort);

}  // namespace lfptd
