#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "lfptd/signal.hpp"

namespace lfptd {

/// Per-treatment change between PRE and POST sessions.
struct EffectProfile {
  Treatment treatment = Treatment::Saline;
  double nac_sigma_post_scale = 1.0;
  double hip_sigma_post_scale = 1.0;
  double post_coupling = 0.0;  // NAc = sqrt(1 - c^2) NAc + c HIP
  double hurst_target = 0.85;

  /// Morphine: NAc sigma x0.7. Food: HIP sigma x1.6 and coupling 0.6.
  /// Saline: no change.
  static EffectProfile defaults(Treatment treatment);
  void validate() const;
};

/// i.i.d. N(0, sigma^2).
Signal gen_white(std::size_t n, double sigma, std::uint64_t seed, double fs = Signal::kDefaultFs);

/// Exact unit-variance fractional Gaussian noise by circulant embedding;
/// `n` must be a power of two.
Signal gen_fgn(std::size_t n, double hurst, std::uint64_t seed, double fs = Signal::kDefaultFs);

/// Two independent fGn paths from one complex transform.
std::pair<std::vector<double>, std::vector<double>> gen_fgn_pair(std::size_t n, double hurst, std::uint64_t seed);

/// Logistic map x <- r x (1 - x) after discarding 1000 transient iterates.
Signal gen_logistic(std::size_t n, double r, double x0, double fs = Signal::kDefaultFs);

/// HIP and NAc as independent fGn streams; POST applies the profile.
SessionRecord gen_session(const EffectProfile& profile, Phase phase, double duration_s, double fs,
                          std::uint64_t seed, std::string subject_id = "subject");

struct CohortOptions {
  std::size_t subjects_per_group = 5;
  std::uint64_t seed = 7;
  double duration_s = 600.0;
  double fs = Signal::kDefaultFs;
  std::vector<EffectProfile> profiles{EffectProfile::defaults(Treatment::Saline),
                                      EffectProfile::defaults(Treatment::Morphine),
                                      EffectProfile::defaults(Treatment::Food)};
};

struct SubjectPair {
  SessionRecord pre;
  SessionRecord post;
};

/// Subjects named `<treatment>-<NN>` (lower case, 1-based), PRE and POST
/// drawn from independent derived seeds.
std::vector<SubjectPair> gen_cohort(const CohortOptions& options);

/// Writes `<subject>_<phase>.csv` plus sidecar for every session.
void write_cohort(const std::filesystem::path& dir, const std::vector<SubjectPair>& cohort);

}  // namespace lfptd
