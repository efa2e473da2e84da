#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lfptd/signal.hpp"

namespace lfptd {

struct AutocorrSeries {
  std::vector<std::size_t> lags;
  std::vector<double> coefficients;

  double at(std::size_t lag) const { return coefficients.at(lag); }
};

struct HurstScale {
  std::size_t n = 0;
  double rs_mean = 0.0;
};

struct HurstFit {
  double H = 0.0;
  double C = 0.0;
  std::vector<HurstScale> per_scale;
  double r_squared = 0.0;
};

struct DivergencePoint {
  std::size_t t = 0;
  double mean_log_distance = 0.0;
};

struct LyapunovEstimate {
  double lambda = 0.0;  // per sample
  std::vector<DivergencePoint> divergence_curve;
  std::pair<std::size_t, std::size_t> fit_range;  // [first, last) indices into the curve
  std::size_t embed_dim = 0;
  std::size_t delay = 0;
  std::size_t theiler = 0;
};

struct BasicFeatures {
  double mean = 0.0;
  double maximum = 0.0;
  double minimum = 0.0;
  double median = 0.0;
  double stdev = 0.0;  // population
};

/// Biased normalized autocorrelation r(k) for k = 0..max_lag; r(0) = 1.
AutocorrSeries autocorrelation(const Signal& signal, std::size_t max_lag);

struct HurstOptions {
  std::size_t min_scale = 16;
  std::size_t max_scale = 0;  // 0: length / 4
  std::size_t scales_per_decade = 8;
};

/// Rescaled-range Hurst estimate: block-averaged R/S at log-spaced scales, H and
/// log C from a least-squares line through log(R/S) against log(n).
HurstFit hurst_rs(const Signal& signal, const HurstOptions& options = {});
HurstFit hurst_rs(const Signal& signal, std::size_t min_scale, std::size_t max_scale,
                  std::size_t scales_per_decade);

/// Uniform random permutation of the samples, deterministic per seed.
Signal shuffle_surrogate(const Signal& signal, std::uint64_t seed);

struct LyapunovOptions {
  std::size_t embed_dim = 6;
  std::size_t delay = 0;                 // 0: first lag with r(k) < 1 - 1/e
  std::optional<std::size_t> theiler;    // default delay * embed_dim
  std::size_t horizon = 100;             // divergence curve length
  std::optional<std::pair<std::size_t, std::size_t>> fit_range;  // default first 5% of the curve
};

/// Maximal Lyapunov exponent by nearest-neighbour divergence (Rosenstein):
/// delay-embed, pair every point with its nearest neighbour outside the
/// Theiler window, average log separation over time, fit the slope.
LyapunovEstimate lyapunov_max(const Signal& signal, const LyapunovOptions& options = {});

/// First lag whose autocorrelation drops below 1 - 1/e (at least 1).
std::size_t autocorrelation_decay_lag(const Signal& signal, std::size_t max_lag);

BasicFeatures basic_features(std::span<const double> samples);
inline BasicFeatures basic_features(const Signal& signal) { return basic_features(signal.samples()); }

/// Per-window validation summary.
struct WindowValidation {
  double start_seconds = 0.0;
  double hurst = 0.0;
  double surrogate_hurst = 0.0;
  double lambda = 0.0;
  double r1 = 0.0;
};

struct ValidationReport {
  std::vector<WindowValidation> windows;
  double mean_hurst = 0.0;
  double mean_surrogate_hurst = 0.0;
  double mean_lambda = 0.0;  // the "global" exponent
  double mean_r1 = 0.0;
  std::vector<std::string> warnings;
};

struct ValidationOptions {
  double window_seconds = 5.0;
  std::size_t max_windows = 0;  // 0: every window; otherwise evenly spaced subset
  std::uint64_t seed = 0;
  HurstOptions hurst;
  LyapunovOptions lyapunov;
};

/// Windowed H, shuffled-surrogate H, lambda and r(1), with aggregate means.
/// Adds a warning when the mean H exceeds 0.95.
ValidationReport validate_signal(const Signal& signal, const ValidationOptions& options = {});

}  // namespace lfptd
