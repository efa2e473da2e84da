#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lfptd/signal.hpp"  // Error

namespace lfptd {

enum class Sided { One, Two };

/// Direction of a test. `Less` means the first sample tends to be smaller.
enum class Alternative { TwoSided, Less, Greater };

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::string test_name;
  Sided sided = Sided::Two;
};

/// Kolmogorov-Smirnov distance to a normal with the sample mean and standard
/// deviation. Because the parameters are estimated, the p-value uses the
/// Lilliefors null distribution (Dallal-Wilkinson approximation, valid for
/// p <= 0.1); above that it reports the Kolmogorov tail, an upper bound.
TestResult ks_normality(std::span<const double> sample);

/// Survival function of the asymptotic Kolmogorov distribution, P(K > x).
double kolmogorov_sf(double x);

struct TTestOptions {
  bool paired = false;
  Alternative alternative = Alternative::TwoSided;
  bool equal_variance = false;  // unpaired only: pooled Student instead of Welch
};

TestResult t_test(std::span<const double> a, std::span<const double> b, const TTestOptions& options = {});

enum class ExactMode { Auto, Exact, Asymptotic };

/// Mann-Whitney U of `a` against `b` (midranks). Auto uses the exact
/// permutation distribution when both groups have at most 20 values, else the
/// tie-corrected normal approximation with continuity correction. The exact
/// two-sided p counts splits at least as far from the null mean as observed.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          Alternative alternative = Alternative::TwoSided, ExactMode mode = ExactMode::Auto);

/// Wilcoxon signed-rank on d = a - b; zero differences are dropped. The
/// statistic is W+, the rank sum of positive differences. Auto is exact for at
/// most 25 non-zero differences.
TestResult wilcoxon_signed(std::span<const double> a, std::span<const double> b,
                           Alternative alternative = Alternative::TwoSided, ExactMode mode = ExactMode::Auto);

struct AnovaResult {
  TestResult omnibus;
  std::map<std::pair<std::size_t, std::size_t>, TestResult> pairwise;  // Tukey HSD, i < j
};

/// One-way ANOVA with Tukey-Kramer pairwise comparisons.
AnovaResult anova_tukey(std::span<const std::vector<double>> groups);

/// P(Q <= q) for the studentized range of `k` means with `df` error degrees of
/// freedom (df <= 0 means infinite), by numerical integration.
double studentized_range_cdf(double q, double k, double df);

}  // namespace lfptd
