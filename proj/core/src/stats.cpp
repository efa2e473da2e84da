#include "lfptd/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>

#include "lfptd/signal.hpp"
#include "numeric.hpp"

namespace lfptd {

namespace {

using boost::math::cdf;
using boost::math::complement;

double clamp_p(double p) {
  return std::clamp(p, 0.0, 1.0);
}

Sided sided_of(Alternative alt) {
  return alt == Alternative::TwoSided ? Sided::Two : Sided::One;
}

// p-value for a statistic whose null CDF is `lower` and survival `upper`.
double tail_p(Alternative alt, double lower, double upper) {
  switch (alt) {
    case Alternative::Less:
      return clamp_p(lower);
    case Alternative::Greater:
      return clamp_p(upper);
    case Alternative::TwoSided:
      return clamp_p(2.0 * std::min(lower, upper));
  }
  return 1.0;
}

double normal_sf(double z) {
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double t_p_value(double t, double df, Alternative alt) {
  const boost::math::students_t dist(df);
  return tail_p(alt, cdf(dist, t), cdf(complement(dist, t)));
}

// Midranks of `values`, doubled so they are integers.
std::vector<std::int64_t> doubled_midranks(std::span<const double> values, double* tie_term) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<std::int64_t> ranks(n);
  double ties = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // ranks i+1 .. j+1, doubled midrank = (i+1)+(j+1)
    const auto r2 = static_cast<std::int64_t>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r2;
    const double t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  if (tie_term) *tie_term = ties;
  return ranks;
}

// counts[s] = number of size-`pick` subsets of `items` with sum s.
std::vector<double> subset_sum_counts(std::span<const std::int64_t> items, std::size_t pick) {
  const auto total = static_cast<std::size_t>(std::accumulate(items.begin(), items.end(), std::int64_t{0}));
  std::vector<std::vector<double>> dp(pick + 1, std::vector<double>(total + 1, 0.0));
  dp[0][0] = 1.0;
  std::size_t seen = 0;
  for (const auto item : items) {
    const auto w = static_cast<std::size_t>(item);
    ++seen;
    for (std::size_t j = std::min(pick, seen); j >= 1; --j) {
      auto& row = dp[j];
      const auto& prev = dp[j - 1];
      for (std::size_t s = total; s >= w; --s) {
        row[s] += prev[s - w];
        if (s == w) break;
      }
    }
  }
  return dp[pick];
}

// Lower and upper tail probabilities of `observed` under the distribution `counts`.
// Exact p-value from a permutation distribution of integer scores. The
// two-sided p counts outcomes at least as far from the distribution mean as the
// observed score, which stays correct when ties make the distribution skewed.
double exact_p(const std::vector<double>& counts, std::size_t observed, Alternative alt) {
  double total = 0.0, weighted = 0.0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    total += counts[s];
    weighted += counts[s] * static_cast<double>(s);
  }
  const double center = weighted / total;
  const double reach = std::abs(static_cast<double>(observed) - center) - 1e-9;
  double lower = 0.0, upper = 0.0, extreme = 0.0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (s <= observed) lower += counts[s];
    if (s >= observed) upper += counts[s];
    if (std::abs(static_cast<double>(s) - center) >= reach) extreme += counts[s];
  }
  switch (alt) {
    case Alternative::Less:
      return clamp_p(lower / total);
    case Alternative::Greater:
      return clamp_p(upper / total);
    case Alternative::TwoSided:
      return clamp_p(extreme / total);
  }
  return 1.0;
}

// Dallal & Wilkinson (1986) approximation to the Lilliefors tail.
double lilliefors_p(double d, double n) {
  if (n > 100.0) {
    d *= std::pow(n / 100.0, 0.49);
    n = 100.0;
  }
  return std::exp(-7.01256 * d * d * (n + 2.78019) + 2.99587 * d * std::sqrt(n + 2.78019) - 0.122119 +
                  0.974598 / std::sqrt(n) + 1.67997 / n);
}

}  // namespace

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.0) {
    // P(K <= x) = sqrt(2 pi)/x * sum exp(-(2k-1)^2 pi^2 / (8 x^2))
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double m = 2.0 * k - 1.0;
      sum += std::exp(-m * m * std::numbers::pi * std::numbers::pi / (8.0 * x * x));
    }
    return clamp_p(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * sum);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return clamp_p(2.0 * sum);
}

TestResult ks_normality(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 5) throw Error("KS normality needs at least 5 values");
  const double m = detail::mean(sample);
  const double sd = std::sqrt(detail::sample_variance(sample));
  if (!(sd > 0.0)) throw Error("zero variance");

  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double nn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = normal_cdf((sorted[i] - m) / sd);
    d = std::max({d, static_cast<double>(i + 1) / nn - f, f - static_cast<double>(i) / nn});
  }
  d = std::clamp(d, 0.0, 1.0);

  const double p_lf = lilliefors_p(d, nn);
  const double p = p_lf <= 0.1 ? p_lf : std::max(0.1, kolmogorov_sf(std::sqrt(nn) * d));
  return {d, clamp_p(p), "ks_normality", Sided::Two};
}

TestResult t_test(std::span<const double> a, std::span<const double> b, const TTestOptions& options) {
  if (a.size() < 2 || b.size() < 2) throw Error("t-test needs at least two values per group");
  const Sided sided = sided_of(options.alternative);

  if (options.paired) {
    if (a.size() != b.size()) throw Error("paired t-test needs equal lengths");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const double md = detail::mean(d);
    const double var = detail::sample_variance(d);
    if (var == 0.0) {
      if (md == 0.0) return {0.0, 1.0, "t_paired", sided};
      throw Error("zero variance");
    }
    const double n = static_cast<double>(d.size());
    const double t = md / std::sqrt(var / n);
    return {t, t_p_value(t, n - 1.0, options.alternative), "t_paired", sided};
  }

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = detail::mean(a);
  const double mb = detail::mean(b);
  const double va = detail::sample_variance(a);
  const double vb = detail::sample_variance(b);

  if (options.equal_variance) {
    const double df = na + nb - 2.0;
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
    if (pooled == 0.0) throw Error("zero variance");
    const double t = (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    return {t, t_p_value(t, df, options.alternative), "t_student", sided};
  }

  const double sa = va / na;
  const double sb = vb / nb;
  const double se2 = sa + sb;
  if (se2 == 0.0) throw Error("zero variance");
  const double t = (ma - mb) / std::sqrt(se2);
  const double df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  return {t, t_p_value(t, df, options.alternative), "t_welch", sided};
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b, Alternative alternative,
                          ExactMode mode) {
  if (a.size() < 3 || b.size() < 3) throw Error("Mann-Whitney needs at least three values per group");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  double tie_term = 0.0;
  const auto ranks = doubled_midranks(pooled, &tie_term);

  const auto na = static_cast<std::int64_t>(a.size());
  const auto nb = static_cast<std::int64_t>(b.size());
  std::int64_t ra2 = 0;
  for (std::int64_t i = 0; i < na; ++i) ra2 += ranks[static_cast<std::size_t>(i)];
  const double u = static_cast<double>(ra2 - na * (na + 1)) / 2.0;

  const bool exact = mode == ExactMode::Exact || (mode == ExactMode::Auto && a.size() <= 20 && b.size() <= 20);
  double p = 1.0;
  if (exact) {
    const auto counts = subset_sum_counts(ranks, a.size());
    p = exact_p(counts, static_cast<std::size_t>(ra2), alternative);
  } else {
    const double n1 = static_cast<double>(na), n2 = static_cast<double>(nb);
    const double n = n1 + n2;
    const double mu = n1 * n2 / 2.0;
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var <= 0.0) return {u, 1.0, "mann_whitney_u", sided_of(alternative)};
    const double sd = std::sqrt(var);
    switch (alternative) {
      case Alternative::Greater:
        p = normal_sf((u - mu - 0.5) / sd);
        break;
      case Alternative::Less:
        p = normal_cdf((u - mu + 0.5) / sd);
        break;
      case Alternative::TwoSided:
        p = 2.0 * normal_sf(std::max(0.0, std::abs(u - mu) - 0.5) / sd);
        break;
    }
  }
  return {u, clamp_p(p), "mann_whitney_u", sided_of(alternative)};
}

TestResult wilcoxon_signed(std::span<const double> a, std::span<const double> b, Alternative alternative,
                           ExactMode mode) {
  if (a.size() != b.size()) throw Error("Wilcoxon signed-rank needs equal lengths");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] - b[i] != 0.0) d.push_back(a[i] - b[i]);
  }
  if (d.empty()) throw Error("all differences zero");

  std::vector<double> mag(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) mag[i] = std::abs(d[i]);
  double tie_term = 0.0;
  const auto ranks = doubled_midranks(mag, &tie_term);
  std::int64_t w2 = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > 0.0) w2 += ranks[i];
  }
  const double w = static_cast<double>(w2) / 2.0;

  const bool exact = mode == ExactMode::Exact || (mode == ExactMode::Auto && d.size() <= 25);
  double p = 1.0;
  if (exact) {
    // Sign assignments: every subset of ranks is equally likely to be positive.
    const auto total = static_cast<std::size_t>(std::accumulate(ranks.begin(), ranks.end(), std::int64_t{0}));
    std::vector<double> counts(total + 1, 0.0);
    counts[0] = 1.0;
    for (const auto r : ranks) {
      const auto step = static_cast<std::size_t>(r);
      for (std::size_t s = total; s >= step; --s) {
        counts[s] += counts[s - step];
        if (s == step) break;
      }
    }
    p = exact_p(counts, static_cast<std::size_t>(w2), alternative);
  } else {
    const double n = static_cast<double>(d.size());
    const double mu = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    const double sd = std::sqrt(var);
    switch (alternative) {
      case Alternative::Greater:
        p = normal_sf((w - mu - 0.5) / sd);
        break;
      case Alternative::Less:
        p = normal_cdf((w - mu + 0.5) / sd);
        break;
      case Alternative::TwoSided:
        p = 2.0 * normal_sf(std::max(0.0, std::abs(w - mu) - 0.5) / sd);
        break;
    }
  }
  return {w, clamp_p(p), "wilcoxon_signed", sided_of(alternative)};
}

double studentized_range_cdf(double q, double k, double df) {
  if (!(q > 0.0)) return 0.0;
  if (k < 2.0) throw Error("studentized range needs at least two means");
  using boost::math::quadrature::gauss_kronrod;

  // P(range of k standard normals < w)
  auto range_cdf = [k](double w) {
    if (w <= 0.0) return 0.0;
    auto integrand = [k, w](double z) {
      const double inner = normal_cdf(z) - normal_cdf(z - w);
      if (inner <= 0.0) return 0.0;
      return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) * std::pow(inner, k - 1.0);
    };
    const double v = k * (gauss_kronrod<double, 31>::integrate(integrand, -9.0, 0.5 * w, 10, 1e-12) +
                          gauss_kronrod<double, 31>::integrate(integrand, 0.5 * w, w + 9.0, 10, 1e-12));
    return std::clamp(v, 0.0, 1.0);
  };

  if (df <= 0.0 || !std::isfinite(df)) return range_cdf(q);

  // Mix over s = sqrt(chi2_df / df).
  const double log_norm = 0.5 * df * std::log(df) - std::lgamma(0.5 * df) - (0.5 * df - 1.0) * std::log(2.0);
  auto integrand = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double log_density = log_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s;
    return std::exp(log_density) * range_cdf(q * s);
  };
  const double spread = 12.0 / std::sqrt(2.0 * df);
  const double lo = std::max(0.0, 1.0 - spread);
  const double hi = 1.0 + std::max(spread, 8.0 / std::sqrt(df));
  const double mid = 1.0;
  double v = 0.0;
  if (lo < mid) v += gauss_kronrod<double, 31>::integrate(integrand, lo, mid, 12, 1e-11);
  v += gauss_kronrod<double, 31>::integrate(integrand, mid, hi, 12, 1e-11);
  return std::clamp(v, 0.0, 1.0);
}

AnovaResult anova_tukey(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw Error("ANOVA needs at least two groups");
  for (const auto& g : groups) {
    if (g.size() < 2) throw Error("ANOVA needs at least two values per group");
  }
  const std::size_t k = groups.size();
  std::vector<double> means(k);
  double grand = 0.0;
  double n_total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    means[i] = detail::mean(groups[i]);
    grand += means[i] * static_cast<double>(groups[i].size());
    n_total += static_cast<double>(groups[i].size());
  }
  grand /= n_total;

  double ss_between = 0.0, ss_within = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    ss_between += static_cast<double>(groups[i].size()) * (means[i] - grand) * (means[i] - grand);
    for (double v : groups[i]) ss_within += (v - means[i]) * (v - means[i]);
  }
  if (ss_within == 0.0) throw Error("zero within-group variance");

  const double df_b = static_cast<double>(k) - 1.0;
  const double df_w = n_total - static_cast<double>(k);
  const double ms_w = ss_within / df_w;
  const double f = (ss_between / df_b) / ms_w;
  const boost::math::fisher_f dist(df_b, df_w);

  AnovaResult out;
  out.omnibus = {f, clamp_p(cdf(complement(dist, f))), "anova_oneway", Sided::One};
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double se = std::sqrt(0.5 * ms_w *
                                  (1.0 / static_cast<double>(groups[i].size()) + 1.0 / static_cast<double>(groups[j].size())));
      const double q = std::abs(means[i] - means[j]) / se;
      const double p = 1.0 - studentized_range_cdf(q, static_cast<double>(k), df_w);
      out.pairwise[{i, j}] = {q, clamp_p(p), "tukey_hsd", Sided::Two};
    }
  }
  return out;
}

}  // namespace lfptd
