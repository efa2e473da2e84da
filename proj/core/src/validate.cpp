#include "lfptd/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lfptd/random.hpp"
#include "numeric.hpp"

namespace lfptd {

AutocorrSeries autocorrelation(const Signal& signal, std::size_t max_lag) {
  const auto x = signal.samples();
  const std::size_t n = x.size();
  if (max_lag >= n) throw Error("max_lag must be smaller than the signal length");

  const double m = detail::mean(x);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - m;
  double denom = 0.0;
  for (double v : d) denom += v * v;
  if (denom == 0.0) throw Error("zero variance");

  AutocorrSeries out;
  out.lags.resize(max_lag + 1);
  out.coefficients.resize(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) num += d[t] * d[t + k];
    out.lags[k] = k;
    out.coefficients[k] = k == 0 ? 1.0 : num / denom;
  }
  return out;
}

std::size_t autocorrelation_decay_lag(const Signal& signal, std::size_t max_lag) {
  const auto x = signal.samples();
  const std::size_t n = x.size();
  max_lag = std::min(max_lag, n - 1);
  const double m = detail::mean(x);
  double denom = 0.0;
  for (double v : x) denom += (v - m) * (v - m);
  if (denom == 0.0) throw Error("zero variance");

  const double threshold = 1.0 - 1.0 / std::exp(1.0);
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) num += (x[t] - m) * (x[t + k] - m);
    if (num / denom < threshold) return k;
  }
  return std::max<std::size_t>(1, max_lag);
}

HurstFit hurst_rs(const Signal& signal, const HurstOptions& options) {
  const auto x = signal.samples();
  const std::size_t len = x.size();
  const std::size_t max_scale = options.max_scale == 0 ? len / 4 : options.max_scale;
  if (options.min_scale < 8) throw Error("min_scale must be at least 8");
  if (max_scale > len / 2) throw Error("max_scale exceeds half the signal length");
  if (options.scales_per_decade == 0) throw Error("scales_per_decade must be positive");

  std::vector<std::size_t> scales;
  if (max_scale >= options.min_scale) {
    const double lo = std::log10(static_cast<double>(options.min_scale));
    const double hi = std::log10(static_cast<double>(max_scale));
    const double step = 1.0 / static_cast<double>(options.scales_per_decade);
    for (std::size_t k = 0;; ++k) {
      const double e = lo + static_cast<double>(k) * step;
      if (e > hi + 1e-12) break;
      const auto n = static_cast<std::size_t>(std::llround(std::pow(10.0, e)));
      if (n <= max_scale && (scales.empty() || n > scales.back())) scales.push_back(n);
    }
  }

  HurstFit fit;
  std::vector<double> cum;
  for (const std::size_t n : scales) {
    const std::size_t blocks = len / n;
    cum.resize(n);
    double sum_rs = 0.0;
    std::size_t used = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
      const auto block = x.subspan(b * n, n);
      const double m = detail::mean(block);
      double acc = 0.0, lo = 0.0, hi = 0.0, ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dev = block[i] - m;
        acc += dev;
        ss += dev * dev;
        lo = std::min(lo, acc);
        hi = std::max(hi, acc);
      }
      const double s = std::sqrt(ss / static_cast<double>(n));
      if (s == 0.0) continue;
      sum_rs += (hi - lo) / s;
      ++used;
    }
    if (used > 0 && sum_rs > 0.0) fit.per_scale.push_back({n, sum_rs / static_cast<double>(used)});
  }
  if (fit.per_scale.size() < 3) throw Error("insufficient scales");

  std::vector<double> lx, ly;
  for (const auto& s : fit.per_scale) {
    lx.push_back(std::log(static_cast<double>(s.n)));
    ly.push_back(std::log(s.rs_mean));
  }
  const auto line = detail::fit_line(lx, ly);
  fit.H = line.slope;
  fit.C = std::exp(line.intercept);
  fit.r_squared = line.r_squared;
  return fit;
}

HurstFit hurst_rs(const Signal& signal, std::size_t min_scale, std::size_t max_scale,
                  std::size_t scales_per_decade) {
  return hurst_rs(signal, HurstOptions{min_scale, max_scale, scales_per_decade});
}

Signal shuffle_surrogate(const Signal& signal, std::uint64_t seed) {
  std::vector<double> values = signal.values();
  SplitMix64 rng(seed);
  shuffle(std::span<double>(values), rng);
  return signal.with_samples(std::move(values));
}

namespace {

// Nearest neighbour (squared distance > 0) outside the Theiler window, using a
// sweep over points sorted by their first coordinate.
// Pairs with squared distance <= `coincident` are treated as the same state.
// Candidates are swept in order of their projection on the unit diagonal,
// whose difference is a lower bound on the Euclidean distance.
std::vector<std::size_t> nearest_neighbours(const std::vector<double>& points, std::size_t count,
                                            std::size_t dim, std::size_t theiler, double coincident) {
  const double norm = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<double> key(count);
  for (std::size_t i = 0; i < count; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) s += points[i * dim + k];
    key[i] = s * norm;
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  std::vector<std::size_t> rank(count);
  for (std::size_t r = 0; r < count; ++r) rank[order[r]] = r;

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> nn(count, kNone);
  for (std::size_t i = 0; i < count; ++i) {
    const double* pi = &points[i * dim];
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = kNone;
    auto consider = [&](std::size_t j) {
      const std::size_t gap = i > j ? i - j : j - i;
      if (gap <= theiler) return;
      const double* pj = &points[j * dim];
      double d2 = 0.0;
      for (std::size_t k = 0; k < dim && d2 < best; ++k) {
        const double diff = pi[k] - pj[k];
        d2 += diff * diff;
      }
      if (d2 > coincident && d2 < best) {
        best = d2;
        best_j = j;
      }
    };
    const std::size_t r = rank[i];
    for (std::size_t up = r + 1; up < count; ++up) {
      const double dx = key[order[up]] - key[i];
      if (dx * dx >= best) break;
      consider(order[up]);
    }
    for (std::size_t down = r; down-- > 0;) {
      const double dx = key[i] - key[order[down]];
      if (dx * dx >= best) break;
      consider(order[down]);
    }
    nn[i] = best_j;
  }
  return nn;
}

}  // namespace

LyapunovEstimate lyapunov_max(const Signal& signal, const LyapunovOptions& options) {
  const auto x = signal.samples();
  const std::size_t dim = options.embed_dim;
  if (dim < 1) throw Error("embed_dim must be at least 1");
  if (options.horizon < 2) throw Error("horizon must be at least 2");

  std::size_t delay = options.delay;
  if (delay == 0) delay = autocorrelation_decay_lag(signal, std::min<std::size_t>(x.size() / 4, 2000));
  const std::size_t span = (dim - 1) * delay;
  if (span >= x.size() || x.size() - span < 100) throw Error("series too short");
  const std::size_t count = x.size() - span;
  if (count <= options.horizon) throw Error("series too short");
  const std::size_t theiler = options.theiler.value_or(delay * dim);

  std::vector<double> points(count * dim);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t k = 0; k < dim; ++k) points[i * dim + k] = x[i + k * delay];
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double tol = 1e-9 * (*hi - *lo);
  const double coincident = tol * tol * static_cast<double>(dim);
  const auto nn = nearest_neighbours(points, count, dim, theiler, coincident);

  LyapunovEstimate est;
  est.embed_dim = dim;
  est.delay = delay;
  est.theiler = theiler;
  for (std::size_t t = 0; t < options.horizon; ++t) {
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i + t < count; ++i) {
      const std::size_t j = nn[i];
      if (j == std::numeric_limits<std::size_t>::max() || j + t >= count) continue;
      double d2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = points[(i + t) * dim + k] - points[(j + t) * dim + k];
        d2 += diff * diff;
      }
      if (d2 <= coincident) continue;
      sum += 0.5 * std::log(d2);
      ++used;
    }
    if (used == 0) break;
    est.divergence_curve.push_back({t, sum / static_cast<double>(used)});
  }
  if (est.divergence_curve.size() < 2) throw Error("series too short");

  const std::size_t curve = est.divergence_curve.size();
  est.fit_range = options.fit_range.value_or(std::pair<std::size_t, std::size_t>{0, std::max<std::size_t>(2, curve / 20)});
  auto& [first, last] = est.fit_range;
  last = std::min(last, curve);
  if (last < first + 2) throw Error("fit range must cover at least two points of the divergence curve");

  std::vector<double> tx, ty;
  for (std::size_t k = first; k < last; ++k) {
    tx.push_back(static_cast<double>(est.divergence_curve[k].t));
    ty.push_back(est.divergence_curve[k].mean_log_distance);
  }
  est.lambda = detail::fit_line(tx, ty).slope;
  return est;
}

BasicFeatures basic_features(std::span<const double> samples) {
  if (samples.empty()) throw Error("basic features need at least one sample");
  BasicFeatures f;
  f.mean = detail::mean(samples);
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  f.minimum = *lo;
  f.maximum = *hi;
  // Guard against the mean drifting outside [min, max] by rounding.
  f.mean = std::clamp(f.mean, f.minimum, f.maximum);
  f.stdev = std::sqrt(detail::variance(samples, f.mean));

  std::vector<double> sorted(samples.begin(), samples.end());
  const std::size_t n = sorted.size();
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  if (n % 2 == 1) {
    f.median = *mid;
  } else {
    const double upper = *mid;
    const double lower = *std::max_element(sorted.begin(), mid);
    f.median = lower + (upper - lower) / 2.0;
  }
  return f;
}

ValidationReport validate_signal(const Signal& signal, const ValidationOptions& options) {
  const auto windows = window(signal, options.window_seconds, 0.0);
  std::vector<std::size_t> picked;
  if (options.max_windows == 0 || options.max_windows >= windows.size()) {
    picked.resize(windows.size());
    std::iota(picked.begin(), picked.end(), std::size_t{0});
  } else {
    for (std::size_t k = 0; k < options.max_windows; ++k) {
      picked.push_back(k * windows.size() / options.max_windows);
    }
  }

  ValidationReport report;
  const double win_len = static_cast<double>(windows.front().size()) / signal.fs();
  for (const std::size_t w : picked) {
    const Signal& seg = windows[w];
    WindowValidation v;
    v.start_seconds = static_cast<double>(w) * win_len;
    v.hurst = hurst_rs(seg, options.hurst).H;
    v.surrogate_hurst = hurst_rs(shuffle_surrogate(seg, derive_seed(options.seed, w)), options.hurst).H;
    v.lambda = lyapunov_max(seg, options.lyapunov).lambda;
    v.r1 = autocorrelation(seg, 1).coefficients[1];
    report.windows.push_back(v);
  }

  const double count = static_cast<double>(report.windows.size());
  for (const auto& v : report.windows) {
    report.mean_hurst += v.hurst / count;
    report.mean_surrogate_hurst += v.surrogate_hurst / count;
    report.mean_lambda += v.lambda / count;
    report.mean_r1 += v.r1 / count;
  }
  if (report.mean_hurst > 0.95) {
    report.warnings.emplace_back("mean Hurst exponent above 0.95: series behaves like integrated noise");
  }
  return report;
}

}  // namespace lfptd
