#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library except the random stream used to draw samples.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "lfptd/random.hpp"

namespace oracle {

inline std::vector<double> normals(std::size_t n, std::uint64_t seed, double mu = 0.0, double sigma = 1.0) {
  lfptd::SplitMix64 rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = mu + sigma * rng.normal();
  return x;
}

inline std::vector<double> uniforms(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  lfptd::SplitMix64 rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = lo + (hi - lo) * rng.uniform();
  return x;
}

// Inverse-CDF Laplace draws.
inline std::vector<double> laplaces(std::size_t n, std::uint64_t seed, double mu = 0.0, double b = 1.0) {
  lfptd::SplitMix64 rng(seed);
  std::vector<double> x(n);
  for (double& v : x) {
    const double u = rng.uniform() - 0.5;
    v = mu - b * (u < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
  }
  return x;
}

// Inverse-CDF logistic draws.
inline std::vector<double> logistics(std::size_t n, std::uint64_t seed, double mu = 0.0, double s = 1.0) {
  lfptd::SplitMix64 rng(seed);
  std::vector<double> x(n);
  for (double& v : x) {
    const double u = rng.uniform_open_zero() * (1.0 - 1e-16);
    v = mu + s * std::log(u / (1.0 - u));
  }
  return x;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// Composite Simpson rule with `n` (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double pop_sd(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

inline double lag1(const std::vector<double>& x) {
  const double m = mean(x);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - m) * (x[i] - m);
    if (i + 1 < x.size()) num += (x[i] - m) * (x[i + 1] - m);
  }
  return num / den;
}

// Rank-sum of `a` under every split of the pooled sample; returns the exact
// two-sided and one-sided ("a smaller") permutation p-values of U_a.
struct PermutationP {
  double two_sided = 1.0;
  double less = 1.0;
  double greater = 1.0;
};

inline std::vector<double> midranks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (pooled[j] < pooled[i]) below += 1.0;
      if (pooled[j] == pooled[i]) equal += 1.0;
    }
    r[i] = below + (equal + 1.0) / 2.0;
  }
  return r;
}

inline PermutationP mann_whitney_enumerate(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto r = midranks(pooled);
  const std::size_t n = pooled.size(), na = a.size();
  const double shift = static_cast<double>(na * (na + 1)) / 2.0;
  const double center = static_cast<double>(na * b.size()) / 2.0;
  double u_obs = -shift;
  for (std::size_t i = 0; i < na; ++i) u_obs += r[i];

  std::size_t total = 0, le = 0, ge = 0, extreme = 0;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(na), true);
  do {
    double u = -shift;
    for (std::size_t i = 0; i < n; ++i) {
      if (pick[i]) u += r[i];
    }
    ++total;
    if (u <= u_obs + 1e-9) ++le;
    if (u >= u_obs - 1e-9) ++ge;
    if (std::abs(u - center) >= std::abs(u_obs - center) - 1e-9) ++extreme;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  const double t = static_cast<double>(total);
  return {std::min(1.0, static_cast<double>(extreme) / t), static_cast<double>(le) / t, static_cast<double>(ge) / t};
}

// Exact signed-rank distribution by enumerating all 2^n sign assignments of
// the non-zero |d| midranks.
inline PermutationP wilcoxon_enumerate(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  }
  std::vector<double> absd(d.size());
  std::transform(d.begin(), d.end(), absd.begin(), [](double v) { return std::abs(v); });
  const auto r = midranks(absd);
  const std::size_t n = d.size();
  double total_rank = 0.0, w_obs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total_rank += r[i];
    if (d[i] > 0) w_obs += r[i];
  }
  const double center = total_rank / 2.0;
  std::size_t le = 0, ge = 0, extreme = 0;
  const std::size_t count = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < count; ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) w += r[i];
    }
    if (w <= w_obs + 1e-9) ++le;
    if (w >= w_obs - 1e-9) ++ge;
    if (std::abs(w - center) >= std::abs(w_obs - center) - 1e-9) ++extreme;
  }
  const double t = static_cast<double>(count);
  return {std::min(1.0, static_cast<double>(extreme) / t), static_cast<double>(le) / t, static_cast<double>(ge) / t};
}

// Benettin two-orbit estimate for the logistic map: evolve a reference and a
// perturbed orbit, renormalize the separation every step, average the log
// stretch.
inline double logistic_two_orbit_lyapunov(double r, double x0, std::size_t steps) {
  double x = x0;
  for (int i = 0; i < 1000; ++i) x = r * x * (1.0 - x);
  const double d0 = 1e-9;
  double acc = 0.0;
  std::size_t used = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    double y = x + d0;
    if (y >= 1.0) y = x - d0;
    const double fx = r * x * (1.0 - x);
    const double fy = r * y * (1.0 - y);
    const double d1 = std::abs(fy - fx);
    if (d1 > 0.0) {
      acc += std::log(d1 / d0);
      ++used;
    }
    x = fx;
  }
  return acc / static_cast<double>(used);
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lfptd-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
