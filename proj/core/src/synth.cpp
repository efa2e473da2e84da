#include "lfptd/synth.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstring>
#include <list>
#include <memory>
#include <mutex>

#include "lfptd/io.hpp"
#include "lfptd/random.hpp"

namespace lfptd {

namespace {

// FFTW planning is not thread-safe; execution on a finished plan is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)), size(n) {
    if (!data) throw Error("FFT allocation failed");
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
  std::size_t size;
};

// In-place forward DFT.
void forward_fft(FftwBuffer& buf) {
  fftw_plan plan = nullptr;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(buf.size), buf.data, buf.data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  if (!plan) throw Error("FFT planning failed");
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

double fgn_autocovariance(std::size_t k, double hurst) {
  const double h2 = 2.0 * hurst;
  const double kk = static_cast<double>(k);
  return 0.5 * (std::pow(std::abs(kk - 1.0), h2) - 2.0 * std::pow(kk, h2) + std::pow(kk + 1.0, h2));
}

// sqrt(lambda_j / m) of the 2n circulant embedding, cached for reuse across
// sessions of equal length.
std::shared_ptr<const std::vector<double>> circulant_scales(std::size_t n, double hurst) {
  struct Entry {
    std::size_t n;
    double hurst;
    std::shared_ptr<const std::vector<double>> scales;
  };
  static std::mutex cache_mutex;
  static std::list<Entry> cache;
  {
    std::lock_guard lock(cache_mutex);
    for (const auto& e : cache) {
      if (e.n == n && e.hurst == hurst) return e.scales;
    }
  }

  const std::size_t m = 2 * n;
  FftwBuffer buf(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t lag = j <= n ? j : m - j;
    buf.data[j][0] = fgn_autocovariance(lag, hurst);
    buf.data[j][1] = 0.0;
  }
  forward_fft(buf);

  auto scales = std::make_shared<std::vector<double>>(m);
  double peak = 0.0;
  for (std::size_t j = 0; j < m; ++j) peak = std::max(peak, buf.data[j][0]);
  for (std::size_t j = 0; j < m; ++j) {
    double lambda = buf.data[j][0];
    // The fGn embedding is non-negative definite for every H in (0, 1).
    assert(lambda > -1e-9 * peak);
    lambda = std::max(lambda, 0.0);
    (*scales)[j] = std::sqrt(lambda / static_cast<double>(m));
  }

  std::lock_guard lock(cache_mutex);
  cache.push_front({n, hurst, scales});
  if (cache.size() > 4) cache.pop_back();
  return scales;
}

}  // namespace

EffectProfile EffectProfile::defaults(Treatment treatment) {
  EffectProfile p;
  p.treatment = treatment;
  switch (treatment) {
    case Treatment::Saline:
      break;
    case Treatment::Morphine:
      p.nac_sigma_post_scale = 0.7;
      break;
    case Treatment::Food:
      p.hip_sigma_post_scale = 1.6;
      p.post_coupling = 0.6;
      break;
  }
  return p;
}

void EffectProfile::validate() const {
  if (!(nac_sigma_post_scale > 0.0 && hip_sigma_post_scale > 0.0)) throw Error("sigma scales must be positive");
  if (!(post_coupling >= 0.0 && post_coupling < 1.0)) throw Error("coupling must lie in [0, 1)");
  if (!(hurst_target > 0.0 && hurst_target < 1.0)) throw Error("hurst target must lie in (0, 1)");
}

Signal gen_white(std::size_t n, double sigma, std::uint64_t seed, double fs) {
  if (n < 2) throw Error("signal too short");
  if (!(sigma > 0.0)) throw Error("sigma must be positive");
  SplitMix64 rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = sigma * rng.normal();
  return Signal(std::move(x), fs, "white");
}

std::pair<std::vector<double>, std::vector<double>> gen_fgn_pair(std::size_t n, double hurst, std::uint64_t seed) {
  if (n < 2 || !std::has_single_bit(n)) throw Error("fGn length must be a power of two");
  if (!(hurst > 0.0 && hurst < 1.0)) throw Error("hurst must lie in (0, 1)");

  const auto scales = circulant_scales(n, hurst);
  const std::size_t m = 2 * n;
  FftwBuffer buf(m);
  SplitMix64 rng(seed);
  for (std::size_t j = 0; j < m; ++j) {
    const double re = rng.normal();
    const double im = rng.normal();
    buf.data[j][0] = (*scales)[j] * re;
    buf.data[j][1] = (*scales)[j] * im;
  }
  forward_fft(buf);

  std::pair<std::vector<double>, std::vector<double>> out;
  out.first.resize(n);
  out.second.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.first[j] = buf.data[j][0];
    out.second[j] = buf.data[j][1];
  }
  return out;
}

Signal gen_fgn(std::size_t n, double hurst, std::uint64_t seed, double fs) {
  return Signal(gen_fgn_pair(n, hurst, seed).first, fs, "fgn");
}

Signal gen_logistic(std::size_t n, double r, double x0, double fs) {
  if (!(r > 0.0 && r <= 4.0)) throw Error("r must lie in (0, 4]");
  if (!(x0 > 0.0 && x0 < 1.0)) throw Error("x0 must lie in (0, 1)");
  if (n < 100) throw Error("logistic series needs at least 100 samples");
  double x = x0;
  for (int i = 0; i < 1000; ++i) x = r * x * (1.0 - x);
  std::vector<double> out(n);
  for (double& v : out) {
    v = x;
    x = r * x * (1.0 - x);
  }
  return Signal(std::move(out), fs, "logistic");
}

SessionRecord gen_session(const EffectProfile& profile, Phase phase, double duration_s, double fs,
                          std::uint64_t seed, std::string subject_id) {
  profile.validate();
  if (!(fs > 0.0)) throw Error("sampling rate must be positive");
  const double samples = std::round(duration_s * fs);
  if (!(samples >= 16384.0)) throw Error("session needs at least 2^14 samples");
  const auto n = static_cast<std::size_t>(samples);

  auto [hip, nac] = gen_fgn_pair(std::bit_ceil(n), profile.hurst_target, seed);
  hip.resize(n);
  nac.resize(n);
  if (phase == Phase::Post) {
    const double c = profile.post_coupling;
    const double keep = std::sqrt(1.0 - c * c);
    for (std::size_t i = 0; i < n; ++i) {
      nac[i] = profile.nac_sigma_post_scale * (keep * nac[i] + c * hip[i]);
      hip[i] *= profile.hip_sigma_post_scale;
    }
  }
  return SessionRecord(subject_id, phase, profile.treatment, Signal(std::move(hip), fs, subject_id + ":HIP"),
                       Signal(std::move(nac), fs, subject_id + ":NAC"));
}

std::vector<SubjectPair> gen_cohort(const CohortOptions& options) {
  std::vector<SubjectPair> cohort;
  std::uint64_t stream = 0;
  for (const auto& profile : options.profiles) {
    std::string prefix(to_string(profile.treatment));
    std::transform(prefix.begin(), prefix.end(), prefix.begin(), [](unsigned char ch) { return std::tolower(ch); });
    for (std::size_t s = 1; s <= options.subjects_per_group; ++s) {
      char id[64];
      std::snprintf(id, sizeof id, "%s-%02zu", prefix.c_str(), s);
      const auto pre_seed = derive_seed(options.seed, stream++);
      const auto post_seed = derive_seed(options.seed, stream++);
      cohort.push_back({gen_session(profile, Phase::Pre, options.duration_s, options.fs, pre_seed, id),
                        gen_session(profile, Phase::Post, options.duration_s, options.fs, post_seed, id)});
    }
  }
  return cohort;
}

void write_cohort(const std::filesystem::path& dir, const std::vector<SubjectPair>& cohort) {
  std::filesystem::create_directories(dir);
  for (const auto& [pre, post] : cohort) {
    write_session(dir / (pre.subject_id() + "_pre.csv"), pre);
    write_session(dir / (post.subject_id() + "_post.csv"), post);
  }
}

}  // namespace lfptd
