#include "lfptd/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

namespace lfptd {

namespace {

using cplx = std::complex<double>;

enum class Kind { Lowpass, Highpass };

// Normalized analog Butterworth poles in the left half plane.
std::vector<cplx> prototype_poles(int order) {
  std::vector<cplx> poles;
  for (int k = 0; k < order; ++k) {
    const double angle = std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order);
    poles.emplace_back(std::cos(angle), std::sin(angle));
  }
  return poles;
}

std::vector<Biquad> design_section_set(Kind kind, int order, double cutoff_hz, double fs) {
  const double two_fs = 2.0 * fs;
  const double warped = two_fs * std::tan(std::numbers::pi * cutoff_hz / fs);
  const auto proto = prototype_poles(order);

  auto to_z = [&](cplx p) {
    const cplx s = kind == Kind::Lowpass ? warped * p : warped / p;
    return (two_fs + s) / (two_fs - s);
  };

  std::vector<Biquad> sections;
  for (int k = 0; k < order / 2; ++k) {
    const cplx z = to_z(proto[static_cast<std::size_t>(k)]);
    Biquad sec;
    sec.a = {1.0, -2.0 * z.real(), std::norm(z)};
    if (kind == Kind::Lowpass) {
      const double g = (1.0 + sec.a[1] + sec.a[2]) / 4.0;
      sec.b = {g, 2.0 * g, g};
    } else {
      const double g = (1.0 - sec.a[1] + sec.a[2]) / 4.0;
      sec.b = {g, -2.0 * g, g};
    }
    sections.push_back(sec);
  }
  if (order % 2 == 1) {
    const double z = to_z(proto[static_cast<std::size_t>(order / 2)]).real();
    Biquad sec;
    sec.a = {1.0, -z, 0.0};
    if (kind == Kind::Lowpass) {
      const double g = (1.0 - z) / 2.0;
      sec.b = {g, g, 0.0};
    } else {
      const double g = (1.0 + z) / 2.0;
      sec.b = {g, -g, 0.0};
    }
    sections.push_back(sec);
  }
  return sections;
}

// Direct form II transposed, in place; `state` holds (z1, z2) per section.
void run_cascade(const std::vector<Biquad>& sections, std::vector<double>& x,
                 std::vector<std::array<double, 2>> state) {
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const auto& [b, a] = sections[s];
    double z1 = state[s][0];
    double z2 = state[s][1];
    for (double& v : x) {
      const double in = v;
      const double out = b[0] * in + z1;
      z1 = b[1] * in - a[1] * out + z2;
      z2 = b[2] * in - a[2] * out;
      v = out;
    }
  }
}

// Per-section state that holds the cascade at rest for a constant unit input.
std::vector<std::array<double, 2>> steady_state(const std::vector<Biquad>& sections, double level) {
  std::vector<std::array<double, 2>> zi;
  double u = level;
  for (const auto& [b, a] : sections) {
    const double gain = (b[0] + b[1] + b[2]) / (1.0 + a[1] + a[2]);
    const double y = gain * u;
    const double z2 = b[2] * u - a[2] * y;
    const double z1 = b[1] * u - a[1] * y + z2;
    zi.push_back({z1, z2});
    u = y;
  }
  return zi;
}

}  // namespace

void FilterSpec::validate(double fs) const {
  if (order < 1) throw Error("filter order must be positive");
  if (!(low_cut_hz > 0.0)) throw Error("low cutoff must be positive");
  if (!(high_cut_hz > low_cut_hz)) throw Error("high cutoff must exceed low cutoff");
  if (!(high_cut_hz < fs / 2.0)) throw Error("cutoff above Nyquist");
}

std::vector<Biquad> design_bandpass(const FilterSpec& spec, double fs) {
  spec.validate(fs);
  auto sections = design_section_set(Kind::Highpass, spec.order, spec.low_cut_hz, fs);
  auto low = design_section_set(Kind::Lowpass, spec.order, spec.high_cut_hz, fs);
  sections.insert(sections.end(), low.begin(), low.end());
  return sections;
}

double magnitude_response(const std::vector<Biquad>& sections, double hz, double fs) {
  const double w = 2.0 * std::numbers::pi * hz / fs;
  const cplx z1 = std::polar(1.0, -w);
  const cplx z2 = z1 * z1;
  cplx h = 1.0;
  for (const auto& [b, a] : sections) {
    h *= (b[0] + b[1] * z1 + b[2] * z2) / (a[0] + a[1] * z1 + a[2] * z2);
  }
  return std::abs(h);
}

std::vector<double> filtfilt(const std::vector<Biquad>& sections, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw Error("signal too short");
  const std::size_t pad = std::min<std::size_t>(n - 1, 3 * (2 * sections.size() + 1));

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  run_cascade(sections, ext, steady_state(sections, ext.front()));
  std::reverse(ext.begin(), ext.end());
  run_cascade(sections, ext, steady_state(sections, ext.front()));
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

Signal bandpass(const Signal& signal, const FilterSpec& spec) {
  const auto sections = design_bandpass(spec, signal.fs());
  return signal.with_samples(filtfilt(sections, signal.samples()));
}

Signal clamp_outliers(const Signal& signal) {
  const auto x = signal.samples();
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double limit = 3.0 * std::sqrt(ss / n);

  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) {
    if (std::abs(v - mean) > limit) v = mean;
  }
  return signal.with_samples(std::move(out));
}

Signal preprocess(const Signal& signal, const FilterSpec& spec) {
  return clamp_outliers(bandpass(signal, spec));
}

SessionRecord preprocess(const SessionRecord& record, const FilterSpec& spec) {
  return record.with_channels(preprocess(record.hip(), spec), preprocess(record.nac(), spec));
}

}  // namespace lfptd
