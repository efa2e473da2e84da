#pragma once

#include <array>
#include <vector>

#include "lfptd/signal.hpp"

namespace lfptd {

struct FilterSpec {
  double low_cut_hz = 0.5;
  double high_cut_hz = 300.0;
  int order = 4;

  /// Throws Error unless 0 < low < high < fs/2 and order >= 1.
  void validate(double fs) const;
};

/// One second-order section, a0 normalized to 1.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};
};

/// Digital Butterworth band-pass of `spec.order` low-pass plus `spec.order`
/// high-pass poles (bilinear transform with pre-warped cutoffs).
std::vector<Biquad> design_bandpass(const FilterSpec& spec, double fs);

/// |H(e^{jw})| of a cascade at frequency `hz`.
double magnitude_response(const std::vector<Biquad>& sections, double hz, double fs);

/// Runs the cascade forward then backward with odd-extension padding and
/// steady-state initial conditions, so the output has zero phase shift.
std::vector<double> filtfilt(const std::vector<Biquad>& sections, std::span<const double> x);

/// Zero-phase Butterworth band-pass. Length and rate are preserved.
Signal bandpass(const Signal& signal, const FilterSpec& spec = {});

/// Replaces every sample farther than 3 population standard deviations from
/// the mean by the mean. Mean and deviation are computed once on the input.
Signal clamp_outliers(const Signal& signal);

/// bandpass followed by clamp_outliers.
Signal preprocess(const Signal& signal, const FilterSpec& spec = {});
SessionRecord preprocess(const SessionRecord& record, const FilterSpec& spec = {});

}  // namespace lfptd
