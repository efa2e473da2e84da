#include "lfptd/signal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace lfptd {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view to_string(Site site) {
  return site == Site::Hip ? "HIP" : "NAC";
}

std::string_view to_string(Phase phase) {
  return phase == Phase::Pre ? "PRE" : "POST";
}

std::string_view to_string(Treatment treatment) {
  switch (treatment) {
    case Treatment::Saline:
      return "SALINE";
    case Treatment::Morphine:
      return "MORPHINE";
    case Treatment::Food:
      return "FOOD";
  }
  return "SALINE";
}

Site parse_site(std::string_view text) {
  if (iequals(text, "hip")) return Site::Hip;
  if (iequals(text, "nac")) return Site::Nac;
  throw Error("unknown site: " + std::string(text));
}

Phase parse_phase(std::string_view text) {
  if (iequals(text, "pre")) return Phase::Pre;
  if (iequals(text, "post")) return Phase::Post;
  throw Error("unknown phase: " + std::string(text));
}

Treatment parse_treatment(std::string_view text) {
  if (iequals(text, "saline")) return Treatment::Saline;
  if (iequals(text, "morphine")) return Treatment::Morphine;
  if (iequals(text, "food")) return Treatment::Food;
  throw Error("unknown treatment: " + std::string(text));
}

Signal::Signal(std::vector<double> samples, double fs, std::string channel_id)
    : samples_(std::move(samples)), fs_(fs), channel_id_(std::move(channel_id)) {
  if (!(fs_ > 0.0) || !std::isfinite(fs_)) {
    throw Error("sampling rate must be positive");
  }
  if (samples_.size() < 2) {
    throw Error("signal too short");
  }
}

Signal Signal::with_samples(std::vector<double> samples) const {
  return Signal(std::move(samples), fs_, channel_id_);
}

SessionRecord::SessionRecord(std::string subject_id, Phase phase, std::optional<Treatment> treatment,
                             Signal hip, Signal nac)
    : subject_id_(std::move(subject_id)),
      phase_(phase),
      treatment_(treatment),
      hip_(std::move(hip)),
      nac_(std::move(nac)) {
  if (hip_.fs() != nac_.fs()) {
    throw Error("hip and nac sampling rates differ");
  }
  if (hip_.size() != nac_.size()) {
    throw Error("hip and nac lengths differ");
  }
}

SessionRecord SessionRecord::with_channels(Signal hip, Signal nac) const {
  return SessionRecord(subject_id_, phase_, treatment_, std::move(hip), std::move(nac));
}

SessionRecord SessionRecord::without_treatment() const {
  return SessionRecord(subject_id_, phase_, std::nullopt, hip_, nac_);
}

std::size_t window_length(double window_seconds, double fs) {
  if (!(window_seconds > 0.0)) {
    throw Error("window length must be positive");
  }
  const double n = std::round(window_seconds * fs);
  if (n < 2.0) {
    throw Error("window shorter than two samples");
  }
  return static_cast<std::size_t>(n);
}

std::vector<Signal> window(const Signal& signal, double window_seconds, double overlap_fraction) {
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
    throw Error("overlap fraction must lie in [0, 1)");
  }
  const std::size_t len = window_length(window_seconds, signal.fs());
  if (len > signal.size()) {
    throw Error("signal too short");
  }
  const auto step = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(len) * (1.0 - overlap_fraction))));

  std::vector<Signal> out;
  const auto samples = signal.samples();
  for (std::size_t start = 0; start + len <= samples.size(); start += step) {
    out.push_back(signal.with_samples({samples.begin() + static_cast<std::ptrdiff_t>(start),
                                       samples.begin() + static_cast<std::ptrdiff_t>(start + len)}));
  }
  return out;
}

}  // namespace lfptd
