#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lfptd {

/// Raised for every contract violation in the library. Messages are short and
/// stable ("signal too short", "zero variance", ...) so callers can match them.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Site { Hip, Nac };
enum class Phase { Pre, Post };
enum class Treatment { Saline, Morphine, Food };

std::string_view to_string(Site site);
std::string_view to_string(Phase phase);
std::string_view to_string(Treatment treatment);

// Case-insensitive; throw Error on unknown names.
Site parse_site(std::string_view text);
Phase parse_phase(std::string_view text);
Treatment parse_treatment(std::string_view text);

/// One channel of sampled voltage (microvolts).
///
/// Immutable after construction. The constructor enforces fs > 0 and at least
/// two samples; finiteness is only guaranteed after preprocessing, so raw
/// recordings with saturated values can still be represented.
class Signal {
 public:
  static constexpr double kDefaultFs = 1000.0;

  explicit Signal(std::vector<double> samples, double fs = kDefaultFs, std::string channel_id = {});

  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& values() const noexcept { return samples_; }
  double fs() const noexcept { return fs_; }
  const std::string& channel_id() const noexcept { return channel_id_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration_seconds() const noexcept { return static_cast<double>(samples_.size()) / fs_; }
  double operator[](std::size_t i) const noexcept { return samples_[i]; }

  /// Same rate and channel id, new samples.
  Signal with_samples(std::vector<double> samples) const;

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  std::vector<double> samples_;
  double fs_;
  std::string channel_id_;
};

/// Paired HIP/NAc recording for one subject in one phase.
class SessionRecord {
 public:
  SessionRecord(std::string subject_id, Phase phase, std::optional<Treatment> treatment, Signal hip,
                Signal nac);

  const std::string& subject_id() const noexcept { return subject_id_; }
  Phase phase() const noexcept { return phase_; }
  const std::optional<Treatment>& treatment() const noexcept { return treatment_; }
  const Signal& hip() const noexcept { return hip_; }
  const Signal& nac() const noexcept { return nac_; }
  const Signal& channel(Site site) const noexcept { return site == Site::Hip ? hip_ : nac_; }
  double fs() const noexcept { return hip_.fs(); }

  SessionRecord with_channels(Signal hip, Signal nac) const;
  SessionRecord without_treatment() const;

 private:
  std::string subject_id_;
  Phase phase_;
  std::optional<Treatment> treatment_;
  Signal hip_;
  Signal nac_;
};

/// Splits a signal into consecutive windows of `window_seconds`.
///
/// Consecutive window starts are `round(len * (1 - overlap_fraction))` samples
/// apart. A trailing partial window is dropped, so with zero overlap the
/// windows partition a prefix of the signal.
std::vector<Signal> window(const Signal& signal, double window_seconds, double overlap_fraction = 0.0);

/// Number of samples in one window of `window_seconds` at `fs`.
std::size_t window_length(double window_seconds, double fs);

}  // namespace lfptd
