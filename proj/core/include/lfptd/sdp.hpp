#pragma once

#include <string>
#include <vector>

#include "lfptd/signal.hpp"

namespace lfptd {

struct SdpConfig {
  std::size_t lag = 1;
  double theta_deg = 45.0;  // symmetry angle; 360 / theta mirror sectors
  double zeta_deg = 90.0;   // angular gain

  /// Throws unless lag >= 1, theta > 0 and 360 / theta is a whole number.
  void validate() const;
  std::size_t sectors() const;
  /// True when zeta exceeds 2 * theta (neighbouring sectors overlap).
  bool overlapping_sectors() const { return zeta_deg > 2.0 * theta_deg; }
};

struct SdpDot {
  double radius = 0.0;     // [0, 1]
  double angle_deg = 0.0;  // [0, 360)
};

struct SdpDotSet {
  /// For each base index i: for each sector k: the (+) dot then the (-) dot.
  std::vector<SdpDot> dots;
  std::size_t base_count = 0;
  SdpConfig config;
};

/// Symmetrized dot pattern: radius from X(i), mirrored angles from X(i + lag),
/// both min-max normalized, replicated across every sector. `stride` > 1 keeps
/// every stride-th base index only (render decimation; the lag is unchanged).
SdpDotSet sdp_transform(const Signal& signal, const SdpConfig& cfg = {}, std::size_t stride = 1);

/// Stride that keeps at most `max_points` base indices.
std::size_t render_stride(std::size_t base_points, std::size_t max_points);

struct SdpStyle {
  double dot_radius_px = 0.8;
  std::string color = "#1f4e79";
};

/// Square SVG, unit radius = 45% of the width, angles counter-clockwise from
/// the positive x axis. Output bytes depend only on the inputs.
std::string sdp_render(const SdpDotSet& dots, int width_px = 512, const SdpStyle& style = {});

struct SdpComparison {
  SdpDotSet hip_dots;
  SdpDotSet nac_dots;
  double dissimilarity = 0.0;  // bits
};

/// Transforms both signals and reports the JSD between 32 x 32 radius-angle
/// histograms of their base mirror pairs (sector 0).
SdpComparison sdp_compare(const Signal& hip, const Signal& nac, const SdpConfig& cfg = {}, std::size_t stride = 1);

}  // namespace lfptd
