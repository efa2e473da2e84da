#include "lfptd/sdp.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>

#include "lfptd/density.hpp"

namespace lfptd {

namespace {

double canonical_angle(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a < 0.0) a += 360.0;
  if (a >= 360.0) a -= 360.0;
  return a;
}

void append_fixed(std::string& out, double v, int precision) {
  std::array<char, 48> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, precision);
  out.append(buf.data(), ptr);
}

}  // namespace

void SdpConfig::validate() const {
  if (lag < 1) throw Error("lag must be at least 1");
  if (!(theta_deg > 0.0 && theta_deg <= 360.0)) throw Error("theta must lie in (0, 360]");
  const double ratio = 360.0 / theta_deg;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) throw Error("360 must be divisible by theta");
}

std::size_t SdpConfig::sectors() const {
  return static_cast<std::size_t>(std::llround(360.0 / theta_deg));
}

std::size_t render_stride(std::size_t base_points, std::size_t max_points) {
  if (max_points == 0 || base_points <= max_points) return 1;
  return (base_points + max_points - 1) / max_points;
}

SdpDotSet sdp_transform(const Signal& signal, const SdpConfig& cfg, std::size_t stride) {
  cfg.validate();
  if (stride == 0) throw Error("stride must be positive");
  const auto x = signal.samples();
  if (x.size() <= cfg.lag) throw Error("signal shorter than lag");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) throw Error("zero dynamic range");

  const std::size_t sectors = cfg.sectors();
  const std::size_t base = x.size() - cfg.lag;
  SdpDotSet out;
  out.config = cfg;
  out.dots.reserve((base / stride + 1) * sectors * 2);
  for (std::size_t i = 0; i < base; i += stride) {
    const double radius = (x[i] - lo) / range;
    const double swing = (x[i + cfg.lag] - lo) / range * cfg.zeta_deg;
    for (std::size_t k = 0; k < sectors; ++k) {
      const double axis = cfg.theta_deg * static_cast<double>(k + 1);
      out.dots.push_back({radius, canonical_angle(axis + swing)});
      out.dots.push_back({radius, canonical_angle(axis - swing)});
    }
    ++out.base_count;
  }
  return out;
}

std::string sdp_render(const SdpDotSet& dots, int width_px, const SdpStyle& style) {
  if (width_px < 64) throw Error("width must be at least 64 pixels");
  const double w = static_cast<double>(width_px);
  const double c = w / 2.0;
  const double unit = 0.45 * w;

  std::string out;
  out.reserve(200 + dots.dots.size() * 48);
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width_px) + "\" height=\"" +
         std::to_string(width_px) + "\" viewBox=\"0 0 " + std::to_string(width_px) + " " +
         std::to_string(width_px) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<g fill=\"" + style.color + "\" stroke=\"none\">\n";
  for (const auto& d : dots.dots) {
    const double a = d.angle_deg * std::numbers::pi / 180.0;
    const double r = d.radius * unit;
    out += "<circle cx=\"";
    append_fixed(out, c + r * std::cos(a), 3);
    out += "\" cy=\"";
    append_fixed(out, c - r * std::sin(a), 3);
    out += "\" r=\"";
    append_fixed(out, style.dot_radius_px, 3);
    out += "\"/>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

namespace {

std::vector<double> base_histogram(const SdpDotSet& set) {
  constexpr std::size_t kBins = 32;
  std::vector<double> hist(kBins * kBins, 0.0);
  const std::size_t per_base = set.config.sectors() * 2;
  std::size_t total = 0;
  for (std::size_t i = 0; i < set.base_count; ++i) {
    for (std::size_t m = 0; m < 2; ++m) {
      const auto& d = set.dots[i * per_base + m];
      const auto rb = std::min<std::size_t>(kBins - 1, static_cast<std::size_t>(d.radius * kBins));
      const auto ab = std::min<std::size_t>(kBins - 1, static_cast<std::size_t>(d.angle_deg / 360.0 * kBins));
      hist[rb * kBins + ab] += 1.0;
      ++total;
    }
  }
  for (double& h : hist) h /= static_cast<double>(total);
  return hist;
}

}  // namespace

SdpComparison sdp_compare(const Signal& hip, const Signal& nac, const SdpConfig& cfg, std::size_t stride) {
  SdpComparison out;
  out.hip_dots = sdp_transform(hip, cfg, stride);
  out.nac_dots = sdp_transform(nac, cfg, stride);
  out.dissimilarity = jsd_bits(base_histogram(out.hip_dots), base_histogram(out.nac_dots));
  return out;
}

}  // namespace lfptd
