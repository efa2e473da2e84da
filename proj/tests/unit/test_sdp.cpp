#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lfptd/sdp.hpp"
#include "lfptd/synth.hpp"
#include "oracles.hpp"

using namespace lfptd;

namespace {

double wrap(double deg) {
  double a = std::fmod(deg, 360.0);
  return a < 0.0 ? a + 360.0 : a;
}

// Smallest absolute difference between two angles on the circle.
double angle_gap(double a, double b) {
  const double d = std::abs(wrap(a) - wrap(b));
  return std::min(d, 360.0 - d);
}

std::size_t count_circles(const std::string& svg) {
  std::size_t n = 0;
  for (auto pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(SdpTransform, HandExample) {
  const auto set = sdp_transform(Signal({0.0, 1.0}));
  ASSERT_EQ(set.base_count, 1u);
  ASSERT_EQ(set.dots.size(), 16u);
  for (const auto& d : set.dots) EXPECT_EQ(d.radius, 0.0);
  // Base mirror pair is theta +/- zeta * g(1) = 45 +/- 90.
  bool has135 = false, has315 = false;
  for (const auto& d : set.dots) {
    has135 = has135 || angle_gap(d.angle_deg, 135.0) < 1e-12;
    has315 = has315 || angle_gap(d.angle_deg, 315.0) < 1e-12;
  }
  EXPECT_TRUE(has135);
  EXPECT_TRUE(has315);
}

TEST(SdpTransform, MatchesDefinitionDotByDot) {
  const auto x = oracle::normals(300, 3);
  const SdpConfig cfg{3, 60.0, 40.0};
  const auto set = sdp_transform(Signal(x), cfg);
  const double lo = *std::min_element(x.begin(), x.end());
  const double hi = *std::max_element(x.begin(), x.end());
  ASSERT_EQ(set.base_count, 297u);
  ASSERT_EQ(set.dots.size(), 297u * 2 * 6);
  for (std::size_t i = 0; i < set.base_count; ++i) {
    const double a = (x[i] - lo) / (hi - lo);
    const double g = (x[i + 3] - lo) / (hi - lo);
    // The dots of base i are the two mirror angles rotated through every sector.
    std::vector<double> expected;
    for (int k = 0; k < 6; ++k) {
      expected.push_back(wrap(60.0 + g * 40.0 + 60.0 * k));
      expected.push_back(wrap(60.0 - g * 40.0 + 60.0 * k));
    }
    for (std::size_t j = 0; j < 12; ++j) {
      const auto& d = set.dots[i * 12 + j];
      EXPECT_NEAR(d.radius, a, 1e-15);
      const bool found = std::any_of(expected.begin(), expected.end(),
                                     [&](double e) { return angle_gap(e, d.angle_deg) < 1e-9; });
      EXPECT_TRUE(found) << "base " << i << " dot " << j;
    }
  }
}

TEST(SdpTransform, ExtremesMapToUnitInterval) {
  const std::vector<double> x{3.0, -2.0, 7.0, 1.0, 0.5};
  const auto set = sdp_transform(Signal(x));
  const std::size_t per = set.config.sectors() * 2;
  EXPECT_EQ(set.dots[1 * per].radius, 0.0);
  EXPECT_EQ(set.dots[2 * per].radius, 1.0);
  for (const auto& d : set.dots) {
    EXPECT_GE(d.radius, 0.0);
    EXPECT_LE(d.radius, 1.0);
    EXPECT_GE(d.angle_deg, 0.0);
    EXPECT_LT(d.angle_deg, 360.0);
  }
}

TEST(SdpTransform, DotCountLaw) {
  for (const auto& [lag, theta] : {std::pair{1u, 45.0}, std::pair{2u, 60.0}, std::pair{5u, 120.0},
                                   std::pair{1u, 360.0}}) {
    const SdpConfig cfg{lag, theta, 30.0};
    const auto set = sdp_transform(Signal(oracle::uniforms(101, 2)), cfg);
    EXPECT_EQ(set.dots.size(), (101 - lag) * 2 * static_cast<std::size_t>(std::lround(360.0 / theta)));
  }
}

TEST(SdpTransform, MirrorSymmetricAboutSectorAxes) {
  const auto set = sdp_transform(Signal(oracle::normals(500, 4)));
  const double theta = set.config.theta_deg;
  // Pair j of each base reflects through an axis at a multiple of theta.
  for (std::size_t i = 0; i + 1 < set.dots.size(); i += 2) {
    const double a = set.dots[i].angle_deg, b = set.dots[i + 1].angle_deg;
    EXPECT_EQ(set.dots[i].radius, set.dots[i + 1].radius);
    double best = 360.0;
    for (int k = 0; k < 8; ++k) best = std::min(best, angle_gap(2.0 * theta * k - a, b));
    EXPECT_LT(best, 1e-9);
  }
}

TEST(SdpTransform, AffineInvariance) {
  // Samples on a 2^-20 grid (an ADC-like quantization), so a power-of-two gain
  // and an integer offset are exact and the normalization reproduces bits.
  auto x = oracle::normals(2000, 5);
  for (double& v : x) v = std::round(v * 0x1p20) * 0x1p-20;
  const auto base = sdp_transform(Signal(x));
  std::vector<double> y(x);
  for (double& v : y) v = 4.0 * v + 3.0;
  const auto exact = sdp_transform(Signal(y));
  ASSERT_EQ(exact.dots.size(), base.dots.size());
  for (std::size_t i = 0; i < base.dots.size(); ++i) {
    EXPECT_EQ(exact.dots[i].radius, base.dots[i].radius);
    EXPECT_EQ(exact.dots[i].angle_deg, base.dots[i].angle_deg);
  }
  for (double& v : y) v = 3.7 * v - 12.25;
  const auto general = sdp_transform(Signal(y));
  for (std::size_t i = 0; i < base.dots.size(); ++i) {
    EXPECT_NEAR(general.dots[i].radius, base.dots[i].radius, 1e-12);
    EXPECT_LT(angle_gap(general.dots[i].angle_deg, base.dots[i].angle_deg), 1e-10);
  }
}

TEST(SdpTransform, StrideKeepsEveryNthBase) {
  const Signal s(oracle::normals(1000, 6));
  const auto full = sdp_transform(s);
  const auto thin = sdp_transform(s, {}, 7);
  const std::size_t per = full.config.sectors() * 2;
  EXPECT_EQ(thin.base_count, (999 + 6) / 7);
  for (std::size_t i = 0; i < thin.base_count; ++i) {
    EXPECT_EQ(thin.dots[i * per].angle_deg, full.dots[i * 7 * per].angle_deg);
  }
  EXPECT_EQ(render_stride(1000, 100000), 1u);
  EXPECT_EQ(render_stride(250000, 100000), 3u);
}

TEST(SdpTransform, Errors) {
  try {
    sdp_transform(Signal(std::vector<double>(10, 1.0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "zero dynamic range");
  }
  EXPECT_THROW(sdp_transform(Signal({1.0, 2.0}), SdpConfig{2, 45.0, 90.0}), Error);
  EXPECT_THROW(SdpConfig({1, 50.0, 90.0}).validate(), Error);
  EXPECT_THROW(SdpConfig({0, 45.0, 90.0}).validate(), Error);
  EXPECT_FALSE(SdpConfig{}.overlapping_sectors());
  EXPECT_TRUE(SdpConfig({1, 30.0, 90.0}).overlapping_sectors());
}

TEST(SdpRender, EmptySetIsValidSvg) {
  const auto svg = sdp_render(SdpDotSet{});
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(count_circles(svg), 0u);
  EXPECT_THROW(sdp_render(SdpDotSet{}, 32), Error);
}

TEST(SdpRender, CoordinateMapping) {
  SdpDotSet set;
  set.dots = {{1.0, 0.0}, {0.5, 90.0}};
  const auto svg = sdp_render(set, 200);
  EXPECT_EQ(count_circles(svg), 2u);
  // Unit radius is 90 px on a 200 px canvas; y grows downward.
  EXPECT_NE(svg.find("cx=\"190.000\" cy=\"100.000\""), std::string::npos);
  EXPECT_NE(svg.find("cx=\"100.000\" cy=\"55.000\""), std::string::npos);
}

TEST(SdpRender, Deterministic) {
  const auto set = sdp_transform(Signal(oracle::normals(300, 9)));
  EXPECT_EQ(sdp_render(set), sdp_render(set));
  EXPECT_EQ(count_circles(sdp_render(set)), set.dots.size());
}

TEST(SdpCompare, IdenticalAndSymmetric) {
  const Signal a(oracle::normals(4000, 10));
  const Signal b(oracle::laplaces(4000, 11));
  EXPECT_EQ(sdp_compare(a, a).dissimilarity, 0.0);
  const double ab = sdp_compare(a, b).dissimilarity;
  EXPECT_NEAR(ab, sdp_compare(b, a).dissimilarity, 1e-15);
  EXPECT_GE(ab, 0.0);
  EXPECT_LE(ab, 1.0);
}

TEST(SdpCompare, SeparatesPersistentFromAntiPersistent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto hi = gen_fgn(4096, 0.9, 2 * seed);
    const auto lo = gen_fgn(4096, 0.1, 2 * seed + 1);
    EXPECT_GT(sdp_compare(hi, lo).dissimilarity, 0.05) << "seed " << seed;
  }
}
