#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "lfptd/density.hpp"
#include "oracles.hpp"

using namespace lfptd;

namespace {

GaussND gauss2(double m0, double m1, double s00, double s01, double s11) {
  Eigen::Vector2d mu(m0, m1);
  Eigen::Matrix2d s;
  s << s00, s01, s01, s11;
  return GaussND(mu, s);
}

// Monte-Carlo KLD(p || q) for 2-D Gaussians: average of log p(x) - log q(x)
// over draws from p, with the log densities written out by hand.
struct McEstimate {
  double mean;
  double se;
};

double log_pdf2(const Eigen::Vector2d& x, const Eigen::Vector2d& mu, const Eigen::Matrix2d& s) {
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  Eigen::Matrix2d inv;
  inv << s(1, 1), -s(0, 1), -s(1, 0), s(0, 0);
  inv /= det;
  const Eigen::Vector2d d = x - mu;
  return -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det) - 0.5 * d.dot(inv * d);
}

McEstimate monte_carlo_kld(const GaussND& p, const GaussND& q, std::size_t n, std::uint64_t seed) {
  const Eigen::Matrix2d ps = p.sigma();
  // Cholesky factor of a 2x2 by hand.
  const double l00 = std::sqrt(ps(0, 0));
  const double l10 = ps(1, 0) / l00;
  const double l11 = std::sqrt(ps(1, 1) - l10 * l10);
  const auto z = oracle::normals(2 * n, seed);
  double s = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d x(p.mu()(0) + l00 * z[2 * i], p.mu()(1) + l10 * z[2 * i] + l11 * z[2 * i + 1]);
    const double v = log_pdf2(x, p.mu(), ps) - log_pdf2(x, q.mu(), q.sigma());
    s += v;
    ss += v * v;
  }
  const double m = s / static_cast<double>(n);
  return {m, std::sqrt((ss / static_cast<double>(n) - m * m) / static_cast<double>(n))};
}

double kld_1d_by_quadrature(double m1, double s1, double m2, double s2) {
  const auto f = [&](double x) {
    const double p = oracle::normal_pdf(x, m1, s1);
    return p * (std::log(p) - std::log(oracle::normal_pdf(x, m2, s2)));
  };
  return oracle::simpson(f, m1 - 12.0 * s1, m1 + 12.0 * s1, 20000);
}

GaussND gauss1(double mu, double sigma) {
  Eigen::VectorXd m(1);
  m << mu;
  Eigen::MatrixXd s(1, 1);
  s << sigma * sigma;
  return GaussND(m, s);
}

}  // namespace

TEST(FitGauss1d, TwoPointExample) {
  const auto g = fit_gauss1d(std::vector<double>{-1.0, 1.0});
  EXPECT_DOUBLE_EQ(g.mu, 0.0);
  EXPECT_DOUBLE_EQ(g.sigma, 1.0);
}

TEST(FitGauss1d, SamplingBounds) {
  const std::size_t n = 100000;
  const auto g = fit_gauss1d(oracle::normals(n, 31, 2.0, 0.5));
  // Three standard errors: 0.5/sqrt(n) for mu, 0.5/sqrt(2n) for sigma.
  EXPECT_NEAR(g.mu, 2.0, 3.0 * 0.5 / std::sqrt(double(n)));
  EXPECT_NEAR(g.sigma, 0.5, 3.0 * 0.5 / std::sqrt(2.0 * n));
  EXPECT_NEAR(g.mu, 2.0, 0.005);
  EXPECT_NEAR(g.sigma, 0.5, 0.005);
}

TEST(FitGauss1d, PdfMatchesFormula) {
  const Gauss1D g{1.5, 0.7};
  for (double x : {-1.0, 1.5, 2.2}) {
    EXPECT_NEAR(g.pdf(x), oracle::normal_pdf(x, 1.5, 0.7), 1e-14);
    EXPECT_NEAR(g.log_pdf(x), std::log(oracle::normal_pdf(x, 1.5, 0.7)), 1e-12);
  }
}

TEST(FitGauss1d, DegenerateInputs) {
  EXPECT_THROW(fit_gauss1d(std::vector<double>(10, 4.0)), Error);
  EXPECT_THROW(fit_gauss1d(std::vector<double>{1.0}), Error);
}

TEST(FitGaussNd, IdenticalColumnsAreSingular) {
  const auto x = oracle::normals(1000, 1);
  const std::vector<std::vector<double>> cols{x, x};
  EXPECT_THROW(fit_gauss_nd(cols), Error);
}

TEST(FitGaussNd, IndependentColumns) {
  const std::vector<std::vector<double>> cols{oracle::normals(100000, 2), oracle::normals(100000, 3)};
  const auto g = fit_gauss_nd(cols);
  EXPECT_LT(std::abs(g.sigma()(0, 1)), 0.02);
  EXPECT_NEAR(g.sigma()(0, 0), 1.0, 0.02);
  EXPECT_NEAR(g.sigma()(1, 1), 1.0, 0.02);
  EXPECT_EQ(g.sigma()(0, 1), g.sigma()(1, 0));
}

TEST(FitGaussNd, LinearlyRelatedColumns) {
  const auto x = oracle::normals(20000, 4);
  const auto e = oracle::normals(20000, 5, 0.0, 0.01);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 2.0 * x[i] + e[i];
  const std::vector<std::vector<double>> cols{x, y};
  const auto s = fit_gauss_nd(cols).sigma();
  EXPECT_GT(s(0, 1), 0.0);
  EXPECT_GT(s(0, 1) / std::sqrt(s(0, 0) * s(1, 1)), 0.999);
}

TEST(FitGaussNd, RejectsRaggedColumns) {
  const std::vector<std::vector<double>> cols{{1, 2, 3}, {1, 2}};
  EXPECT_THROW(fit_gauss_nd(cols), Error);
}

TEST(GaussNdType, RejectsBadCovariance) {
  EXPECT_THROW(gauss2(0, 0, 1, 0.5, 1).permuted(std::vector<Eigen::Index>{0}), Error);
  Eigen::Matrix2d asym;
  asym << 1, 0.2, 0.3, 1;
  EXPECT_THROW(GaussND(Eigen::Vector2d(0, 0), asym), Error);
  EXPECT_THROW(gauss2(0, 0, 1, 1, 1), Error);
  EXPECT_THROW(gauss2(0, 0, 1, 0, -1), Error);
}

TEST(SelectModel, PicksGeneratingFamily) {
  const std::size_t n = 100000;
  EXPECT_EQ(select_model(oracle::normals(n, 40)).winner, Family::Gaussian);
  EXPECT_EQ(select_model(oracle::uniforms(n, 41)).winner, Family::Uniform);
  EXPECT_EQ(select_model(oracle::laplaces(n, 42, 1.0, 2.0)).winner, Family::Laplace);
  EXPECT_EQ(select_model(oracle::logistics(n, 43, -1.0, 0.5)).winner, Family::Logistic);
}

TEST(SelectModel, GaussianLikelihoodMatchesSum) {
  const auto x = oracle::normals(500, 44, 3.0, 2.0);
  const auto g = fit_gauss1d(x);
  double ll = 0.0;
  for (double v : x) ll += std::log(oracle::normal_pdf(v, g.mu, g.sigma));
  EXPECT_NEAR(select_model(x).log_likelihood_of(Family::Gaussian), ll, 1e-8);
  EXPECT_EQ(to_string(Family::Laplace), "LAPLACE");
}

TEST(HistPdf, SmallExamples) {
  const auto p = hist_pdf(std::vector<double>{0.1, 0.9}, 2, {0.0, 1.0});
  EXPECT_EQ(p.probs(), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(p.bin_edges(), (std::vector<double>{0.0, 0.5, 1.0}));
  const auto one = hist_pdf(std::vector<double>{0.3, 0.31, 0.32}, 4, {0.0, 1.0});
  EXPECT_EQ(one.probs(), (std::vector<double>{0.0, 1.0, 0.0, 0.0}));
  // Out-of-range samples land in the edge bins.
  const auto edge = hist_pdf(std::vector<double>{-7.0, 9.0}, 2, {0.0, 1.0});
  EXPECT_EQ(edge.probs(), (std::vector<double>{0.5, 0.5}));
}

TEST(HistPdf, MatchesNormalCdf) {
  const auto p = hist_pdf(oracle::normals(200000, 50), 64, {-5.0, 5.0});
  ASSERT_EQ(p.bins(), 64u);
  for (std::size_t i = 0; i < 64; ++i) {
    const double lo = p.bin_edges()[i], hi = p.bin_edges()[i + 1];
    EXPECT_NEAR(p.probs()[i], oracle::normal_cdf(hi) - oracle::normal_cdf(lo), 0.01);
  }
}

TEST(HistPdf, Errors) {
  EXPECT_THROW(hist_pdf(std::vector<double>{1.0}, 1, {0.0, 1.0}), Error);
  EXPECT_THROW(hist_pdf(std::vector<double>{1.0}, 4, {1.0, 1.0}), Error);
  EXPECT_THROW(DiscretePdf({0.0, 1.0}, {0.4}), Error);
  EXPECT_THROW(DiscretePdf({0.0, 0.0, 1.0}, {0.5, 0.5}), Error);
}

TEST(SharedRange, PooledSixSigma) {
  const std::vector<double> a{0.0, 2.0};
  const std::vector<double> b{4.0, 6.0};
  const auto [lo, hi] = shared_range(a, b);
  const double sd = std::sqrt(5.0);
  EXPECT_NEAR(lo, 3.0 - 6.0 * sd, 1e-12);
  EXPECT_NEAR(hi, 3.0 + 6.0 * sd, 1e-12);
}

TEST(KldDiscrete, Examples) {
  const std::vector<double> e{0.0, 1.0, 2.0};
  const DiscretePdf p(e, {1.0, 0.0});
  const DiscretePdf q(e, {0.5, 0.5});
  EXPECT_EQ(kld_discrete(q, q), 0.0);
  EXPECT_NEAR(kld_discrete(p, q), 1.0, 1e-15);
  EXPECT_EQ(kld_discrete(q, p), std::numeric_limits<double>::infinity());
  EXPECT_THROW(kld_discrete(p, DiscretePdf({0.0, 1.0, 3.0}, {0.5, 0.5})), Error);
}

TEST(JsdDiscrete, Examples) {
  const std::vector<double> e{0.0, 1.0, 2.0, 3.0};
  const DiscretePdf p(e, {0.5, 0.5, 0.0});
  const DiscretePdf q(e, {0.0, 0.0, 1.0});
  EXPECT_EQ(jsd_discrete(p, p), 0.0);
  EXPECT_NEAR(jsd_discrete(p, q), 1.0, 1e-15);
}

TEST(JsdDiscrete, SymmetricBoundedAndMetric) {
  const std::size_t k = 16;
  std::vector<std::vector<double>> dists;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto u = oracle::uniforms(k, seed);
    double s = 0.0;
    for (double v : u) s += v * v;
    for (double& v : u) v = v * v / s;
    dists.push_back(u);
  }
  for (const auto& a : dists) {
    for (const auto& b : dists) {
      const double ab = jsd_bits(a, b);
      EXPECT_GE(ab, 0.0);
      EXPECT_LE(ab, 1.0);
      EXPECT_NEAR(ab, jsd_bits(b, a), 1e-15);
      for (const auto& c : dists) {
        EXPECT_LE(std::sqrt(ab), std::sqrt(jsd_bits(a, c)) + std::sqrt(jsd_bits(c, b)) + 1e-12);
      }
    }
  }
}

TEST(KldGauss, IdenticalIsZero) {
  const auto p = gauss2(1, 2, 2, 0.3, 1);
  EXPECT_EQ(kld_gauss_nd(p, p), 0.0);
}

TEST(KldGauss, UnitShiftIsHalfNat) {
  const auto p = gauss2(0, 0, 1, 0, 1);
  const auto q = gauss2(1, 0, 1, 0, 1);
  EXPECT_NEAR(kld_gauss_nd(p, q), 0.5, 1e-15);
  const auto mc = monte_carlo_kld(p, q, 200000, 60);
  EXPECT_NEAR(mc.mean, 0.5, 3.0 * mc.se);
}

TEST(KldGauss, OneDimensionalMatchesQuadrature) {
  for (const auto& [m1, s1, m2, s2] : {std::array{0.0, 1.0, 0.5, 1.5}, std::array{2.0, 0.7, 1.0, 0.6},
                                       std::array{-1.0, 2.0, -1.0, 1.0}}) {
    EXPECT_NEAR(kld_gauss_nd(gauss1(m1, s1), gauss1(m2, s2)), kld_1d_by_quadrature(m1, s1, m2, s2), 1e-6);
  }
}

TEST(KldGauss, CorrelatedPairsMatchMonteCarlo) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto u = oracle::uniforms(8, 100 + seed);
    const double r1 = 1.6 * u[0] - 0.8, r2 = 1.6 * u[1] - 0.8;
    const double a1 = 0.5 + u[2], b1 = 0.5 + u[3], a2 = 0.5 + u[4], b2 = 0.5 + u[5];
    const auto p = gauss2(0.0, 0.0, a1 * a1, r1 * a1 * b1, b1 * b1);
    const auto q = gauss2(u[6] - 0.5, u[7] - 0.5, a2 * a2, r2 * a2 * b2, b2 * b2);
    const double exact = kld_gauss_nd(p, q);
    const auto mc = monte_carlo_kld(p, q, 100000, 200 + seed);
    EXPECT_NEAR(exact, mc.mean, 4.0 * mc.se) << "seed " << seed;
    EXPECT_GE(exact, 0.0);
  }
}

TEST(KldGauss, BlockDiagonalFactorizes) {
  Eigen::VectorXd mu1(3), mu2(3);
  mu1 << 0, 1, 2;
  mu2 << 0.5, 1, 1;
  Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(3, 3), s2 = Eigen::MatrixXd::Zero(3, 3);
  s1 << 1.0, 0.4, 0.0, 0.4, 2.0, 0.0, 0.0, 0.0, 0.5;
  s2 << 1.5, -0.2, 0.0, -0.2, 1.0, 0.0, 0.0, 0.0, 0.8;
  const GaussND p(mu1, s1), q(mu2, s2);
  const double block = kld_gauss_nd(gauss2(0, 1, 1.0, 0.4, 2.0), gauss2(0.5, 1, 1.5, -0.2, 1.0));
  const double last = kld_gauss_nd(gauss1(2, std::sqrt(0.5)), gauss1(1, std::sqrt(0.8)));
  EXPECT_NEAR(kld_gauss_nd(p, q), block + last, 1e-12);

  const std::vector<Eigen::Index> order{2, 0, 1};
  EXPECT_NEAR(kld_gauss_nd(p.permuted(order), q.permuted(order)), kld_gauss_nd(p, q), 1e-12);
}

TEST(KldGauss, DimensionMismatch) {
  EXPECT_THROW(kld_gauss_nd(gauss1(0, 1), gauss2(0, 0, 1, 0, 1)), Error);
}

TEST(KldGauss, FitConvergesToTruth) {
  const auto truth = gauss1(1.0, 2.0);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t n : {100u, 1000u, 10000u}) {
    // Average over seeds so the check is about the trend, not one draw.
    double avg = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto g = fit_gauss1d(oracle::normals(n, 1000 * n + seed, 1.0, 2.0));
      avg += kld_gauss_nd(gauss1(g.mu, g.sigma), truth) / 20.0;
    }
    EXPECT_LT(avg, previous) << "n = " << n;
    previous = avg;
  }
  EXPECT_LT(previous, 1e-3);
}
