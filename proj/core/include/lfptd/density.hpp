#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lfptd/signal.hpp"

namespace lfptd {

struct Gauss1D {
  double mu = 0.0;
  double sigma = 1.0;

  double pdf(double x) const;
  double log_pdf(double x) const;
};

/// Multivariate Gaussian with a symmetric positive-definite covariance.
class GaussND {
 public:
  GaussND(Eigen::VectorXd mu, Eigen::MatrixXd sigma);

  const Eigen::VectorXd& mu() const noexcept { return mu_; }
  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
  Eigen::Index dim() const noexcept { return mu_.size(); }

  double log_pdf(const Eigen::VectorXd& x) const;
  double log_det() const noexcept { return log_det_; }

  /// Same distribution with coordinates reordered: new[i] = old[order[i]].
  GaussND permuted(std::span<const Eigen::Index> order) const;

 private:
  Eigen::VectorXd mu_;
  Eigen::MatrixXd sigma_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_ = 0.0;
};

enum class Family { Gaussian, Laplace, Logistic, Uniform };
std::string_view to_string(Family family);

struct ModelSelection {
  static constexpr std::array<Family, 4> kFamilies{Family::Gaussian, Family::Laplace, Family::Logistic,
                                                   Family::Uniform};
  std::array<double, 4> log_likelihood{};  // indexed like kFamilies
  Family winner = Family::Gaussian;

  double log_likelihood_of(Family f) const { return log_likelihood[static_cast<std::size_t>(f)]; }
};

/// Binned probability mass function with strictly increasing edges.
class DiscretePdf {
 public:
  DiscretePdf(std::vector<double> bin_edges, std::vector<double> probs);

  const std::vector<double>& bin_edges() const noexcept { return edges_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t bins() const noexcept { return probs_.size(); }

 private:
  std::vector<double> edges_;
  std::vector<double> probs_;
};

/// MLE: sample mean and divide-by-n deviation.
Gauss1D fit_gauss1d(std::span<const double> samples);
inline Gauss1D fit_gauss1d(const Signal& signal) { return fit_gauss1d(signal.samples()); }

/// MLE mean vector and divide-by-n covariance of equal-length columns.
GaussND fit_gauss_nd(std::span<const std::vector<double>> columns);

/// Fits Gaussian, Laplace, logistic and uniform models by maximum likelihood
/// and picks the one with the largest total log-likelihood.
ModelSelection select_model(std::span<const double> samples);
inline ModelSelection select_model(const Signal& signal) { return select_model(signal.samples()); }

/// Normalized histogram over `bins` equal bins on [low, high]; samples outside
/// the range land in the edge bins.
DiscretePdf hist_pdf(std::span<const double> samples, std::size_t bins, std::pair<double, double> range);
inline DiscretePdf hist_pdf(const Signal& signal, std::size_t bins, std::pair<double, double> range) {
  return hist_pdf(signal.samples(), bins, range);
}

/// Range used when two sample sets must share bin edges: pooled mean +/- 6
/// pooled population standard deviations.
std::pair<double, double> shared_range(std::span<const double> a, std::span<const double> b);

/// KLD(P || Q) in bits. +infinity when Q has no mass where P does.
double kld_discrete(const DiscretePdf& p, const DiscretePdf& q);

/// Jensen-Shannon divergence against the midpoint mixture, in bits, in [0, 1].
double jsd_discrete(const DiscretePdf& p, const DiscretePdf& q);

/// JSD in bits of two probability vectors of equal length (no edge check).
double jsd_bits(std::span<const double> p, std::span<const double> q);

/// Closed-form KLD(p1 || p2) between Gaussians, in nats.
double kld_gauss_nd(const GaussND& p1, const GaussND& p2);

}  // namespace lfptd
