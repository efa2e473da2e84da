#include "lfptd/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "numeric.hpp"

namespace lfptd {

namespace {

constexpr double kLog2 = std::numbers::ln2;

struct LogisticFit {
  double mu = 0.0;
  double s = 1.0;
  double log_likelihood = 0.0;
};

double logistic_loglik(std::span<const double> x, double mu, double s) {
  double ll = 0.0;
  for (double v : x) {
    const double a = std::abs((v - mu) / s);
    ll += -a - 2.0 * std::log1p(std::exp(-a));
  }
  return ll - static_cast<double>(x.size()) * std::log(s);
}

// Newton iterations on (mu, s) from moment estimates, with step halving.
LogisticFit fit_logistic(std::span<const double> x, double mean, double sd) {
  LogisticFit fit{mean, sd * std::numbers::sqrt3 / std::numbers::pi, 0.0};
  fit.log_likelihood = logistic_loglik(x, fit.mu, fit.s);

  for (int iter = 0; iter < 100; ++iter) {
    double st = 0.0, s1mt2 = 0.0, szt = 0.0, sz1mt2 = 0.0, sz21mt2 = 0.0;
    for (double v : x) {
      const double z = (v - fit.mu) / fit.s;
      const double t = std::tanh(z / 2.0);
      const double w = (1.0 - t * t) / 2.0;
      st += t;
      s1mt2 += w;
      szt += z * t;
      sz1mt2 += z * w;
      sz21mt2 += z * z * w;
    }
    const double n = static_cast<double>(x.size());
    const double inv_s = 1.0 / fit.s;
    const double inv_s2 = inv_s * inv_s;
    const double g_mu = inv_s * st;
    const double g_s = inv_s * (szt - n);
    const double h_mumu = -inv_s2 * s1mt2;
    const double h_mus = -inv_s2 * (st + sz1mt2);
    const double h_ss = -inv_s2 * (szt - n) - inv_s2 * (szt + sz21mt2);

    const double det = h_mumu * h_ss - h_mus * h_mus;
    double d_mu = 0.0, d_s = 0.0;
    if (det > 0.0 && h_mumu < 0.0) {
      d_mu = -(h_ss * g_mu - h_mus * g_s) / det;
      d_s = -(-h_mus * g_mu + h_mumu * g_s) / det;
    } else {
      // Not locally concave: fall back to a scaled gradient step.
      d_mu = g_mu * fit.s * fit.s / n;
      d_s = g_s * fit.s * fit.s / n;
    }

    double step = 1.0;
    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      const double mu = fit.mu + step * d_mu;
      const double s = fit.s + step * d_s;
      if (s > 0.0) {
        const double ll = logistic_loglik(x, mu, s);
        if (ll >= fit.log_likelihood) {
          const bool converged = std::abs(step * d_mu) <= 1e-12 * fit.s && std::abs(step * d_s) <= 1e-12 * fit.s;
          fit = {mu, s, ll};
          improved = !converged;
          break;
        }
      }
      step /= 2.0;
    }
    if (!improved) break;
    if (std::abs(g_mu) * fit.s < 1e-9 * n && std::abs(g_s) * fit.s < 1e-9 * n) break;
  }
  return fit;
}

void require_same_edges(const DiscretePdf& p, const DiscretePdf& q) {
  if (p.bin_edges() != q.bin_edges()) throw Error("bin edges differ");
}

double kl_bits(std::span<const double> p, std::span<const double> q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    sum += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(0.0, sum / kLog2);
}

}  // namespace

double Gauss1D::log_pdf(double x) const {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double Gauss1D::pdf(double x) const {
  return std::exp(log_pdf(x));
}

GaussND::GaussND(Eigen::VectorXd mu, Eigen::MatrixXd sigma) : mu_(std::move(mu)), sigma_(std::move(sigma)) {
  const auto n = mu_.size();
  if (n < 1) throw Error("dimension must be at least 1");
  if (sigma_.rows() != n || sigma_.cols() != n) throw Error("covariance shape does not match mean");
  const double scale = sigma_.cwiseAbs().maxCoeff();
  if (!((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1.0))) {
    throw Error("covariance not symmetric");
  }
  sigma_ = 0.5 * (sigma_ + sigma_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma_, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || lo <= 1e-12 * hi) throw Error("degenerate covariance");
  llt_.compute(sigma_);
  if (llt_.info() != Eigen::Success) throw Error("degenerate covariance");
  log_det_ = 2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double GaussND::log_pdf(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd d = x - mu_;
  const double q = d.dot(llt_.solve(d));
  return -0.5 * (q + log_det_ + static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi));
}

GaussND GaussND::permuted(std::span<const Eigen::Index> order) const {
  const auto n = dim();
  if (static_cast<Eigen::Index>(order.size()) != n) throw Error("permutation size mismatch");
  Eigen::VectorXd mu(n);
  Eigen::MatrixXd sigma(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    mu(i) = mu_(order[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < n; ++j) {
      sigma(i, j) = sigma_(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
  }
  return GaussND(std::move(mu), std::move(sigma));
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Gaussian:
      return "GAUSSIAN";
    case Family::Laplace:
      return "LAPLACE";
    case Family::Logistic:
      return "LOGISTIC";
    case Family::Uniform:
      return "UNIFORM";
  }
  return "GAUSSIAN";
}

DiscretePdf::DiscretePdf(std::vector<double> bin_edges, std::vector<double> probs)
    : edges_(std::move(bin_edges)), probs_(std::move(probs)) {
  if (probs_.empty() || edges_.size() != probs_.size() + 1) throw Error("need k+1 edges for k bins");
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!(edges_[i] > edges_[i - 1])) throw Error("bin edges must be strictly increasing");
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw Error("negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("probabilities must sum to 1");
}

Gauss1D fit_gauss1d(std::span<const double> samples) {
  if (samples.size() < 2) throw Error("degenerate density");
  const double m = detail::mean(samples);
  const double var = detail::variance(samples, m);
  if (!(var > 0.0)) throw Error("degenerate density");
  return {m, std::sqrt(var)};
}

GaussND fit_gauss_nd(std::span<const std::vector<double>> columns) {
  if (columns.empty()) throw Error("need at least one column");
  const std::size_t n = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != n) throw Error("columns differ in length");
  }
  const auto dim = static_cast<Eigen::Index>(columns.size());
  if (n < columns.size() + 1) throw Error("degenerate covariance");

  Eigen::VectorXd mu(dim);
  for (Eigen::Index i = 0; i < dim; ++i) mu(i) = detail::mean(columns[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto& ci = columns[static_cast<std::size_t>(i)];
    const double mi = mu(i);
    for (Eigen::Index j = i; j < dim; ++j) {
      const auto& cj = columns[static_cast<std::size_t>(j)];
      const double mj = mu(j);
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) acc += (ci[t] - mi) * (cj[t] - mj);
      cov(i, j) = cov(j, i) = acc / static_cast<double>(n);
    }
  }
  return GaussND(std::move(mu), std::move(cov));
}

ModelSelection select_model(std::span<const double> samples) {
  if (samples.size() < 2) throw Error("degenerate density");
  const double n = static_cast<double>(samples.size());
  const auto g = fit_gauss1d(samples);

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k = sorted.size();
  const double median = k % 2 == 1 ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
  double abs_dev = 0.0;
  for (double v : sorted) abs_dev += std::abs(v - median);
  const double b = abs_dev / n;

  ModelSelection sel;
  sel.log_likelihood[static_cast<std::size_t>(Family::Gaussian)] =
      -0.5 * n * (std::log(2.0 * std::numbers::pi * g.sigma * g.sigma) + 1.0);
  sel.log_likelihood[static_cast<std::size_t>(Family::Laplace)] = -n * std::log(2.0 * b) - n;
  sel.log_likelihood[static_cast<std::size_t>(Family::Logistic)] =
      fit_logistic(samples, g.mu, g.sigma).log_likelihood;
  sel.log_likelihood[static_cast<std::size_t>(Family::Uniform)] = -n * std::log(sorted.back() - sorted.front());

  std::size_t best = 0;
  for (std::size_t i = 1; i < sel.log_likelihood.size(); ++i) {
    if (sel.log_likelihood[i] > sel.log_likelihood[best]) best = i;
  }
  sel.winner = ModelSelection::kFamilies[best];
  return sel;
}

DiscretePdf hist_pdf(std::span<const double> samples, std::size_t bins, std::pair<double, double> range) {
  const auto [low, high] = range;
  if (bins < 2) throw Error("need at least two bins");
  if (!(low < high)) throw Error("histogram range must satisfy low < high");
  if (samples.empty()) throw Error("histogram of an empty sample");

  std::vector<double> edges(bins + 1);
  const double width = (high - low) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) edges[i] = low + width * static_cast<double>(i);
  edges[bins] = high;

  std::vector<double> counts(bins, 0.0);
  const auto last = static_cast<double>(bins - 1);
  for (double v : samples) {
    if (!std::isfinite(v)) throw Error("non-finite sample");
    const double pos = std::clamp(std::floor((v - low) / width), 0.0, last);
    counts[static_cast<std::size_t>(pos)] += 1.0;
  }
  const double total = static_cast<double>(samples.size());
  for (double& c : counts) c /= total;
  return DiscretePdf(std::move(edges), std::move(counts));
}

std::pair<double, double> shared_range(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size() + b.size());
  double sum = 0.0;
  for (double v : a) sum += v;
  for (double v : b) sum += v;
  const double m = sum / n;
  double ss = 0.0;
  for (double v : a) ss += (v - m) * (v - m);
  for (double v : b) ss += (v - m) * (v - m);
  double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) sd = 1.0;
  return {m - 6.0 * sd, m + 6.0 * sd};
}

double kld_discrete(const DiscretePdf& p, const DiscretePdf& q) {
  require_same_edges(p, q);
  return kl_bits(p.probs(), q.probs());
}

double jsd_bits(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error("probability vectors differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) sum += p[i] * std::log(p[i] / a);
    if (q[i] > 0.0) sum += q[i] * std::log(q[i] / a);
  }
  return std::clamp(0.5 * sum / kLog2, 0.0, 1.0);
}

double jsd_discrete(const DiscretePdf& p, const DiscretePdf& q) {
  require_same_edges(p, q);
  return jsd_bits(p.probs(), q.probs());
}

double kld_gauss_nd(const GaussND& p1, const GaussND& p2) {
  if (p1.dim() != p2.dim()) throw Error("dimension mismatch");
  const auto n = static_cast<double>(p1.dim());
  const Eigen::LLT<Eigen::MatrixXd> llt2(p2.sigma());
  const double trace = llt2.solve(p1.sigma()).trace();
  const Eigen::VectorXd d = p2.mu() - p1.mu();
  const double quad = d.dot(llt2.solve(d));
  return std::max(0.0, 0.5 * (p2.log_det() - p1.log_det() - n + trace + quad));
}

}  // namespace lfptd
