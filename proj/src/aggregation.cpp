#include "lcm/aggregation.hpp"

#include <cmath>

#include "lcm/rng.hpp"
#include "lcm/ssm_likelihood.hpp"

namespace lcm {
namespace {

// Distinct substream roots for the two pooled sampling streams.
constexpr std::uint64_t kOldStream = 0;
constexpr std::uint64_t kNewStream = 1;

void check_symmetric_pair(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows() ||
      a.rows() == 0) {
    throw std::invalid_argument(
        "aggregate_dense: matrices must be square with matching dimensions");
  }
  for (const auto* m : {&a, &b}) {
    const double scale = std::max(1.0, m->cwiseAbs().maxCoeff());
    if ((*m - m->transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
      throw std::invalid_argument("aggregate_dense: matrix is not symmetric");
    }
  }
}

std::vector<double> convex_mu(const LcmParams& p_old, const LcmParams& p_new,
                              double lambda_old) {
  std::vector<double> mu(p_old.dim());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    mu[i] = lambda_old * p_old.mu[i] + (1.0 - lambda_old) * p_new.mu[i];
  }
  return mu;
}

}  // namespace

Eigen::MatrixXd aggregate_dense(const Eigen::MatrixXd& sigma_old,
                                const Eigen::MatrixXd& sigma_new,
                                const TaskWeights& w) {
  w.validate();
  check_symmetric_pair(sigma_old, sigma_new);
  const double total = w.n_old + w.n_new;
  return sigma_old * (w.n_old / total) + sigma_new * (w.n_new / total);
}

FitResult aggregate_refit(const LcmParams& p_old, const LcmParams& p_new,
                          const TaskWeights& w, const AggregateOptions& opt) {
  p_old.validate();
  p_new.validate();
  w.validate();
  if (p_old.dim() != p_new.dim()) {
    throw std::invalid_argument(
        "aggregate_refit: model dimensions do not match");
  }
  const double total = w.n_old + w.n_new;
  const double lambda_old = w.n_old / total;
  const std::vector<double> mu = convex_mu(p_old, p_new, lambda_old);

  FitResult result;
  if (opt.mode == AggregateMode::dense) {
    const Eigen::MatrixXd target = aggregate_dense(
        materialize_covariance(p_old), materialize_covariance(p_new), w);
    result = fit_dense(target, mu, opt.fit, p_old);
  } else {
    if (opt.n_samples < 2) {
      throw std::invalid_argument(
          "aggregate_refit: sampled mode needs n_samples >= 2");
    }
    // Draw counts proportional to the weights, at least one from each model.
    std::size_t n_old = static_cast<std::size_t>(
        std::llround(static_cast<double>(opt.n_samples) * lambda_old));
    n_old = std::min(std::max<std::size_t>(n_old, 1), opt.n_samples - 1);
    const std::size_t n_new = opt.n_samples - n_old;

    // Each component's own mean is subtracted so the pooled second moment
    // matches the weight-convex combination of the component covariances
    // (pooling raw draws would add between-mean spread).
    FeatureBatch pooled;
    pooled.n = opt.n_samples;
    pooled.c = p_old.dim();
    pooled.data.resize(pooled.n * pooled.c);
    const FeatureBatch draws_old =
        sample(p_old, n_old, substream_seed(opt.seed, kOldStream));
    const FeatureBatch draws_new =
        sample(p_new, n_new, substream_seed(opt.seed, kNewStream));
    for (std::size_t i = 0; i < n_old; ++i) {
      const double* src = draws_old.row(i);
      double* dst = pooled.row(i);
      for (std::size_t j = 0; j < pooled.c; ++j) dst[j] = src[j] - p_old.mu[j];
    }
    for (std::size_t i = 0; i < n_new; ++i) {
      const double* src = draws_new.row(i);
      double* dst = pooled.row(n_old + i);
      for (std::size_t j = 0; j < pooled.c; ++j) dst[j] = src[j] - p_new.mu[j];
    }
    result = fit(pooled, opt.fit, p_old);
  }
  result.params.mu = mu;
  return result;
}

}  // namespace lcm
