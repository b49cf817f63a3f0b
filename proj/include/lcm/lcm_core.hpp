#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lcm/types.hpp"

// The covariance model itself: materialization, the Frobenius fitting
// objective in dense and sample-decomposed form, its analytic gradient, the
// full-batch Adam fit, and the diagonal maximum-likelihood baseline.

namespace lcm {

// Sigma = diag(softplus(u) + eps) + diag(w) K(a) diag(w). Refuses C > cap.
[[nodiscard]] Eigen::MatrixXd materialize_covariance(
    const LcmParams& p, std::size_t cap = kDenseCap);

// || Sigma(p) - sigma_hat ||_F^2. sigma_hat must be symmetric to 1e-9
// (relative to its largest entry magnitude).
[[nodiscard]] double frobenius_loss_dense(const LcmParams& p,
                                          const Eigen::MatrixXd& sigma_hat,
                                          std::size_t cap = kDenseCap);

// Same objective up to the parameter-free constant ||sigma_hat||_F^2, where
// sigma_hat is the biased empirical covariance of the centered batch:
//   ||Sigma||_F^2 - (2/N) sum_i v_i' Sigma v_i.
// Evaluated in O(N C) after one sort; requires b.centered.
[[nodiscard]] double frobenius_loss_decomposed(const LcmParams& p,
                                               const FeatureBatch& b);

struct LcmGrad {
  std::vector<double> du;
  std::vector<double> dw;
  std::vector<double> da;
};

// Analytic gradient of frobenius_loss_decomposed in (u, w, a).
[[nodiscard]] LcmGrad frobenius_grad(const LcmParams& p,
                                     const FeatureBatch& b);

// Analytic gradient of frobenius_loss_dense (dense target, O(C^2)).
[[nodiscard]] LcmGrad frobenius_grad_dense(const LcmParams& p,
                                           const Eigen::MatrixXd& sigma_hat);

struct FitResult {
  LcmParams params;
  double initial_loss = 0.0;
  double final_loss = 0.0;     // loss of the returned (best-seen) parameters
  std::size_t best_epoch = 0;  // 0 = initialization
};

// Deterministic default initialization: d matched to column variances
// through the inverse softplus, w = 0.1 sqrt(var), a evenly spaced on
// [0, C/8] plus seeded 0.01-scale normal jitter.
[[nodiscard]] LcmParams default_init(std::span<const double> variances,
                                     std::span<const double> mu, double eps,
                                     std::uint64_t seed);

// Full-batch Adam on the decomposed objective. An uncentered batch is
// centered internally and its column means become the fitted mu; a centered
// batch keeps mu = 0. Returns the best parameters seen (initialization
// included), so final_loss <= initial_loss. Throws DivergenceError when the
// loss turns non-finite.
[[nodiscard]] FitResult fit(const FeatureBatch& b, const FitConfig& cfg = {},
                            const std::optional<LcmParams>& init = {});

// Same optimizer against an explicit dense target.
[[nodiscard]] FitResult fit_dense(const Eigen::MatrixXd& sigma_hat,
                                  std::span<const double> mu,
                                  const FitConfig& cfg = {},
                                  const std::optional<LcmParams>& init = {});

// Column means and biased (1/N) variances floored at eps. Requires n >= 2.
[[nodiscard]] DiagonalGaussian diag_mle(const FeatureBatch& b,
                                        double eps = kDefaultEps);

// Mean NLL of the batch under the diagonal baseline.
[[nodiscard]] double gaussian_nll(const DiagonalGaussian& g,
                                  const FeatureBatch& b);

// Copy of b with column means subtracted (centered flag set); the means are
// written to *means_out when given.
[[nodiscard]] FeatureBatch center(const FeatureBatch& b,
                                  std::vector<double>* means_out = nullptr);

}  // namespace lcm
