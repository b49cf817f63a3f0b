#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "lcm/types.hpp"

// Dense brute-force reference implementations. Everything here is O(C^2) or
// O(C^3) and capped; the point is independence from the structured fast
// paths, which the test suite checks against these.

namespace lcm {

// Plain row-by-row dense product (deliberately not delegated to a BLAS so
// the matvec cross-check shares no code with anything it verifies).
[[nodiscard]] std::vector<double> dense_matvec(const Eigen::MatrixXd& m,
                                               std::span<const double> x);

// log det of an SPD matrix via Cholesky. Throws SingularKernelError when the
// factorization fails.
[[nodiscard]] double dense_logdet(const Eigen::MatrixXd& m);

// x' M^{-1} x via Cholesky solve.
[[nodiscard]] double dense_solve_quadform(const Eigen::MatrixXd& m,
                                          std::span<const double> x);

// Mean Gaussian NLL of the batch with Sigma(p) materialized and factorized.
[[nodiscard]] double dense_nll(const LcmParams& p, const FeatureBatch& b,
                               std::size_t cap = kDenseCap);

// Biased (1/N) empirical covariance of a centered batch.
[[nodiscard]] Eigen::MatrixXd empirical_cov(const FeatureBatch& b,
                                            std::size_t cap = kDenseCap);

}  // namespace lcm
