#include "lcm/oracle.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

#include "lcm/lcm_core.hpp"

namespace lcm {
namespace {

void check_square(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument("oracle: matrix must be square and non-empty");
  }
}

Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& m) {
  check_square(m);
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw SingularKernelError(
        "oracle: Cholesky factorization failed (matrix not positive "
        "definite)");
  }
  return llt;
}

}  // namespace

std::vector<double> dense_matvec(const Eigen::MatrixXd& m,
                                 std::span<const double> x) {
  check_square(m);
  const std::size_t c = static_cast<std::size_t>(m.rows());
  if (x.size() != c) {
    throw std::invalid_argument("dense_matvec: dimension mismatch");
  }
  std::vector<double> y(c, 0.0);
  for (std::size_t i = 0; i < c; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      acc += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * x[j];
    }
    y[i] = acc;
  }
  return y;
}

double dense_logdet(const Eigen::MatrixXd& m) {
  const auto llt = factorize(m);
  const Eigen::MatrixXd l = llt.matrixL();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

double dense_solve_quadform(const Eigen::MatrixXd& m,
                            std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(m.rows())) {
    throw std::invalid_argument("dense_solve_quadform: dimension mismatch");
  }
  const auto llt = factorize(m);
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(),
                                             static_cast<Eigen::Index>(x.size()));
  // x' M^{-1} x = ||L^{-1} x||^2
  const Eigen::VectorXd half = llt.matrixL().solve(xv);
  return half.squaredNorm();
}

double dense_nll(const LcmParams& p, const FeatureBatch& b, std::size_t cap) {
  p.validate();
  b.validate_shape();
  if (b.c != p.dim()) {
    throw std::invalid_argument("dense_nll: batch width does not match model");
  }
  const Eigen::MatrixXd sigma = materialize_covariance(p, cap);
  const auto llt = factorize(sigma);
  const Eigen::MatrixXd l = llt.matrixL();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) logdet += 2.0 * std::log(l(i, i));

  const Eigen::Map<const Eigen::VectorXd> mu(p.mu.data(),
                                             static_cast<Eigen::Index>(p.dim()));
  double quad_sum = 0.0;
  Eigen::VectorXd centered(static_cast<Eigen::Index>(b.c));
  for (std::size_t i = 0; i < b.n; ++i) {
    const Eigen::Map<const Eigen::VectorXd> row(b.row(i),
                                                static_cast<Eigen::Index>(b.c));
    centered = row - mu;
    quad_sum += llt.matrixL().solve(centered).squaredNorm();
  }
  const double cn = static_cast<double>(b.c);
  const double nn = static_cast<double>(b.n);
  return 0.5 * (quad_sum / nn) + 0.5 * logdet +
         0.5 * cn * std::log(2.0 * std::numbers::pi);
}

Eigen::MatrixXd empirical_cov(const FeatureBatch& b, std::size_t cap) {
  b.validate_shape();
  if (!b.centered) {
    throw std::invalid_argument("empirical_cov: batch must be centered");
  }
  if (b.c > cap) {
    throw std::invalid_argument(
        "empirical_cov: C = " + std::to_string(b.c) +
        " exceeds the dense cap " + std::to_string(cap));
  }
  const Eigen::Map<const Eigen::MatrixXd> v(
      b.data.data(), static_cast<Eigen::Index>(b.c),
      static_cast<Eigen::Index>(b.n));  // column = sample (row-major data)
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(b.c),
                                              static_cast<Eigen::Index>(b.c));
  cov.selfadjointView<Eigen::Lower>().rankUpdate(v, 1.0 / static_cast<double>(b.n));
  cov.triangularView<Eigen::Upper>() = cov.transpose();
  return cov;
}

}  // namespace lcm
