#include <doctest.h>

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "lcm/oracle.hpp"
#include "lcm/types.hpp"
#include "test_util.hpp"

// The oracles themselves are validated only on analytically forced cases
// (identity, diagonal, hand-expanded 2x2/3x3 determinants); everything else
// in the repository is validated against them.

namespace {

using lcm::FeatureBatch;
using lcm::LcmParams;
using lcm::test::rel_err;
using lcm::test::u_for_d;

constexpr double kLog2Pi = 1.8378770664093454836;

LcmParams diag_params(const std::vector<double>& d,
                      const std::vector<double>& mu) {
  LcmParams p;
  p.mu = mu;
  p.u.resize(d.size());
  p.w.assign(d.size(), 0.0);
  p.a.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    p.u[i] = u_for_d(d[i]);
    p.a[i] = static_cast<double>(i);
  }
  return p;
}

FeatureBatch one_row(const std::vector<double>& x) {
  FeatureBatch b;
  b.n = 1;
  b.c = x.size();
  b.data = x;
  return b;
}

// 3x3 inverse and determinant by cofactor expansion, independent of any
// factorization code.
double det3(const Eigen::Matrix3d& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

Eigen::Matrix3d inv3(const Eigen::Matrix3d& m) {
  Eigen::Matrix3d adj;
  adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  adj(0, 1) = -(m(0, 1) * m(2, 2) - m(0, 2) * m(2, 1));
  adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  adj(1, 0) = -(m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0));
  adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  adj(1, 2) = -(m(0, 0) * m(1, 2) - m(0, 2) * m(1, 0));
  adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  adj(2, 1) = -(m(0, 0) * m(2, 1) - m(0, 1) * m(2, 0));
  adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return adj / det3(m);
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("dense_matvec: identity returns x, all-ones returns the sum") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
  const std::vector<double> x = {1.5, -2.0, 0.25, 3.0};
  const auto y = lcm::dense_matvec(eye, x);
  for (std::size_t i = 0; i < 4; ++i) CHECK(y[i] == x[i]);

  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
  const std::vector<double> z = {1.0, 2.0, 4.0};
  const auto s = lcm::dense_matvec(ones, z);
  for (std::size_t i = 0; i < 3; ++i) CHECK(s[i] == 7.0);
}

TEST_CASE("dense_matvec: unit vector extracts the first column") {
  lcm::test::Rng rng(11);
  Eigen::MatrixXd m(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.uniform(-2.0, 2.0);
  const std::vector<double> e1 = {1.0, 0.0, 0.0};
  const auto y = lcm::dense_matvec(m, e1);
  for (int i = 0; i < 3; ++i) CHECK(y[static_cast<std::size_t>(i)] == m(i, 0));
}

TEST_CASE("dense_matvec: dimension mismatch is rejected") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  const std::vector<double> x = {1.0, 2.0};
  CHECK_THROWS_AS((void)lcm::dense_matvec(eye, x), std::invalid_argument);
}

TEST_CASE("dense_logdet / dense_solve_quadform: identity and diagonal") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(5, 5);
  CHECK(lcm::dense_logdet(eye) == 0.0);
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(rel_err(lcm::dense_solve_quadform(eye, x), 55.0) < 1e-14);

  const std::vector<double> d = {0.5, 2.0, 4.0};
  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(3, 3);
  double want_logdet = 0.0;
  for (int i = 0; i < 3; ++i) {
    diag(i, i) = d[static_cast<std::size_t>(i)];
    want_logdet += std::log(d[static_cast<std::size_t>(i)]);
  }
  CHECK(rel_err(lcm::dense_logdet(diag), want_logdet) < 1e-14);
  const std::vector<double> z = {1.0, 2.0, 2.0};
  const double want_quad = 1.0 / 0.5 + 4.0 / 2.0 + 4.0 / 4.0;
  CHECK(rel_err(lcm::dense_solve_quadform(diag, z), want_quad) < 1e-14);
}

TEST_CASE("dense_logdet: 2x2 hand determinant") {
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 0.5, 0.5, 2.0;
  CHECK(rel_err(lcm::dense_logdet(m), std::log(3.75)) < 1e-14);
}

TEST_CASE("dense_logdet: non-positive-definite input is refused") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  CHECK_THROWS_AS((void)lcm::dense_logdet(m), lcm::SingularKernelError);
}

TEST_CASE("dense_nll: standard normal evaluated at its mode") {
  const LcmParams p = diag_params({1.0}, {0.7});
  const double nll = lcm::dense_nll(p, one_row({0.7}));
  CHECK(rel_err(nll, 0.5 * kLog2Pi) < 1e-9);
}

TEST_CASE("dense_nll: identity covariance, unit offset from the mean") {
  const std::size_t c = 5;
  const LcmParams p =
      diag_params(std::vector<double>(c, 1.0), std::vector<double>(c, 0.0));
  std::vector<double> x(c, 0.0);
  x[0] = 1.0;
  const double want = 0.5 * (1.0 + static_cast<double>(c) * kLog2Pi);
  CHECK(rel_err(lcm::dense_nll(p, one_row(x)), want) < 1e-9);
}

TEST_CASE("dense_nll: cofactor-expansion cross-check at C=2 and C=3") {
  lcm::test::Rng rng(23);

  // C = 2: adjugate inverse.
  {
    const LcmParams p = lcm::test::random_params(rng, 2);
    const Eigen::MatrixXd s = lcm::test::hand_covariance(p);
    const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    FeatureBatch b = lcm::test::random_batch(rng, 3, 2);
    double acc = 0.0;
    for (std::size_t i = 0; i < b.n; ++i) {
      const double v0 = b.at(i, 0) - p.mu[0];
      const double v1 = b.at(i, 1) - p.mu[1];
      const double quad =
          (s(1, 1) * v0 * v0 - 2.0 * s(0, 1) * v0 * v1 + s(0, 0) * v1 * v1) /
          det;
      acc += 0.5 * quad;
    }
    const double want =
        acc / 3.0 + 0.5 * std::log(det) + 0.5 * 2.0 * kLog2Pi;
    CHECK(rel_err(lcm::dense_nll(p, b), want) < 1e-10);
  }

  // C = 3: cofactor inverse.
  {
    const LcmParams p = lcm::test::random_params(rng, 3);
    const Eigen::Matrix3d s = lcm::test::hand_covariance(p);
    const Eigen::Matrix3d si = inv3(s);
    FeatureBatch b = lcm::test::random_batch(rng, 4, 3);
    double acc = 0.0;
    for (std::size_t i = 0; i < b.n; ++i) {
      Eigen::Vector3d v;
      for (int j = 0; j < 3; ++j)
        v(j) = b.at(i, static_cast<std::size_t>(j)) -
               p.mu[static_cast<std::size_t>(j)];
      acc += 0.5 * v.dot(si * v);
    }
    const double want =
        acc / 4.0 + 0.5 * std::log(det3(s)) + 0.5 * 3.0 * kLog2Pi;
    CHECK(rel_err(lcm::dense_nll(p, b), want) < 1e-10);
  }
}

TEST_CASE("dense_nll: batch width must match the model") {
  const LcmParams p = diag_params({1.0, 1.0}, {0.0, 0.0});
  CHECK_THROWS_AS((void)lcm::dense_nll(p, one_row({0.0})),
                  std::invalid_argument);
}

TEST_CASE("empirical_cov: {v, -v} and a single row both give v v^T") {
  const std::vector<double> v = {1.0, -2.0, 0.5};

  FeatureBatch two;
  two.n = 2;
  two.c = 3;
  two.centered = true;
  two.data = {1.0, -2.0, 0.5, -1.0, 2.0, -0.5};
  const Eigen::MatrixXd c2 = lcm::empirical_cov(two);

  FeatureBatch one = one_row(v);
  one.centered = true;
  const Eigen::MatrixXd c1 = lcm::empirical_cov(one);

  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double want = v[static_cast<std::size_t>(i)] *
                          v[static_cast<std::size_t>(j)];
      CHECK(std::abs(c2(i, j) - want) < 1e-15);
      CHECK(std::abs(c1(i, j) - want) < 1e-15);
    }
  }
}

TEST_CASE("empirical_cov: many standard normals approach the identity") {
  lcm::test::Rng rng(5);
  FeatureBatch b = lcm::test::random_batch(rng, 10000, 4);
  lcm::test::center_in_place(b);
  const Eigen::MatrixXd cov = lcm::empirical_cov(b);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(cov(i, j) - (i == j ? 1.0 : 0.0)) < 0.05);
    }
  }
}

TEST_CASE("empirical_cov: uncentered batches and oversized C are refused") {
  lcm::test::Rng rng(7);
  FeatureBatch b = lcm::test::random_batch(rng, 4, 3);
  CHECK_THROWS_AS((void)lcm::empirical_cov(b), std::invalid_argument);
  b.centered = true;
  CHECK_THROWS_AS((void)lcm::empirical_cov(b, 2), std::invalid_argument);
}

}  // TEST_SUITE
