#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lcm/aggregation.hpp"
#include "lcm/lcm_core.hpp"
#include "lcm/oracle.hpp"
#include "test_util.hpp"

namespace {

using lcm::AggregateMode;
using lcm::AggregateOptions;
using lcm::LcmParams;
using lcm::TaskWeights;
using lcm::test::rel_err;

// Monotone coordinates and positive w: the planted regime where the refit
// converges reliably (see the lcm_core fit tests).
LcmParams planted_params(std::uint64_t seed, std::size_t c) {
  lcm::test::Rng rng(seed);
  LcmParams p;
  p.mu.resize(c);
  p.u.resize(c);
  p.w.resize(c);
  p.a.resize(c);
  for (std::size_t i = 0; i < c; ++i) {
    p.mu[i] = rng.uniform(-1.0, 1.0);
    p.u[i] = rng.uniform(-2.0, 0.5);
    p.w[i] = rng.uniform(0.5, 1.5);
    p.a[i] = 0.15 * static_cast<double>(i) + rng.uniform(0.0, 0.05);
  }
  return p;
}

Eigen::MatrixXd random_psd(lcm::test::Rng& rng, int c) {
  Eigen::MatrixXd m(c, c);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m.transpose() * m;
}

}  // namespace

TEST_SUITE("aggregation") {

TEST_CASE("aggregate_dense: equal weights average the inputs") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd b = 3.0 * Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd got = lcm::aggregate_dense(a, b, {10.0, 10.0});
  CHECK(got == 2.0 * Eigen::MatrixXd::Identity(2, 2));
}

TEST_CASE("aggregate_dense: a dominant old task pins the result") {
  lcm::test::Rng rng(401);
  const Eigen::MatrixXd a = random_psd(rng, 4);
  const Eigen::MatrixXd b = random_psd(rng, 4);
  const Eigen::MatrixXd got = lcm::aggregate_dense(a, b, {1e12, 1.0});
  CHECK((got - a).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("aggregate_dense: identical inputs are a fixed point") {
  lcm::test::Rng rng(409);
  const Eigen::MatrixXd s = random_psd(rng, 5);
  const Eigen::MatrixXd got = lcm::aggregate_dense(s, s, {3.0, 7.0});
  CHECK((got - s).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("aggregate_dense: only the weight ratio matters") {
  lcm::test::Rng rng(419);
  const Eigen::MatrixXd a = random_psd(rng, 3);
  const Eigen::MatrixXd b = random_psd(rng, 3);
  const Eigen::MatrixXd base = lcm::aggregate_dense(a, b, {3.0, 5.0});
  // Power-of-two scalings are exact in binary floating point.
  CHECK(lcm::aggregate_dense(a, b, {1.5, 2.5}) == base);
  CHECK(lcm::aggregate_dense(a, b, {3072.0, 5120.0}) == base);
  const Eigen::MatrixXd scaled = lcm::aggregate_dense(a, b, {9.0, 15.0});
  CHECK((scaled - base).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("aggregate_dense: convex combinations preserve PSD") {
  lcm::test::Rng rng(421);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd a = random_psd(rng, 6);
    const Eigen::MatrixXd b = random_psd(rng, 6);
    const TaskWeights w{rng.uniform(1.0, 50.0), rng.uniform(1.0, 50.0)};
    const Eigen::MatrixXd got = lcm::aggregate_dense(a, b, w);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(got,
                                                      Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("aggregate_dense: sequential aggregation matches the three-way mean") {
  lcm::test::Rng rng(431);
  const Eigen::MatrixXd a = random_psd(rng, 4);
  const Eigen::MatrixXd b = random_psd(rng, 4);
  const Eigen::MatrixXd c = random_psd(rng, 4);
  const double na = 12.0, nb = 5.0, nc = 23.0;
  const Eigen::MatrixXd ab = lcm::aggregate_dense(a, b, {na, nb});
  const Eigen::MatrixXd seq = lcm::aggregate_dense(ab, c, {na + nb, nc});
  const Eigen::MatrixXd direct = (na * a + nb * b + nc * c) / (na + nb + nc);
  CHECK((seq - direct).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("aggregate_dense: dominant-identity mixing scales off-diagonals") {
  // Old task: identity (no off-diagonal energy). New task: strong
  // correlations. With counts 90/10 the aggregate keeps exactly 10% of the
  // new task's off-diagonal mass.
  const LcmParams p_new = planted_params(433, 8);
  const Eigen::MatrixXd sigma_new = lcm::materialize_covariance(p_new);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(8, 8);
  const Eigen::MatrixXd agg = lcm::aggregate_dense(eye, sigma_new, {90.0, 10.0});
  Eigen::MatrixXd off_agg = agg, off_new = sigma_new;
  off_agg.diagonal().setZero();
  off_new.diagonal().setZero();
  CHECK(rel_err(off_agg.norm(), 0.1 * off_new.norm()) < 1e-12);
}

TEST_CASE("aggregate_dense: shape and weight validation") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS((void)lcm::aggregate_dense(a, b, {1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)lcm::aggregate_dense(a, a, {0.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)lcm::aggregate_dense(a, a, {1.0, 0.5}),
                  std::invalid_argument);
}

TEST_CASE("aggregate_refit: identical components are a dense-mode fixed point") {
  const LcmParams p = planted_params(443, 10);
  const lcm::FitResult r = lcm::aggregate_refit(p, p, {4.0, 9.0}, {});
  const Eigen::MatrixXd got = lcm::materialize_covariance(r.params);
  const Eigen::MatrixXd want = lcm::materialize_covariance(p);
  CHECK((got - want).norm() / want.norm() < 1e-10);
}

TEST_CASE("aggregate_refit: aggregated mean is the weight-convex combination") {
  const LcmParams p_old = planted_params(449, 6);
  const LcmParams p_new = planted_params(457, 6);
  const TaskWeights w{7.0, 3.0};
  AggregateOptions opt;
  opt.fit.epochs = 10;
  const lcm::FitResult r = lcm::aggregate_refit(p_old, p_new, w, opt);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(rel_err(r.params.mu[i], 0.7 * p_old.mu[i] + 0.3 * p_new.mu[i]) <
          1e-12);
  }
}

TEST_CASE("aggregate_refit: dense and sampled modes agree at C=8") {
  // Margins calibrated on this fixture family: mutual disagreement lands
  // near 0.8% with 50k pooled draws and a 300-epoch refit.
  const LcmParams p_old = planted_params(461, 8);
  const LcmParams p_new = planted_params(463, 8);
  const TaskWeights w{3.0, 1.0};

  AggregateOptions dense_opt;
  dense_opt.mode = AggregateMode::dense;
  dense_opt.fit.epochs = 300;
  dense_opt.fit.lr = 0.02;
  AggregateOptions sampled_opt = dense_opt;
  sampled_opt.mode = AggregateMode::sampled;
  sampled_opt.n_samples = 50000;
  sampled_opt.seed = 17;

  const lcm::FitResult rd = lcm::aggregate_refit(p_old, p_new, w, dense_opt);
  const lcm::FitResult rs = lcm::aggregate_refit(p_old, p_new, w, sampled_opt);
  const Eigen::MatrixXd sd = lcm::materialize_covariance(rd.params);
  const Eigen::MatrixXd ss = lcm::materialize_covariance(rs.params);
  CHECK((sd - ss).norm() / sd.norm() < 0.03);
}

TEST_CASE("aggregate_refit: sampled mode is deterministic in the seed") {
  const LcmParams p_old = planted_params(467, 5);
  const LcmParams p_new = planted_params(479, 5);
  AggregateOptions opt;
  opt.mode = AggregateMode::sampled;
  opt.n_samples = 2000;
  opt.seed = 5;
  opt.fit.epochs = 20;
  const lcm::FitResult r1 = lcm::aggregate_refit(p_old, p_new, {2.0, 1.0}, opt);
  const lcm::FitResult r2 = lcm::aggregate_refit(p_old, p_new, {2.0, 1.0}, opt);
  CHECK(r1.params.u == r2.params.u);
  CHECK(r1.params.w == r2.params.w);
  CHECK(r1.params.a == r2.params.a);
  opt.seed = 6;
  const lcm::FitResult r3 = lcm::aggregate_refit(p_old, p_new, {2.0, 1.0}, opt);
  CHECK(r3.params.u != r1.params.u);
}

TEST_CASE("aggregate_refit: dimension mismatch and cap are enforced") {
  const LcmParams small = planted_params(487, 4);
  const LcmParams other = planted_params(491, 5);
  CHECK_THROWS_AS((void)lcm::aggregate_refit(small, other, {1.0, 1.0}, {}),
                  std::invalid_argument);

  // Dense mode refuses C above the materialization cap.
  LcmParams wide;
  const std::size_t c = lcm::kDenseCap + 1;
  wide.mu.assign(c, 0.0);
  wide.u.assign(c, 0.0);
  wide.w.assign(c, 0.0);
  wide.a.resize(c);
  for (std::size_t i = 0; i < c; ++i) wide.a[i] = static_cast<double>(i);
  CHECK_THROWS_AS((void)lcm::aggregate_refit(wide, wide, {1.0, 1.0}, {}),
                  std::invalid_argument);
}

}  // TEST_SUITE
