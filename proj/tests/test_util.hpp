#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lcm/rng.hpp"
#include "lcm/types.hpp"

// Shared fixture helpers. All randomness is seeded and flows through the
// repository's own NormalStream / mt19937_64, so fixtures reproduce exactly
// across runs.

namespace lcm::test {

class Rng {
 public:
  explicit Rng(std::uint64_t seed)
      : eng_(seed), normals_(mix64(seed ^ 0x6e6f726d616cULL)) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normals_.next(); }
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(eng_() % n);
  }

 private:
  std::mt19937_64 eng_;
  NormalStream normals_;
};

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Raw-diagonal value with softplus(u) + eps = d.
inline double u_for_d(double d, double eps = kDefaultEps) {
  return std::log(std::expm1(d - eps));
}

// Coordinates with controlled adjacent gaps, shuffled so the sorting path is
// always exercised.
inline std::vector<double> random_coords(Rng& rng, std::size_t c,
                                         double min_gap = 0.05,
                                         double max_extra = 0.5) {
  std::vector<double> a(c);
  double pos = rng.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < c; ++i) {
    a[i] = pos;
    pos += min_gap + max_extra * rng.uniform();
  }
  for (std::size_t i = c; i > 1; --i) std::swap(a[i - 1], a[rng.index(i)]);
  return a;
}

inline LcmParams random_params(Rng& rng, std::size_t c, double min_gap = 0.05) {
  LcmParams p;
  p.mu.resize(c);
  p.u.resize(c);
  p.w.resize(c);
  p.a = random_coords(rng, c, min_gap);
  for (std::size_t i = 0; i < c; ++i) {
    p.mu[i] = rng.uniform(-1.0, 1.0);
    p.u[i] = rng.uniform(-2.0, 1.0);
    p.w[i] = rng.uniform(-1.5, 1.5);
  }
  return p;
}

inline FeatureBatch random_batch(Rng& rng, std::size_t n, std::size_t c,
                                 double scale = 1.0) {
  FeatureBatch b;
  b.n = n;
  b.c = c;
  b.data.resize(n * c);
  for (double& x : b.data) x = scale * rng.normal();
  return b;
}

// In-place column-mean subtraction; lets suites below lcm_core avoid a
// dependency on its center().
inline void center_in_place(FeatureBatch& b) {
  for (std::size_t j = 0; j < b.c; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < b.n; ++i) mean += b.at(i, j);
    mean /= static_cast<double>(b.n);
    for (std::size_t i = 0; i < b.n; ++i) b.at(i, j) -= mean;
  }
  b.centered = true;
}

// Sigma(p) assembled directly from the definition, sharing no code with the
// library: softplus diagonal plus w_i w_j exp(-|a_i - a_j|).
inline Eigen::MatrixXd hand_covariance(const LcmParams& p) {
  const auto c = static_cast<Eigen::Index>(p.dim());
  Eigen::MatrixXd s(c, c);
  for (Eigen::Index i = 0; i < c; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    for (Eigen::Index j = 0; j < c; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      s(i, j) = p.w[ii] * p.w[jj] * std::exp(-std::abs(p.a[ii] - p.a[jj]));
    }
    const double u = p.u[ii];
    const double softplus = u > 30.0 ? u : std::log1p(std::exp(u));
    s(i, i) += softplus + p.eps;
  }
  return s;
}

}  // namespace lcm::test
