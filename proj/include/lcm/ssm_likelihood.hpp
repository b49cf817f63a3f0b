#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lcm/kernel_ops.hpp"
#include "lcm/types.hpp"

// Exact Gaussian likelihood under the structured covariance via a scalar
// state-space collapse: in sorted coordinate order the kernel factor is a
// stationary AR(1) latent chain observed through w with noise diag(d), so a
// single Kalman filter pass yields innovations v_k with variances S_k and
//   log det Sigma = sum_k log S_k,
//   (x-mu)' Sigma^{-1} (x-mu) = sum_k v_k^2 / S_k.
// Unlike the precision-side operations this tolerates tied coordinates
// (a tie gives transition factor 1 and innovation variance 0).

namespace lcm {

// Sample-independent filter coefficients for fixed parameters. The variance
// recursion (prior variance, innovation variance S, gain) does not depend on
// the data, so it is computed once and shared across samples; the chain is
// initialized at its stationary law (prior mean 0, prior variance 1).
struct KalmanCoeffs {
  SortedView view;
  std::vector<double> phi;       // size C, phi[0] = 0
  std::vector<double> q;         // size C, q[0] = 1, else 1 - phi^2
  std::vector<double> s;         // innovation variances, all > 0
  std::vector<double> gain;
  std::vector<double> inv_s;
  std::vector<double> mu_sorted;
  std::vector<double> w_sorted;
  std::vector<double> d_sorted;
  double logdet = 0.0;           // sum_k log s[k]
};

[[nodiscard]] KalmanCoeffs kalman_coeffs(const LcmParams& p);

// Innovations for every sample (row-major n x c, channels in sorted order)
// together with the shared innovation variances.
struct InnovationSequence {
  std::vector<double> v;  // n x c
  std::vector<double> s;  // c
  std::size_t n = 0;
  std::size_t c = 0;
};

[[nodiscard]] InnovationSequence kalman_innovations(const LcmParams& p,
                                                    const FeatureBatch& b);

// Mean negative log-likelihood over the batch:
//   (1/2N) sum_i sum_k [ log(2 pi S_k) + v_{ik}^2 / S_k ].
[[nodiscard]] double gaussian_nll(const LcmParams& p, const FeatureBatch& b);

// Per-sample negative log-likelihoods (same assembly, no averaging).
[[nodiscard]] std::vector<double> gaussian_nll_per_sample(
    const LcmParams& p, const FeatureBatch& b);

// (x - mu)' Sigma^{-1} (x - mu) for a single vector.
[[nodiscard]] double mahalanobis(const LcmParams& p, std::span<const double> x);

// log det Sigma from the innovation variances alone.
[[nodiscard]] double lcm_logdet(const LcmParams& p);

// n draws from N(mu, Sigma): latent AR(1) chain plus diagonal noise,
// one RNG substream per sample (prefix-stable in n). Per sample and sorted
// channel the draw order is: chain innovation normal, then noise normal.
[[nodiscard]] FeatureBatch sample(const LcmParams& p, std::size_t n,
                                  std::uint64_t seed);

}  // namespace lcm
