#include "lcm/ssm_likelihood.hpp"

#include <cmath>
#include <numbers>

#include "lcm/rng.hpp"
#include "lcm/simd.hpp"

namespace lcm {
namespace {

void check_batch(const LcmParams& p, const FeatureBatch& b, const char* op) {
  p.validate();
  b.validate_shape();
  if (b.c != p.dim()) {
    throw std::invalid_argument(std::string(op) + ": batch width " +
                                std::to_string(b.c) +
                                " does not match model dimension " +
                                std::to_string(p.dim()));
  }
}

// Gathers four rows of the batch into a channel-major panel in sorted
// coordinate order: panel[k*4 + lane] = rows[lane][perm[k]].
void pack_panel(const FeatureBatch& b, const std::vector<std::size_t>& perm,
                std::size_t first_row, std::vector<double>& panel) {
  const std::size_t c = b.c;
  const double* r0 = b.row(first_row);
  const double* r1 = b.row(first_row + 1);
  const double* r2 = b.row(first_row + 2);
  const double* r3 = b.row(first_row + 3);
  for (std::size_t k = 0; k < c; ++k) {
    const std::size_t j = perm[k];
    panel[4 * k + 0] = r0[j];
    panel[4 * k + 1] = r1[j];
    panel[4 * k + 2] = r2[j];
    panel[4 * k + 3] = r3[j];
  }
}

// Innovation scan for a single sample; writes v in sorted channel order when
// v_out is non-null and returns sum_k v_k^2 / S_k.
double scan_sample(const KalmanCoeffs& kc, const double* row,
                   double* v_out) {
  const std::size_t c = kc.view.size();
  double acc = 0.0;
  double m = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    const double mp = kc.phi[k] * m;
    const double v = (row[kc.view.perm[k]] - kc.mu_sorted[k]) -
                     kc.w_sorted[k] * mp;
    acc += (v * v) * kc.inv_s[k];
    m = mp + kc.gain[k] * v;
    if (v_out != nullptr) v_out[k] = v;
  }
  return acc;
}

// Per-sample Mahalanobis terms for the whole batch, four samples at a time
// through the dispatched panel kernel.
std::vector<double> batch_quads(const KalmanCoeffs& kc,
                                const FeatureBatch& b) {
  const std::size_t c = b.c;
  std::vector<double> quads(b.n);
  std::vector<double> panel(4 * c);
  double out4[4];
  std::size_t i = 0;
  for (; i + 4 <= b.n; i += 4) {
    pack_panel(b, kc.view.perm, i, panel);
    simd::panel_kalman_quad(panel.data(), kc.mu_sorted.data(),
                            kc.w_sorted.data(), kc.phi.data(), kc.gain.data(),
                            kc.inv_s.data(), c, out4);
    for (int lane = 0; lane < 4; ++lane) quads[i + lane] = out4[lane];
  }
  for (; i < b.n; ++i) quads[i] = scan_sample(kc, b.row(i), nullptr);
  return quads;
}

}  // namespace

KalmanCoeffs kalman_coeffs(const LcmParams& p) {
  p.validate();
  KalmanCoeffs kc;
  kc.view = make_sorted_view(p.a);
  const std::size_t c = kc.view.size();
  const std::vector<double> d = p.noise_diag();

  kc.mu_sorted.resize(c);
  kc.w_sorted.resize(c);
  kc.d_sorted.resize(c);
  for (std::size_t k = 0; k < c; ++k) {
    const std::size_t j = kc.view.perm[k];
    kc.mu_sorted[k] = p.mu[j];
    kc.w_sorted[k] = p.w[j];
    kc.d_sorted[k] = d[j];
  }

  // Stationary start: the first step is a "transition from nothing",
  // phi = 0 and innovation variance 1, so the prior is exactly N(0, 1).
  kc.phi.resize(c);
  kc.q.resize(c);
  kc.phi[0] = 0.0;
  kc.q[0] = 1.0;
  for (std::size_t k = 1; k < c; ++k) {
    kc.phi[k] = kc.view.rho[k - 1];
    kc.q[k] = -std::expm1(-2.0 * kc.view.gaps[k - 1]);
  }

  kc.s.resize(c);
  kc.gain.resize(c);
  kc.inv_s.resize(c);
  kc.logdet = 0.0;
  double p_post = 0.0;  // filtered latent variance after step k
  for (std::size_t k = 0; k < c; ++k) {
    const double p_prior = kc.phi[k] * kc.phi[k] * p_post + kc.q[k];
    const double wk = kc.w_sorted[k];
    const double s = wk * wk * p_prior + kc.d_sorted[k];
    const double gain = p_prior * wk / s;
    kc.s[k] = s;
    kc.gain[k] = gain;
    kc.inv_s[k] = 1.0 / s;
    kc.logdet += std::log(s);
    p_post = (1.0 - gain * wk) * p_prior;
  }
  return kc;
}

InnovationSequence kalman_innovations(const LcmParams& p,
                                      const FeatureBatch& b) {
  check_batch(p, b, "kalman_innovations");
  const KalmanCoeffs kc = kalman_coeffs(p);
  InnovationSequence seq;
  seq.n = b.n;
  seq.c = b.c;
  seq.s = kc.s;
  seq.v.resize(b.n * b.c);
  for (std::size_t i = 0; i < b.n; ++i) {
    scan_sample(kc, b.row(i), seq.v.data() + i * b.c);
  }
  return seq;
}

double gaussian_nll(const LcmParams& p, const FeatureBatch& b) {
  check_batch(p, b, "gaussian_nll");
  const KalmanCoeffs kc = kalman_coeffs(p);
  const std::vector<double> quads = batch_quads(kc, b);
  double quad_sum = 0.0;
  for (double q : quads) quad_sum += q;
  const double mean_quad = quad_sum / static_cast<double>(b.n);
  return 0.5 * mean_quad + 0.5 * kc.logdet +
         0.5 * static_cast<double>(b.c) * std::log(2.0 * std::numbers::pi);
}

std::vector<double> gaussian_nll_per_sample(const LcmParams& p,
                                            const FeatureBatch& b) {
  check_batch(p, b, "gaussian_nll_per_sample");
  const KalmanCoeffs kc = kalman_coeffs(p);
  std::vector<double> out = batch_quads(kc, b);
  const double shared =
      0.5 * kc.logdet +
      0.5 * static_cast<double>(b.c) * std::log(2.0 * std::numbers::pi);
  for (double& q : out) q = 0.5 * q + shared;
  return out;
}

double mahalanobis(const LcmParams& p, std::span<const double> x) {
  p.validate();
  if (x.size() != p.dim()) {
    throw std::invalid_argument("mahalanobis: dimension mismatch");
  }
  const KalmanCoeffs kc = kalman_coeffs(p);
  return scan_sample(kc, x.data(), nullptr);
}

double lcm_logdet(const LcmParams& p) {
  p.validate();
  return kalman_coeffs(p).logdet;
}

FeatureBatch sample(const LcmParams& p, std::size_t n, std::uint64_t seed) {
  p.validate();
  if (n == 0) throw std::invalid_argument("sample: n must be >= 1");
  const KalmanCoeffs kc = kalman_coeffs(p);
  const std::size_t c = kc.view.size();
  std::vector<double> sqrt_q(c), sqrt_d(c);
  for (std::size_t k = 0; k < c; ++k) {
    sqrt_q[k] = std::sqrt(kc.q[k]);
    sqrt_d[k] = std::sqrt(kc.d_sorted[k]);
  }

  FeatureBatch b;
  b.n = n;
  b.c = c;
  b.centered = false;
  b.data.resize(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    NormalStream rng(substream_seed(seed, i));
    double* row = b.row(i);
    double z = 0.0;  // latent AR(1) state
    for (std::size_t k = 0; k < c; ++k) {
      z = kc.phi[k] * z + sqrt_q[k] * rng.next();
      const double noise = sqrt_d[k] * rng.next();
      row[kc.view.perm[k]] = kc.mu_sorted[k] + kc.w_sorted[k] * z + noise;
    }
  }
  return b;
}

}  // namespace lcm
