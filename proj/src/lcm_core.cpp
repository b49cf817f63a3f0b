#include "lcm/lcm_core.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "internal_math.hpp"
#include "lcm/kernel_ops.hpp"
#include "lcm/rng.hpp"
#include "lcm/simd.hpp"

namespace lcm {
namespace {

constexpr std::uint64_t kInitJitterStream = 0x696e69746a69ULL;

void check_symmetric(const Eigen::MatrixXd& m, const char* op) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument(std::string(op) +
                                ": target must be square and non-empty");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * scale) {
    throw std::invalid_argument(std::string(op) +
                                ": target matrix is not symmetric");
  }
}

void check_centered_batch(const LcmParams& p, const FeatureBatch& b,
                          const char* op) {
  p.validate();
  b.validate_shape();
  if (b.c != p.dim()) {
    throw std::invalid_argument(std::string(op) + ": batch width " +
                                std::to_string(b.c) +
                                " does not match model dimension " +
                                std::to_string(p.dim()));
  }
  if (!b.centered) {
    throw std::invalid_argument(
        std::string(op) +
        ": batch must be centered (subtract column means first)");
  }
}

// Column sums of squares, sum_i v_{ij}^2.
std::vector<double> column_ssq(const FeatureBatch& b) {
  std::vector<double> out(b.c, 0.0);
  for (std::size_t i = 0; i < b.n; ++i) {
    const double* row = b.row(i);
    for (std::size_t j = 0; j < b.c; ++j) out[j] += row[j] * row[j];
  }
  return out;
}

// Pack four batch rows into a channel-major sorted-order panel.
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

// Single-sample data term in sorted order (reference path for remainders).
double sample_data_term(const double* row, const SortedView& v,
                        const std::vector<double>& w_sorted,
                        const std::vector<double>& d_sorted) {
  const std::size_t c = v.size();
  double acc = 0.0;
  double fwd = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    const double val = row[v.perm[k]];
    const double t = w_sorted[k] * val;
    acc += d_sorted[k] * (val * val) + t * (t + 2.0 * fwd);
    if (k + 1 < c) fwd = v.rho[k] * (fwd + t);
  }
  return acc;
}

// sum_i [ d' v_i^2 + (w o v_i)' K(a) (w o v_i) ] over the batch.
double batch_data_term(const FeatureBatch& b, const SortedView& v,
                       const std::vector<double>& w_sorted,
                       const std::vector<double>& d_sorted) {
  const std::size_t c = b.c;
  std::vector<double> panel(4 * c);
  double out4[4];
  double acc = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= b.n; i += 4) {
    pack_panel(b, v.perm, i, panel);
    simd::panel_data_term(panel.data(), v.rho.data(), w_sorted.data(),
                          d_sorted.data(), c, out4);
    for (int lane = 0; lane < 4; ++lane) acc += out4[lane];
  }
  for (; i < b.n; ++i) {
    acc += sample_data_term(b.row(i), v, w_sorted, d_sorted);
  }
  return acc;
}

struct GradWorkspace {
  std::vector<double> xs, fwd, bwd, dw_sorted, da_sorted;
};

// Accumulates one sample's contribution to the data-term pieces of the w and
// a gradients, in sorted order:
//   dw_sorted[k] += vs_k * (K t)_k      with t = w o v (sorted)
//   da_sorted[k] += grad_a of t' K t    (tie groups collapsed, sign(0) = 0)
void accumulate_sample_grad(const double* row, const SortedView& v,
                            const std::vector<double>& w_sorted,
                            GradWorkspace& ws) {
  const std::size_t c = v.size();
  for (std::size_t k = 0; k < c; ++k) ws.xs[k] = w_sorted[k] * row[v.perm[k]];
  ws.fwd[0] = 0.0;
  for (std::size_t k = 1; k < c; ++k) {
    ws.fwd[k] = v.rho[k - 1] * (ws.fwd[k - 1] + ws.xs[k - 1]);
  }
  ws.bwd[c - 1] = 0.0;
  for (std::size_t k = c - 1; k-- > 0;) {
    ws.bwd[k] = v.rho[k] * (ws.bwd[k + 1] + ws.xs[k + 1]);
  }
  for (std::size_t k = 0; k < c; ++k) {
    const double y = ws.fwd[k] + ws.xs[k] + ws.bwd[k];
    ws.dw_sorted[k] += row[v.perm[k]] * y;
  }
  std::size_t k = 0;
  while (k < c) {
    std::size_t end = k;
    while (end + 1 < c && v.gaps[end] == 0.0) ++end;
    for (std::size_t j = k; j <= end; ++j) {
      ws.da_sorted[j] += 2.0 * ws.xs[j] * (ws.bwd[end] - ws.fwd[k]);
    }
    k = end + 1;
  }
}

std::vector<double> column_variances(const FeatureBatch& centered) {
  std::vector<double> var = column_ssq(centered);
  for (double& x : var) x /= static_cast<double>(centered.n);
  return var;
}

// Shared Adam driver over theta = [u; w; a].
FitResult run_adam(LcmParams params, const FitConfig& cfg,
                   const std::function<double(const LcmParams&)>& loss_fn,
                   const std::function<LcmGrad(const LcmParams&)>& grad_fn) {
  const std::size_t c = params.dim();
  const double initial = loss_fn(params);
  if (!std::isfinite(initial)) {
    throw DivergenceError("fit: non-finite loss at initialization", 0);
  }

  FitResult best;
  best.params = params;
  best.initial_loss = initial;
  best.final_loss = initial;
  best.best_epoch = 0;

  std::vector<double> m(3 * c, 0.0), v(3 * c, 0.0), g(3 * c, 0.0);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const LcmGrad grad = grad_fn(params);
    for (std::size_t i = 0; i < c; ++i) {
      g[i] = grad.du[i];
      g[c + i] = grad.dw[i];
      g[2 * c + i] = grad.da[i];
    }
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(epoch));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(epoch));
    for (std::size_t i = 0; i < 3 * c; ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      const double step = cfg.lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
      if (i < c) {
        params.u[i] -= step;
      } else if (i < 2 * c) {
        params.w[i - c] -= step;
      } else {
        params.a[i - 2 * c] -= step;
      }
    }
    const double loss = loss_fn(params);
    if (!std::isfinite(loss)) {
      throw DivergenceError(
          "fit: loss became non-finite at epoch " + std::to_string(epoch),
          epoch);
    }
    if (loss < best.final_loss) {
      best.final_loss = loss;
      best.params = params;
      best.best_epoch = epoch;
    }
  }
  return best;
}

}  // namespace

Eigen::MatrixXd materialize_covariance(const LcmParams& p, std::size_t cap) {
  p.validate();
  const std::vector<double> d = p.noise_diag();
  Eigen::MatrixXd sigma = dense_kernel(p.a, cap);
  const Eigen::Index c = sigma.rows();
  for (Eigen::Index i = 0; i < c; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      sigma(i, j) *= p.w[static_cast<std::size_t>(i)] *
                     p.w[static_cast<std::size_t>(j)];
    }
    sigma(i, i) += d[static_cast<std::size_t>(i)];
  }
  return sigma;
}

double frobenius_loss_dense(const LcmParams& p,
                            const Eigen::MatrixXd& sigma_hat,
                            std::size_t cap) {
  p.validate();
  check_symmetric(sigma_hat, "frobenius_loss_dense");
  if (static_cast<std::size_t>(sigma_hat.rows()) != p.dim()) {
    throw std::invalid_argument(
        "frobenius_loss_dense: target dimension mismatch");
  }
  const Eigen::MatrixXd sigma = materialize_covariance(p, cap);
  return (sigma - sigma_hat).squaredNorm();
}

double frobenius_loss_decomposed(const LcmParams& p, const FeatureBatch& b) {
  check_centered_batch(p, b, "frobenius_loss_decomposed");
  const std::size_t c = p.dim();
  const std::vector<double> d = p.noise_diag();
  const SortedView view = make_sorted_view(p.a);
  const SortedView dview = doubled_view(view);

  std::vector<double> w2(c);
  for (std::size_t i = 0; i < c; ++i) w2[i] = p.w[i] * p.w[i];

  // ||Sigma||_F^2 = ||d||^2 + 2 d'(w^2) + (w^2)' K(2a) (w^2)
  const double model = simd::dot(d.data(), d.data(), c) +
                       2.0 * simd::dot(d.data(), w2.data(), c) +
                       kernel_quadform(dview, w2);

  std::vector<double> w_sorted(c), d_sorted(c);
  for (std::size_t k = 0; k < c; ++k) {
    w_sorted[k] = p.w[view.perm[k]];
    d_sorted[k] = d[view.perm[k]];
  }
  const double data = batch_data_term(b, view, w_sorted, d_sorted) * 2.0 /
                      static_cast<double>(b.n);
  return model - data;
}

LcmGrad frobenius_grad(const LcmParams& p, const FeatureBatch& b) {
  check_centered_batch(p, b, "frobenius_grad");
  const std::size_t c = p.dim();
  const double inv_n = 1.0 / static_cast<double>(b.n);
  const std::vector<double> d = p.noise_diag();
  const SortedView view = make_sorted_view(p.a);
  const SortedView dview = doubled_view(view);

  std::vector<double> w2(c);
  for (std::size_t i = 0; i < c; ++i) w2[i] = p.w[i] * p.w[i];

  // Diagonal direction: dL/dd = 2d + 2w^2 - (2/N) sum_i v_i^2.
  const std::vector<double> col_ssq = column_ssq(b);
  LcmGrad grad;
  grad.du.resize(c);
  grad.dw.resize(c);
  grad.da.resize(c);
  for (std::size_t i = 0; i < c; ++i) {
    const double dld = 2.0 * d[i] + 2.0 * w2[i] - 2.0 * inv_n * col_ssq[i];
    grad.du[i] = dld * detail::sigmoid(p.u[i]);
  }

  // Model-term pieces.
  const std::vector<double> k2w2 = kernel_matvec(dview, w2);
  const std::vector<double> model_da = kernel_quadform_grad_a(dview, w2);

  // Data-term pieces accumulated per sample in sorted order.
  std::vector<double> w_sorted(c);
  for (std::size_t k = 0; k < c; ++k) w_sorted[k] = p.w[view.perm[k]];
  GradWorkspace ws;
  ws.xs.resize(c);
  ws.fwd.resize(c);
  ws.bwd.resize(c);
  ws.dw_sorted.assign(c, 0.0);
  ws.da_sorted.assign(c, 0.0);
  for (std::size_t i = 0; i < b.n; ++i) {
    accumulate_sample_grad(b.row(i), view, w_sorted, ws);
  }

  for (std::size_t i = 0; i < c; ++i) {
    grad.dw[i] = 4.0 * d[i] * p.w[i] + 4.0 * p.w[i] * k2w2[i];
    // Gradient wrt a of the model term goes through the doubled coordinates.
    grad.da[i] = 2.0 * model_da[i];
  }
  for (std::size_t k = 0; k < c; ++k) {
    const std::size_t j = view.perm[k];
    grad.dw[j] -= 4.0 * inv_n * ws.dw_sorted[k];
    grad.da[j] -= 2.0 * inv_n * ws.da_sorted[k];
  }
  return grad;
}

LcmGrad frobenius_grad_dense(const LcmParams& p,
                             const Eigen::MatrixXd& sigma_hat) {
  p.validate();
  check_symmetric(sigma_hat, "frobenius_grad_dense");
  if (static_cast<std::size_t>(sigma_hat.rows()) != p.dim()) {
    throw std::invalid_argument(
        "frobenius_grad_dense: target dimension mismatch");
  }
  const std::size_t c = p.dim();
  const std::vector<double> d = p.noise_diag();
  const Eigen::MatrixXd kmat = dense_kernel(p.a);
  const Eigen::MatrixXd resid = materialize_covariance(p) - sigma_hat;

  LcmGrad grad;
  grad.du.resize(c);
  grad.dw.resize(c);
  grad.da.resize(c);
  for (std::size_t i = 0; i < c; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    grad.du[i] = 2.0 * resid(ii, ii) * detail::sigmoid(p.u[i]);
    double dw = 0.0;
    double da = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double rk = resid(ii, jj) * kmat(ii, jj);
      dw += rk * p.w[j];
      if (j != i) {
        const double sign = p.a[i] > p.a[j] ? 1.0 : (p.a[i] < p.a[j] ? -1.0 : 0.0);
        da -= sign * rk * p.w[j];
      }
    }
    grad.dw[i] = 4.0 * dw;
    grad.da[i] = 4.0 * p.w[i] * da;
  }
  return grad;
}

LcmParams default_init(std::span<const double> variances,
                       std::span<const double> mu, double eps,
                       std::uint64_t seed) {
  const std::size_t c = variances.size();
  if (c == 0 || mu.size() != c) {
    throw std::invalid_argument("default_init: dimension mismatch");
  }
  LcmParams p;
  p.eps = eps;
  p.mu.assign(mu.begin(), mu.end());
  p.u.resize(c);
  p.w.resize(c);
  p.a.resize(c);
  NormalStream jitter(substream_seed(seed, kInitJitterStream));
  const double span = static_cast<double>(c) / 8.0;
  for (std::size_t i = 0; i < c; ++i) {
    const double var = std::max(variances[i], 0.0);
    p.u[i] = detail::softplus_inv(std::max(var - eps, 1e-8));
    p.w[i] = 0.1 * std::sqrt(var);
    const double base =
        c == 1 ? 0.0
               : span * static_cast<double>(i) / static_cast<double>(c - 1);
    p.a[i] = base + 0.01 * jitter.next();
  }
  return p;
}

FitResult fit(const FeatureBatch& b, const FitConfig& cfg,
              const std::optional<LcmParams>& init) {
  b.validate_shape();
  if (b.n < 2) {
    throw std::invalid_argument("fit: batch must contain at least 2 samples");
  }
  std::vector<double> mu(b.c, 0.0);
  FeatureBatch centered_storage;
  const FeatureBatch* work = &b;
  if (!b.centered) {
    centered_storage = center(b, &mu);
    work = &centered_storage;
  }

  LcmParams start;
  if (init.has_value()) {
    start = *init;
    start.validate();
    if (start.dim() != b.c) {
      throw std::invalid_argument("fit: init dimension mismatch");
    }
  } else {
    start = default_init(column_variances(*work), mu, kDefaultEps, cfg.seed);
  }
  start.mu = mu;

  FitResult result = run_adam(
      std::move(start), cfg,
      [&](const LcmParams& p) { return frobenius_loss_decomposed(p, *work); },
      [&](const LcmParams& p) { return frobenius_grad(p, *work); });
  result.params.mu = mu;
  return result;
}

FitResult fit_dense(const Eigen::MatrixXd& sigma_hat,
                    std::span<const double> mu, const FitConfig& cfg,
                    const std::optional<LcmParams>& init) {
  check_symmetric(sigma_hat, "fit_dense");
  const std::size_t c = static_cast<std::size_t>(sigma_hat.rows());
  if (mu.size() != c) {
    throw std::invalid_argument("fit_dense: mu dimension mismatch");
  }

  LcmParams start;
  if (init.has_value()) {
    start = *init;
    start.validate();
    if (start.dim() != c) {
      throw std::invalid_argument("fit_dense: init dimension mismatch");
    }
  } else {
    std::vector<double> variances(c);
    for (std::size_t i = 0; i < c; ++i) {
      variances[i] = std::max(sigma_hat(static_cast<Eigen::Index>(i),
                                        static_cast<Eigen::Index>(i)),
                              0.0);
    }
    start = default_init(variances, mu, kDefaultEps, cfg.seed);
  }
  start.mu.assign(mu.begin(), mu.end());

  FitResult result = run_adam(
      std::move(start), cfg,
      [&](const LcmParams& p) { return frobenius_loss_dense(p, sigma_hat); },
      [&](const LcmParams& p) { return frobenius_grad_dense(p, sigma_hat); });
  result.params.mu.assign(mu.begin(), mu.end());
  return result;
}

DiagonalGaussian diag_mle(const FeatureBatch& b, double eps) {
  b.validate_shape();
  if (b.n < 2) {
    throw std::invalid_argument(
        "diag_mle: batch must contain at least 2 samples");
  }
  DiagonalGaussian g;
  g.mu.assign(b.c, 0.0);
  g.var.assign(b.c, 0.0);
  for (std::size_t i = 0; i < b.n; ++i) {
    const double* row = b.row(i);
    for (std::size_t j = 0; j < b.c; ++j) g.mu[j] += row[j];
  }
  const double inv_n = 1.0 / static_cast<double>(b.n);
  for (std::size_t j = 0; j < b.c; ++j) g.mu[j] *= inv_n;
  for (std::size_t i = 0; i < b.n; ++i) {
    const double* row = b.row(i);
    for (std::size_t j = 0; j < b.c; ++j) {
      const double dev = row[j] - g.mu[j];
      g.var[j] += dev * dev;
    }
  }
  for (std::size_t j = 0; j < b.c; ++j) {
    g.var[j] = std::max(g.var[j] * inv_n, eps);
  }
  return g;
}

double gaussian_nll(const DiagonalGaussian& g, const FeatureBatch& b) {
  b.validate_shape();
  if (b.c != g.dim()) {
    throw std::invalid_argument("gaussian_nll: dimension mismatch");
  }
  double logdet = 0.0;
  for (double v : g.var) logdet += std::log(v);
  double quad_sum = 0.0;
  for (std::size_t i = 0; i < b.n; ++i) {
    const double* row = b.row(i);
    for (std::size_t j = 0; j < b.c; ++j) {
      const double dev = row[j] - g.mu[j];
      quad_sum += dev * dev / g.var[j];
    }
  }
  return 0.5 * quad_sum / static_cast<double>(b.n) + 0.5 * logdet +
         0.5 * static_cast<double>(b.c) * std::log(2.0 * std::numbers::pi);
}

FeatureBatch center(const FeatureBatch& b, std::vector<double>* means_out) {
  b.validate_shape();
  std::vector<double> means(b.c, 0.0);
  for (std::size_t i = 0; i < b.n; ++i) {
    const double* row = b.row(i);
    for (std::size_t j = 0; j < b.c; ++j) means[j] += row[j];
  }
  const double inv_n = 1.0 / static_cast<double>(b.n);
  for (double& m : means) m *= inv_n;

  FeatureBatch out = b;
  for (std::size_t i = 0; i < b.n; ++i) {
    double* row = out.row(i);
    for (std::size_t j = 0; j < b.c; ++j) row[j] -= means[j];
  }
  out.centered = true;
  if (means_out != nullptr) *means_out = std::move(means);
  return out;
}

}  // namespace lcm
