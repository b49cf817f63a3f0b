#include "lcm/simd.hpp"

namespace lcm::simd::scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double weighted_ssq(const double* wgt, const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += wgt[i] * x[i] * x[i];
  return acc;
}

void panel_data_term(const double* panel, const double* rho, const double* w,
                     const double* d, std::size_t c, double* out4) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  double fwd[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < c; ++k) {
    const double* col = panel + 4 * k;
    const double wk = w[k];
    const double dk = d[k];
    const bool advance = k + 1 < c;
    const double rk = advance ? rho[k] : 0.0;
    for (int lane = 0; lane < 4; ++lane) {
      const double v = col[lane];
      const double t = wk * v;
      acc[lane] += dk * (v * v) + t * (t + 2.0 * fwd[lane]);
      if (advance) fwd[lane] = rk * (fwd[lane] + t);
    }
  }
  for (int lane = 0; lane < 4; ++lane) out4[lane] = acc[lane];
}

void panel_kalman_quad(const double* panel, const double* mu, const double* w,
                       const double* phi, const double* gain,
                       const double* inv_s, std::size_t c, double* out4) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  double m[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < c; ++k) {
    const double* col = panel + 4 * k;
    const double muk = mu[k];
    const double wk = w[k];
    const double pk = phi[k];
    const double gk = gain[k];
    const double ik = inv_s[k];
    for (int lane = 0; lane < 4; ++lane) {
      const double mp = pk * m[lane];
      const double v = (col[lane] - muk) - wk * mp;
      acc[lane] += (v * v) * ik;
      m[lane] = mp + gk * v;
    }
  }
  for (int lane = 0; lane < 4; ++lane) out4[lane] = acc[lane];
}

}  // namespace lcm::simd::scalar
