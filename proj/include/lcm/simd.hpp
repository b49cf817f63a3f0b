#pragma once

#include <cstddef>

// Runtime-dispatched inner kernels. Every kernel has a scalar reference
// implementation and, on x86-64, an AVX2 variant; the dispatched entry
// points pick the best supported backend once at startup. The panel kernels
// process four samples per call in channel-major layout (panel[k*4 + lane]),
// which is where the sample-parallel work of the loss and likelihood lives.
// Per-lane arithmetic matches the scalar reference operation for operation,
// so the backends agree to rounding error and equivalence is testable.

namespace lcm::simd {

enum class Backend { scalar, avx2 };

// Backend used by the dispatched entry points. Defaults to the best
// supported one; force_backend overrides it (tests, benchmarking).
[[nodiscard]] Backend active_backend();
void force_backend(Backend b);
[[nodiscard]] bool avx2_supported();
[[nodiscard]] const char* backend_name(Backend b);

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*weighted_ssq)(const double*, const double*, std::size_t);
  void (*panel_data_term)(const double*, const double*, const double*,
                          const double*, std::size_t, double*);
  void (*panel_kalman_quad)(const double*, const double*, const double*,
                            const double*, const double*, const double*,
                            std::size_t, double*);
};

// Kernel table of the active backend.
[[nodiscard]] const KernelTable& kernels();

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
// sum_k wgt[k] * x[k]^2
double weighted_ssq(const double* wgt, const double* x, std::size_t n);
// Four samples of the decomposed-loss data term:
//   out[lane] = sum_k d[k] v_k^2 + t' K t  with  t_k = w[k] v_k,
// where v are the panel columns in sorted-coordinate order and rho[k] is the
// adjacent-coordinate decay exp(-(a_{k+1} - a_k)). Single forward pass using
//   t' K t = sum_k t_k (t_k + 2 L_k),  L_{k+1} = rho_k (L_k + t_k).
void panel_data_term(const double* panel, const double* rho, const double* w,
                     const double* d, std::size_t c, double* out4);
// Four samples of the Kalman innovation quadratic sum_k v_{k}^2 / S_k for the
// collapsed state-space form; phi/gain/inv_s are the sample-independent
// coefficient arrays (phi[0] = 0).
void panel_kalman_quad(const double* panel, const double* mu, const double* w,
                       const double* phi, const double* gain,
                       const double* inv_s, std::size_t c, double* out4);
}  // namespace scalar

#if defined(LCM_HAVE_AVX2)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
double weighted_ssq(const double* wgt, const double* x, std::size_t n);
void panel_data_term(const double* panel, const double* rho, const double* w,
                     const double* d, std::size_t c, double* out4);
void panel_kalman_quad(const double* panel, const double* mu, const double* w,
                       const double* phi, const double* gain,
                       const double* inv_s, std::size_t c, double* out4);
}  // namespace avx2
#endif

// Dispatched entry points.
double dot(const double* x, const double* y, std::size_t n);
double weighted_ssq(const double* wgt, const double* x, std::size_t n);
void panel_data_term(const double* panel, const double* rho, const double* w,
                     const double* d, std::size_t c, double* out4);
void panel_kalman_quad(const double* panel, const double* mu, const double* w,
                       const double* phi, const double* gain,
                       const double* inv_s, std::size_t c, double* out4);

}  // namespace lcm::simd
