#include "lcm/simd.hpp"

#include <stdexcept>

namespace lcm::simd {
namespace {

constexpr KernelTable kScalarTable{
    &scalar::dot,
    &scalar::weighted_ssq,
    &scalar::panel_data_term,
    &scalar::panel_kalman_quad,
};

#if defined(LCM_HAVE_AVX2)
constexpr KernelTable kAvx2Table{
    &avx2::dot,
    &avx2::weighted_ssq,
    &avx2::panel_data_term,
    &avx2::panel_kalman_quad,
};
#endif

Backend detect_backend() {
#if defined(LCM_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2")) return Backend::avx2;
#endif
  return Backend::scalar;
}

Backend& backend_state() {
  static Backend b = detect_backend();
  return b;
}

}  // namespace

bool avx2_supported() {
#if defined(LCM_HAVE_AVX2)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend active_backend() { return backend_state(); }

void force_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_supported()) {
    throw std::invalid_argument("AVX2 backend not available on this host");
  }
  backend_state() = b;
}

const char* backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

const KernelTable& kernels() {
#if defined(LCM_HAVE_AVX2)
  if (backend_state() == Backend::avx2) return kAvx2Table;
#endif
  return kScalarTable;
}

double dot(const double* x, const double* y, std::size_t n) {
  return kernels().dot(x, y, n);
}

double weighted_ssq(const double* wgt, const double* x, std::size_t n) {
  return kernels().weighted_ssq(wgt, x, n);
}

void panel_data_term(const double* panel, const double* rho, const double* w,
                     const double* d, std::size_t c, double* out4) {
  kernels().panel_data_term(panel, rho, w, d, c, out4);
}

void panel_kalman_quad(const double* panel, const double* mu, const double* w,
                       const double* phi, const double* gain,
                       const double* inv_s, std::size_t c, double* out4) {
  kernels().panel_kalman_quad(panel, mu, w, phi, gain, inv_s, c, out4);
}

}  // namespace lcm::simd
