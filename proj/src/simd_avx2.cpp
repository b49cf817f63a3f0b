#include "lcm/simd.hpp"

#if defined(LCM_HAVE_AVX2)

#include <immintrin.h>

// Per-lane operation order mirrors the scalar backend exactly (and FMA
// intrinsics are deliberately avoided) so the two backends differ only by
// reduction order where a reduction exists at all.

namespace lcm::simd::avx2 {
namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  const __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d yv = _mm256_loadu_pd(y + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(xv, yv));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

double weighted_ssq(const double* wgt, const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wv = _mm256_loadu_pd(wgt + i);
    const __m256d xv = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_mul_pd(wv, xv), xv));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) sum += wgt[i] * x[i] * x[i];
  return sum;
}

void panel_data_term(const double* panel, const double* rho, const double* w,
                     const double* d, std::size_t c, double* out4) {
  __m256d acc = _mm256_setzero_pd();
  __m256d fwd = _mm256_setzero_pd();
  const __m256d two = _mm256_set1_pd(2.0);
  for (std::size_t k = 0; k < c; ++k) {
    const __m256d v = _mm256_loadu_pd(panel + 4 * k);
    const __m256d t = _mm256_mul_pd(_mm256_set1_pd(w[k]), v);
    const __m256d dv2 = _mm256_mul_pd(_mm256_set1_pd(d[k]), _mm256_mul_pd(v, v));
    const __m256d quad =
        _mm256_mul_pd(t, _mm256_add_pd(t, _mm256_mul_pd(two, fwd)));
    acc = _mm256_add_pd(acc, _mm256_add_pd(dv2, quad));
    if (k + 1 < c) {
      fwd = _mm256_mul_pd(_mm256_set1_pd(rho[k]), _mm256_add_pd(fwd, t));
    }
  }
  _mm256_storeu_pd(out4, acc);
}

void panel_kalman_quad(const double* panel, const double* mu, const double* w,
                       const double* phi, const double* gain,
                       const double* inv_s, std::size_t c, double* out4) {
  __m256d acc = _mm256_setzero_pd();
  __m256d m = _mm256_setzero_pd();
  for (std::size_t k = 0; k < c; ++k) {
    const __m256d x = _mm256_loadu_pd(panel + 4 * k);
    const __m256d mp = _mm256_mul_pd(_mm256_set1_pd(phi[k]), m);
    const __m256d v =
        _mm256_sub_pd(_mm256_sub_pd(x, _mm256_set1_pd(mu[k])),
                      _mm256_mul_pd(_mm256_set1_pd(w[k]), mp));
    acc = _mm256_add_pd(acc,
                        _mm256_mul_pd(_mm256_mul_pd(v, v),
                                      _mm256_set1_pd(inv_s[k])));
    m = _mm256_add_pd(mp, _mm256_mul_pd(_mm256_set1_pd(gain[k]), v));
  }
  _mm256_storeu_pd(out4, acc);
}

}  // namespace lcm::simd::avx2

#endif  // LCM_HAVE_AVX2
