#include "orbitlab/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#endif

namespace orbitlab::kernels {

#if defined(__AVX2__) && defined(__FMA__)

void accumulate_avx2(const GeometricBatch& b, int columns, double* acc_re, double* acc_im) {
  const int n = b.samples;
  int m = 0;
  for (; m + 4 <= n; m += 4) {
    __m256d zr = _mm256_loadu_pd(b.z_re + m);
    __m256d zi = _mm256_loadu_pd(b.z_im + m);
    const __m256d sr = _mm256_loadu_pd(b.step_re + m);
    const __m256d si = _mm256_loadu_pd(b.step_im + m);
    double* ar = acc_re + m;
    double* ai = acc_im + m;
    for (int c = 0; c < columns; ++c) {
      double* pr = ar + static_cast<long>(c) * n;
      double* pi = ai + static_cast<long>(c) * n;
      _mm256_storeu_pd(pr, _mm256_add_pd(_mm256_loadu_pd(pr), zr));
      _mm256_storeu_pd(pi, _mm256_add_pd(_mm256_loadu_pd(pi), zi));
      // Same rounding sequence as the scalar loop: products first, then
      // one add/sub, no fused multiply-add.
      const __m256d t = _mm256_sub_pd(_mm256_mul_pd(zr, sr), _mm256_mul_pd(zi, si));
      zi = _mm256_add_pd(_mm256_mul_pd(zr, si), _mm256_mul_pd(zi, sr));
      zr = t;
    }
  }
  if (m < n) {
    GeometricBatch tail{b.z_re + m, b.z_im + m, b.step_re + m, b.step_im + m, n - m};
    // Tail samples keep the full leading dimension.
    for (int k = 0; k < tail.samples; ++k) {
      double zr = tail.z_re[k], zi = tail.z_im[k];
      const double sr = tail.step_re[k], si = tail.step_im[k];
      for (int c = 0; c < columns; ++c) {
        acc_re[static_cast<long>(c) * n + m + k] += zr;
        acc_im[static_cast<long>(c) * n + m + k] += zi;
        const double t = zr * sr - zi * si;
        zi = zr * si + zi * sr;
        zr = t;
      }
    }
  }
}

#else

void accumulate_avx2(const GeometricBatch& b, int columns, double* acc_re, double* acc_im) {
  accumulate_scalar(b, columns, acc_re, acc_im);
}

#endif

}  // namespace orbitlab::kernels
