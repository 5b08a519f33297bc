#include "orbitlab/kernels.hpp"

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace orbitlab::kernels {

#if defined(__AVX512F__)

void accumulate_avx512(const GeometricBatch& b, int columns, double* acc_re, double* acc_im) {
  const int n = b.samples;
  int m = 0;
  for (; m + 8 <= n; m += 8) {
    __m512d zr = _mm512_loadu_pd(b.z_re + m);
    __m512d zi = _mm512_loadu_pd(b.z_im + m);
    const __m512d sr = _mm512_loadu_pd(b.step_re + m);
    const __m512d si = _mm512_loadu_pd(b.step_im + m);
    double* ar = acc_re + m;
    double* ai = acc_im + m;
    for (int c = 0; c < columns; ++c) {
      double* pr = ar + static_cast<long>(c) * n;
      double* pi = ai + static_cast<long>(c) * n;
      _mm512_storeu_pd(pr, _mm512_add_pd(_mm512_loadu_pd(pr), zr));
      _mm512_storeu_pd(pi, _mm512_add_pd(_mm512_loadu_pd(pi), zi));
      // Same rounding sequence as the scalar loop: products first, then
      // one add/sub, no fused multiply-add.
      const __m512d t = _mm512_sub_pd(_mm512_mul_pd(zr, sr), _mm512_mul_pd(zi, si));
      zi = _mm512_add_pd(_mm512_mul_pd(zr, si), _mm512_mul_pd(zi, sr));
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

void accumulate_avx512(const GeometricBatch& b, int columns, double* acc_re, double* acc_im) {
  accumulate_scalar(b, columns, acc_re, acc_im);
}

#endif

}  // namespace orbitlab::kernels
