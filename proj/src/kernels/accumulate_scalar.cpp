#include "orbitlab/kernels.hpp"

namespace orbitlab::kernels {

void accumulate_scalar(const GeometricBatch& b, int columns, double* acc_re, double* acc_im) {
  const int n = b.samples;
  for (int m = 0; m < n; ++m) {
    double zr = b.z_re[m], zi = b.z_im[m];
    const double sr = b.step_re[m], si = b.step_im[m];
    double* ar = acc_re + m;
    double* ai = acc_im + m;
    for (int c = 0; c < columns; ++c) {
      ar[c * n] += zr;
      ai[c * n] += zi;
      const double t = zr * sr - zi * si;
      zi = zr * si + zi * sr;
      zr = t;
    }
  }
}

}  // namespace orbitlab::kernels
