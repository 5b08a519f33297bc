#pragma once

// Inner loops of the circle-model accumulator.
//
// For every sample m and column c the accumulator performs
//     acc[c][m] += z[m];  z[m] *= step[m]
// i.e. it adds the geometric sequence z0 * step^c to column c. This is the
// only O(nodes * samples * columns) loop in operator assembly; it has a
// scalar reference and SIMD variants selected at runtime.

#include <string>

namespace orbitlab::kernels {

enum class Isa { Scalar, Avx2, Avx512 };

struct GeometricBatch {
  const double* z_re;
  const double* z_im;
  const double* step_re;
  const double* step_im;
  int samples;  // number of circle samples
};

// acc_re/acc_im are column-major blocks of `columns * samples` doubles with
// leading dimension `samples`.
using AccumulateFn = void (*)(const GeometricBatch& batch, int columns, double* acc_re,
                              double* acc_im);

void accumulate_scalar(const GeometricBatch& batch, int columns, double* acc_re, double* acc_im);
void accumulate_avx2(const GeometricBatch& batch, int columns, double* acc_re, double* acc_im);
void accumulate_avx512(const GeometricBatch& batch, int columns, double* acc_re, double* acc_im);

bool isa_supported(Isa isa);
Isa best_isa();
// Active variant. Defaults to best_isa(); the ORBITLAB_ISA environment
// variable (scalar|avx2|avx512) or set_active_isa() override it.
Isa active_isa();
void set_active_isa(Isa isa);
AccumulateFn accumulate_for(Isa isa);
std::string isa_name(Isa isa);

}  // namespace orbitlab::kernels
