#pragma once

#include <complex>
#include <cstdint>

namespace spikeseq {

/* Elementwise spectrum products written on separated re/im doubles. A loop
 * over std::complex products compiles to a per-element libgcc call (NaN
 * recovery semantics), which blocks vectorization and dominates convolution
 * cost; spelled out like this the loop vectorizes cleanly. Convolution
 * inputs are finite by construction, so the recovery path buys nothing. */

/* f[i] *= k[i] */
inline void mul_spectrum(std::complex<double>* f, const std::complex<double>* k, int64_t bins) {
  const double* kk = reinterpret_cast<const double*>(k);
  double* ff = reinterpret_cast<double*>(f);
  for (int64_t i = 0; i < bins; ++i) {
    const double fr = ff[2 * i], fi = ff[2 * i + 1];
    const double kr = kk[2 * i], ki = kk[2 * i + 1];
    ff[2 * i] = fr * kr - fi * ki;
    ff[2 * i + 1] = fr * ki + fi * kr;
  }
}

/* f[i] *= conj(k[i]) */
inline void mul_spectrum_conj(std::complex<double>* f, const std::complex<double>* k,
                              int64_t bins) {
  const double* kk = reinterpret_cast<const double*>(k);
  double* ff = reinterpret_cast<double*>(f);
  for (int64_t i = 0; i < bins; ++i) {
    const double fr = ff[2 * i], fi = ff[2 * i + 1];
    const double kr = kk[2 * i], ki = kk[2 * i + 1];
    ff[2 * i] = fr * kr + fi * ki;
    ff[2 * i + 1] = fi * kr - fr * ki;
  }
}

}  // namespace spikeseq
