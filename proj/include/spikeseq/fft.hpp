#pragma once

#include <complex>
#include <cstdint>

namespace spikeseq::fft {

/* Transform length used for linear convolution of two length-T sequences:
 * the next power of two >= 2T-1, so the circular wraparound lands in the
 * zero padding and radix-2 sizes keep plan choice trivial. */
int64_t pad_length(int64_t steps);

/* Plan quality. `deterministic` plans with FFTW_ESTIMATE: plan choice is a
 * pure function of the length, so results are identical from run to run.
 * `tuned` plans with FFTW_MEASURE: noticeably faster at large lengths, but
 * the chosen algorithm (and thus low-order rounding) may differ between
 * processes, so it is reserved for timing harnesses whose numeric outputs
 * are wall-clock times only. Plans are cached per (length, effort). */
enum class PlanEffort { deterministic, tuned };

/* All transforms are fp64. Buffers passed in must come from
 * aligned_alloc_real / aligned_alloc_complex (fftw alignment contract). */
void forward_r2c(int64_t p, double* in, std::complex<double>* out,
                 PlanEffort effort = PlanEffort::deterministic);
// scales by 1/p, clobbers in
void inverse_c2r(int64_t p, std::complex<double>* in, double* out,
                 PlanEffort effort = PlanEffort::deterministic);
// no 1/p scaling (for callers that fold the factor into a spectrum), clobbers in
void inverse_c2r_raw(int64_t p, std::complex<double>* in, double* out,
                     PlanEffort effort = PlanEffort::deterministic);
void forward_c2c(int64_t p, std::complex<double>* in, std::complex<double>* out,
                 PlanEffort effort = PlanEffort::deterministic);
// scales by 1/p
void inverse_c2c(int64_t p, std::complex<double>* in, std::complex<double>* out,
                 PlanEffort effort = PlanEffort::deterministic);

double* aligned_alloc_real(int64_t n);
std::complex<double>* aligned_alloc_complex(int64_t n);
void aligned_free(void* p);

template <class T>
struct AlignedBuf {
  T* p = nullptr;
  explicit AlignedBuf(int64_t n) {
    if constexpr (std::is_same_v<T, double>)
      p = aligned_alloc_real(n);
    else
      p = aligned_alloc_complex(n);
  }
  ~AlignedBuf() { aligned_free(p); }
  AlignedBuf(const AlignedBuf&) = delete;
  AlignedBuf& operator=(const AlignedBuf&) = delete;
  T& operator[](int64_t i) { return p[i]; }
};

}  // namespace spikeseq::fft
