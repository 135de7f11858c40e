#pragma once

#include <complex>
#include <memory>

#include "spikeseq/array.hpp"
#include "spikeseq/fft.hpp"

namespace spikeseq {

enum class SignalKind { current, potential, spike };

/* Time-major batch: values shaped (steps, batch, channels). */
template <class T>
struct SequenceBatch {
  Array<T> values;
  SignalKind kind = SignalKind::current;

  SequenceBatch() = default;
  SequenceBatch(Array<T> v, SignalKind k) : values(std::move(v)), kind(k) {
    if (values.shape.size() != 3)
      throw std::invalid_argument("SequenceBatch: values must be (steps, batch, channels)");
  }
  int64_t steps() const { return values.dim(0); }
  int64_t batch() const { return values.dim(1); }
  int64_t channels() const { return values.dim(2); }
};

using RealSeq = SequenceBatch<double>;
using ComplexSeq = SequenceBatch<std::complex<double>>;

/* Per-channel kernel rows, shaped (channels, steps); channels may be 1 to
 * share one kernel across all lanes. Row t holds the weight applied to an
 * input t steps in the past. */
template <class T>
struct DecayKernel {
  Array<T> rows;  // (channels, steps)

  DecayKernel() = default;
  explicit DecayKernel(Array<T> r) : rows(std::move(r)) {
    if (rows.shape.size() != 2)
      throw std::invalid_argument("DecayKernel: rows must be (channels, steps)");
  }
  int64_t channels() const { return rows.dim(0); }
  int64_t steps() const { return rows.dim(1); }
};

/* Geometric decay rows (1, beta, beta^2, ...), built by running product so
 * each entry is one multiply away from its neighbor. betas: (channels) with
 * each beta in (0, 1). */
DecayKernel<double> build_lif_kernel(const RealArray& betas, int64_t steps);

/* Damped-oscillator rows (delta*a^0, ..., delta*a^(T-1)) with
 * a = exp(delta*(-1/tau + i*theta)); |a| < 1 since tau > delta > 0.
 * delta/tau/theta: (channels), broadcastable scalars allowed (size 1). */
DecayKernel<std::complex<double>> build_prf_kernel(const RealArray& delta,
                                                   const RealArray& tau,
                                                   const RealArray& theta,
                                                   int64_t steps);

/* y[t] = sum_{k<=t} kernel[t-k] * x[k], per lane, FFT route: both sides are
 * zero-padded to pad_length(steps) and multiplied in the spectrum. Output
 * kind is `potential`. */
RealSeq causal_convolve(const RealSeq& input, const DecayKernel<double>& kernel);
ComplexSeq causal_convolve(const RealSeq& input, const DecayKernel<std::complex<double>>& kernel);

/* Direct O(T^2) evaluation of the same sum; the reference the FFT route is
 * checked against. */
RealSeq naive_convolve(const RealSeq& input, const DecayKernel<double>& kernel);
ComplexSeq naive_convolve(const RealSeq& input, const DecayKernel<std::complex<double>>& kernel);

/* --- lane-level building blocks (shared with the training module) --- */

/* (steps, lanes) -> (lanes, steps) and back, cache-blocked. When both
 * dimensions are multiples of 8 the blocks move through 8x8 vector
 * shuffles; a 64-byte-aligned destination additionally gets streaming
 * stores that bypass the cache (the destination is written once and read
 * much later, so keeping it out of cache is a win). */
void transpose_to_lanes(const double* src, int64_t steps, int64_t lanes, double* dst);
void transpose_to_steps(const double* src, int64_t lanes, int64_t steps, double* dst);

/* 64-byte-aligned doubles from a process-wide free list. Blocks are
 * retained for reuse when the last handle drops, so steady-state callers
 * (training steps, timing loops) stop paying page-fault costs after the
 * first pass. Contents are uninitialized. */
std::shared_ptr<double[]> acquire_lane_scratch(int64_t count);

/* Spectra of kernel rows at the padded length, pre-divided by the padded
 * length so that an *unscaled* inverse transform lands on the convolution
 * directly (one multiply pass instead of multiply + rescale). */
struct KernelSpectrum {
  int64_t channels = 0;
  int64_t steps = 0;
  int64_t pad = 0;
  int64_t bins = 0;      // pad/2 + 1
  ComplexArray spectra;  // (channels, bins), scaled by 1/pad
  fft::PlanEffort effort = fft::PlanEffort::deterministic;
};
KernelSpectrum kernel_spectrum(const double* rows, int64_t channels, int64_t steps,
                               fft::PlanEffort effort = fft::PlanEffort::deterministic);

/* out[l] = first `steps` samples of ifft(fft(lane) * spec[channel(l)]),
 * channel(l) = l % channels; conjugate=true applies conj(spec) instead,
 * which turns the convolution into a correlation (the adjoint). Buffers are
 * (lanes, steps), lane-contiguous. */
void convolve_lanes(const double* lanes_in, int64_t lanes, int64_t steps,
                    const KernelSpectrum& spec, bool conjugate, double* lanes_out);

/* Per-channel correlation of two lane sets reduced over the batch:
 * out[n][m] = sum_b sum_t a[(b,n)][t] * x[(b,n)][t-m]. Used for kernel
 * gradients. Accumulation order over b is fixed (ascending). */
void correlate_reduce_lanes(const double* a, const double* x, int64_t batch,
                            int64_t channels, int64_t steps, double* out_rows);

}  // namespace spikeseq
