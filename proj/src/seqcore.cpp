#include "spikeseq/seqcore.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <map>
#include <mutex>
#include <vector>

#include "spikeseq/cxloops.hpp"

#if defined(__x86_64__) && defined(__GNUC__)
#define SPIKESEQ_X86_DISPATCH 1
#include <immintrin.h>
#endif

namespace spikeseq {

namespace {

/* Grow-only aligned scratch, one per thread; lanes are processed serially
 * through these so peak memory stays O(pad) regardless of batch size. */
struct Scratch {
  double* real = nullptr;
  int64_t real_n = 0;
  std::complex<double>* cplx = nullptr;
  int64_t cplx_n = 0;
  std::complex<double>* cplx2 = nullptr;
  int64_t cplx2_n = 0;

  double* real_buf(int64_t n) {
    if (n > real_n) {
      fft::aligned_free(real);
      real = fft::aligned_alloc_real(n);
      real_n = n;
    }
    return real;
  }
  std::complex<double>* cplx_buf(int64_t n) {
    if (n > cplx_n) {
      fft::aligned_free(cplx);
      cplx = fft::aligned_alloc_complex(n);
      cplx_n = n;
    }
    return cplx;
  }
  std::complex<double>* cplx2_buf(int64_t n) {
    if (n > cplx2_n) {
      fft::aligned_free(cplx2);
      cplx2 = fft::aligned_alloc_complex(n);
      cplx2_n = n;
    }
    return cplx2;
  }
};

Scratch& scratch() {
  static thread_local Scratch s;
  return s;
}

void check_positive_steps(int64_t steps) {
  if (steps < 1) throw std::invalid_argument("kernel steps must be >= 1");
}

double broadcast_at(const RealArray& a, int64_t i) {
  return a.size() == 1 ? a[0] : a[i];
}

int64_t broadcast_channels(std::initializer_list<const RealArray*> arrays) {
  int64_t n = 1;
  for (const RealArray* a : arrays) {
    if (a->size() == 0) throw std::invalid_argument("empty parameter array");
    if (a->size() != 1) {
      if (n != 1 && n != a->size())
        throw std::invalid_argument("parameter arrays disagree on channel count");
      n = a->size();
    }
  }
  return n;
}

template <class T>
void check_conv_args(const RealSeq& input, const DecayKernel<T>& kernel) {
  if (kernel.steps() != input.steps())
    throw std::invalid_argument("kernel steps must match input steps");
  if (kernel.channels() != 1 && kernel.channels() != input.channels())
    throw std::invalid_argument("kernel channels must be 1 or match input channels");
}

}  // namespace

DecayKernel<double> build_lif_kernel(const RealArray& betas, int64_t steps) {
  check_positive_steps(steps);
  int64_t n = betas.size();
  if (n == 0) throw std::invalid_argument("build_lif_kernel: empty betas");
  for (int64_t i = 0; i < n; ++i)
    if (!(betas[i] > 0.0 && betas[i] < 1.0))
      throw std::invalid_argument("build_lif_kernel: beta must be in (0, 1)");
  RealArray rows({n, steps});
  for (int64_t c = 0; c < n; ++c) {
    double* row = rows.ptr() + c * steps;
    row[0] = 1.0;
    for (int64_t t = 1; t < steps; ++t) row[t] = row[t - 1] * betas[c];
  }
  return DecayKernel<double>(rows);
}

DecayKernel<std::complex<double>> build_prf_kernel(const RealArray& delta,
                                                   const RealArray& tau,
                                                   const RealArray& theta,
                                                   int64_t steps) {
  check_positive_steps(steps);
  int64_t n = broadcast_channels({&delta, &tau, &theta});
  ComplexArray rows({n, steps});
  for (int64_t c = 0; c < n; ++c) {
    double d = broadcast_at(delta, c);
    double tc = broadcast_at(tau, c);
    double th = broadcast_at(theta, c);
    if (!(d > 0.0 && tc > d))
      throw std::invalid_argument("build_prf_kernel: requires tau > delta > 0");
    std::complex<double> a = std::exp(std::complex<double>(-d / tc, d * th));
    std::complex<double>* row = rows.ptr() + c * steps;
    row[0] = d;
    for (int64_t t = 1; t < steps; ++t) row[t] = row[t - 1] * a;
  }
  return DecayKernel<std::complex<double>>(rows);
}

namespace {

constexpr int64_t kTile = 64;

#ifdef SPIKESEQ_X86_DISPATCH
/* 8x8 register-blocked transpose: unpack pairs, then two rounds of 128-bit
 * lane shuffles. Requires R and C multiples of 8. Streaming stores need
 * 64-byte-aligned columns (dst base aligned and R a multiple of 8); they
 * bypass the cache, which wins because the destination is written once and
 * read much later. Compiled for avx512f and selected at runtime, so plain
 * portable builds still get it on capable machines. */
__attribute__((target("avx512f"))) void transpose_rm_avx512(const double* src, int64_t R,
                                                            int64_t C, double* dst) {
  const bool stream = ((uintptr_t)dst % 64) == 0;
  for (int64_t c0 = 0; c0 < C; c0 += kTile) {
    const int64_t c1 = std::min(c0 + kTile, C);
    for (int64_t r0 = 0; r0 < R; r0 += kTile) {
      const int64_t r1 = std::min(r0 + kTile, R);
      for (int64_t c = c0; c + 8 <= c1; c += 8) {
        for (int64_t r = r0; r + 8 <= r1; r += 8) {
          __m512d rr[8];
          for (int i = 0; i < 8; ++i) rr[i] = _mm512_loadu_pd(src + (r + i) * C + c);
          __m512d u0 = _mm512_unpacklo_pd(rr[0], rr[1]), u1 = _mm512_unpackhi_pd(rr[0], rr[1]);
          __m512d u2 = _mm512_unpacklo_pd(rr[2], rr[3]), u3 = _mm512_unpackhi_pd(rr[2], rr[3]);
          __m512d u4 = _mm512_unpacklo_pd(rr[4], rr[5]), u5 = _mm512_unpackhi_pd(rr[4], rr[5]);
          __m512d u6 = _mm512_unpacklo_pd(rr[6], rr[7]), u7 = _mm512_unpackhi_pd(rr[6], rr[7]);
          __m512d s0 = _mm512_shuffle_f64x2(u0, u2, 0x88), s1 = _mm512_shuffle_f64x2(u0, u2, 0xdd);
          __m512d s2 = _mm512_shuffle_f64x2(u1, u3, 0x88), s3 = _mm512_shuffle_f64x2(u1, u3, 0xdd);
          __m512d s4 = _mm512_shuffle_f64x2(u4, u6, 0x88), s5 = _mm512_shuffle_f64x2(u4, u6, 0xdd);
          __m512d s6 = _mm512_shuffle_f64x2(u5, u7, 0x88), s7 = _mm512_shuffle_f64x2(u5, u7, 0xdd);
          __m512d o[8];
          o[0] = _mm512_shuffle_f64x2(s0, s4, 0x88);
          o[4] = _mm512_shuffle_f64x2(s0, s4, 0xdd);
          o[2] = _mm512_shuffle_f64x2(s1, s5, 0x88);
          o[6] = _mm512_shuffle_f64x2(s1, s5, 0xdd);
          o[1] = _mm512_shuffle_f64x2(s2, s6, 0x88);
          o[5] = _mm512_shuffle_f64x2(s2, s6, 0xdd);
          o[3] = _mm512_shuffle_f64x2(s3, s7, 0x88);
          o[7] = _mm512_shuffle_f64x2(s3, s7, 0xdd);
          if (stream)
            for (int j = 0; j < 8; ++j) _mm512_stream_pd(dst + (c + j) * R + r, o[j]);
          else
            for (int j = 0; j < 8; ++j) _mm512_storeu_pd(dst + (c + j) * R + r, o[j]);
        }
      }
    }
  }
  if (stream) _mm_sfence();
}
#endif

/* dst[c*R + r] = src[r*C + c] for a row-major (R, C) source. Serves both
 * lane-major <-> step-major directions; only the (R, C) naming flips. */
void transpose_rm(const double* src, int64_t R, int64_t C, double* dst) {
#ifdef SPIKESEQ_X86_DISPATCH
  static const bool have_avx512 = __builtin_cpu_supports("avx512f");
  if (have_avx512 && R % 8 == 0 && C % 8 == 0) {
    transpose_rm_avx512(src, R, C, dst);
    return;
  }
#endif
  for (int64_t c0 = 0; c0 < C; c0 += kTile) {
    const int64_t c1 = std::min(c0 + kTile, C);
    for (int64_t r0 = 0; r0 < R; r0 += kTile) {
      const int64_t r1 = std::min(r0 + kTile, R);
      for (int64_t c = c0; c < c1; ++c)
        for (int64_t r = r0; r < r1; ++r) dst[c * R + r] = src[r * C + c];
    }
  }
}

}  // namespace

void transpose_to_lanes(const double* src, int64_t steps, int64_t lanes, double* dst) {
  transpose_rm(src, steps, lanes, dst);
}

void transpose_to_steps(const double* src, int64_t lanes, int64_t steps, double* dst) {
  transpose_rm(src, lanes, steps, dst);
}

namespace {

/* Free list of 64-byte-aligned blocks keyed by exact element count; the
 * handful of distinct sizes a training loop touches get allocated (and
 * page-faulted) once, then recycle forever. */
struct ScratchPool {
  std::mutex mu;
  std::map<int64_t, std::vector<double*>> free_blocks;
};

ScratchPool& scratch_pool() {
  static ScratchPool pool;
  return pool;
}

}  // namespace

std::shared_ptr<double[]> acquire_lane_scratch(int64_t count) {
  if (count < 1) throw std::invalid_argument("acquire_lane_scratch: count must be >= 1");
  ScratchPool& pool = scratch_pool();
  double* p = nullptr;
  {
    std::lock_guard<std::mutex> lock(pool.mu);
    auto it = pool.free_blocks.find(count);
    if (it != pool.free_blocks.end() && !it->second.empty()) {
      p = it->second.back();
      it->second.pop_back();
    }
  }
  if (!p) {
    const size_t bytes = ((size_t)count * sizeof(double) + 63) & ~(size_t)63;
    p = static_cast<double*>(std::aligned_alloc(64, bytes));
    if (!p) throw std::bad_alloc();
  }
  return std::shared_ptr<double[]>(p, [count](double* q) {
    ScratchPool& pl = scratch_pool();
    std::lock_guard<std::mutex> lock(pl.mu);
    pl.free_blocks[count].push_back(q);
  });
}

KernelSpectrum kernel_spectrum(const double* rows, int64_t channels, int64_t steps,
                               fft::PlanEffort effort) {
  KernelSpectrum spec;
  spec.channels = channels;
  spec.steps = steps;
  spec.pad = fft::pad_length(steps);
  spec.bins = spec.pad / 2 + 1;
  spec.spectra = ComplexArray({channels, spec.bins});
  spec.effort = effort;
  double* in = scratch().real_buf(spec.pad);
  const double inv_pad = 1.0 / (double)spec.pad;
  for (int64_t c = 0; c < channels; ++c) {
    std::memcpy(in, rows + c * steps, (size_t)steps * sizeof(double));
    std::memset(in + steps, 0, (size_t)(spec.pad - steps) * sizeof(double));
    std::complex<double>* out = spec.spectra.ptr() + c * spec.bins;
    fft::forward_r2c(spec.pad, in, out, effort);
    for (int64_t i = 0; i < spec.bins; ++i) out[i] *= inv_pad;
  }
  return spec;
}

void convolve_lanes(const double* lanes_in, int64_t lanes, int64_t steps,
                    const KernelSpectrum& spec, bool conjugate, double* lanes_out) {
  const int64_t p = spec.pad;
  const int64_t bins = spec.bins;
  double* in = scratch().real_buf(p);
  std::complex<double>* freq = scratch().cplx_buf(bins);
  for (int64_t l = 0; l < lanes; ++l) {
    std::memcpy(in, lanes_in + l * steps, (size_t)steps * sizeof(double));
    std::memset(in + steps, 0, (size_t)(p - steps) * sizeof(double));
    fft::forward_r2c(p, in, freq, spec.effort);
    const std::complex<double>* k = spec.spectra.ptr() + (l % spec.channels) * bins;
    if (conjugate)
      mul_spectrum_conj(freq, k, bins);
    else
      mul_spectrum(freq, k, bins);
    /* spectra carry the 1/pad factor, so the raw inverse is already scaled */
    fft::inverse_c2r_raw(p, freq, in, spec.effort);
    std::memcpy(lanes_out + l * steps, in, (size_t)steps * sizeof(double));
  }
}

void correlate_reduce_lanes(const double* a, const double* x, int64_t batch,
                            int64_t channels, int64_t steps, double* out_rows) {
  const int64_t p = fft::pad_length(steps);
  const int64_t bins = p / 2 + 1;
  double* in = scratch().real_buf(p);
  std::complex<double>* fa = scratch().cplx_buf(bins);
  std::complex<double>* fx = scratch().cplx2_buf(bins);
  std::fill(out_rows, out_rows + channels * steps, 0.0);
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t n = 0; n < channels; ++n) {
      const int64_t l = b * channels + n;
      std::memcpy(in, a + l * steps, (size_t)steps * sizeof(double));
      std::memset(in + steps, 0, (size_t)(p - steps) * sizeof(double));
      fft::forward_r2c(p, in, fa);
      std::memcpy(in, x + l * steps, (size_t)steps * sizeof(double));
      std::memset(in + steps, 0, (size_t)(p - steps) * sizeof(double));
      fft::forward_r2c(p, in, fx);
      mul_spectrum_conj(fa, fx, bins);
      fft::inverse_c2r(p, fa, in);
      double* dst = out_rows + n * steps;
      for (int64_t m = 0; m < steps; ++m) dst[m] += in[m];
    }
  }
}

RealSeq causal_convolve(const RealSeq& input, const DecayKernel<double>& kernel) {
  check_conv_args(input, kernel);
  const int64_t t = input.steps(), lanes = input.batch() * input.channels();
  KernelSpectrum spec = kernel_spectrum(kernel.rows.ptr(), kernel.channels(), t);
  /* lane l carries channel l % N, so spec row l % spec.channels serves both
   * the shared (channels == 1) and the per-channel case */
  RealArray lanebuf({lanes, t});
  RealArray laneout({lanes, t});
  transpose_to_lanes(input.values.ptr(), t, lanes, lanebuf.ptr());
  convolve_lanes(lanebuf.ptr(), lanes, t, spec, false, laneout.ptr());
  RealArray out({t, input.batch(), input.channels()});
  transpose_to_steps(laneout.ptr(), lanes, t, out.ptr());
  return RealSeq(out, SignalKind::potential);
}

ComplexSeq causal_convolve(const RealSeq& input,
                           const DecayKernel<std::complex<double>>& kernel) {
  check_conv_args(input, kernel);
  const int64_t t = input.steps(), b = input.batch(), n = input.channels();
  const int64_t lanes = b * n;
  const int64_t p = fft::pad_length(t);

  ComplexArray kspec({kernel.channels(), p});
  {
    std::complex<double>* in = scratch().cplx_buf(p);
    for (int64_t c = 0; c < kernel.channels(); ++c) {
      std::copy(kernel.rows.ptr() + c * t, kernel.rows.ptr() + (c + 1) * t, in);
      std::fill(in + t, in + p, std::complex<double>(0.0, 0.0));
      fft::forward_c2c(p, in, kspec.ptr() + c * p);
    }
  }

  RealArray lanebuf({lanes, t});
  transpose_to_lanes(input.values.ptr(), t, lanes, lanebuf.ptr());
  ComplexArray laneout({lanes, t});
  std::complex<double>* in = scratch().cplx_buf(p);
  std::complex<double>* freq = scratch().cplx2_buf(p);
  for (int64_t l = 0; l < lanes; ++l) {
    const double* src = lanebuf.ptr() + l * t;
    for (int64_t i = 0; i < t; ++i) in[i] = src[i];
    std::fill(in + t, in + p, std::complex<double>(0.0, 0.0));
    fft::forward_c2c(p, in, freq);
    const std::complex<double>* k = kspec.ptr() + (l % kernel.channels()) * p;
    for (int64_t i = 0; i < p; ++i) freq[i] *= k[i];
    fft::inverse_c2c(p, freq, in);
    std::copy(in, in + t, laneout.ptr() + l * t);
  }

  ComplexArray out({t, b, n});
  /* complex transpose, same blocking as the real one */
  constexpr int64_t kTile = 64;
  const std::complex<double>* src = laneout.ptr();
  std::complex<double>* dst = out.ptr();
  for (int64_t l0 = 0; l0 < lanes; l0 += kTile) {
    int64_t l1 = std::min(l0 + kTile, lanes);
    for (int64_t t0 = 0; t0 < t; t0 += kTile) {
      int64_t t1 = std::min(t0 + kTile, t);
      for (int64_t l = l0; l < l1; ++l)
        for (int64_t tt = t0; tt < t1; ++tt) dst[tt * lanes + l] = src[l * t + tt];
    }
  }
  return ComplexSeq(out, SignalKind::potential);
}

RealSeq naive_convolve(const RealSeq& input, const DecayKernel<double>& kernel) {
  check_conv_args(input, kernel);
  const int64_t t = input.steps(), b = input.batch(), n = input.channels();
  RealArray out({t, b, n}, 0.0);
  const double* x = input.values.ptr();
  for (int64_t bi = 0; bi < b; ++bi) {
    for (int64_t ni = 0; ni < n; ++ni) {
      const double* row =
          kernel.rows.ptr() + (kernel.channels() == 1 ? 0 : ni) * t;
      for (int64_t ti = 0; ti < t; ++ti) {
        double acc = 0.0;
        for (int64_t k = 0; k <= ti; ++k)
          acc += row[ti - k] * x[(k * b + bi) * n + ni];
        out[(ti * b + bi) * n + ni] = acc;
      }
    }
  }
  return RealSeq(out, SignalKind::potential);
}

ComplexSeq naive_convolve(const RealSeq& input,
                          const DecayKernel<std::complex<double>>& kernel) {
  check_conv_args(input, kernel);
  const int64_t t = input.steps(), b = input.batch(), n = input.channels();
  ComplexArray out({t, b, n}, std::complex<double>(0.0, 0.0));
  const double* x = input.values.ptr();
  for (int64_t bi = 0; bi < b; ++bi) {
    for (int64_t ni = 0; ni < n; ++ni) {
      const std::complex<double>* row =
          kernel.rows.ptr() + (kernel.channels() == 1 ? 0 : ni) * t;
      for (int64_t ti = 0; ti < t; ++ti) {
        std::complex<double> acc(0.0, 0.0);
        for (int64_t k = 0; k <= ti; ++k)
          acc += row[ti - k] * x[(k * b + bi) * n + ni];
        out[(ti * b + bi) * n + ni] = acc;
      }
    }
  }
  return ComplexSeq(out, SignalKind::potential);
}

}  // namespace spikeseq
