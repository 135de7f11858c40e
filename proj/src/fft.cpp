#include "spikeseq/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace spikeseq::fft {

int64_t pad_length(int64_t steps) {
  if (steps <= 0) throw std::invalid_argument("pad_length: steps must be positive");
  int64_t need = 2 * steps - 1;
  int64_t p = 1;
  while (p < need) p <<= 1;
  return p;
}

namespace {

struct PlanSet {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  fftw_plan c2c_fwd = nullptr;
  fftw_plan c2c_bwd = nullptr;
};

std::mutex plan_mu;
std::map<std::pair<int64_t, int>, PlanSet>& plan_cache() {
  static std::map<std::pair<int64_t, int>, PlanSet> cache;
  return cache;
}

PlanSet& plans_for(int64_t p, PlanEffort effort) {
  /* Per-lane pipelines hit one (length, effort) pair thousands of times in
   * a row; memoize the last hit so the map lookup drops out of hot loops.
   * Cache entries are never erased, so the memoized reference stays valid. */
  static thread_local int64_t memo_p = -1;
  static thread_local int memo_e = -1;
  static thread_local PlanSet* memo = nullptr;
  if (p == memo_p && (int)effort == memo_e) return *memo;

  std::lock_guard<std::mutex> lock(plan_mu);
  auto& cache = plan_cache();
  const std::pair<int64_t, int> key{p, (int)effort};
  auto it = cache.find(key);
  if (it == cache.end()) {

    /* Plans are created once on maximally aligned dummies and reused via the
     * new-array execute calls; all caller buffers share that alignment. */
    double* dr = fftw_alloc_real((size_t)p);
    fftw_complex* dc = fftw_alloc_complex((size_t)p);
    fftw_complex* dc2 = fftw_alloc_complex((size_t)p);
    const unsigned flags = effort == PlanEffort::tuned ? FFTW_MEASURE : FFTW_ESTIMATE;
    PlanSet ps;
    ps.r2c = fftw_plan_dft_r2c_1d((int)p, dr, dc, flags);
    ps.c2r = fftw_plan_dft_c2r_1d((int)p, dc, dr, flags);
    ps.c2c_fwd = fftw_plan_dft_1d((int)p, dc, dc2, FFTW_FORWARD, flags);
    ps.c2c_bwd = fftw_plan_dft_1d((int)p, dc, dc2, FFTW_BACKWARD, flags);
    fftw_free(dr);
    fftw_free(dc);
    fftw_free(dc2);
    it = cache.emplace(key, ps).first;
  }
  memo_p = p;
  memo_e = (int)effort;
  memo = &it->second;
  return it->second;
}

inline fftw_complex* fc(std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(p);
}

}  // namespace

void forward_r2c(int64_t p, double* in, std::complex<double>* out, PlanEffort effort) {
  fftw_execute_dft_r2c(plans_for(p, effort).r2c, in, fc(out));
}

void inverse_c2r(int64_t p, std::complex<double>* in, double* out, PlanEffort effort) {
  fftw_execute_dft_c2r(plans_for(p, effort).c2r, fc(in), out);
  const double s = 1.0 / (double)p;
  for (int64_t i = 0; i < p; ++i) out[i] *= s;
}

void inverse_c2r_raw(int64_t p, std::complex<double>* in, double* out, PlanEffort effort) {
  fftw_execute_dft_c2r(plans_for(p, effort).c2r, fc(in), out);
}

void forward_c2c(int64_t p, std::complex<double>* in, std::complex<double>* out,
                 PlanEffort effort) {
  fftw_execute_dft(plans_for(p, effort).c2c_fwd, fc(in), fc(out));
}

void inverse_c2c(int64_t p, std::complex<double>* in, std::complex<double>* out,
                 PlanEffort effort) {
  fftw_execute_dft(plans_for(p, effort).c2c_bwd, fc(in), fc(out));
  const double s = 1.0 / (double)p;
  for (int64_t i = 0; i < p; ++i) out[i] *= s;
}

double* aligned_alloc_real(int64_t n) { return fftw_alloc_real((size_t)n); }

std::complex<double>* aligned_alloc_complex(int64_t n) {
  return reinterpret_cast<std::complex<double>*>(fftw_alloc_complex((size_t)n));
}

void aligned_free(void* p) { fftw_free(p); }

}  // namespace spikeseq::fft
