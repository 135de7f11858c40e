#include "spikeseq/traingrad.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <stdexcept>

#include "spikeseq/cxloops.hpp"
#include "spikeseq/seqcore.hpp"

namespace spikeseq::traingrad {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_seq(const Tensor& t, const char* op) {
  if (t.shape.size() != 3) {
    throw std::invalid_argument(std::string(op) + ": expected a (steps, batch, channels) tensor");
  }
}

}  // namespace

double surrogate_grad(double x, double width) {
  double s = kPi * width * x;
  return width / (1.0 + s * s);
}

double smoothed_step(double x, double width) {
  return 0.5 + std::atan(kPi * width * x) / kPi;
}

Var Tape::new_var(Tensor value) {
  vals_.push_back(std::move(value));
  grads_.emplace_back();
  is_leaf_.push_back(false);
  return Var{(int32_t)(vals_.size() - 1)};
}

void Tape::push_node(Var out, std::function<void(Tape&)> bwd) {
  nodes_.push_back(Node{out.id, std::move(bwd)});
}

Var Tape::leaf(Tensor value, bool needs_grad) {
  Var v = new_var(std::move(value));
  is_leaf_.back() = needs_grad;
  return v;
}

bool Tape::has_grad(Var v) const { return grads_.at((size_t)v.id).data != nullptr; }

Tensor& Tape::grad_slot(Var v) {
  Tensor& g = grads_.at((size_t)v.id);
  if (!g.data) g = Tensor(vals_[(size_t)v.id].shape, 0.0);
  return g;
}

void Tape::accum(Var v, const double* g, int64_t n) {
  Tensor& slot = grad_slot(v);
  require(slot.size() == n, "accum: gradient size mismatch");
  double* d = slot.ptr();
  for (int64_t i = 0; i < n; ++i) d[i] += g[i];
}

void Tape::accum(Var v, Tensor&& g) {
  Tensor& slot = grads_.at((size_t)v.id);
  require(g.shape == vals_[(size_t)v.id].shape, "accum: gradient shape mismatch");
  if (!slot.data) {
    slot = std::move(g);
    return;
  }
  double* d = slot.ptr();
  const double* s = g.ptr();
  const int64_t n = g.size();
  for (int64_t i = 0; i < n; ++i) d[i] += s[i];
}

Tensor Tape::grad(Var leaf_var) const {
  const Tensor& g = grads_.at((size_t)leaf_var.id);
  if (g.data) return g;
  return Tensor(vals_[(size_t)leaf_var.id].shape, 0.0);
}

double Tape::scalar(Var v) const {
  const Tensor& t = value(v);
  require(t.size() == 1, "scalar: variable is not a scalar");
  return t[0];
}

void Tape::backward(Var loss) {
  require(!ran_backward_, "backward: tape already consumed");
  ran_backward_ = true;
  const Tensor& lv = value(loss);
  require(lv.size() == 1, "backward: loss must be a scalar");
  grad_slot(loss)[0] = 1.0;
  for (size_t i = nodes_.size(); i-- > 0;) {
    Node& node = nodes_[i];
    size_t out = (size_t)node.out;
    if (grads_[out].data && node.backward) node.backward(*this);
    node.backward = nullptr;  // drop captured buffers
    vals_[out].data.reset();  // shape survives for any remaining grad_slot sizing
    grads_[out].data.reset();
  }
}

/* ----- elementwise / structural ops ----- */

Var Tape::add(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require(av.same_shape(bv), "add: shape mismatch");
  Tensor out(av.shape);
  const int64_t n = av.size();
  for (int64_t i = 0; i < n; ++i) out[i] = av[i] + bv[i];
  Var o = new_var(std::move(out));
  push_node(o, [a, b, o, n](Tape& t) {
    const double* g = t.grad_slot(o).ptr();
    t.accum(a, g, n);
    t.accum(b, g, n);
  });
  return o;
}

Var Tape::sub(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require(av.same_shape(bv), "sub: shape mismatch");
  Tensor out(av.shape);
  const int64_t n = av.size();
  for (int64_t i = 0; i < n; ++i) out[i] = av[i] - bv[i];
  Var o = new_var(std::move(out));
  push_node(o, [a, b, o, n](Tape& t) {
    const double* g = t.grad_slot(o).ptr();
    t.accum(a, g, n);
    std::vector<double> neg((size_t)n);
    for (int64_t i = 0; i < n; ++i) neg[(size_t)i] = -g[i];
    t.accum(b, neg.data(), n);
  });
  return o;
}

Var Tape::scale(Var a, double k) {
  const Tensor& av = value(a);
  Tensor out(av.shape);
  const int64_t n = av.size();
  for (int64_t i = 0; i < n; ++i) out[i] = av[i] * k;
  Var o = new_var(std::move(out));
  push_node(o, [a, o, k, n](Tape& t) {
    const double* g = t.grad_slot(o).ptr();
    std::vector<double> gk((size_t)n);
    for (int64_t i = 0; i < n; ++i) gk[(size_t)i] = g[i] * k;
    t.accum(a, gk.data(), n);
  });
  return o;
}

Var Tape::add_scalar(Var a, double k) {
  const Tensor& av = value(a);
  Tensor out(av.shape);
  const int64_t n = av.size();
  for (int64_t i = 0; i < n; ++i) out[i] = av[i] + k;
  Var o = new_var(std::move(out));
  push_node(o, [a, o, n](Tape& t) { t.accum(a, t.grad_slot(o).ptr(), n); });
  return o;
}

Var Tape::mul(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require(av.same_shape(bv), "mul: shape mismatch");
  Tensor out(av.shape);
  const int64_t n = av.size();
  for (int64_t i = 0; i < n; ++i) out[i] = av[i] * bv[i];
  Tensor asv = av, bsv = bv;  // share data for backward (copy before vals_ may grow)
  Var o = new_var(std::move(out));
  push_node(o, [a, b, o, n, asv, bsv](Tape& t) {
    const double* g = t.grad_slot(o).ptr();
    std::vector<double> buf((size_t)n);
    for (int64_t i = 0; i < n; ++i) buf[(size_t)i] = g[i] * bsv[i];
    t.accum(a, buf.data(), n);
    for (int64_t i = 0; i < n; ++i) buf[(size_t)i] = g[i] * asv[i];
    t.accum(b, buf.data(), n);
  });
  return o;
}

Var Tape::slice_step(Var seq, int64_t t_index) {
  const Tensor& sv = value(seq);
  require_seq(sv, "slice_step");
  const int64_t steps = sv.dim(0), batch = sv.dim(1), channels = sv.dim(2);
  require(t_index >= 0 && t_index < steps, "slice_step: step out of range");
  const int64_t row = batch * channels;
  Tensor out({batch, channels});
  std::memcpy(out.ptr(), sv.ptr() + t_index * row, (size_t)row * sizeof(double));
  Var o = new_var(std::move(out));
  push_node(o, [seq, o, t_index, row](Tape& t) {
    const double* g = t.grad_slot(o).ptr();
    double* gs = t.grad_slot(seq).ptr() + t_index * row;
    for (int64_t i = 0; i < row; ++i) gs[i] += g[i];
  });
  return o;
}

Var Tape::stack_steps(const std::vector<Var>& steps) {
  require(!steps.empty(), "stack_steps: no steps");
  const Tensor& first = value(steps[0]);
  require(first.shape.size() == 2, "stack_steps: steps must be (batch, channels)");
  const int64_t batch = first.dim(0), channels = first.dim(1);
  const int64_t row = batch * channels;
  const int64_t n_steps = (int64_t)steps.size();
  Tensor out({n_steps, batch, channels});
  for (int64_t t = 0; t < n_steps; ++t) {
    const Tensor& sv = value(steps[(size_t)t]);
    require(sv.dim(0) == batch && sv.dim(1) == channels, "stack_steps: shape mismatch");
    std::memcpy(out.ptr() + t * row, sv.ptr(), (size_t)row * sizeof(double));
  }
  Var o = new_var(std::move(out));
  std::vector<Var> saved = steps;
  push_node(o, [saved, o, row](Tape& t) {
    const double* g = t.grad_slot(o).ptr();
    for (size_t i = 0; i < saved.size(); ++i) t.accum(saved[i], g + (int64_t)i * row, row);
  });
  return o;
}

Var Tape::concat_channels(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require_seq(av, "concat_channels");
  require_seq(bv, "concat_channels");
  require(av.dim(0) == bv.dim(0) && av.dim(1) == bv.dim(1),
          "concat_channels: steps/batch mismatch");
  const int64_t steps = av.dim(0), batch = av.dim(1);
  const int64_t na = av.dim(2), nb = bv.dim(2);
  Tensor out({steps, batch, na + nb});
  const int64_t rows = steps * batch;
  for (int64_t r = 0; r < rows; ++r) {
    std::memcpy(out.ptr() + r * (na + nb), av.ptr() + r * na, (size_t)na * sizeof(double));
    std::memcpy(out.ptr() + r * (na + nb) + na, bv.ptr() + r * nb, (size_t)nb * sizeof(double));
  }
  Var o = new_var(std::move(out));
  push_node(o, [a, b, o, rows, na, nb](Tape& t) {
    const double* g = t.grad_slot(o).ptr();
    std::vector<double> ga((size_t)(rows * na)), gb((size_t)(rows * nb));
    for (int64_t r = 0; r < rows; ++r) {
      std::memcpy(ga.data() + r * na, g + r * (na + nb), (size_t)na * sizeof(double));
      std::memcpy(gb.data() + r * nb, g + r * (na + nb) + na, (size_t)nb * sizeof(double));
    }
    t.accum(a, ga.data(), rows * na);
    t.accum(b, gb.data(), rows * nb);
  });
  return o;
}

Var Tape::reverse_time(Var a) {
  const Tensor& av = value(a);
  require_seq(av, "reverse_time");
  const int64_t steps = av.dim(0);
  const int64_t row = av.dim(1) * av.dim(2);
  Tensor out(av.shape);
  for (int64_t t = 0; t < steps; ++t)
    std::memcpy(out.ptr() + t * row, av.ptr() + (steps - 1 - t) * row,
                (size_t)row * sizeof(double));
  Var o = new_var(std::move(out));
  push_node(o, [a, o, steps, row](Tape& t) {
    const double* g = t.grad_slot(o).ptr();
    std::vector<double> gr((size_t)(steps * row));
    for (int64_t ti = 0; ti < steps; ++ti)
      std::memcpy(gr.data() + ti * row, g + (steps - 1 - ti) * row,
                  (size_t)row * sizeof(double));
    t.accum(a, gr.data(), steps * row);
  });
  return o;
}

Var Tape::mean_time(Var a) {
  const Tensor& av = value(a);
  require_seq(av, "mean_time");
  const int64_t steps = av.dim(0);
  const int64_t row = av.dim(1) * av.dim(2);
  Tensor out({av.dim(1), av.dim(2)}, 0.0);
  for (int64_t t = 0; t < steps; ++t) {
    const double* src = av.ptr() + t * row;
    for (int64_t i = 0; i < row; ++i) out[i] += src[i];
  }
  const double inv = 1.0 / (double)steps;
  for (int64_t i = 0; i < row; ++i) out[i] *= inv;
  Var o = new_var(std::move(out));
  push_node(o, [a, o, steps, row, inv](Tape& t) {
    const double* g = t.grad_slot(o).ptr();
    std::vector<double> gs((size_t)(steps * row));
    for (int64_t ti = 0; ti < steps; ++ti)
      for (int64_t i = 0; i < row; ++i) gs[(size_t)(ti * row + i)] = g[i] * inv;
    t.accum(a, gs.data(), steps * row);
  });
  return o;
}

Var Tape::matmul_bias(Var x, Var w, Var bias) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  const Tensor& bv = value(bias);
  require(wv.shape.size() == 2, "matmul_bias: weight must be (in, out)");
  const int64_t k = wv.dim(0), m = wv.dim(1);
  require(!xv.shape.empty() && xv.shape.back() == k, "matmul_bias: inner dim mismatch");
  require(bv.shape.size() == 1 && bv.dim(0) == m, "matmul_bias: bias must be (out)");
  const int64_t rows = xv.size() / k;
  std::vector<int64_t> out_shape = xv.shape;
  out_shape.back() = m;
  Tensor out(out_shape);
  {
    ConstMatMap X(xv.ptr(), rows, k), W(wv.ptr(), k, m);
    MatMap Y(out.ptr(), rows, m);
    Y.noalias() = X * W;
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t c = 0; c < m; ++c) out[r * m + c] += bv[c];
  }
  Tensor xs = xv, ws = wv;  // copy before vals_ may grow
  Var o = new_var(std::move(out));
  push_node(o, [x, w, bias, o, rows, k, m, xs, ws](Tape& t) {
    const Tensor& go = t.grad_slot(o);
    ConstMatMap G(go.ptr(), rows, m), X(xs.ptr(), rows, k), W(ws.ptr(), k, m);
    std::vector<double> dx((size_t)(rows * k)), dw((size_t)(k * m)), db((size_t)m, 0.0);
    MatMap DX(dx.data(), rows, k), DW(dw.data(), k, m);
    DX.noalias() = G * W.transpose();
    DW.noalias() = X.transpose() * G;
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t c = 0; c < m; ++c) db[(size_t)c] += G(r, c);
    t.accum(x, dx.data(), rows * k);
    t.accum(w, dw.data(), k * m);
    t.accum(bias, db.data(), m);
  });
  return o;
}

Var Tape::threshold(Var pre) {
  const Tensor& pv = value(pre);
  Tensor out(pv.shape);
  const int64_t n = pv.size();
  if (smooth_) {
    for (int64_t i = 0; i < n; ++i) out[i] = smoothed_step(pv[i], width_);
  } else {
    for (int64_t i = 0; i < n; ++i) out[i] = pv[i] >= 0.0 ? 1.0 : 0.0;
  }
  Tensor saved = pv;  // copy before vals_ may grow
  Var o = new_var(std::move(out));
  const double width = width_;
  push_node(o, [pre, o, n, saved, width](Tape& t) {
    const double* g = t.grad_slot(o).ptr();
    std::vector<double> gp((size_t)n);
    for (int64_t i = 0; i < n; ++i) gp[(size_t)i] = g[i] * surrogate_grad(saved[i], width);
    t.accum(pre, gp.data(), n);
  });
  return o;
}

Var Tape::spatial(Var input, Var alpha, double v_th) {
  const Tensor& xv = value(input);
  const Tensor& av = value(alpha);
  require_seq(xv, "spatial");
  const int64_t channels = xv.dim(2);
  require(av.shape.size() == 1 && av.dim(0) == channels, "spatial: alpha must be (channels)");
  const int64_t n = xv.size();
  Tensor out(xv.shape);
  if (smooth_) {
    for (int64_t i = 0; i < n; ++i)
      out[i] = av[i % channels] * smoothed_step(xv[i] - v_th, width_);
  } else {
    for (int64_t i = 0; i < n; ++i) out[i] = xv[i] >= v_th ? av[i % channels] : 0.0;
  }
  Tensor xs = xv, as = av;  // copy before vals_ may grow
  Var o = new_var(std::move(out));
  const double width = width_;
  const bool smooth = smooth_;
  push_node(o, [input, alpha, o, n, channels, v_th, width, smooth, xs, as](Tape& t) {
    const double* g = t.grad_slot(o).ptr();
    std::vector<double> gx((size_t)n);
    std::vector<double> ga((size_t)channels, 0.0);
    for (int64_t i = 0; i < n; ++i) {
      const int64_t c = i % channels;
      const double pre = xs[i] - v_th;
      gx[(size_t)i] = g[i] * as[c] * surrogate_grad(pre, width);
      const double gate = smooth ? smoothed_step(pre, width) : (pre >= 0.0 ? 1.0 : 0.0);
      ga[(size_t)c] += g[i] * gate;
    }
    t.accum(input, gx.data(), n);
    t.accum(alpha, ga.data(), channels);
  });
  return o;
}

/* ----- fused leaky layer (parallel route) ----- */

namespace {

/* Lanes are convolved in carried blocks: within a block the geometric
 * kernel is applied by FFT; everything before the block enters through one
 * carried value, since sum_{k<S} beta^(t-k) c_k = beta^(t-S+1) * u_{S-1}.
 * This caps the transform length at its most efficient size, makes the
 * cost linear in sequence length, and the carry folds into the reset scan
 * (forward) or one weighted add per block (adjoint) for free. */
constexpr int64_t kConvBlock = 512;
constexpr int64_t kLaneBlock = 8;

struct LifBlockPlan {
  int64_t steps = 0;
  int64_t bc = 0;    // body block length (== steps when a single block covers)
  int64_t nb = 0;    // block count
  int64_t tail = 0;  // last block length
  KernelSpectrum body;
  KernelSpectrum tailspec;
  Tensor bpow;  // beta^(i+1) for i in [0, bc)
  int64_t pstride = 0, fstride = 0;

  const KernelSpectrum& spec_for(int64_t b) const { return b == nb - 1 ? tailspec : body; }
  int64_t len_for(int64_t b) const { return b == nb - 1 ? tail : bc; }
};

LifBlockPlan lif_block_plan(double beta, int64_t steps, fft::PlanEffort effort) {
  LifBlockPlan bp;
  bp.steps = steps;
  bp.bc = std::min(steps, kConvBlock);
  bp.nb = (steps + bp.bc - 1) / bp.bc;
  bp.tail = steps - (bp.nb - 1) * bp.bc;
  Tensor krow({bp.bc});
  krow[0] = 1.0;
  for (int64_t t = 1; t < bp.bc; ++t) krow[t] = krow[t - 1] * beta;
  bp.body = kernel_spectrum(krow.ptr(), 1, bp.bc, effort);
  bp.tailspec = bp.tail == bp.bc ? bp.body : kernel_spectrum(krow.ptr(), 1, bp.tail, effort);
  bp.bpow = Tensor({bp.bc});
  double v = beta;
  for (int64_t i = 0; i < bp.bc; ++i) {
    bp.bpow[i] = v;
    v *= beta;
  }
  /* per-lane buffer strides rounded so every row starts 64-byte-aligned */
  bp.pstride = (bp.body.pad + 7) & ~int64_t(7);
  bp.fstride = (bp.body.bins + 3) & ~int64_t(3);
  return bp;
}

/* One padded-block convolution: lane row segment -> pad buffer. */
inline void convolve_block(const double* seg, int64_t len, const KernelSpectrum& spec,
                           bool conjugate, double* pad, std::complex<double>* freq,
                           fft::PlanEffort effort) {
  std::memcpy(pad, seg, (size_t)len * sizeof(double));
  std::memset(pad + len, 0, (size_t)(spec.pad - len) * sizeof(double));
  fft::forward_r2c(spec.pad, pad, freq, effort);
  if (conjugate)
    mul_spectrum_conj(freq, spec.spectra.ptr(), spec.bins);
  else
    mul_spectrum(freq, spec.spectra.ptr(), spec.bins);
  fft::inverse_c2r_raw(spec.pad, freq, pad, effort);
}

}  // namespace

Var Tape::lif_layer(Var current, double beta, double v_th) {
  const Tensor& cv = value(current);
  require_seq(cv, "lif_layer");
  require(beta > 0.0 && beta < 1.0, "lif_layer: beta must be in (0, 1)");
  const int64_t steps = cv.dim(0), batch = cv.dim(1), channels = cv.dim(2);
  const int64_t lanes = batch * channels;

  const LifBlockPlan bp = lif_block_plan(beta, steps, effort_);

  /* Lanes move through eight interleaved padded buffers: convolve a block
   * of eight, then run their reset scans together so the serial dependency
   * chains overlap. Spike rows overwrite the already-consumed input rows. */
  auto lanebuf = acquire_lane_scratch(lanes * steps);
  auto preact = acquire_lane_scratch(lanes * steps);
  auto padbuf = acquire_lane_scratch(kLaneBlock * bp.pstride);
  auto freqbuf = acquire_lane_scratch(kLaneBlock * 2 * bp.fstride);

  transpose_to_lanes(cv.ptr(), steps, lanes, lanebuf.get());
  const bool smooth = smooth_;
  const double width = width_;
  const fft::PlanEffort effort = effort_;
  const double* bpow = bp.bpow.ptr();
  for (int64_t l0 = 0; l0 < lanes; l0 += kLaneBlock) {
    const int nj = (int)std::min<int64_t>(kLaneBlock, lanes - l0);
    double a[kLaneBlock], d[kLaneBlock], carry[kLaneBlock];
    double* pr[kLaneBlock];
    double* sr[kLaneBlock];
    const double* uu[kLaneBlock];
    for (int j = 0; j < nj; ++j) {
      a[j] = 0.0;
      d[j] = v_th;
      carry[j] = 0.0;
      pr[j] = preact.get() + (l0 + j) * steps;
      sr[j] = lanebuf.get() + (l0 + j) * steps;
      uu[j] = padbuf.get() + j * bp.pstride;
    }
    for (int64_t b = 0; b < bp.nb; ++b) {
      const int64_t S = b * bp.bc, len = bp.len_for(b);
      const KernelSpectrum& spec = bp.spec_for(b);
      for (int j = 0; j < nj; ++j)
        convolve_block(sr[j] + S, len, spec, false, padbuf.get() + j * bp.pstride,
                       reinterpret_cast<std::complex<double>*>(freqbuf.get()) + j * bp.fstride,
                       effort);
      if (nj == kLaneBlock && !smooth) {
        for (int64_t i = 0; i < len; ++i) {
          for (int j = 0; j < kLaneBlock; ++j) {
            const double u = uu[j][i] + carry[j] * bpow[i];
            const double f = u >= d[j] ? 1.0 : 0.0;
            pr[j][S + i] = u - d[j];
            sr[j][S + i] = f;
            a[j] = (a[j] + f) * beta;
            d[j] = v_th * (a[j] + 1.0);
            if (i == len - 1) carry[j] = u;
          }
        }
      } else {
        for (int64_t i = 0; i < len; ++i) {
          for (int j = 0; j < nj; ++j) {
            const double u = uu[j][i] + carry[j] * bpow[i];
            const double f = u >= d[j] ? 1.0 : 0.0;
            const double m = u - d[j];
            pr[j][S + i] = m;
            sr[j][S + i] = smooth ? smoothed_step(m, width) : f;
            a[j] = (a[j] + f) * beta;
            d[j] = v_th * (a[j] + 1.0);
            if (i == len - 1) carry[j] = u;
          }
        }
      }
    }
  }
  Tensor out({steps, batch, channels});
  transpose_to_steps(lanebuf.get(), lanes, steps, out.ptr());

  Var o = new_var(std::move(out));
  push_node(o, [current, o, steps, lanes, bp, preact, width, effort](Tape& t) {
    const Tensor& go = t.grad_slot(o);
    auto glbuf = acquire_lane_scratch(lanes * steps);
    auto padbuf = acquire_lane_scratch(kLaneBlock * bp.pstride);
    auto freqbuf = acquire_lane_scratch(kLaneBlock * 2 * bp.fstride);
    transpose_to_lanes(go.ptr(), steps, lanes, glbuf.get());
    const double* bpow = bp.bpow.ptr();
    /* Correlate the surrogate-masked spike grads with the kernel; the mask
     * rides along in the pad fill, and each result lands back in its row.
     * Blocks run newest-first: the adjoint carry at index k is the already-
     * final value one past the block end, scaled by beta^(end-k). */
    for (int64_t l0 = 0; l0 < lanes; l0 += kLaneBlock) {
      const int nj = (int)std::min<int64_t>(kLaneBlock, lanes - l0);
      for (int64_t b = bp.nb - 1; b >= 0; --b) {
        const int64_t S = b * bp.bc, len = bp.len_for(b), E = S + len;
        const KernelSpectrum& spec = bp.spec_for(b);
        for (int j = 0; j < nj; ++j) {
          double* pad = padbuf.get() + j * bp.pstride;
          auto* freq = reinterpret_cast<std::complex<double>*>(freqbuf.get()) + j * bp.fstride;
          double* gl = glbuf.get() + (l0 + j) * steps;
          const double* pre = preact.get() + (l0 + j) * steps;
          for (int64_t i = 0; i < len; ++i) pad[i] = gl[S + i] * surrogate_grad(pre[S + i], width);
          std::memset(pad + len, 0, (size_t)(spec.pad - len) * sizeof(double));
          fft::forward_r2c(spec.pad, pad, freq, effort);
          mul_spectrum_conj(freq, spec.spectra.ptr(), spec.bins);
          fft::inverse_c2r_raw(spec.pad, freq, pad, effort);
          const double cj = E < steps ? gl[E] : 0.0;
          for (int64_t i = 0; i < len; ++i) gl[S + i] = pad[i] + cj * bpow[len - 1 - i];
        }
      }
    }
    Tensor din(t.value(current).shape);
    transpose_to_steps(glbuf.get(), lanes, steps, din.ptr());
    t.accum(current, std::move(din));
  });
  return o;
}

Var Tape::lif_layer_stepwise(Var current, double beta, double v_th) {
  const Tensor& cv = value(current);
  require_seq(cv, "lif_layer_stepwise");
  require(beta > 0.0 && beta < 1.0, "lif_layer_stepwise: beta must be in (0, 1)");
  const int64_t steps = cv.dim(0), batch = cv.dim(1), channels = cv.dim(2);
  Var u = leaf(Tensor({batch, channels}, 0.0), false);
  Var s = leaf(Tensor({batch, channels}, 0.0), false);
  std::vector<Var> spikes;
  spikes.reserve((size_t)steps);
  for (int64_t t = 0; t < steps; ++t) {
    Var ct = slice_step(current, t);
    Var reset = scale(s, v_th);
    Var held = sub(u, reset);
    Var decayed = scale(held, beta);
    u = add(decayed, ct);
    Var pre = add_scalar(u, -v_th);
    s = threshold(pre);
    spikes.push_back(s);
  }
  return stack_steps(spikes);
}

/* ----- fused resonate layer (parallel route, trainable kernel) ----- */

Var Tape::prf_layer(Var current, Var log_delta, Var log_tau, Var theta, double v_th) {
  const Tensor& cv = value(current);
  require_seq(cv, "prf_layer");
  const int64_t steps = cv.dim(0), batch = cv.dim(1), channels = cv.dim(2);
  const Tensor& ldv = value(log_delta);
  const Tensor& ltv = value(log_tau);
  const Tensor& thv = value(theta);
  require(ldv.shape.size() == 1 && ldv.dim(0) == channels, "prf_layer: log_delta must be (channels)");
  require(ltv.same_shape(ldv) && thv.same_shape(ldv), "prf_layer: parameter shape mismatch");

  Tensor delta({channels}), tau({channels});
  for (int64_t n = 0; n < channels; ++n) {
    delta[n] = std::exp(ldv[n]);
    tau[n] = std::exp(ltv[n]);
    require(tau[n] > delta[n], "prf_layer: tau must exceed delta");
  }

  /* real projection of the damped-oscillator kernel, one row per channel */
  Tensor kernel({channels, steps});
  for (int64_t n = 0; n < channels; ++n) {
    const std::complex<double> a = std::exp(std::complex<double>(-delta[n] / tau[n], delta[n] * thv[n]));
    std::complex<double> w(1.0, 0.0);
    double* row = kernel.ptr() + n * steps;
    for (int64_t t = 0; t < steps; ++t) {
      row[t] = delta[n] * w.real();
      w *= a;
    }
  }
  KernelSpectrum spec = kernel_spectrum(kernel.ptr(), channels, steps);

  const int64_t lanes = batch * channels;
  Tensor lanes_in({lanes, steps});
  transpose_to_lanes(cv.ptr(), steps, lanes, lanes_in.ptr());
  Tensor preact({lanes, steps});
  convolve_lanes(lanes_in.ptr(), lanes, steps, spec, false, preact.ptr());
  for (int64_t i = 0; i < lanes * steps; ++i) preact[i] -= v_th;

  Tensor spikes_lanes({lanes, steps});
  if (smooth_) {
    for (int64_t i = 0; i < lanes * steps; ++i)
      spikes_lanes[i] = smoothed_step(preact[i], width_);
  } else {
    for (int64_t i = 0; i < lanes * steps; ++i) spikes_lanes[i] = preact[i] >= 0.0 ? 1.0 : 0.0;
  }
  Tensor out({steps, batch, channels});
  transpose_to_steps(spikes_lanes.ptr(), lanes, steps, out.ptr());

  Tensor thetas = thv;  // copy before vals_ may grow
  Var o = new_var(std::move(out));
  const double width = width_;
  push_node(o, [current, log_delta, log_tau, theta, o, steps, batch, channels, lanes, spec,
                preact, lanes_in, delta, tau, thetas, width](Tape& t) {
    const Tensor& go = t.grad_slot(o);
    std::vector<double> gl((size_t)(lanes * steps));
    transpose_to_lanes(go.ptr(), steps, lanes, gl.data());
    const double* pre = preact.ptr();
    for (int64_t i = 0; i < lanes * steps; ++i) gl[(size_t)i] *= surrogate_grad(pre[i], width);

    /* input gradient: correlation against the same kernel */
    std::vector<double> dl((size_t)(lanes * steps));
    convolve_lanes(gl.data(), lanes, steps, spec, true, dl.data());
    std::vector<double> dtm((size_t)(lanes * steps));
    transpose_to_steps(dl.data(), lanes, steps, dtm.data());
    t.accum(current, dtm.data(), lanes * steps);
    dl.clear();
    dl.shrink_to_fit();
    dtm.clear();
    dtm.shrink_to_fit();

    /* kernel gradient rows, then chain to the per-channel parameters */
    std::vector<double> dk((size_t)(channels * steps));
    correlate_reduce_lanes(gl.data(), lanes_in.ptr(), batch, channels, steps, dk.data());
    std::vector<double> d_ld((size_t)channels, 0.0), d_lt((size_t)channels, 0.0),
        d_th((size_t)channels, 0.0);
    for (int64_t n = 0; n < channels; ++n) {
      const double dv = delta[n], tv = tau[n], th = thetas[n];
      const std::complex<double> a = std::exp(std::complex<double>(-dv / tv, dv * th));
      std::complex<double> w(1.0, 0.0);
      const double* dkr = dk.data() + n * steps;
      double acc_ld = 0.0, acc_lt = 0.0, acc_th = 0.0;
      for (int64_t m = 0; m < steps; ++m) {
        const double md = (double)m * dv;  // m*delta
        const double re = w.real(), im = w.imag();
        acc_ld += dkr[m] * dv * ((1.0 - md / tv) * re - md * th * im);
        acc_lt += dkr[m] * dv * re * (md / tv);
        acc_th += dkr[m] * (-dv * im * md);
        w *= a;
      }
      d_ld[(size_t)n] = acc_ld;
      d_lt[(size_t)n] = acc_lt;
      d_th[(size_t)n] = acc_th;
    }
    t.accum(log_delta, d_ld.data(), channels);
    t.accum(log_tau, d_lt.data(), channels);
    t.accum(theta, d_th.data(), channels);
  });
  return o;
}

/* ----- scalar heads ----- */

Var Tape::weighted_sum(Var a, const Tensor& w) {
  const Tensor& av = value(a);
  require(av.same_shape(w), "weighted_sum: shape mismatch");
  const int64_t n = av.size();
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += av[i] * w[i];
  Tensor out({1});
  out[0] = acc;
  Var o = new_var(std::move(out));
  Tensor ws = w;
  push_node(o, [a, o, n, ws](Tape& t) {
    const double g0 = t.grad_slot(o)[0];
    Tensor g(ws.shape);
    for (int64_t i = 0; i < n; ++i) g[i] = g0 * ws[i];
    t.accum(a, std::move(g));
  });
  return o;
}

Var Tape::cross_entropy(Var logits, const std::vector<int32_t>& labels) {
  const Tensor& lv = value(logits);
  require(lv.shape.size() == 2, "cross_entropy: logits must be (batch, classes)");
  const int64_t batch = lv.dim(0), classes = lv.dim(1);
  require((int64_t)labels.size() == batch, "cross_entropy: label count mismatch");
  double loss = 0.0;
  for (int64_t b = 0; b < batch; ++b) {
    const double* row = lv.ptr() + b * classes;
    const int32_t y = labels[(size_t)b];
    require(y >= 0 && y < classes, "cross_entropy: label out of range");
    double mx = row[0];
    for (int64_t c = 1; c < classes; ++c) mx = std::max(mx, row[c]);
    double se = 0.0;
    for (int64_t c = 0; c < classes; ++c) se += std::exp(row[c] - mx);
    loss += mx + std::log(se) - row[y];
  }
  Tensor out({1});
  out[0] = loss / (double)batch;
  Tensor ls = lv;  // copy before vals_ may grow
  Var o = new_var(std::move(out));
  std::vector<int32_t> ys = labels;
  push_node(o, [logits, o, batch, classes, ls, ys](Tape& t) {
    const double g0 = t.grad_slot(o)[0] / (double)batch;
    std::vector<double> g((size_t)(batch * classes));
    for (int64_t b = 0; b < batch; ++b) {
      const double* row = ls.ptr() + b * classes;
      double mx = row[0];
      for (int64_t c = 1; c < classes; ++c) mx = std::max(mx, row[c]);
      double se = 0.0;
      for (int64_t c = 0; c < classes; ++c) se += std::exp(row[c] - mx);
      for (int64_t c = 0; c < classes; ++c) {
        double p = std::exp(row[c] - mx) / se;
        g[(size_t)(b * classes + c)] = g0 * (p - (c == ys[(size_t)b] ? 1.0 : 0.0));
      }
    }
    t.accum(logits, g.data(), batch * classes);
  });
  return o;
}

Var Tape::mse(Var pred, const Tensor& target) {
  const Tensor& pv = value(pred);
  require(pv.same_shape(target), "mse: shape mismatch");
  const int64_t n = pv.size();
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double d = pv[i] - target[i];
    acc += d * d;
  }
  Tensor out({1});
  out[0] = acc / (double)n;
  Tensor ps = pv, ts = target;  // copy before vals_ may grow
  Var o = new_var(std::move(out));
  push_node(o, [pred, o, n, ps, ts](Tape& t) {
    const double g0 = t.grad_slot(o)[0] * 2.0 / (double)n;
    std::vector<double> g((size_t)n);
    for (int64_t i = 0; i < n; ++i) g[(size_t)i] = g0 * (ps[i] - ts[i]);
    t.accum(pred, g.data(), n);
  });
  return o;
}

}  // namespace spikeseq::traingrad
