#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spikeseq/array.hpp"
#include "spikeseq/fft.hpp"

namespace spikeseq::traingrad {

using Tensor = RealArray;

/* d/dx of the smoothed step used for credit assignment through spikes:
 * width/(1 + (pi*width*x)^2). The forward stays an exact step during
 * training; smoothed_step replaces it only when a run needs an everywhere-
 * differentiable forward (finite-difference checks). */
double surrogate_grad(double x, double width);
double smoothed_step(double x, double width);

struct Var {
  int32_t id = -1;
  bool valid() const { return id >= 0; }
};

/* Single-use reverse-mode tape. Values are fp64 tensors; sequence tensors
 * are time-major (steps, batch, channels). Each op appends one node; the
 * node's closure owns references to whatever its backward pass needs, so
 * backward() can release value/grad buffers as it walks the tape. */
class Tape {
 public:
  explicit Tape(bool smooth_threshold = false, double surrogate_width = 2.0)
      : smooth_(smooth_threshold), width_(surrogate_width) {}

  bool smooth() const { return smooth_; }
  double surrogate_width() const { return width_; }

  /* Transform-plan effort for the convolution ops on this tape. The default
   * keeps results a pure function of (inputs, seed); `tuned` trades that for
   * speed and belongs only in timing harnesses (see fft::PlanEffort). */
  void set_plan_effort(fft::PlanEffort effort) { effort_ = effort; }
  fft::PlanEffort plan_effort() const { return effort_; }

  Var leaf(Tensor value, bool needs_grad);

  /* elementwise + structural */
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double k);
  Var add_scalar(Var a, double k);
  Var mul(Var a, Var b);
  Var slice_step(Var seq, int64_t t);
  Var stack_steps(const std::vector<Var>& steps);
  Var concat_channels(Var a, Var b);
  Var reverse_time(Var a);
  Var mean_time(Var a);

  /* x:(..., K) @ w:(K, M) + bias:(M) -> (..., M); leading dims fold. */
  Var matmul_bias(Var x, Var w, Var bias);

  /* spikes from a pre-activation; backward applies the atan surrogate. */
  Var threshold(Var pre);

  /* alpha-scaled stateless gate: alpha[n] * step(input - v_th). */
  Var spatial(Var input, Var alpha, double v_th);

  /* Parallel-route leaky layer: geometric kernel convolution, running-bias
   * threshold scan (treated as constant in backward), step. beta fixed. */
  Var lif_layer(Var current, double beta, double v_th);

  /* Same dynamics unrolled step by step with generic nodes; the per-step
   * graph the parallel route is benchmarked against. */
  Var lif_layer_stepwise(Var current, double beta, double v_th);

  /* Parallel resonate layer. Trains log_delta/log_tau/theta (per channel);
   * spikes come from the real part, so the convolution runs against the
   * real projection of the complex kernel. */
  Var prf_layer(Var current, Var log_delta, Var log_tau, Var theta, double v_th);

  /* scalars */
  Var weighted_sum(Var a, const Tensor& w);
  Var cross_entropy(Var logits, const std::vector<int32_t>& labels);
  Var mse(Var pred, const Tensor& target);

  const Tensor& value(Var v) const { return vals_.at((size_t)v.id); }
  double scalar(Var v) const;

  /* Backward from a scalar loss. Grad buffers of interior nodes are freed
   * as soon as their node has run; leaf grads survive. */
  void backward(Var loss);

  /* Zero tensor if no gradient reached the leaf. */
  Tensor grad(Var leaf_var) const;

  int64_t node_count() const { return (int64_t)nodes_.size(); }

  /* internal: gradient accumulation used by node closures */
  void accum(Var v, const double* g, int64_t n);
  /* Move `g` into an untouched slot, add elementwise otherwise; spares the
   * zero-fill + add pass for the common first-contribution case. */
  void accum(Var v, Tensor&& g);
  Tensor& grad_slot(Var v);
  bool has_grad(Var v) const;

 private:
  friend struct NodeBuilder;
  struct Node {
    int32_t out;
    std::function<void(Tape&)> backward;
  };

  Var new_var(Tensor value);
  void push_node(Var out, std::function<void(Tape&)> bwd);

  bool smooth_ = false;
  double width_ = 2.0;
  fft::PlanEffort effort_ = fft::PlanEffort::deterministic;
  std::vector<Tensor> vals_;
  std::vector<Tensor> grads_;
  std::vector<bool> is_leaf_;
  std::vector<Node> nodes_;
  bool ran_backward_ = false;
};

}  // namespace spikeseq::traingrad
