#include "spikeseq/models.hpp"

#include <cmath>
#include <stdexcept>

#include "spikeseq/rng.hpp"

namespace spikeseq {

namespace {

using traingrad::Tensor;
using traingrad::Var;

Tensor uniform_tensor(std::vector<int64_t> shape, double lo, double hi, SplitMix64& rng) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

Tensor normal_tensor(std::vector<int64_t> shape, double scale, SplitMix64& rng) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
  return t;
}

Param make_param(std::string name, Tensor value, bool neuron = false) {
  Param p;
  p.name = std::move(name);
  p.value = std::move(value);
  p.neuron = neuron;
  return p;
}

/* fan-in scaled uniform init, the usual default for dense layers */
Tensor linear_init(int64_t fan_in, int64_t fan_out, SplitMix64& rng) {
  const double k = 1.0 / std::sqrt((double)fan_in);
  return uniform_tensor({fan_in, fan_out}, -k, k, rng);
}

}  // namespace

Model Model::make(const ModelConfig& cfg) {
  if (cfg.width <= 0 || cfg.depth <= 0 || cfg.classes <= 0)
    throw std::invalid_argument("ModelConfig: width/depth/classes must be positive");
  if (cfg.delta_min <= 0 || cfg.delta_max < cfg.delta_min)
    throw std::invalid_argument("ModelConfig: bad delta range");
  if (cfg.tau_min <= cfg.delta_max || cfg.tau_max < cfg.tau_min)
    throw std::invalid_argument("ModelConfig: tau range must sit above delta range");

  Model m;
  m.cfg = cfg;
  SplitMix64 rng(stream_seed(cfg.seed, 0));

  const int64_t d = cfg.width;
  m.embed_w = make_param("embed.w",
                         normal_tensor({cfg.input_channels, d},
                                       cfg.embed_scale / std::sqrt((double)cfg.input_channels), rng));
  m.embed_b = make_param("embed.b", Tensor({d}, 0.0));

  const int64_t mix_in = cfg.bidirectional ? 2 * d : d;
  for (int64_t bi = 0; bi < cfg.depth; ++bi) {
    Block blk;
    const std::string prefix = "block" + std::to_string(bi) + ".";
    if (cfg.temporal == TemporalKind::prf) {
      Tensor ld({d}), lt({d}), th({d});
      for (int64_t i = 0; i < d; ++i)
        ld[i] = rng.uniform(std::log(cfg.delta_min), std::log(cfg.delta_max));
      for (int64_t i = 0; i < d; ++i)
        lt[i] = rng.uniform(std::log(cfg.tau_min), std::log(cfg.tau_max));
      for (int64_t i = 0; i < d; ++i) th[i] = rng.uniform(0.0, cfg.theta_max);
      blk.log_delta = make_param(prefix + "log_delta", std::move(ld), true);
      blk.log_tau = make_param(prefix + "log_tau", std::move(lt), true);
      blk.theta = make_param(prefix + "theta", std::move(th), true);
    }
    blk.w1 = make_param(prefix + "mix1.w", linear_init(mix_in, d, rng));
    blk.b1 = make_param(prefix + "mix1.b", Tensor({d}, 0.0));
    blk.alpha = make_param(prefix + "alpha", Tensor({d}, 1.0), true);
    blk.w2 = make_param(prefix + "mix2.w", linear_init(d, d, rng));
    blk.b2 = make_param(prefix + "mix2.b", Tensor({d}, 0.0));
    m.blocks.push_back(std::move(blk));
  }
  m.out_w = make_param("readout.w", linear_init(d, cfg.classes, rng));
  m.out_b = make_param("readout.b", Tensor({cfg.classes}, 0.0));
  return m;
}

std::vector<Param*> Model::params() {
  std::vector<Param*> ps;
  ps.push_back(&embed_w);
  ps.push_back(&embed_b);
  for (Block& b : blocks) {
    if (cfg.temporal == TemporalKind::prf) {
      ps.push_back(&b.log_delta);
      ps.push_back(&b.log_tau);
      ps.push_back(&b.theta);
    }
    ps.push_back(&b.w1);
    ps.push_back(&b.b1);
    ps.push_back(&b.alpha);
    ps.push_back(&b.w2);
    ps.push_back(&b.b2);
  }
  ps.push_back(&out_w);
  ps.push_back(&out_b);
  return ps;
}

void Model::bind(traingrad::Tape& tape) {
  for (Param* p : params()) p->var = tape.leaf(p->value, true);
}

void Model::collect_grads(traingrad::Tape& tape) {
  for (Param* p : params()) p->grad = tape.grad(p->var);
}

traingrad::Var Model::forward(traingrad::Tape& tape, const Tensor& input, ForwardTrace* trace) {
  if (input.shape.size() != 3 || input.dim(2) != cfg.input_channels)
    throw std::invalid_argument("Model::forward: input must be (steps, batch, input_channels)");
  Var x = tape.leaf(input, false);
  x = tape.matmul_bias(x, embed_w.var, embed_b.var);
  for (Block& b : blocks) {
    Var u = x;
    Var s;
    if (cfg.temporal == TemporalKind::prf) {
      s = tape.prf_layer(u, b.log_delta.var, b.log_tau.var, b.theta.var, cfg.v_th);
    } else {
      s = tape.lif_layer(u, cfg.lif_beta, cfg.v_th);
    }
    if (trace) trace->temporal_spikes.push_back(tape.value(s));
    if (cfg.bidirectional) {
      Var ur = tape.reverse_time(u);
      Var sr;
      if (cfg.temporal == TemporalKind::prf) {
        sr = tape.prf_layer(ur, b.log_delta.var, b.log_tau.var, b.theta.var, cfg.v_th);
      } else {
        sr = tape.lif_layer(ur, cfg.lif_beta, cfg.v_th);
      }
      s = tape.concat_channels(s, tape.reverse_time(sr));
    }
    Var r = tape.add(u, tape.matmul_bias(s, b.w1.var, b.b1.var));
    Var sp = tape.spatial(r, b.alpha.var, cfg.v_th);
    if (trace) trace->spatial_spikes.push_back(tape.value(sp));
    x = tape.add(r, tape.matmul_bias(sp, b.w2.var, b.b2.var));
  }
  Var pooled = tape.mean_time(x);
  return tape.matmul_bias(pooled, out_w.var, out_b.var);
}

}  // namespace spikeseq
