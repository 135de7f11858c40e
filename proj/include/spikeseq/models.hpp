#pragma once

#include <string>
#include <vector>

#include "spikeseq/traingrad.hpp"

namespace spikeseq {

struct Param {
  std::string name;
  traingrad::Tensor value;
  traingrad::Tensor grad;   // filled by Model::collect_grads after a backward pass
  bool neuron = false;      // routed to the neuron learning-rate group, never weight-decayed
  traingrad::Var var;       // leaf id on the currently bound tape
};

enum class TemporalKind { prf, lif };

struct ModelConfig {
  int64_t width = 64;
  int64_t depth = 2;  // residual blocks
  int64_t classes = 10;
  int64_t input_channels = 1;
  TemporalKind temporal = TemporalKind::prf;
  bool bidirectional = false;
  double v_th = 1.0;
  double lif_beta = 0.5;       // fixed decay when temporal == lif
  double delta_min = 0.001;    // log-uniform init range for the step size
  double delta_max = 0.1;
  double tau_min = 1.0;        // log-uniform init range for the time constant
  double tau_max = 4.0;
  double theta_max = 1.5707963267948966;  // frequencies start uniform in [0, theta_max]
  double embed_scale = 1.0;    // gain on the input embedding init
  uint64_t seed = 1;
};

/* One residual block: temporal spiking -> linear back into the residual,
 * then a stateless alpha-scaled gate -> second linear into the residual.
 * Bidirectional mode runs the temporal layer over the reversed sequence
 * with the same parameters and concatenates both spike streams. */
struct Block {
  Param log_delta, log_tau, theta;  // per-channel, prf only
  Param w1, b1;
  Param alpha;
  Param w2, b2;
};

struct ForwardTrace {
  std::vector<traingrad::Tensor> temporal_spikes;  // one per block (forward direction)
  std::vector<traingrad::Tensor> spatial_spikes;
};

struct Model {
  ModelConfig cfg;
  Param embed_w, embed_b;
  std::vector<Block> blocks;
  Param out_w, out_b;

  static Model make(const ModelConfig& cfg);

  std::vector<Param*> params();
  void bind(traingrad::Tape& tape);
  void collect_grads(traingrad::Tape& tape);

  /* input: (steps, batch, input_channels) -> logits (batch, classes).
   * bind() must have been called on the same tape first. */
  traingrad::Var forward(traingrad::Tape& tape, const traingrad::Tensor& input,
                         ForwardTrace* trace = nullptr);
};

}  // namespace spikeseq
