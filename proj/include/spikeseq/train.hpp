#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikeseq/models.hpp"

namespace spikeseq {

/* Scalar current per step; each row of `inputs` is one sample's sequence. */
struct Dataset {
  traingrad::Tensor inputs;  // (samples, steps)
  std::vector<int32_t> labels;

  int64_t samples() const { return inputs.shape.empty() ? 0 : inputs.dim(0); }
  int64_t steps() const { return inputs.shape.size() < 2 ? 0 : inputs.dim(1); }
};

/* Adam with decoupled weight decay and two learning-rate groups: `neuron`
 * params use neuron_lr and are never decayed; matrices (ndim >= 2) in the
 * main group are decayed, vectors are not. */
struct AdamW {
  double lr = 1e-2;
  double neuron_lr = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double weight_decay = 0.0;

  void step(const std::vector<Param*>& params);

  int64_t t = 0;
  std::vector<traingrad::Tensor> m_, v_;
};

struct TrainConfig {
  ModelConfig model;
  double lr = 1e-2;
  double neuron_lr = 1e-3;
  double weight_decay = 0.0;
  int64_t batch = 32;
  int64_t epochs = 10;
  uint64_t seed = 7;
  bool shuffle = true;
};

struct EpochMetrics {
  int64_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = -1.0;  // -1 when no test split given
};

struct EvalResult {
  double loss = 0.0;
  double acc = 0.0;
};

EvalResult evaluate(Model& model, const Dataset& data, int64_t batch);

struct TrainResult {
  std::vector<EpochMetrics> history;
};

/* Full-batch order is reshuffled every epoch from stream_seed(seed, epoch).
 * Throws std::runtime_error on a non-finite loss. */
TrainResult train_model(Model& model, const TrainConfig& cfg, const Dataset& train_data,
                        const Dataset* test_data);

/* After each optimizer step the step size is clamped to half the time
 * constant so the oscillator kernel stays valid. */
void clamp_neuron_params(Model& model);

/* Versioned little-endian binary checkpoint; round-trips bit-exactly. */
void save_checkpoint(const std::string& path, Model& model);
void load_checkpoint(const std::string& path, Model& model);

}  // namespace spikeseq
