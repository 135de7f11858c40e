#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spikeseq {

/* 45nm fp32 op costs, picojoules. */
struct EnergyConstants {
  double e_mac = 4.6;   // multiply-accumulate
  double e_ac = 0.9;    // accumulate only
  double e_mult = 3.7;  // standalone multiply
};

enum class LayerFamily {
  ours,        // spiking: oscillator state + spike-gated dense mixing
  s4_legs,     // dense state-space layer, full MACs
  binary_s4d,  // binarized-activation state-space layer
  gsu          // gated spiking unit variant, same cost shape as binary_s4d
};

LayerFamily parse_family(const std::string& name);  // throws on unknown
std::string family_name(LayerFamily f);

struct LayerSpec {
  LayerFamily family = LayerFamily::ours;
  int64_t width = 128;        // feature channels D
  int64_t state = 64;         // state size H (dense state-space families)
  double rate_token = 0.0;    // spike rate feeding the token-mixing matmuls
  double rate_channel = 0.0;  // spike rate feeding the channel-mixing matmuls
};

struct LayerEnergy {
  std::string family;
  double token_pj = 0.0;    // per timestep
  double channel_pj = 0.0;  // per timestep
  double total_pj = 0.0;
};

struct EnergyReport {
  std::vector<LayerEnergy> layers;
  double per_step_pj = 0.0;
  double total_mj = 0.0;  // per_step * seq_len, in millijoules
  int64_t seq_len = 0;
};

/* Operation-count model priced with the constants above; not a wall-clock
 * benchmark. Spike rates gate the matmul terms because a binary activation
 * only costs an accumulate, and only when it is nonzero. */
EnergyReport estimate_energy(const std::vector<LayerSpec>& layers, const EnergyConstants& c,
                             int64_t seq_len);

}  // namespace spikeseq
