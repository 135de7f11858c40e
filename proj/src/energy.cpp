#include "spikeseq/energy.hpp"

#include <stdexcept>

namespace spikeseq {

LayerFamily parse_family(const std::string& name) {
  if (name == "ours") return LayerFamily::ours;
  if (name == "s4-legs") return LayerFamily::s4_legs;
  if (name == "binary-s4d") return LayerFamily::binary_s4d;
  if (name == "gsu") return LayerFamily::gsu;
  throw std::invalid_argument("unknown layer family: " + name);
}

std::string family_name(LayerFamily f) {
  switch (f) {
    case LayerFamily::ours: return "ours";
    case LayerFamily::s4_legs: return "s4-legs";
    case LayerFamily::binary_s4d: return "binary-s4d";
    case LayerFamily::gsu: return "gsu";
  }
  throw std::logic_error("bad family");
}

EnergyReport estimate_energy(const std::vector<LayerSpec>& layers, const EnergyConstants& c,
                             int64_t seq_len) {
  if (seq_len <= 0) throw std::invalid_argument("estimate_energy: seq_len must be positive");
  EnergyReport rep;
  rep.seq_len = seq_len;
  for (const LayerSpec& s : layers) {
    if (s.width <= 0) throw std::invalid_argument("estimate_energy: width must be positive");
    if (s.rate_token < 0.0 || s.rate_token > 1.0 || s.rate_channel < 0.0 || s.rate_channel > 1.0)
      throw std::invalid_argument("estimate_energy: spike rates must lie in [0, 1]");
    const double d = (double)s.width;
    const double h = (double)s.state;
    LayerEnergy e;
    e.family = family_name(s.family);
    switch (s.family) {
      case LayerFamily::s4_legs:
        if (s.state <= 0) throw std::invalid_argument("estimate_energy: state must be positive");
        /* dense recurrence h x h, input/output projections, dense channel MLP */
        e.token_pj = c.e_mac * (h * h + d * h + h * d + d * d);
        e.channel_pj = c.e_mac * (2.0 * d * d + 2.0 * d) + c.e_mult * d;
        break;
      case LayerFamily::binary_s4d:
      case LayerFamily::gsu:
        if (s.state <= 0) throw std::invalid_argument("estimate_energy: state must be positive");
        e.token_pj = c.e_mac * (h * h + d * h + h * d + d * d);
        e.channel_pj = c.e_ac * (2.0 * s.rate_channel * d * d) + c.e_mac * 2.0 * d + c.e_mult * d;
        break;
      case LayerFamily::ours:
        /* two-real-state oscillator update: 4 multiplies + drive scale per
         * channel, 3 adds; spike-gated mixing matmul plus bias adds */
        e.token_pj = c.e_mult * 5.0 * d + c.e_ac * (3.0 * d + s.rate_token * d * d + d);
        e.channel_pj = c.e_ac * (s.rate_channel * d * d + d);
        break;
    }
    e.total_pj = e.token_pj + e.channel_pj;
    rep.per_step_pj += e.total_pj;
    rep.layers.push_back(e);
  }
  rep.total_mj = rep.per_step_pj * (double)seq_len * 1e-9;  // pJ -> mJ
  return rep;
}

}  // namespace spikeseq
