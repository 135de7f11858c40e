#pragma once

#include <string>
#include <vector>

#include "spikeseq/bench.hpp"
#include "spikeseq/energy.hpp"
#include "spikeseq/equivalence.hpp"
#include "spikeseq/train.hpp"

namespace spikeseq {

/* All emitters format numbers the same way on every run and platform, so a
 * report produced twice from the same inputs is byte-identical. */

std::string bench_csv(const std::vector<BenchRecord>& records);
std::string bench_json(const std::vector<BenchRecord>& records);

std::string metrics_csv(const std::vector<EpochMetrics>& history);

std::string freq_csv(const std::vector<double>& omegas, const std::vector<double>& closed,
                     const std::vector<double>& simulated);

std::string equivalence_json(const EquivConfig& cfg, const EquivReport& report);
std::string energy_json(const EnergyReport& report);

void write_text_file(const std::string& path, const std::string& content);

/* fixed-precision float used across the CSV emitters */
std::string format_fixed(double v, int digits);

}  // namespace spikeseq
