#pragma once

#include <cstdint>
#include <string>

#include "spikeseq/train.hpp"

namespace spikeseq {

/* Which-half impulse task: each sequence is silent except for one impulse;
 * the label says whether the impulse sits in the first or second half of
 * the allowed position range. Mean-pooled readouts see identical averages
 * wherever the impulse lands, so the class is only recoverable from state
 * that outlives the impulse. Positions keep `gap` steps away from the
 * split and `margin` steps away from both sequence ends; even offsets go
 * to the train split, odd offsets to test. */
struct ImpulseTaskConfig {
  int64_t steps = 256;
  double amplitude = 25.0;
  int64_t margin_front = 4;
  int64_t margin_back = 24;  // keep responses clear of the truncation edge
  int64_t gap = 8;
};

struct ImpulseTask {
  Dataset train;
  Dataset test;
};

ImpulseTask make_impulse_task(const ImpulseTaskConfig& cfg);

/* Deterministic stand-in for a handwritten-digit corpus: seven-segment
 * glyphs rendered into 28x28 ubyte images with seeded offsets, intensity
 * jitter and background noise, written as IDX files (gzipped when the
 * paths end in .gz). Exercises the exact ingest path real data would use. */
void write_synthetic_digits(const std::string& images_path, const std::string& labels_path,
                            int64_t count, uint64_t seed);

}  // namespace spikeseq
