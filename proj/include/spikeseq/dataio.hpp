#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikeseq/train.hpp"

namespace spikeseq {

/* IDX container: big-endian dims, unsigned byte payload. Files whose first
 * two bytes are the gzip magic are inflated transparently. */
struct IdxData {
  std::vector<int64_t> dims;
  std::vector<uint8_t> bytes;
};

IdxData read_idx(const std::string& path);
void write_idx(const std::string& path, const IdxData& data, bool gzip);

struct ImageSet {
  traingrad::Tensor images;  // (samples, rows*cols), scaled to [0, 1]
  std::vector<int32_t> labels;
  int64_t rows = 0, cols = 0;
};

/* images file: (count, rows, cols) ubyte; labels file: (count) ubyte.
 * Counts must match. */
ImageSet load_image_set(const std::string& images_path, const std::string& labels_path);

/* Pixel order is rewritten per sample; an empty permutation is identity.
 * The permutation must be a bijection on [0, pixels). */
void apply_pixel_permutation(traingrad::Tensor& images, const std::vector<int64_t>& perm);

/* Flattens images into per-step scalar currents: sample row -> sequence. */
Dataset image_set_to_sequences(const ImageSet& set, double input_gain);

}  // namespace spikeseq
