#include "spikeseq/synth.hpp"

#include <algorithm>
#include <stdexcept>

#include "spikeseq/dataio.hpp"
#include "spikeseq/rng.hpp"

namespace spikeseq {

ImpulseTask make_impulse_task(const ImpulseTaskConfig& cfg) {
  const int64_t lo = cfg.margin_front;
  const int64_t hi = cfg.steps - cfg.margin_back - 1;
  if (hi <= lo + 2 * cfg.gap + 2)
    throw std::invalid_argument("impulse task: position range too small");
  const int64_t mid = (lo + hi + 1) / 2;

  std::vector<std::pair<int64_t, int32_t>> train_rows, test_rows;
  for (int64_t p = lo; p <= hi; ++p) {
    if (std::llabs(p - mid) < cfg.gap) continue;  // keep a margin around the split
    const int32_t label = p >= mid ? 1 : 0;
    if ((p - lo) % 2 == 0)
      train_rows.emplace_back(p, label);
    else
      test_rows.emplace_back(p, label);
  }

  auto build = [&](const std::vector<std::pair<int64_t, int32_t>>& rows) {
    Dataset d;
    d.inputs = traingrad::Tensor({(int64_t)rows.size(), cfg.steps}, 0.0);
    d.labels.reserve(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
      d.inputs[(int64_t)i * cfg.steps + rows[i].first] = cfg.amplitude;
      d.labels.push_back(rows[i].second);
    }
    return d;
  };
  return {build(train_rows), build(test_rows)};
}

namespace {

/* segment layout               indices
 *      ---0---
 *     |       |
 *     5       1
 *      ---6---
 *     |       |
 *     4       2
 *      ---3---                                */
constexpr uint8_t kSegments[10] = {
    0b0111111,  // 0
    0b0000110,  // 1
    0b1011011,  // 2
    0b1001111,  // 3
    0b1100110,  // 4
    0b1101101,  // 5
    0b1111101,  // 6
    0b0000111,  // 7
    0b1111111,  // 8
    0b1101111,  // 9
};

void fill_rect(uint8_t* img, int64_t r0, int64_t c0, int64_t r1, int64_t c1, int value) {
  r0 = std::clamp<int64_t>(r0, 0, 27);
  c0 = std::clamp<int64_t>(c0, 0, 27);
  r1 = std::clamp<int64_t>(r1, 0, 27);
  c1 = std::clamp<int64_t>(c1, 0, 27);
  for (int64_t r = r0; r <= r1; ++r)
    for (int64_t c = c0; c <= c1; ++c) {
      const int v = (int)img[r * 28 + c] + value;
      img[r * 28 + c] = (uint8_t)std::min(v, 255);
    }
}

void draw_digit(uint8_t* img, int digit, int64_t dr, int64_t dc, int intensity) {
  /* glyph box is rows 4..22, cols 8..18 before the offset */
  const int64_t top = 4 + dr, mid = 13 + dr, bot = 22 + dr;
  const int64_t left = 8 + dc, right = 18 + dc;
  const uint8_t segs = kSegments[digit];
  if (segs & (1 << 0)) fill_rect(img, top, left, top + 1, right, intensity);
  if (segs & (1 << 1)) fill_rect(img, top, right - 1, mid, right, intensity);
  if (segs & (1 << 2)) fill_rect(img, mid, right - 1, bot, right, intensity);
  if (segs & (1 << 3)) fill_rect(img, bot - 1, left, bot, right, intensity);
  if (segs & (1 << 4)) fill_rect(img, mid, left, bot, left + 1, intensity);
  if (segs & (1 << 5)) fill_rect(img, top, left, mid, left + 1, intensity);
  if (segs & (1 << 6)) fill_rect(img, mid, left, mid + 1, right, intensity);
}

}  // namespace

void write_synthetic_digits(const std::string& images_path, const std::string& labels_path,
                            int64_t count, uint64_t seed) {
  if (count <= 0) throw std::invalid_argument("write_synthetic_digits: count must be positive");
  SplitMix64 rng(stream_seed(seed, 0x5157));
  IdxData imgs, lbls;
  imgs.dims = {count, 28, 28};
  imgs.bytes.assign((size_t)(count * 28 * 28), 0);
  lbls.dims = {count};
  lbls.bytes.resize((size_t)count);

  for (int64_t i = 0; i < count; ++i) {
    const int digit = (int)rng.below(10);
    lbls.bytes[(size_t)i] = (uint8_t)digit;
    uint8_t* img = imgs.bytes.data() + i * 28 * 28;
    for (int64_t p = 0; p < 28 * 28; ++p) img[p] = (uint8_t)rng.below(24);  // background noise
    const int64_t dr = (int64_t)rng.below(7) - 3;
    const int64_t dc = (int64_t)rng.below(7) - 3;
    const int intensity = 150 + (int)rng.below(100);
    draw_digit(img, digit, dr, dc, intensity);
  }

  const bool gz_imgs = images_path.size() > 3 && images_path.ends_with(".gz");
  const bool gz_lbls = labels_path.size() > 3 && labels_path.ends_with(".gz");
  write_idx(images_path, imgs, gz_imgs);
  write_idx(labels_path, lbls, gz_lbls);
}

}  // namespace spikeseq
