#include "spikeseq/dataio.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace spikeseq {

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fseek(f, 0, SEEK_END);
  const long size = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<uint8_t> bytes((size_t)size);
  const size_t got = size ? std::fread(bytes.data(), 1, (size_t)size, f) : 0;
  std::fclose(f);
  if (got != (size_t)size) throw std::runtime_error("short read on " + path);
  return bytes;
}

bool is_gzip(const std::vector<uint8_t>& b) {
  return b.size() >= 2 && b[0] == 0x1f && b[1] == 0x8b;
}

std::vector<uint8_t> gunzip(const std::vector<uint8_t>& in, const std::string& path) {
  z_stream zs;
  std::memset(&zs, 0, sizeof zs);
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
    throw std::runtime_error("zlib init failed for " + path);
  std::vector<uint8_t> out;
  out.reserve(in.size() * 4);
  uint8_t buf[1 << 16];
  zs.next_in = const_cast<uint8_t*>(in.data());
  zs.avail_in = (uInt)in.size();
  int rc = Z_OK;
  do {
    zs.next_out = buf;
    zs.avail_out = sizeof buf;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw std::runtime_error("corrupt gzip stream in " + path);
    }
    out.insert(out.end(), buf, buf + (sizeof buf - zs.avail_out));
  } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) throw std::runtime_error("truncated gzip stream in " + path);
  return out;
}

uint32_t be32(const uint8_t* p) {
  return ((uint32_t)p[0] << 24) | ((uint32_t)p[1] << 16) | ((uint32_t)p[2] << 8) | (uint32_t)p[3];
}

}  // namespace

IdxData read_idx(const std::string& path) {
  std::vector<uint8_t> bytes = read_file(path);
  if (is_gzip(bytes)) bytes = gunzip(bytes, path);
  if (bytes.size() < 4) throw std::runtime_error("not an IDX file: " + path);
  if (bytes[0] != 0 || bytes[1] != 0) throw std::runtime_error("bad IDX magic in " + path);
  if (bytes[2] != 0x08) throw std::runtime_error("IDX dtype must be unsigned byte: " + path);
  const int ndim = bytes[3];
  if (ndim < 1 || ndim > 4) throw std::runtime_error("unsupported IDX rank in " + path);
  if (bytes.size() < 4 + 4 * (size_t)ndim) throw std::runtime_error("truncated IDX header: " + path);
  IdxData d;
  size_t payload = 1;
  for (int i = 0; i < ndim; ++i) {
    const uint32_t dim = be32(bytes.data() + 4 + 4 * i);
    d.dims.push_back((int64_t)dim);
    payload *= dim;
  }
  const size_t off = 4 + 4 * (size_t)ndim;
  if (bytes.size() - off != payload)
    throw std::runtime_error("IDX payload size mismatch in " + path);
  d.bytes.assign(bytes.begin() + (long)off, bytes.end());
  return d;
}

void write_idx(const std::string& path, const IdxData& data, bool gzip) {
  if (data.dims.empty() || data.dims.size() > 4)
    throw std::invalid_argument("write_idx: rank must be 1..4");
  size_t payload = 1;
  for (int64_t dim : data.dims) {
    if (dim < 0 || dim > 0xffffffffLL) throw std::invalid_argument("write_idx: bad dimension");
    payload *= (size_t)dim;
  }
  if (payload != data.bytes.size()) throw std::invalid_argument("write_idx: payload mismatch");

  std::vector<uint8_t> raw;
  raw.reserve(4 + 4 * data.dims.size() + data.bytes.size());
  raw.push_back(0);
  raw.push_back(0);
  raw.push_back(0x08);
  raw.push_back((uint8_t)data.dims.size());
  for (int64_t dim : data.dims) {
    const uint32_t v = (uint32_t)dim;
    raw.push_back((uint8_t)(v >> 24));
    raw.push_back((uint8_t)(v >> 16));
    raw.push_back((uint8_t)(v >> 8));
    raw.push_back((uint8_t)v);
  }
  raw.insert(raw.end(), data.bytes.begin(), data.bytes.end());

  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  if (gzip) {
    std::fclose(f);
    gzFile gz = gzopen(path.c_str(), "wb9");
    if (!gz) throw std::runtime_error("cannot gzopen " + path);
    const unsigned n = (unsigned)raw.size();
    if ((unsigned)gzwrite(gz, raw.data(), n) != n) {
      gzclose(gz);
      throw std::runtime_error("gzwrite failed for " + path);
    }
    gzclose(gz);
  } else {
    const size_t wrote = std::fwrite(raw.data(), 1, raw.size(), f);
    std::fclose(f);
    if (wrote != raw.size()) throw std::runtime_error("write failed for " + path);
  }
}

ImageSet load_image_set(const std::string& images_path, const std::string& labels_path) {
  IdxData imgs = read_idx(images_path);
  IdxData lbls = read_idx(labels_path);
  if (imgs.dims.size() != 3)
    throw std::runtime_error("image file must be rank 3 (count, rows, cols): " + images_path);
  if (lbls.dims.size() != 1) throw std::runtime_error("label file must be rank 1: " + labels_path);
  if (imgs.dims[0] != lbls.dims[0])
    throw std::runtime_error("image/label count mismatch: " + images_path);
  ImageSet set;
  set.rows = imgs.dims[1];
  set.cols = imgs.dims[2];
  const int64_t count = imgs.dims[0];
  const int64_t pixels = set.rows * set.cols;
  set.images = traingrad::Tensor({count, pixels});
  for (int64_t i = 0; i < count * pixels; ++i) set.images[i] = (double)imgs.bytes[(size_t)i] / 255.0;
  set.labels.resize((size_t)count);
  for (int64_t i = 0; i < count; ++i) set.labels[(size_t)i] = (int32_t)lbls.bytes[(size_t)i];
  return set;
}

void apply_pixel_permutation(traingrad::Tensor& images, const std::vector<int64_t>& perm) {
  if (perm.empty()) return;
  if (images.shape.size() != 2) throw std::invalid_argument("permutation: images must be 2-d");
  const int64_t pixels = images.dim(1);
  if ((int64_t)perm.size() != pixels)
    throw std::invalid_argument("permutation length must equal the pixel count");
  std::vector<uint8_t> seen((size_t)pixels, 0);
  for (int64_t p : perm) {
    if (p < 0 || p >= pixels || seen[(size_t)p])
      throw std::invalid_argument("permutation must be a bijection on the pixels");
    seen[(size_t)p] = 1;
  }
  const int64_t count = images.dim(0);
  std::vector<double> row((size_t)pixels);
  for (int64_t i = 0; i < count; ++i) {
    double* base = images.ptr() + i * pixels;
    for (int64_t p = 0; p < pixels; ++p) row[(size_t)p] = base[perm[(size_t)p]];
    std::memcpy(base, row.data(), (size_t)pixels * sizeof(double));
  }
}

Dataset image_set_to_sequences(const ImageSet& set, double input_gain) {
  Dataset d;
  d.inputs = traingrad::Tensor(set.images.shape);
  for (int64_t i = 0; i < set.images.size(); ++i) d.inputs[i] = input_gain * set.images[i];
  d.labels = set.labels;
  return d;
}

}  // namespace spikeseq
