#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace spikeseq {

/* Flat row-major nd array. Sequence data is time-major: (steps, batch, channels),
 * so one lane (b, n) is strided and one timestep is contiguous. */
template <class T>
struct Array {
  std::vector<int64_t> shape;
  std::shared_ptr<std::vector<T>> data;

  Array() = default;
  explicit Array(std::vector<int64_t> s)
      : shape(std::move(s)),
        data(std::make_shared<std::vector<T>>(count(shape))) {}
  Array(std::vector<int64_t> s, T fill)
      : shape(std::move(s)),
        data(std::make_shared<std::vector<T>>(count(shape), fill)) {}

  static int64_t count(const std::vector<int64_t>& s) {
    int64_t n = 1;
    for (int64_t d : s) {
      if (d < 0) throw std::invalid_argument("negative dimension");
      n *= d;
    }
    return n;
  }

  int64_t size() const { return data ? (int64_t)data->size() : 0; }
  int64_t dim(int i) const { return shape.at((size_t)i); }
  T* ptr() { return data->data(); }
  const T* ptr() const { return data->data(); }
  T& operator[](int64_t i) { return (*data)[(size_t)i]; }
  const T& operator[](int64_t i) const { return (*data)[(size_t)i]; }

  bool same_shape(const Array& o) const { return shape == o.shape; }

  Array clone() const {
    Array c;
    c.shape = shape;
    c.data = data ? std::make_shared<std::vector<T>>(*data) : nullptr;
    return c;
  }
};

using RealArray = Array<double>;
using ComplexArray = Array<std::complex<double>>;

inline int64_t checked_index(int64_t t, int64_t b, int64_t n,
                             const std::vector<int64_t>& shape) {
  return (t * shape[1] + b) * shape[2] + n;
}

}  // namespace spikeseq
