#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

namespace maskrl {

// Dense row-major float32 tensor. Shape is a plain dimension list; all layer
// kernels interpret it positionally (Dense: [batch, features], Conv:
// [batch, channels, height, width]).
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(count_of(shape), 0.0f) {}
  Tensor(std::vector<int> s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
    assert(data.size() == count_of(shape));
  }

  static size_t count_of(const std::vector<int>& s) {
    size_t n = 1;
    for (int d : s) n *= static_cast<size_t>(d);
    return n;
  }

  size_t size() const { return data.size(); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(shape.size()); }

  float* ptr() { return data.data(); }
  const float* ptr() const { return data.data(); }

  float& operator[](size_t i) { return data[i]; }
  float operator[](size_t i) const { return data[i]; }

  void fill(float v) { std::fill(data.begin(), data.end(), v); }

  bool finite() const {
    for (float v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

}  // namespace maskrl
