#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace epinode {

// Dense row-major tensor of doubles. Rank is usually 1 (vectors) or 2
// (weight matrices); shape is kept general for serialization.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<int> shape_, std::vector<double> data_)
      : shape(std::move(shape_)), data(std::move(data_)) {
    if (numel_of(shape) != static_cast<long>(data.size()))
      throw std::invalid_argument("Tensor: data length " + std::to_string(data.size()) +
                                  " does not match shape product " +
                                  std::to_string(numel_of(shape)));
  }

  static long numel_of(const std::vector<int>& s) {
    long n = 1;
    for (int d : s) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  static Tensor zeros(std::vector<int> shape_) {
    long n = numel_of(shape_);
    return Tensor(std::move(shape_), std::vector<double>(static_cast<size_t>(n), 0.0));
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  static Tensor vec(std::vector<double> v) {
    int n = static_cast<int>(v.size());
    return Tensor({n}, std::move(v));
  }

  size_t size() const { return data.size(); }
  double& operator[](size_t i) { return data[i]; }
  double operator[](size_t i) const { return data[i]; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

}  // namespace epinode
