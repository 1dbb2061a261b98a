#pragma once

#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "dctcrn/common.h"

namespace dctcrn {

// Dense row-major tensor. Just shape + flat storage; layers index manually.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(numel_of(shape), T(0));
  }

  static size_t numel_of(const std::vector<int>& s) {
    size_t n = 1;
    for (int d : s) {
      require(d >= 0, "Tensor: negative dim");
      n *= size_t(d);
    }
    return n;
  }

  size_t numel() const { return data.size(); }
  void fill(T v) { std::fill(data.begin(), data.end(), v); }
  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// Named, ordered collection of trainable tensors. Iteration order is the
// creation order, which keeps optimizer updates and serialization
// deterministic.
template <typename T>
struct ParameterSet {
  struct Entry {
    std::string name;
    Tensor<T> tensor;
  };
  std::vector<Entry> entries;
  std::map<std::string, size_t> index;

  Tensor<T>& add(const std::string& name, std::vector<int> shape) {
    if (index.count(name)) throw std::invalid_argument("duplicate tensor name: " + name);
    index[name] = entries.size();
    entries.push_back({name, Tensor<T>(std::move(shape))});
    return entries.back().tensor;
  }

  bool has(const std::string& name) const { return index.count(name) != 0; }

  Tensor<T>& get(const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw std::invalid_argument("unknown tensor: " + name);
    return entries[it->second].tensor;
  }
  const Tensor<T>& get(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) throw std::invalid_argument("unknown tensor: " + name);
    return entries[it->second].tensor;
  }

  size_t total_params() const {
    size_t n = 0;
    for (const auto& e : entries) n += e.tensor.numel();
    return n;
  }

  // Same names and shapes, all zeros. Gradient / moment buffers.
  ParameterSet zeros_like() const {
    ParameterSet out;
    for (const auto& e : entries) out.add(e.name, e.tensor.shape);
    return out;
  }

  void zero() {
    for (auto& e : entries) e.tensor.fill(T(0));
  }
};

}  // namespace dctcrn
