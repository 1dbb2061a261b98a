#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dctcrn {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr int kSampleRate = 16000;

// Monaural time-domain signal.
template <typename T>
struct Wave {
  std::vector<T> samples;
  int sample_rate = kSampleRate;

  size_t size() const { return samples.size(); }
};

// Dense row-major matrix. Used for frame matrices, spectrograms and masks.
template <typename T>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<T> v;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, T(0)) {}

  T* row(int r) { return v.data() + static_cast<size_t>(r) * cols; }
  const T* row(int r) const { return v.data() + static_cast<size_t>(r) * cols; }
  T& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  T at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

template <typename T>
void require_same_shape(const Mat<T>& a, const Mat<T>& b, const char* where) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(where) + ": shape mismatch " +
                                std::to_string(a.rows) + "x" + std::to_string(a.cols) + " vs " +
                                std::to_string(b.rows) + "x" + std::to_string(b.cols));
}

template <typename T>
bool all_finite(const std::vector<T>& v) {
  for (T x : v)
    if (!std::isfinite(static_cast<double>(x))) return false;
  return true;
}

namespace detail {

// Dot product over sixteen running partial sums. The independent lanes
// give the compiler parallel accumulator chains to vectorize; the
// summation order is fixed for a given length, so results stay
// deterministic from run to run.
template <typename T>
T dot(const T* a, const T* b, size_t n) {
  constexpr size_t kLanes = 16;
  T lane[kLanes] = {};
  size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    for (size_t l = 0; l < kLanes; ++l) lane[l] += a[i + l] * b[i + l];
  T s = T(0);
  for (size_t l = 0; l < kLanes; ++l) s += lane[l];
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

}  // namespace dctcrn
