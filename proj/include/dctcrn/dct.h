#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "dctcrn/common.h"

namespace dctcrn {

// Orthonormal DCT-II and its inverse (DCT-III) via a precomputed cosine
// matrix. Direct O(N^2) evaluation; at N=512 this is ~262k multiply-adds
// per frame per direction, well inside the hop budget. The table is built
// in double and stored at the compute precision. Immutable after
// construction, shareable across threads.
template <typename T>
class DctPlan {
 public:
  explicit DctPlan(int n) : n_(n), m_(size_t(n) * n) {
    require(n >= 1, "DctPlan: n must be >= 1");
    const double scale = std::sqrt(2.0 / n);
    const double c0 = std::sqrt(0.5);
    for (int mu = 0; mu < n; ++mu) {
      double c = (mu == 0) ? c0 : 1.0;
      for (int i = 0; i < n; ++i)
        m_[size_t(mu) * n + i] = T(c * scale * std::cos(kPi * mu * (2.0 * i + 1.0) / (2.0 * n)));
    }
  }

  int size() const { return n_; }

  // F(mu) = c(mu) sqrt(2/N) sum_n f(n) cos(pi mu (2n+1) / 2N)
  void forward(const T* x, T* out) const {
    for (int mu = 0; mu < n_; ++mu)
      out[mu] = detail::dot(m_.data() + size_t(mu) * n_, x, size_t(n_));
  }

  // Exact inverse: multiply by the transpose of the orthonormal DCT-II matrix.
  void inverse(const T* coeffs, T* out) const {
    for (int i = 0; i < n_; ++i) out[i] = T(0);
    for (int mu = 0; mu < n_; ++mu) {
      const T* row = m_.data() + size_t(mu) * n_;
      const T c = coeffs[mu];
      for (int i = 0; i < n_; ++i) out[i] += row[i] * c;
    }
  }

  const T* matrix() const { return m_.data(); }

 private:
  int n_;
  std::vector<T> m_;
};

template <typename T>
std::vector<T> dct_ii(const std::vector<T>& x) {
  DctPlan<T> plan(int(x.size()));
  std::vector<T> out(x.size());
  plan.forward(x.data(), out.data());
  return out;
}

template <typename T>
std::vector<T> dct_iii(const std::vector<T>& x) {
  DctPlan<T> plan(int(x.size()));
  std::vector<T> out(x.size());
  plan.inverse(x.data(), out.data());
  return out;
}

// Rowwise DCT-II over a frame matrix.
template <typename T>
Mat<T> stdct(const Mat<T>& frames, const DctPlan<T>& plan) {
  require(frames.cols == plan.size(), "stdct: frame width != plan size");
  Mat<T> spec(frames.rows, frames.cols);
  for (int t = 0; t < frames.rows; ++t) plan.forward(frames.row(t), spec.row(t));
  return spec;
}

// Rowwise DCT-III back to windowed frames.
template <typename T>
Mat<T> istdct(const Mat<T>& spec, const DctPlan<T>& plan) {
  require(spec.cols == plan.size(), "istdct: spectrogram width != plan size");
  Mat<T> frames(spec.rows, spec.cols);
  for (int t = 0; t < spec.rows; ++t) plan.inverse(spec.row(t), frames.row(t));
  return frames;
}

// Debug dump: header (rows, cols as u32 LE) then row-major float32.
template <typename T>
void dump_spectrogram(const Mat<T>& spec, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot create dump file: " + path);
  auto wr_u32 = [&os](uint32_t v) {
    uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
  };
  wr_u32(uint32_t(spec.rows));
  wr_u32(uint32_t(spec.cols));
  for (const T& x : spec.v) {
    float f = float(x);
    os.write(reinterpret_cast<const char*>(&f), 4);
  }
  if (!os) throw std::runtime_error("dump write failed: " + path);
}

template <typename T>
Mat<T> load_spectrogram_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open dump file: " + path);
  auto rd_u32 = [&is]() {
    uint8_t b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
  };
  const int rows = int(rd_u32());
  const int cols = int(rd_u32());
  Mat<T> spec(rows, cols);
  for (auto& x : spec.v) {
    float f;
    is.read(reinterpret_cast<char*>(&f), 4);
    x = T(f);
  }
  if (!is) throw std::runtime_error("truncated dump file: " + path);
  return spec;
}

}  // namespace dctcrn
