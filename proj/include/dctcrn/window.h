#pragma once

#include <cmath>
#include <vector>

#include "dctcrn/common.h"

namespace dctcrn {

enum class WindowKind { Hann, SqrtHann };

// Periodic (DFT-even) windows. The periodic Hann makes the overlap-add
// normalizer exactly constant at hop = n/4.
template <typename T>
std::vector<T> make_window(WindowKind kind, int n) {
  require(n >= 2, "make_window: n must be >= 2");
  std::vector<T> w(n);
  for (int i = 0; i < n; ++i) {
    double h = 0.5 * (1.0 - std::cos(2.0 * kPi * i / n));
    w[i] = static_cast<T>(kind == WindowKind::Hann ? h : std::sqrt(h));
  }
  return w;
}

}  // namespace dctcrn
