#pragma once

#include <cmath>

#include "dctcrn/common.h"

namespace dctcrn {

// Final-layer mask activations. Identity is a test-only path that applies
// raw mask values (used for oracle-mask checks).
enum class MaskVariant { PReLU, Sigmoid, Tanh, Identity };

inline const char* mask_variant_name(MaskVariant v) {
  switch (v) {
    case MaskVariant::PReLU: return "p";
    case MaskVariant::Sigmoid: return "s";
    case MaskVariant::Tanh: return "t";
    default: return "identity";
  }
}

inline constexpr double kIcmDivEps = 1e-8;
inline constexpr double kIcmDefaultClamp = 100.0;

template <typename T>
inline T sign_of(T x) {
  return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0));
}

// Ideal cosine mask: elementwise clean/noisy ratio, clipped to
// [-clamp, clamp]. Bins where |noisy| < 1e-8 get sign(clean)*clamp.
template <typename T>
Mat<T> ideal_cosine_mask(const Mat<T>& clean, const Mat<T>& noisy, T clamp) {
  require_same_shape(clean, noisy, "ideal_cosine_mask");
  require(clamp > T(0), "ideal_cosine_mask: clamp must be > 0");
  Mat<T> mask(clean.rows, clean.cols);
  for (size_t i = 0; i < mask.v.size(); ++i) {
    T s = clean.v[i], y = noisy.v[i];
    T m;
    if (std::abs(y) < T(kIcmDivEps)) {
      m = sign_of(s) * clamp;
    } else {
      m = s / y;
      if (m > clamp) m = clamp;
      if (m < -clamp) m = -clamp;
    }
    mask.v[i] = m;
  }
  return mask;
}

template <typename T>
inline T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
inline T mask_activation(MaskVariant v, T logit, T prelu_alpha) {
  switch (v) {
    case MaskVariant::PReLU: return logit >= T(0) ? logit : prelu_alpha * logit;
    case MaskVariant::Sigmoid: return sigmoid(logit);
    case MaskVariant::Tanh: return std::tanh(logit);
    default: return logit;
  }
}

// Estimated spectrogram: act(logits) * noisy, elementwise.
template <typename T>
Mat<T> apply_mask(const Mat<T>& logits, const Mat<T>& noisy, MaskVariant v, T prelu_alpha = T(0.25)) {
  require_same_shape(logits, noisy, "apply_mask");
  Mat<T> out(noisy.rows, noisy.cols);
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = mask_activation(v, logits.v[i], prelu_alpha) * noisy.v[i];
  return out;
}

// Backward through apply_mask: fills d_logits and accumulates the PReLU
// slope gradient (variant P only) into *d_alpha.
template <typename T>
void apply_mask_backward(const Mat<T>& logits, const Mat<T>& noisy, MaskVariant v, T prelu_alpha,
                         const Mat<T>& d_out, Mat<T>& d_logits, T* d_alpha) {
  require_same_shape(logits, noisy, "apply_mask_backward");
  require_same_shape(logits, d_out, "apply_mask_backward");
  d_logits = Mat<T>(logits.rows, logits.cols);
  for (size_t i = 0; i < d_out.v.size(); ++i) {
    T x = logits.v[i];
    T g = d_out.v[i] * noisy.v[i];  // d/d(act)
    switch (v) {
      case MaskVariant::PReLU:
        d_logits.v[i] = g * (x >= T(0) ? T(1) : prelu_alpha);
        if (d_alpha && x < T(0)) *d_alpha += g * x;
        break;
      case MaskVariant::Sigmoid: {
        T s = sigmoid(x);
        d_logits.v[i] = g * s * (T(1) - s);
        break;
      }
      case MaskVariant::Tanh: {
        T th = std::tanh(x);
        d_logits.v[i] = g * (T(1) - th * th);
        break;
      }
      default:
        d_logits.v[i] = g;
        break;
    }
  }
}

// Amplitude guard: per bin, keep the estimate unless it exceeds the noisy
// magnitude, in which case clamp to sign(est)*|noisy|. Idempotent; a no-op
// for masks bounded by 1 in magnitude.
template <typename T>
Mat<T> clip_postprocess(const Mat<T>& est, const Mat<T>& noisy) {
  require_same_shape(est, noisy, "clip_postprocess");
  Mat<T> out(est.rows, est.cols);
  for (size_t i = 0; i < out.v.size(); ++i) {
    T s = est.v[i], y = std::abs(noisy.v[i]);
    out.v[i] = std::abs(s) <= y ? s : sign_of(s) * y;
  }
  return out;
}

}  // namespace dctcrn
