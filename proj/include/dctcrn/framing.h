#pragma once

#include <algorithm>
#include <vector>

#include "dctcrn/common.h"
#include "dctcrn/window.h"

namespace dctcrn {

// Analysis/synthesis framing geometry. Defaults are 32 ms frames with an
// 8 ms hop at 16 kHz, Hann on both sides.
struct FrameParams {
  int frame_len = 512;
  int hop = 128;
  WindowKind analysis_window = WindowKind::Hann;
  WindowKind synthesis_window = WindowKind::Hann;

  void validate() const {
    require(frame_len >= 2 && hop >= 1, "FrameParams: bad sizes");
    require(frame_len % hop == 0, "FrameParams: hop must divide frame_len");
  }

  int frames_for(size_t n_samples) const {
    return n_samples == 0 ? 0 : int((n_samples + hop - 1) / hop);
  }
};

// Constant overlap-add normalizer for the window pair: sum over all hop
// shifts of w_a*w_s at any sample index. Exactly 1.5 for Hann/Hann at
// hop = frame/4; evaluated directly so other pairs work too.
template <typename T>
double cola_normalizer(const FrameParams& p) {
  std::vector<T> wa = make_window<T>(p.analysis_window, p.frame_len);
  std::vector<T> ws = make_window<T>(p.synthesis_window, p.frame_len);
  double acc = 0.0;
  int shifts = p.frame_len / p.hop;
  for (int k = 0; k < shifts; ++k) acc += double(wa[k * p.hop]) * double(ws[k * p.hop]);
  return acc;
}

// Slices the signal into windowed frames. Row t covers input samples
// [t*hop, t*hop + frame_len); the tail is zero-padded so every sample is
// covered. T = ceil(len / hop).
template <typename T>
Mat<T> frame_signal(const Wave<T>& w, const FrameParams& p) {
  p.validate();
  std::vector<T> win = make_window<T>(p.analysis_window, p.frame_len);
  int n_frames = p.frames_for(w.samples.size());
  Mat<T> frames(n_frames, p.frame_len);
  const size_t n = w.samples.size();
  for (int t = 0; t < n_frames; ++t) {
    T* row = frames.row(t);
    const size_t start = size_t(t) * p.hop;
    const int avail = int(std::min<size_t>(p.frame_len, n > start ? n - start : 0));
    for (int i = 0; i < avail; ++i) row[i] = w.samples[start + i] * win[i];
    // remaining entries stay zero
  }
  return frames;
}

// Windowed overlap-add resynthesis with the constant COLA denominator
// (1.5 for the default Hann/Hann pair), truncated to out_len samples.
template <typename T>
Wave<T> overlap_add(const Mat<T>& frames, const FrameParams& p, size_t out_len) {
  p.validate();
  require(frames.cols == p.frame_len, "overlap_add: frame width mismatch");
  std::vector<T> win = make_window<T>(p.synthesis_window, p.frame_len);
  const T norm = T(1.0 / cola_normalizer<T>(p));

  Wave<T> out;
  out.samples.assign(out_len, T(0));
  std::vector<T> acc(size_t(frames.rows ? (frames.rows - 1) * size_t(p.hop) + p.frame_len : 0), T(0));
  for (int t = 0; t < frames.rows; ++t) {
    const T* row = frames.row(t);
    T* dst = acc.data() + size_t(t) * p.hop;
    for (int i = 0; i < p.frame_len; ++i) dst[i] += row[i] * win[i];
  }
  const size_t n = std::min(out_len, acc.size());
  for (size_t i = 0; i < n; ++i) out.samples[i] = acc[i] * norm;
  return out;
}

// Adjoint of overlap_add: routes a time-domain gradient back onto frame
// gradients. overlap_add is linear, so this is its exact transpose.
template <typename T>
Mat<T> overlap_add_adjoint(const std::vector<T>& grad_out, const FrameParams& p, int n_frames) {
  p.validate();
  std::vector<T> win = make_window<T>(p.synthesis_window, p.frame_len);
  const T norm = T(1.0 / cola_normalizer<T>(p));
  Mat<T> grad_frames(n_frames, p.frame_len);
  for (int t = 0; t < n_frames; ++t) {
    T* row = grad_frames.row(t);
    const size_t start = size_t(t) * p.hop;
    for (int i = 0; i < p.frame_len; ++i) {
      size_t j = start + i;
      if (j < grad_out.size()) row[i] = grad_out[j] * win[i] * norm;
    }
  }
  return grad_frames;
}

}  // namespace dctcrn
