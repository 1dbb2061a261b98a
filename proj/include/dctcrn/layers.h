#pragma once

#include <cmath>
#include <cstring>
#include <type_traits>
#include <vector>

#include "dctcrn/common.h"

namespace dctcrn {

// Blocks template deduction on optional pointer arguments so callers can
// pass plain nullptr.
template <typename T>
using NoDeduce = std::type_identity_t<T>;

// Per-frame layer kernels. A feature frame is a flat [C, F] block; batch
// and streaming execution call the same kernels frame by frame, which is
// what makes the two paths agree bitwise.

// Geometry of one conv / transposed-conv layer. Time kernel is causal:
// output frame t sees input frames {t-1, t} (kt = 2) with a zero frame in
// front at t = 0. Frequency stride halves (conv) or doubles (tconv) the
// bin count; pad_left = ceil((kf - stride)/2) keeps the ratio exact.
struct ConvDims {
  int c_in = 1;
  int c_out = 1;
  int f_in = 0;   // input bins
  int kt = 2;     // time taps
  int kf = 5;     // frequency taps
  int stride_f = 2;

  int pad_left() const { return (kf - stride_f + 1) / 2; }
  int f_out_conv() const { return f_in / stride_f; }
  int f_out_tconv() const { return f_in * stride_f; }
  size_t weight_numel() const { return size_t(c_out) * c_in * kt * kf; }

  void validate_conv() const {
    require(c_in >= 1 && c_out >= 1 && f_in >= 1, "ConvDims: bad channels/bins");
    require(kt >= 1 && kt <= 2, "ConvDims: time kernel must be 1 or 2");
    require(stride_f >= 1 && kf >= stride_f, "ConvDims: bad freq kernel/stride");
    require(f_in % stride_f == 0, "ConvDims: bins must divide by stride");
  }
};

// Weight layout: w[co][ci][t][k] row-major, t in {0 -> previous frame,
// 1 -> current frame} for kt = 2. x_prev may be null (treated as zeros).

template <typename T>
void conv_frame_forward(const ConvDims& d, const T* w, const NoDeduce<T>* bias,
                        const NoDeduce<T>* x_prev, const T* x_cur, T* y) {
  const int f_out = d.f_out_conv();
  const int pl = d.pad_left();
  for (int co = 0; co < d.c_out; ++co) {
    T* yrow = y + size_t(co) * f_out;
    const T b = bias ? bias[co] : T(0);
    for (int fo = 0; fo < f_out; ++fo) yrow[fo] = b;
    for (int ci = 0; ci < d.c_in; ++ci) {
      for (int t = 0; t < d.kt; ++t) {
        const T* x = (d.kt == 2 && t == 0) ? x_prev : x_cur;
        if (!x) continue;
        const T* xrow = x + size_t(ci) * d.f_in;
        const T* wrow = w + ((size_t(co) * d.c_in + ci) * d.kt + t) * d.kf;
        for (int k = 0; k < d.kf; ++k) {
          const T wk = wrow[k];
          // fi = stride*fo + k - pad_left, clipped to [0, f_in)
          int fo_lo = 0, fo_hi = f_out;
          while (fo_lo < f_out && d.stride_f * fo_lo + k - pl < 0) ++fo_lo;
          while (fo_hi > fo_lo && d.stride_f * (fo_hi - 1) + k - pl >= d.f_in) --fo_hi;
          const T* xs = xrow + (size_t(d.stride_f) * fo_lo + k - pl);
          for (int fo = fo_lo; fo < fo_hi; ++fo, xs += d.stride_f) yrow[fo] += wk * *xs;
        }
      }
    }
  }
}

// Transposed conv along frequency (exact adjoint indexing of the conv):
// input bin fi scatters to output bins stride*fi + k - pad_left.
template <typename T>
void tconv_frame_forward(const ConvDims& d, const T* w, const NoDeduce<T>* bias,
                         const NoDeduce<T>* x_prev, const T* x_cur, T* y) {
  const int f_out = d.f_out_tconv();
  const int pl = d.pad_left();
  for (int co = 0; co < d.c_out; ++co) {
    T* yrow = y + size_t(co) * f_out;
    const T b = bias ? bias[co] : T(0);
    for (int fo = 0; fo < f_out; ++fo) yrow[fo] = b;
    for (int ci = 0; ci < d.c_in; ++ci) {
      for (int t = 0; t < d.kt; ++t) {
        const T* x = (d.kt == 2 && t == 0) ? x_prev : x_cur;
        if (!x) continue;
        const T* xrow = x + size_t(ci) * d.f_in;
        const T* wrow = w + ((size_t(co) * d.c_in + ci) * d.kt + t) * d.kf;
        for (int k = 0; k < d.kf; ++k) {
          const T wk = wrow[k];
          int fi_lo = 0, fi_hi = d.f_in;
          while (fi_lo < d.f_in && d.stride_f * fi_lo + k - pl < 0) ++fi_lo;
          while (fi_hi > fi_lo && d.stride_f * (fi_hi - 1) + k - pl >= f_out) --fi_hi;
          T* ys = yrow + (size_t(d.stride_f) * fi_lo + k - pl);
          const T* xs = xrow + fi_lo;
          for (int fi = fi_lo; fi < fi_hi; ++fi, ys += d.stride_f) *ys += wk * xs[fi - fi_lo];
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Channel-packed conv kernels
// ---------------------------------------------------------------------------

// The direct kernels above run their inner loop along frequency, which
// vectorizes poorly for the deep layers (4..16 bins but hundreds of
// channels). The packed variants flip the reduction onto channels:
// weights are repacked as [co][t][k][ci] and the input frame is
// transposed to [fi][ci] in a reused scratch block, so every tap becomes
// one contiguous dot of length c_in. Same math, different summation
// order; hot paths feed every frame through these.

namespace detail {

// Per-thread transpose scratch, grown once and reused across frames.
template <typename T>
T* conv_scratch(size_t n) {
  static thread_local std::vector<T> buf;
  if (buf.size() < n) buf.resize(n);
  return buf.data();
}

// Writes a [c, f] frame into dst transposed to [f, c].
template <typename T>
void transpose_frame(const T* x, int c, int f, T* dst) {
  for (int ci = 0; ci < c; ++ci) {
    const T* row = x + size_t(ci) * f;
    for (int fi = 0; fi < f; ++fi) dst[size_t(fi) * c + ci] = row[fi];
  }
}

}  // namespace detail

// Repacks a [co][ci][t][k] weight tensor as [co][t][k][ci].
template <typename T>
std::vector<T> pack_conv_weights(const ConvDims& d, const T* w) {
  std::vector<T> wp(d.weight_numel());
  for (int co = 0; co < d.c_out; ++co)
    for (int ci = 0; ci < d.c_in; ++ci)
      for (int t = 0; t < d.kt; ++t)
        for (int k = 0; k < d.kf; ++k)
          wp[((size_t(co) * d.kt + t) * d.kf + k) * d.c_in + ci] =
              w[((size_t(co) * d.c_in + ci) * d.kt + t) * d.kf + k];
  return wp;
}

// conv_frame_forward with wp in [co][t][k][ci] order.
template <typename T>
void conv_frame_forward_packed(const ConvDims& d, const T* wp, const NoDeduce<T>* bias,
                               const NoDeduce<T>* x_prev, const T* x_cur, T* y) {
  const int f_out = d.f_out_conv();
  const int pl = d.pad_left();
  const int C = d.c_in, F = d.f_in;
  T* scratch = detail::conv_scratch<T>(size_t(d.kt) * F * C);
  const T* xt[2] = {nullptr, nullptr};
  for (int t = 0; t < d.kt; ++t) {
    const T* x = (d.kt == 2 && t == 0) ? x_prev : x_cur;
    if (!x) continue;
    T* dst = scratch + size_t(t) * F * C;
    detail::transpose_frame(x, C, F, dst);
    xt[t] = dst;
  }
  for (int co = 0; co < d.c_out; ++co) {
    T* yrow = y + size_t(co) * f_out;
    const T* wco = wp + size_t(co) * d.kt * d.kf * C;
    const T b = bias ? bias[co] : T(0);
    for (int fo = 0; fo < f_out; ++fo) {
      T acc = b;
      for (int t = 0; t < d.kt; ++t) {
        if (!xt[t]) continue;
        const T* wt = wco + size_t(t) * d.kf * C;
        for (int k = 0; k < d.kf; ++k) {
          const int fi = d.stride_f * fo + k - pl;
          if (fi < 0 || fi >= F) continue;
          acc += detail::dot(wt + size_t(k) * C, xt[t] + size_t(fi) * C, size_t(C));
        }
      }
      yrow[fo] = acc;
    }
  }
}

// tconv_frame_forward with wp in [co][t][k][ci] order. Gathers instead of
// scattering: output bin fo collects from input bins fi with
// stride * fi + k - pad_left == fo.
template <typename T>
void tconv_frame_forward_packed(const ConvDims& d, const T* wp, const NoDeduce<T>* bias,
                                const NoDeduce<T>* x_prev, const T* x_cur, T* y) {
  const int f_out = d.f_out_tconv();
  const int pl = d.pad_left();
  const int C = d.c_in, F = d.f_in;
  T* scratch = detail::conv_scratch<T>(size_t(d.kt) * F * C);
  const T* xt[2] = {nullptr, nullptr};
  for (int t = 0; t < d.kt; ++t) {
    const T* x = (d.kt == 2 && t == 0) ? x_prev : x_cur;
    if (!x) continue;
    T* dst = scratch + size_t(t) * F * C;
    detail::transpose_frame(x, C, F, dst);
    xt[t] = dst;
  }
  for (int co = 0; co < d.c_out; ++co) {
    T* yrow = y + size_t(co) * f_out;
    const T* wco = wp + size_t(co) * d.kt * d.kf * C;
    const T b = bias ? bias[co] : T(0);
    for (int fo = 0; fo < f_out; ++fo) {
      T acc = b;
      for (int t = 0; t < d.kt; ++t) {
        if (!xt[t]) continue;
        const T* wt = wco + size_t(t) * d.kf * C;
        for (int k = 0; k < d.kf; ++k) {
          const int num = fo - k + pl;  // stride * fi
          if (num < 0 || num % d.stride_f != 0) continue;
          const int fi = num / d.stride_f;
          if (fi >= F) continue;
          acc += detail::dot(wt + size_t(k) * C, xt[t] + size_t(fi) * C, size_t(C));
        }
      }
      yrow[fo] = acc;
    }
  }
}

// Backward of conv_frame_forward for one output frame. Accumulates into
// dx_prev/dx_cur/dw/dbias (callers zero them once per sequence).
template <typename T>
void conv_frame_backward(const ConvDims& d, const T* w, const NoDeduce<T>* x_prev,
                         const T* x_cur, const T* dy, NoDeduce<T>* dx_prev,
                         NoDeduce<T>* dx_cur, NoDeduce<T>* dw, NoDeduce<T>* dbias) {
  const int f_out = d.f_out_conv();
  const int pl = d.pad_left();
  for (int co = 0; co < d.c_out; ++co) {
    const T* dyrow = dy + size_t(co) * f_out;
    if (dbias) {
      T acc = T(0);
      for (int fo = 0; fo < f_out; ++fo) acc += dyrow[fo];
      dbias[co] += acc;
    }
    for (int ci = 0; ci < d.c_in; ++ci) {
      for (int t = 0; t < d.kt; ++t) {
        const T* x = (d.kt == 2 && t == 0) ? x_prev : x_cur;
        T* dx = (d.kt == 2 && t == 0) ? dx_prev : dx_cur;
        const T* xrow = x ? x + size_t(ci) * d.f_in : nullptr;
        T* dxrow = dx ? dx + size_t(ci) * d.f_in : nullptr;
        const size_t wbase = ((size_t(co) * d.c_in + ci) * d.kt + t) * d.kf;
        for (int k = 0; k < d.kf; ++k) {
          int fo_lo = 0, fo_hi = f_out;
          while (fo_lo < f_out && d.stride_f * fo_lo + k - pl < 0) ++fo_lo;
          while (fo_hi > fo_lo && d.stride_f * (fo_hi - 1) + k - pl >= d.f_in) --fo_hi;
          const size_t xoff = size_t(d.stride_f) * fo_lo + k - pl;
          if (dw && xrow) {
            T acc = T(0);
            const T* xs = xrow + xoff;
            for (int fo = fo_lo; fo < fo_hi; ++fo, xs += d.stride_f) acc += dyrow[fo] * *xs;
            dw[wbase + k] += acc;
          }
          if (dxrow) {
            const T wk = w[wbase + k];
            T* dxs = dxrow + xoff;
            for (int fo = fo_lo; fo < fo_hi; ++fo, dxs += d.stride_f) *dxs += wk * dyrow[fo];
          }
        }
      }
    }
  }
}

template <typename T>
void tconv_frame_backward(const ConvDims& d, const T* w, const NoDeduce<T>* x_prev,
                          const T* x_cur, const T* dy, NoDeduce<T>* dx_prev,
                          NoDeduce<T>* dx_cur, NoDeduce<T>* dw, NoDeduce<T>* dbias) {
  const int f_out = d.f_out_tconv();
  const int pl = d.pad_left();
  for (int co = 0; co < d.c_out; ++co) {
    const T* dyrow = dy + size_t(co) * f_out;
    if (dbias) {
      T acc = T(0);
      for (int fo = 0; fo < f_out; ++fo) acc += dyrow[fo];
      dbias[co] += acc;
    }
    for (int ci = 0; ci < d.c_in; ++ci) {
      for (int t = 0; t < d.kt; ++t) {
        const T* x = (d.kt == 2 && t == 0) ? x_prev : x_cur;
        T* dx = (d.kt == 2 && t == 0) ? dx_prev : dx_cur;
        const T* xrow = x ? x + size_t(ci) * d.f_in : nullptr;
        T* dxrow = dx ? dx + size_t(ci) * d.f_in : nullptr;
        const size_t wbase = ((size_t(co) * d.c_in + ci) * d.kt + t) * d.kf;
        for (int k = 0; k < d.kf; ++k) {
          int fi_lo = 0, fi_hi = d.f_in;
          while (fi_lo < d.f_in && d.stride_f * fi_lo + k - pl < 0) ++fi_lo;
          while (fi_hi > fi_lo && d.stride_f * (fi_hi - 1) + k - pl >= f_out) --fi_hi;
          const size_t yoff = size_t(d.stride_f) * fi_lo + k - pl;
          if (dw && xrow) {
            T acc = T(0);
            const T* dys = dyrow + yoff;
            for (int fi = fi_lo; fi < fi_hi; ++fi, dys += d.stride_f) acc += *dys * xrow[fi];
            dw[wbase + k] += acc;
          }
          if (dxrow) {
            const T wk = w[wbase + k];
            const T* dys = dyrow + yoff;
            for (int fi = fi_lo; fi < fi_hi; ++fi, dys += d.stride_f) dxrow[fi] += wk * *dys;
          }
        }
      }
    }
  }
}

// PReLU with one learned slope per layer.
template <typename T>
void prelu_forward(const T* pre, T* out, size_t n, T alpha) {
  for (size_t i = 0; i < n; ++i) out[i] = pre[i] >= T(0) ? pre[i] : alpha * pre[i];
}

template <typename T>
void prelu_backward(const T* pre, const T* dout, T* dpre, size_t n, T alpha,
                    NoDeduce<T>* dalpha) {
  T acc = T(0);
  for (size_t i = 0; i < n; ++i) {
    if (pre[i] >= T(0)) {
      dpre[i] = dout[i];
    } else {
      dpre[i] = alpha * dout[i];
      acc += pre[i] * dout[i];
    }
  }
  if (dalpha) *dalpha += acc;
}

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

struct LstmDims {
  int input = 0;
  int hidden = 0;
};

// Gate order in weights/biases: [i, f, g, o], each a block of `hidden` rows.
// w_ih is [4H, D], w_hh is [4H, H], single bias [4H].
template <typename T>
struct LstmWeights {
  const T* w_ih;
  const T* w_hh;
  const T* bias;
};

// One step. h/c are carried in place; gates (4H values, post-activation)
// are recorded when a trace pointer is given.
template <typename T>
void lstm_cell_forward(const LstmDims& d, const LstmWeights<T>& w, const T* x,
                       T* h, T* c, NoDeduce<T>* gates_trace) {
  const int H = d.hidden, D = d.input;
  std::vector<T> z(size_t(4) * H);
  for (int r = 0; r < 4 * H; ++r) {
    const T* wi = w.w_ih + size_t(r) * D;
    const T* wh = w.w_hh + size_t(r) * H;
    T acc = w.bias ? w.bias[r] : T(0);
    acc += detail::dot(wi, x, size_t(D));
    acc += detail::dot(wh, h, size_t(H));
    z[r] = acc;
  }
  for (int j = 0; j < H; ++j) {
    T ig = T(1) / (T(1) + std::exp(-z[j]));
    T fg = T(1) / (T(1) + std::exp(-z[H + j]));
    T gg = std::tanh(z[2 * H + j]);
    T og = T(1) / (T(1) + std::exp(-z[3 * H + j]));
    T cn = fg * c[j] + ig * gg;
    c[j] = cn;
    h[j] = og * std::tanh(cn);
    if (gates_trace) {
      gates_trace[j] = ig;
      gates_trace[H + j] = fg;
      gates_trace[2 * H + j] = gg;
      gates_trace[3 * H + j] = og;
    }
  }
}

// Full-sequence forward used by training. x is [T, D]; h_out is [T, H];
// gates/cells are [T, 4H] / [T, H] traces for BPTT. h/c carry state.
template <typename T>
void lstm_seq_forward(const LstmDims& d, const LstmWeights<T>& w, const T* x, int steps,
                      T* h, T* c, T* h_out, NoDeduce<T>* gates, NoDeduce<T>* cells) {
  for (int t = 0; t < steps; ++t) {
    lstm_cell_forward(d, w, x + size_t(t) * d.input, h, c,
                      gates ? gates + size_t(t) * 4 * d.hidden : nullptr);
    std::memcpy(h_out + size_t(t) * d.hidden, h, sizeof(T) * d.hidden);
    if (cells) std::memcpy(cells + size_t(t) * d.hidden, c, sizeof(T) * d.hidden);
  }
}

// Backward through time over a full sequence that started from zero state.
// dh_out is [T, H] upstream gradient; dx ([T, D]) and the weight gradients
// are accumulated.
template <typename T>
void lstm_seq_backward(const LstmDims& d, const LstmWeights<T>& w, const T* x, int steps,
                       const T* h_out, const T* gates, const T* cells, const T* dh_out,
                       NoDeduce<T>* dx, NoDeduce<T>* dw_ih, NoDeduce<T>* dw_hh,
                       NoDeduce<T>* dbias) {
  const int H = d.hidden, D = d.input;
  std::vector<T> dh(H, T(0)), dc(H, T(0)), dz(size_t(4) * H);
  for (int t = steps - 1; t >= 0; --t) {
    const T* g = gates + size_t(t) * 4 * H;
    const T* c_t = cells + size_t(t) * H;
    const T* c_prev_v = (t > 0) ? cells + size_t(t - 1) * H : nullptr;
    const T* h_prev = (t > 0) ? h_out + size_t(t - 1) * H : nullptr;
    for (int j = 0; j < H; ++j) {
      T dhj = dh[j] + dh_out[size_t(t) * H + j];
      T ig = g[j], fg = g[H + j], gg = g[2 * H + j], og = g[3 * H + j];
      T tc = std::tanh(c_t[j]);
      T dcj = dc[j] + dhj * og * (T(1) - tc * tc);
      T c_prev = c_prev_v ? c_prev_v[j] : T(0);
      dz[j] = dcj * gg * ig * (T(1) - ig);                 // input gate
      dz[H + j] = dcj * c_prev * fg * (T(1) - fg);         // forget gate
      dz[2 * H + j] = dcj * ig * (T(1) - gg * gg);         // candidate
      dz[3 * H + j] = dhj * tc * og * (T(1) - og);         // output gate
      dc[j] = dcj * fg;
      dh[j] = T(0);
    }
    const T* x_t = x + size_t(t) * D;
    T* dx_t = dx ? dx + size_t(t) * D : nullptr;
    for (int r = 0; r < 4 * H; ++r) {
      const T dzr = dz[r];
      if (dzr == T(0)) continue;
      if (dw_ih) {
        T* row = dw_ih + size_t(r) * D;
        for (int j = 0; j < D; ++j) row[j] += dzr * x_t[j];
      }
      if (dw_hh && h_prev) {
        T* row = dw_hh + size_t(r) * H;
        for (int j = 0; j < H; ++j) row[j] += dzr * h_prev[j];
      }
      if (dbias) dbias[r] += dzr;
      if (dx_t) {
        const T* wi = w.w_ih + size_t(r) * D;
        for (int j = 0; j < D; ++j) dx_t[j] += dzr * wi[j];
      }
      if (t > 0) {
        const T* wh = w.w_hh + size_t(r) * H;
        for (int j = 0; j < H; ++j) dh[j] += dzr * wh[j];
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

// y = W x + b with W [out, in].
template <typename T>
void linear_forward(const T* w, const NoDeduce<T>* b, int in, int out, const T* x, T* y) {
  for (int r = 0; r < out; ++r) {
    const T* row = w + size_t(r) * in;
    y[r] = (b ? b[r] : T(0)) + detail::dot(row, x, size_t(in));
  }
}

template <typename T>
void linear_backward(const T* w, int in, int out, const T* x, const T* dy, NoDeduce<T>* dx,
                     NoDeduce<T>* dw, NoDeduce<T>* db) {
  for (int r = 0; r < out; ++r) {
    const T d = dy[r];
    if (db) db[r] += d;
    if (dw) {
      T* row = dw + size_t(r) * in;
      for (int j = 0; j < in; ++j) row[j] += d * x[j];
    }
    if (dx) {
      const T* row = w + size_t(r) * in;
      for (int j = 0; j < in; ++j) dx[j] += d * row[j];
    }
  }
}

}  // namespace dctcrn
