#pragma once

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "dctcrn/common.h"
#include "dctcrn/layers.h"
#include "dctcrn/mask.h"
#include "dctcrn/rng.h"
#include "dctcrn/tensor.h"

namespace dctcrn {

// Convolutional-recurrent mask estimator. Encoder convs halve the bin count
// per layer, a stacked LSTM runs over the flattened top of the encoder, and
// transposed convs mirror the encoder back up to one logit per bin. Skip
// connections concatenate each encoder output onto the matching decoder
// input channelwise. All time handling is causal: frame t of any layer
// depends on input frames t-1 and t only.

struct ModelConfig {
  int input_bins = 512;
  std::vector<int> encoder_channels = {8, 16, 32, 64, 128, 128, 256};
  std::vector<int> decoder_channels = {128, 128, 64, 32, 16, 8, 1};
  int kernel_t = 2;
  int kernel_f = 5;
  int stride_f = 2;
  int lstm_layers = 2;
  int lstm_hidden = 256;
  MaskVariant mask_variant = MaskVariant::PReLU;

  int depth() const { return int(encoder_channels.size()); }

  // Bin count at the input of encoder layer i (i = depth() gives the top).
  int bins_at(int i) const {
    int b = input_bins;
    for (int k = 0; k < i; ++k) b /= stride_f;
    return b;
  }

  int bottleneck_dim() const { return encoder_channels.back() * bins_at(depth()); }

  ConvDims enc_dims(int i) const {
    ConvDims d;
    d.c_in = i == 0 ? 1 : encoder_channels[i - 1];
    d.c_out = encoder_channels[i];
    d.f_in = bins_at(i);
    d.kt = kernel_t;
    d.kf = kernel_f;
    d.stride_f = stride_f;
    return d;
  }

  // Channels arriving at decoder layer i along the main path (before the
  // skip concat doubles them up).
  int dec_path_channels(int i) const {
    return i == 0 ? encoder_channels.back() : decoder_channels[i - 1];
  }

  // Encoder layer whose output is concatenated at decoder layer i.
  int skip_source(int i) const { return depth() - 1 - i; }

  ConvDims dec_dims(int i) const {
    ConvDims d;
    d.c_in = dec_path_channels(i) + encoder_channels[skip_source(i)];
    d.c_out = decoder_channels[i];
    d.f_in = bins_at(depth() - i);
    d.kt = kernel_t;
    d.kf = kernel_f;
    d.stride_f = stride_f;
    return d;
  }

  void validate() const {
    require(!encoder_channels.empty(), "ModelConfig: empty encoder");
    require(encoder_channels.size() == decoder_channels.size(),
            "ModelConfig: encoder/decoder depth mismatch");
    require(decoder_channels.back() == 1, "ModelConfig: final decoder channel must be 1");
    require(lstm_layers >= 1 && lstm_hidden >= 1, "ModelConfig: bad LSTM shape");
    require(kernel_t >= 1 && kernel_t <= 2, "ModelConfig: time kernel must be 1 or 2");
    require(kernel_f >= stride_f && stride_f >= 1, "ModelConfig: bad freq kernel/stride");
    int b = input_bins;
    for (int i = 0; i < depth(); ++i) {
      require(b % stride_f == 0 && b >= stride_f,
              "ModelConfig: bins not divisible through all layers");
      enc_dims(i).validate_conv();
      b /= stride_f;
    }
    for (int i = 0; i < depth(); ++i) dec_dims(i).validate_conv();
  }
};

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

// Entry order is fixed (encoder, LSTM stack, projection, decoder, mask) and
// doubles as the serialization order.
template <typename T>
ParameterSet<T> param_slots(const ModelConfig& cfg) {
  cfg.validate();
  ParameterSet<T> p;
  for (int i = 0; i < cfg.depth(); ++i) {
    const ConvDims d = cfg.enc_dims(i);
    const std::string base = "enc" + std::to_string(i);
    p.add(base + ".weight", {d.c_out, d.c_in, d.kt, d.kf});
    p.add(base + ".bias", {d.c_out});
    p.add(base + ".alpha", {1});
  }
  int lstm_in = cfg.bottleneck_dim();
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    const int H = cfg.lstm_hidden;
    const std::string base = "lstm" + std::to_string(l);
    p.add(base + ".w_ih", {4 * H, lstm_in});
    p.add(base + ".w_hh", {4 * H, H});
    p.add(base + ".bias", {4 * H});
    lstm_in = H;
  }
  p.add("proj.weight", {cfg.bottleneck_dim(), cfg.lstm_hidden});
  p.add("proj.bias", {cfg.bottleneck_dim()});
  for (int i = 0; i < cfg.depth(); ++i) {
    const ConvDims d = cfg.dec_dims(i);
    const std::string base = "dec" + std::to_string(i);
    p.add(base + ".weight", {d.c_out, d.c_in, d.kt, d.kf});
    p.add(base + ".bias", {d.c_out});
    if (i + 1 < cfg.depth()) p.add(base + ".alpha", {1});
  }
  if (cfg.mask_variant == MaskVariant::PReLU) p.add("mask.alpha", {1});
  return p;
}

// Checks that a parameter set matches the slots this config expects, name
// for name and shape for shape.
template <typename T>
void validate_params(const ModelConfig& cfg, const ParameterSet<T>& params) {
  const ParameterSet<T> want = param_slots<T>(cfg);
  if (params.entries.size() != want.entries.size())
    throw std::invalid_argument("parameter set holds " + std::to_string(params.entries.size()) +
                                " tensors, model config needs " +
                                std::to_string(want.entries.size()));
  for (const auto& e : want.entries) {
    if (!params.has(e.name)) throw std::invalid_argument("parameter set missing tensor: " + e.name);
    if (params.get(e.name).shape != e.tensor.shape)
      throw std::invalid_argument("tensor " + e.name + " has the wrong shape for this config");
  }
}

template <typename T>
ParameterSet<T> init_params(const ModelConfig& cfg, uint64_t seed) {
  ParameterSet<T> p = param_slots<T>(cfg);
  Rng rng(seed);
  auto fill_uniform = [&](Tensor<T>& t, double bound) {
    for (auto& v : t.data) v = T(rng.uniform(-bound, bound));
  };

  for (int i = 0; i < cfg.depth(); ++i) {
    const ConvDims d = cfg.enc_dims(i);
    const std::string base = "enc" + std::to_string(i);
    fill_uniform(p.get(base + ".weight"), std::sqrt(6.0 / (double(d.c_in) * d.kt * d.kf)));
    p.get(base + ".alpha").fill(T(0.25));
  }

  for (int l = 0; l < cfg.lstm_layers; ++l) {
    const int H = cfg.lstm_hidden;
    const std::string base = "lstm" + std::to_string(l);
    const double bound = 1.0 / std::sqrt(double(H));
    fill_uniform(p.get(base + ".w_ih"), bound);
    fill_uniform(p.get(base + ".w_hh"), bound);
    auto& b = p.get(base + ".bias");
    fill_uniform(b, bound);
    // Bias the forget gate open so early training keeps long-range state.
    for (int j = H; j < 2 * H; ++j) b.data[j] = T(1);
  }

  {
    const double bound = 1.0 / std::sqrt(double(cfg.lstm_hidden));
    fill_uniform(p.get("proj.weight"), bound);
    fill_uniform(p.get("proj.bias"), bound);
  }

  for (int i = 0; i < cfg.depth(); ++i) {
    const ConvDims d = cfg.dec_dims(i);
    const std::string base = "dec" + std::to_string(i);
    fill_uniform(p.get(base + ".weight"), std::sqrt(6.0 / (double(d.c_in) * d.kt * d.kf)));
    if (i + 1 < cfg.depth()) p.get(base + ".alpha").fill(T(0.25));
  }

  if (cfg.mask_variant == MaskVariant::PReLU) p.get("mask.alpha").fill(T(0.25));
  return p;
}

// ---------------------------------------------------------------------------
// Streaming state and scratch
// ---------------------------------------------------------------------------

// Everything a live session carries between frames: the previous input
// frame of every conv layer (zeros mean "before the start") and the LSTM
// hidden/cell vectors.
template <typename T>
struct StreamState {
  std::vector<std::vector<T>> enc_prev;
  std::vector<std::vector<T>> dec_prev;
  std::vector<std::vector<T>> h, c;

  void reset() {
    for (auto& v : enc_prev) std::fill(v.begin(), v.end(), T(0));
    for (auto& v : dec_prev) std::fill(v.begin(), v.end(), T(0));
    for (auto& v : h) std::fill(v.begin(), v.end(), T(0));
    for (auto& v : c) std::fill(v.begin(), v.end(), T(0));
  }
};

template <typename T>
StreamState<T> make_stream_state(const ModelConfig& cfg) {
  StreamState<T> st;
  for (int i = 0; i < cfg.depth(); ++i) {
    const ConvDims e = cfg.enc_dims(i);
    st.enc_prev.emplace_back(size_t(e.c_in) * e.f_in, T(0));
    const ConvDims d = cfg.dec_dims(i);
    st.dec_prev.emplace_back(size_t(d.c_in) * d.f_in, T(0));
  }
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    st.h.emplace_back(cfg.lstm_hidden, T(0));
    st.c.emplace_back(cfg.lstm_hidden, T(0));
  }
  return st;
}

// Per-frame buffers reused across steps so the hot path never allocates.
template <typename T>
struct ModelWorkspace {
  std::vector<std::vector<T>> enc_pre, enc_out;
  std::vector<std::vector<T>> dec_in, dec_pre, dec_out;
  std::vector<T> proj_out;
};

// Conv weights repacked to [co][t][k][ci] for the channel-dot kernels.
// Rebuild whenever the parameters change; sessions build once, batch
// forward builds per call.
template <typename T>
struct PackedConvs {
  std::vector<std::vector<T>> enc, dec;
};

template <typename T>
PackedConvs<T> pack_convs(const ModelConfig& cfg, const ParameterSet<T>& params) {
  PackedConvs<T> p;
  for (int i = 0; i < cfg.depth(); ++i) {
    const std::string idx = std::to_string(i);
    p.enc.push_back(pack_conv_weights(cfg.enc_dims(i), params.get("enc" + idx + ".weight").ptr()));
    p.dec.push_back(pack_conv_weights(cfg.dec_dims(i), params.get("dec" + idx + ".weight").ptr()));
  }
  return p;
}

template <typename T>
ModelWorkspace<T> make_workspace(const ModelConfig& cfg) {
  ModelWorkspace<T> ws;
  for (int i = 0; i < cfg.depth(); ++i) {
    const ConvDims e = cfg.enc_dims(i);
    ws.enc_pre.emplace_back(size_t(e.c_out) * e.f_out_conv());
    ws.enc_out.emplace_back(size_t(e.c_out) * e.f_out_conv());
    const ConvDims d = cfg.dec_dims(i);
    ws.dec_in.emplace_back(size_t(d.c_in) * d.f_in);
    ws.dec_pre.emplace_back(size_t(d.c_out) * d.f_out_tconv());
    ws.dec_out.emplace_back(size_t(d.c_out) * d.f_out_tconv());
  }
  ws.proj_out.resize(cfg.bottleneck_dim());
  return ws;
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

// Intermediates recorded during a traced forward pass, one row per frame.
template <typename T>
struct ForwardTrace {
  Mat<T> input;
  std::vector<Mat<T>> enc_pre, enc_out;
  std::vector<Mat<T>> lstm_h, lstm_gates, lstm_cells;
  Mat<T> proj_out;
  std::vector<Mat<T>> dec_in, dec_pre, dec_out;
};

template <typename T>
ForwardTrace<T> make_trace(const ModelConfig& cfg, int frames) {
  ForwardTrace<T> tr;
  tr.input = Mat<T>(frames, cfg.input_bins);
  for (int i = 0; i < cfg.depth(); ++i) {
    const ConvDims e = cfg.enc_dims(i);
    tr.enc_pre.emplace_back(frames, e.c_out * e.f_out_conv());
    tr.enc_out.emplace_back(frames, e.c_out * e.f_out_conv());
    const ConvDims d = cfg.dec_dims(i);
    tr.dec_in.emplace_back(frames, d.c_in * d.f_in);
    tr.dec_pre.emplace_back(frames, d.c_out * d.f_out_tconv());
    // The last decoder layer emits logits with no activation, so its
    // post-activation buffer is never populated.
    tr.dec_out.emplace_back(frames, i + 1 < cfg.depth() ? d.c_out * d.f_out_tconv() : 0);
  }
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    tr.lstm_h.emplace_back(frames, cfg.lstm_hidden);
    tr.lstm_gates.emplace_back(frames, 4 * cfg.lstm_hidden);
    tr.lstm_cells.emplace_back(frames, cfg.lstm_hidden);
  }
  tr.proj_out = Mat<T>(frames, cfg.bottleneck_dim());
  return tr;
}

// Process one input frame (`frame_in`, input_bins coefficients) into one
// frame of mask logits. Batch forward and the streaming session both come
// through here, so the two paths produce bit-identical output.
template <typename T>
void model_step(const ModelConfig& cfg, const ParameterSet<T>& params,
                const PackedConvs<T>& packed, StreamState<T>& st, ModelWorkspace<T>& ws,
                const T* frame_in, T* logits_out, ForwardTrace<T>* trace = nullptr, int t = 0) {
  const int depth = cfg.depth();

  const T* cur = frame_in;
  for (int i = 0; i < depth; ++i) {
    const ConvDims d = cfg.enc_dims(i);
    const std::string base = "enc" + std::to_string(i);
    const auto& b = params.get(base + ".bias");
    const T alpha = params.get(base + ".alpha").data[0];
    conv_frame_forward_packed(d, packed.enc[i].data(), b.ptr(), st.enc_prev[i].data(), cur,
                              ws.enc_pre[i].data());
    prelu_forward(ws.enc_pre[i].data(), ws.enc_out[i].data(), ws.enc_pre[i].size(), alpha);
    std::memcpy(st.enc_prev[i].data(), cur, sizeof(T) * st.enc_prev[i].size());
    if (trace) {
      std::memcpy(trace->enc_pre[i].row(t), ws.enc_pre[i].data(), sizeof(T) * ws.enc_pre[i].size());
      std::memcpy(trace->enc_out[i].row(t), ws.enc_out[i].data(), sizeof(T) * ws.enc_out[i].size());
    }
    cur = ws.enc_out[i].data();
  }

  // Bottleneck: the top encoder frame, viewed flat, drives the LSTM stack.
  const T* lstm_in = cur;
  int lstm_in_dim = cfg.bottleneck_dim();
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    const std::string base = "lstm" + std::to_string(l);
    LstmWeights<T> w{params.get(base + ".w_ih").ptr(), params.get(base + ".w_hh").ptr(),
                     params.get(base + ".bias").ptr()};
    lstm_cell_forward(LstmDims{lstm_in_dim, cfg.lstm_hidden}, w, lstm_in, st.h[l].data(),
                      st.c[l].data(), trace ? trace->lstm_gates[l].row(t) : nullptr);
    if (trace) {
      std::memcpy(trace->lstm_h[l].row(t), st.h[l].data(), sizeof(T) * st.h[l].size());
      std::memcpy(trace->lstm_cells[l].row(t), st.c[l].data(), sizeof(T) * st.c[l].size());
    }
    lstm_in = st.h[l].data();
    lstm_in_dim = cfg.lstm_hidden;
  }
  linear_forward(params.get("proj.weight").ptr(), params.get("proj.bias").ptr(),
                 cfg.lstm_hidden, cfg.bottleneck_dim(), lstm_in, ws.proj_out.data());
  if (trace)
    std::memcpy(trace->proj_out.row(t), ws.proj_out.data(), sizeof(T) * ws.proj_out.size());

  const T* path = ws.proj_out.data();
  for (int i = 0; i < depth; ++i) {
    const ConvDims d = cfg.dec_dims(i);
    const std::string base = "dec" + std::to_string(i);
    const size_t path_n = size_t(cfg.dec_path_channels(i)) * d.f_in;
    const auto& skip = ws.enc_out[cfg.skip_source(i)];
    std::memcpy(ws.dec_in[i].data(), path, sizeof(T) * path_n);
    std::memcpy(ws.dec_in[i].data() + path_n, skip.data(), sizeof(T) * skip.size());

    T* out = (i + 1 < depth) ? ws.dec_pre[i].data() : logits_out;
    tconv_frame_forward_packed(d, packed.dec[i].data(), params.get(base + ".bias").ptr(),
                               st.dec_prev[i].data(), ws.dec_in[i].data(), out);
    std::memcpy(st.dec_prev[i].data(), ws.dec_in[i].data(), sizeof(T) * ws.dec_in[i].size());
    if (trace) {
      std::memcpy(trace->dec_in[i].row(t), ws.dec_in[i].data(), sizeof(T) * ws.dec_in[i].size());
      std::memcpy(trace->dec_pre[i].row(t), out, sizeof(T) * size_t(d.c_out) * d.f_out_tconv());
    }
    if (i + 1 < depth) {
      const T alpha = params.get(base + ".alpha").data[0];
      prelu_forward(ws.dec_pre[i].data(), ws.dec_out[i].data(), ws.dec_pre[i].size(), alpha);
      if (trace)
        std::memcpy(trace->dec_out[i].row(t), ws.dec_out[i].data(),
                    sizeof(T) * ws.dec_out[i].size());
      path = ws.dec_out[i].data();
    }
  }
}

// Full-sequence forward from a fresh state. x is [frames, input_bins];
// returns mask logits of the same shape.
template <typename T>
Mat<T> model_forward(const ModelConfig& cfg, const ParameterSet<T>& params, const Mat<T>& x,
                     ForwardTrace<T>* trace = nullptr) {
  require(x.cols == cfg.input_bins, "model_forward: frame width != input_bins");
  const PackedConvs<T> packed = pack_convs(cfg, params);
  StreamState<T> st = make_stream_state<T>(cfg);
  ModelWorkspace<T> ws = make_workspace<T>(cfg);
  if (trace) {
    *trace = make_trace<T>(cfg, x.rows);
    trace->input = x;
  }
  Mat<T> logits(x.rows, cfg.input_bins);
  for (int t = 0; t < x.rows; ++t)
    model_step(cfg, params, packed, st, ws, x.row(t), logits.row(t), trace, t);
  return logits;
}

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

// Reverse pass over a traced forward. Parameter gradients accumulate into
// `grads` (same entry layout as the parameters); pass d_input to also get
// the gradient with respect to the input frames.
template <typename T>
void model_backward(const ModelConfig& cfg, const ParameterSet<T>& params,
                    const ForwardTrace<T>& trace, const Mat<T>& d_logits, ParameterSet<T>& grads,
                    Mat<T>* d_input = nullptr) {
  const int depth = cfg.depth();
  const int frames = trace.input.rows;
  require(d_logits.rows == frames && d_logits.cols == cfg.input_bins,
          "model_backward: gradient shape mismatch");

  std::vector<Mat<T>> d_enc_out, d_dec_out;
  for (int i = 0; i < depth; ++i) {
    const ConvDims e = cfg.enc_dims(i);
    d_enc_out.emplace_back(frames, e.c_out * e.f_out_conv());
    const ConvDims d = cfg.dec_dims(i);
    d_dec_out.emplace_back(frames, d.c_out * d.f_out_tconv());
  }

  // Decoder, last layer first. d_dec_out[i] holds the upstream gradient on
  // layer i's post-activation output (for the last layer, on the logits).
  d_dec_out[depth - 1] = d_logits;
  Mat<T> d_bottleneck(frames, cfg.bottleneck_dim());
  for (int i = depth - 1; i >= 0; --i) {
    const ConvDims d = cfg.dec_dims(i);
    const std::string base = "dec" + std::to_string(i);
    Mat<T> d_pre(frames, d.c_out * d.f_out_tconv());
    if (i + 1 < depth) {
      prelu_backward(trace.dec_pre[i].v.data(), d_dec_out[i].v.data(), d_pre.v.data(),
                     d_pre.v.size(), params.get(base + ".alpha").data[0],
                     &grads.get(base + ".alpha").data[0]);
    } else {
      d_pre = d_dec_out[i];
    }
    Mat<T> d_in(frames, d.c_in * d.f_in);
    T* dw = grads.get(base + ".weight").ptr();
    T* db = grads.get(base + ".bias").ptr();
    for (int t = frames - 1; t >= 0; --t) {
      tconv_frame_backward(d, params.get(base + ".weight").ptr(),
                           t > 0 ? trace.dec_in[i].row(t - 1) : nullptr, trace.dec_in[i].row(t),
                           d_pre.row(t), t > 0 ? d_in.row(t - 1) : nullptr, d_in.row(t), dw, db);
    }
    // Split the concat gradient back into the main path and the skip.
    const size_t path_n = size_t(cfg.dec_path_channels(i)) * d.f_in;
    Mat<T>& d_path = (i == 0) ? d_bottleneck : d_dec_out[i - 1];
    Mat<T>& d_skip = d_enc_out[cfg.skip_source(i)];
    for (int t = 0; t < frames; ++t) {
      const T* src = d_in.row(t);
      T* p = d_path.row(t);
      for (size_t j = 0; j < path_n; ++j) p[j] += src[j];
      T* s = d_skip.row(t);
      const size_t skip_n = d_skip.v.size() / frames;
      for (size_t j = 0; j < skip_n; ++j) s[j] += src[path_n + j];
    }
  }

  // Bottleneck: projection, then BPTT down the LSTM stack.
  std::vector<Mat<T>> d_h;
  for (int l = 0; l < cfg.lstm_layers; ++l) d_h.emplace_back(frames, cfg.lstm_hidden);
  {
    const auto& w = params.get("proj.weight");
    T* dw = grads.get("proj.weight").ptr();
    T* db = grads.get("proj.bias").ptr();
    const Mat<T>& h_top = trace.lstm_h[cfg.lstm_layers - 1];
    for (int t = 0; t < frames; ++t)
      linear_backward(w.ptr(), cfg.lstm_hidden, cfg.bottleneck_dim(), h_top.row(t),
                      d_bottleneck.row(t), d_h[cfg.lstm_layers - 1].row(t), dw, db);
  }
  Mat<T> d_flat(frames, cfg.bottleneck_dim());
  for (int l = cfg.lstm_layers - 1; l >= 0; --l) {
    const std::string base = "lstm" + std::to_string(l);
    const int in_dim = (l == 0) ? cfg.bottleneck_dim() : cfg.lstm_hidden;
    LstmWeights<T> w{params.get(base + ".w_ih").ptr(), params.get(base + ".w_hh").ptr(),
                     params.get(base + ".bias").ptr()};
    const Mat<T>& x_seq = (l == 0) ? trace.enc_out[depth - 1] : trace.lstm_h[l - 1];
    Mat<T>& dx_seq = (l == 0) ? d_flat : d_h[l - 1];
    lstm_seq_backward(LstmDims{in_dim, cfg.lstm_hidden}, w, x_seq.v.data(), frames,
                      trace.lstm_h[l].v.data(), trace.lstm_gates[l].v.data(),
                      trace.lstm_cells[l].v.data(), d_h[l].v.data(), dx_seq.v.data(),
                      grads.get(base + ".w_ih").ptr(), grads.get(base + ".w_hh").ptr(),
                      grads.get(base + ".bias").ptr());
  }
  for (size_t j = 0; j < d_flat.v.size(); ++j) d_enc_out[depth - 1].v[j] += d_flat.v[j];

  // Encoder, top layer first. Conv input gradients land directly in the
  // previous layer's output gradient, joining any skip contributions that
  // the decoder pass already deposited there.
  for (int i = depth - 1; i >= 0; --i) {
    const ConvDims d = cfg.enc_dims(i);
    const std::string base = "enc" + std::to_string(i);
    Mat<T> d_pre(frames, d.c_out * d.f_out_conv());
    prelu_backward(trace.enc_pre[i].v.data(), d_enc_out[i].v.data(), d_pre.v.data(),
                   d_pre.v.size(), params.get(base + ".alpha").data[0],
                   &grads.get(base + ".alpha").data[0]);
    const Mat<T>& x_seq = (i == 0) ? trace.input : trace.enc_out[i - 1];
    Mat<T> d_in_local(frames, d.c_in * d.f_in);
    Mat<T>& d_in = (i == 0) ? d_in_local : d_enc_out[i - 1];
    T* dw = grads.get(base + ".weight").ptr();
    T* db = grads.get(base + ".bias").ptr();
    for (int t = frames - 1; t >= 0; --t) {
      conv_frame_backward(d, params.get(base + ".weight").ptr(),
                          t > 0 ? x_seq.row(t - 1) : nullptr, x_seq.row(t), d_pre.row(t),
                          t > 0 ? d_in.row(t - 1) : nullptr, d_in.row(t), dw, db);
    }
    if (i == 0 && d_input) *d_input = d_in_local;
  }
}

// ---------------------------------------------------------------------------
// Size accounting
// ---------------------------------------------------------------------------

struct LayerStat {
  std::string name;
  size_t params = 0;
  size_t macs_per_frame = 0;  // multiply-accumulates in convs and matmuls
};

inline std::vector<LayerStat> model_layer_stats(const ModelConfig& cfg) {
  std::vector<LayerStat> out;
  for (int i = 0; i < cfg.depth(); ++i) {
    const ConvDims d = cfg.enc_dims(i);
    LayerStat s;
    s.name = "enc" + std::to_string(i);
    s.params = d.weight_numel() + d.c_out + 1;
    s.macs_per_frame = size_t(d.c_out) * d.f_out_conv() * d.c_in * d.kt * d.kf;
    out.push_back(s);
  }
  int lstm_in = cfg.bottleneck_dim();
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    const int H = cfg.lstm_hidden;
    LayerStat s;
    s.name = "lstm" + std::to_string(l);
    s.params = size_t(4) * H * (lstm_in + H + 1);
    s.macs_per_frame = size_t(4) * H * (lstm_in + H);
    out.push_back(s);
    lstm_in = H;
  }
  {
    LayerStat s;
    s.name = "proj";
    s.params = size_t(cfg.bottleneck_dim()) * (cfg.lstm_hidden + 1);
    s.macs_per_frame = size_t(cfg.bottleneck_dim()) * cfg.lstm_hidden;
    out.push_back(s);
  }
  for (int i = 0; i < cfg.depth(); ++i) {
    const ConvDims d = cfg.dec_dims(i);
    LayerStat s;
    s.name = "dec" + std::to_string(i);
    s.params = d.weight_numel() + d.c_out + (i + 1 < cfg.depth() ? 1 : 0);
    s.macs_per_frame = size_t(d.c_in) * d.f_in * d.c_out * d.kt * d.kf;
    out.push_back(s);
  }
  if (cfg.mask_variant == MaskVariant::PReLU) out.push_back({"mask", 1, 0});
  return out;
}

inline size_t model_param_count(const ModelConfig& cfg) {
  size_t n = 0;
  for (const auto& s : model_layer_stats(cfg)) n += s.params;
  return n;
}

inline size_t model_macs_per_frame(const ModelConfig& cfg) {
  size_t n = 0;
  for (const auto& s : model_layer_stats(cfg)) n += s.macs_per_frame;
  return n;
}

}  // namespace dctcrn
