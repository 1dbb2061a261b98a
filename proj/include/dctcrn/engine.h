#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "dctcrn/common.h"
#include "dctcrn/dct.h"
#include "dctcrn/framing.h"
#include "dctcrn/mask.h"
#include "dctcrn/model.h"
#include "dctcrn/rng.h"
#include "dctcrn/wav.h"

namespace dctcrn {

// Inference engine. One frame of audio moves through
//   window -> cosine transform -> mask estimator -> mask -> amplitude guard
//   -> inverse transform -> overlap-add
// either a whole file at a time (enhance_offline) or hop by hop through a
// live EnhancerSession. Both paths share the same per-frame kernels, so
// they agree sample for sample.

struct EngineConfig {
  FrameParams frames;
  ModelConfig model;
  bool clip_guard = true;  // clamp |estimate| to |noisy| per bin at inference

  void validate() const {
    frames.validate();
    model.validate();
    require(model.input_bins == frames.frame_len,
            "engine: model input bins must equal the frame length");
  }
};

// ---------------------------------------------------------------------------
// Streaming session
// ---------------------------------------------------------------------------

// Accepts exactly `hop` samples per push. The first enhanced hop comes out
// once frame_len + hop samples have gone in; after that every push yields
// one hop. Output lags input by that same frame_len + hop samples.
template <typename T>
class EnhancerSession {
 public:
  EnhancerSession(const EngineConfig& cfg, const ParameterSet<T>& params)
      : cfg_(cfg), params_(&params), plan_(cfg.frames.frame_len) {
    cfg_.validate();
    validate_params(cfg_.model, params);
    const int L = cfg_.frames.frame_len;
    win_a_ = make_window<T>(cfg_.frames.analysis_window, L);
    win_s_ = make_window<T>(cfg_.frames.synthesis_window, L);
    norm_ = T(1.0 / cola_normalizer<T>(cfg_.frames));
    packed_ = pack_convs(cfg_.model, params);
    state_ = make_stream_state<T>(cfg_.model);
    ws_ = make_workspace<T>(cfg_.model);
    ring_.assign(L, T(0));
    acc_.assign(size_t(L) + cfg_.frames.hop, T(0));
    frame_.resize(L);
    spec_.resize(L);
    logits_.resize(L);
    est_.resize(L);
    out_.resize(cfg_.frames.hop);
    if (cfg_.model.mask_variant == MaskVariant::PReLU)
      mask_alpha_ = params.get("mask.alpha").data[0];
  }

  int hop() const { return cfg_.frames.hop; }
  int frame_len() const { return cfg_.frames.frame_len; }
  size_t pushes() const { return pushes_; }

  // Input-to-output latency in samples.
  int output_delay_samples() const { return cfg_.frames.frame_len + cfg_.frames.hop; }

  void reset() {
    std::fill(ring_.begin(), ring_.end(), T(0));
    std::fill(acc_.begin(), acc_.end(), T(0));
    state_.reset();
    pushes_ = 0;
    if (cfg_.model.mask_variant == MaskVariant::PReLU)
      mask_alpha_ = params_->get("mask.alpha").data[0];
  }

  // Feeds one hop of input. Returns a pointer to `hop` enhanced samples
  // (valid until the next push) or nullptr while the pipeline is filling.
  const T* push_hop(const T* in) {
    const int L = cfg_.frames.frame_len;
    const int h = cfg_.frames.hop;
    const int window_hops = L / h;

    std::memmove(ring_.data(), ring_.data() + h, sizeof(T) * size_t(L - h));
    std::memcpy(ring_.data() + (L - h), in, sizeof(T) * size_t(h));
    ++pushes_;
    if (pushes_ < size_t(window_hops)) return nullptr;

    if (pushes_ > size_t(window_hops)) {
      std::memmove(acc_.data(), acc_.data() + h, sizeof(T) * size_t(L));
      std::fill(acc_.end() - h, acc_.end(), T(0));
    }

    for (int i = 0; i < L; ++i) frame_[i] = ring_[i] * win_a_[i];
    plan_.forward(frame_.data(), spec_.data());
    model_step(cfg_.model, *params_, packed_, state_, ws_, spec_.data(), logits_.data());
    for (int i = 0; i < L; ++i) {
      T e = mask_activation(cfg_.model.mask_variant, logits_[i], mask_alpha_) * spec_[i];
      if (cfg_.clip_guard) {
        const T y = std::abs(spec_[i]);
        if (std::abs(e) > y) e = sign_of(e) * y;
      }
      est_[i] = e;
    }
    plan_.inverse(est_.data(), frame_.data());
    for (int i = 0; i < L; ++i) acc_[h + i] += frame_[i] * win_s_[i];

    if (pushes_ < size_t(window_hops) + 1) return nullptr;
    for (int i = 0; i < h; ++i) out_[i] = acc_[i] * norm_;
    return out_.data();
  }

  // Convenience wrapper taking and returning vectors.
  std::vector<T> push_hop(const std::vector<T>& in) {
    require(int(in.size()) == cfg_.frames.hop, "push_hop: need exactly hop samples");
    const T* out = push_hop(in.data());
    return out ? std::vector<T>(out, out + cfg_.frames.hop) : std::vector<T>();
  }

  // Drains the pipeline by pushing zero hops; returns the tail output. The
  // session keeps its stepped state, so reset() before reusing it.
  std::vector<T> flush() {
    const int h = cfg_.frames.hop;
    const int window_hops = cfg_.frames.frame_len / h;
    std::vector<T> zeros(h, T(0));
    std::vector<T> tail;
    for (int k = 0; k < window_hops; ++k) {
      const T* out = push_hop(zeros.data());
      if (out) tail.insert(tail.end(), out, out + h);
    }
    return tail;
  }

 private:
  EngineConfig cfg_;
  const ParameterSet<T>* params_;
  DctPlan<T> plan_;
  std::vector<T> win_a_, win_s_;
  T norm_ = T(1);
  PackedConvs<T> packed_;
  StreamState<T> state_;
  ModelWorkspace<T> ws_;
  std::vector<T> ring_;   // last frame_len input samples
  std::vector<T> acc_;    // pending overlap-add, frame_len + hop wide
  std::vector<T> frame_, spec_, logits_, est_, out_;
  size_t pushes_ = 0;
  T mask_alpha_ = T(0.25);
};

// ---------------------------------------------------------------------------
// Whole-signal paths
// ---------------------------------------------------------------------------

// Batch reference: frames the whole signal, runs the model over the full
// sequence, resynthesizes. Output length equals input length.
template <typename T>
Wave<T> enhance_offline(const EngineConfig& cfg, const ParameterSet<T>& params,
                        const Wave<T>& noisy) {
  cfg.validate();
  validate_params(cfg.model, params);
  DctPlan<T> plan(cfg.frames.frame_len);
  const Mat<T> frames = frame_signal(noisy, cfg.frames);
  const Mat<T> spec = stdct(frames, plan);
  const Mat<T> logits = model_forward(cfg.model, params, spec);
  const T alpha = cfg.model.mask_variant == MaskVariant::PReLU ? params.get("mask.alpha").data[0]
                                                               : T(0.25);
  Mat<T> est = apply_mask(logits, spec, cfg.model.mask_variant, alpha);
  if (cfg.clip_guard) est = clip_postprocess(est, spec);
  Wave<T> out = overlap_add(istdct(est, plan), cfg.frames, noisy.samples.size());
  out.sample_rate = noisy.sample_rate;
  return out;
}

// Same result as enhance_offline, produced hop by hop through a session.
template <typename T>
Wave<T> enhance_stream(const EngineConfig& cfg, const ParameterSet<T>& params,
                       const Wave<T>& noisy) {
  EnhancerSession<T> session(cfg, params);
  const int h = session.hop();
  const size_t n = noisy.samples.size();

  Wave<T> out;
  out.sample_rate = noisy.sample_rate;
  out.samples.reserve(n + h);
  std::vector<T> hop_buf(h, T(0));
  const size_t full_hops = n / size_t(h);
  for (size_t k = 0; k < full_hops; ++k) {
    const T* got = session.push_hop(noisy.samples.data() + k * h);
    if (got) out.samples.insert(out.samples.end(), got, got + h);
  }
  if (n % size_t(h)) {
    std::fill(hop_buf.begin(), hop_buf.end(), T(0));
    std::copy(noisy.samples.begin() + full_hops * h, noisy.samples.end(), hop_buf.begin());
    const T* got = session.push_hop(hop_buf.data());
    if (got) out.samples.insert(out.samples.end(), got, got + h);
  }
  std::vector<T> tail = session.flush();
  out.samples.insert(out.samples.end(), tail.begin(), tail.end());
  out.samples.resize(n);
  return out;
}

// File-to-file enhancement, streaming under the hood.
template <typename T>
void enhance_file(const EngineConfig& cfg, const ParameterSet<T>& params,
                  const std::string& in_path, const std::string& out_path) {
  const Wave<T> noisy = load_wav<T>(in_path);
  const Wave<T> out = enhance_stream(cfg, params, noisy);
  save_wav(out, out_path);
}

// ---------------------------------------------------------------------------
// Throughput measurement
// ---------------------------------------------------------------------------

struct RtfReport {
  double rtf = 0.0;         // processing time / audio time
  double mean_ms = 0.0;     // mean wall time per hop
  double p99_ms = 0.0;      // 99th percentile wall time per hop
  size_t hops = 0;
};

template <typename T>
RtfReport rtf_benchmark(const EngineConfig& cfg, const ParameterSet<T>& params, double seconds,
                        uint64_t seed = 1) {
  EnhancerSession<T> session(cfg, params);
  const int h = session.hop();
  const size_t n_hops = size_t(seconds * kSampleRate) / size_t(h);
  require(n_hops >= 16, "rtf_benchmark: need at least 16 hops of audio");

  Rng rng(seed);
  std::vector<T> hop_buf(h);
  std::vector<double> times_ms;
  times_ms.reserve(n_hops);
  for (size_t k = 0; k < n_hops; ++k) {
    for (auto& v : hop_buf) v = T(0.1 * rng.gauss());
    const auto t0 = std::chrono::steady_clock::now();
    (void)session.push_hop(hop_buf.data());
    const auto t1 = std::chrono::steady_clock::now();
    times_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }

  RtfReport rep;
  rep.hops = n_hops;
  double total = 0.0;
  for (double t : times_ms) total += t;
  rep.mean_ms = total / double(n_hops);
  rep.rtf = (total / 1000.0) / (double(n_hops) * h / kSampleRate);
  std::sort(times_ms.begin(), times_ms.end());
  rep.p99_ms = times_ms[std::min(n_hops - 1, size_t(std::ceil(0.99 * double(n_hops))) - 1)];
  return rep;
}

}  // namespace dctcrn
