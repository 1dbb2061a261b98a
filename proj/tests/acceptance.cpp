// Acceptance gate. Runs the ten shipping criteria end to end and prints
// one pass/fail line per criterion with the measured values; every
// tolerance is pinned here in code. Exit status is the number of failed
// criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "dctcrn/adam.h"
#include "dctcrn/datagen.h"
#include "dctcrn/dct.h"
#include "dctcrn/engine.h"
#include "dctcrn/framing.h"
#include "dctcrn/manifest.h"
#include "dctcrn/mask.h"
#include "dctcrn/mixing.h"
#include "dctcrn/model.h"
#include "dctcrn/rng.h"
#include "dctcrn/sisnr.h"
#include "dctcrn/synth.h"
#include "dctcrn/trainer.h"

using namespace dctcrn;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return buf;
}

double rel_err(double an, double fd) {
  return std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)});
}

Wave<double> random_wave(size_t n, uint64_t seed) {
  Wave<double> w;
  w.samples.resize(n);
  Rng rng(seed);
  for (auto& v : w.samples) v = rng.uniform(-1.0, 1.0);
  return w;
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& ref, size_t lo, size_t hi) {
  double num = 0.0, den = 0.0;
  for (size_t i = lo; i < hi; ++i) {
    const double d = a[i] - ref[i];
    num += d * d;
    den += ref[i] * ref[i];
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

// ---------------------------------------------------------------------------
// 1. transform correctness
// ---------------------------------------------------------------------------

Outcome criterion_transforms() {
  double worst_rt = 0.0, worst_orth = 0.0, worst_pars = 0.0;
  for (int n : {1, 2, 4, 8, 64, 512}) {
    DctPlan<double> plan(n);
    Rng rng(100 + uint64_t(n));
    std::vector<double> x(n), spec(n), back(n);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    plan.forward(x.data(), spec.data());
    plan.inverse(spec.data(), back.data());
    double ex = 0.0, es = 0.0;
    for (int i = 0; i < n; ++i) {
      worst_rt = std::max(worst_rt, std::abs(back[i] - x[i]));
      ex += x[i] * x[i];
      es += spec[i] * spec[i];
    }
    worst_pars = std::max(worst_pars, std::abs(ex - es) / std::max(ex, 1e-300));
    if (n <= 64) {
      const double* m = plan.matrix();
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          double g = 0.0;
          for (int mu = 0; mu < n; ++mu) g += m[size_t(mu) * n + r] * m[size_t(mu) * n + c];
          worst_orth = std::max(worst_orth, std::abs(g - (r == c ? 1.0 : 0.0)));
        }
    }
  }
  Outcome out;
  out.ok = worst_rt < 1e-10 && worst_orth < 1e-12 && worst_pars < 1e-10;
  out.detail = strf("round_trip=%.1e orthonormality=%.1e parseval=%.1e", worst_rt, worst_orth,
                    worst_pars);
  return out;
}

// ---------------------------------------------------------------------------
// 2. analysis-synthesis reconstruction
// ---------------------------------------------------------------------------

Outcome criterion_reconstruction() {
  FrameParams p;
  DctPlan<double> plan(p.frame_len);
  const size_t n = size_t(10) * kSampleRate;
  const size_t warm = size_t(p.frame_len - p.hop);
  const auto chain = [&](const Wave<double>& w) {
    return overlap_add(istdct(stdct(frame_signal(w, p), plan), plan), p, n);
  };

  // A window-sum ramp covers the first frame_len - hop samples, so full
  // reconstruction holds from there on; with a silent head it holds on the
  // whole length.
  Wave<double> silent_head = random_wave(n, 201);
  for (size_t i = 0; i < warm; ++i) silent_head.samples[i] = 0.0;
  const double err_full = rel_l2(chain(silent_head).samples, silent_head.samples, 0, n);

  const Wave<double> arbitrary = random_wave(n, 202);
  const double err_interior = rel_l2(chain(arbitrary).samples, arbitrary.samples, warm, n);

  Outcome out;
  out.ok = err_full < 1e-10 && err_interior < 1e-10;
  out.detail = strf("rel_l2_full=%.1e rel_l2_after_warmup=%.1e", err_full, err_interior);
  return out;
}

// ---------------------------------------------------------------------------
// 3. oracle mask bound
// ---------------------------------------------------------------------------

double icm_si_snr(NoiseKind kind, uint64_t speech_seed, uint64_t noise_seed, uint64_t mix_seed) {
  FrameParams p;
  DctPlan<double> plan(p.frame_len);
  const Wave<double> speech = synth_speechlike<double>(speech_seed, 10.0);
  const Wave<double> noise = synth_noise<double>(kind, noise_seed, 10.0);
  MixSpec spec;
  spec.snr_db = 0.0;
  spec.seed = mix_seed;
  const MixResult<double> mix = mix_at_snr(speech, noise, spec);

  const Mat<double> ys = stdct(frame_signal(mix.noisy, p), plan);
  const Mat<double> ss = stdct(frame_signal(mix.clean, p), plan);
  const Mat<double> m = ideal_cosine_mask(ss, ys, 100.0);
  Mat<double> est(ys.rows, ys.cols);
  for (size_t i = 0; i < est.v.size(); ++i) est.v[i] = m.v[i] * ys.v[i];
  const Wave<double> rec = overlap_add(istdct(est, plan), p, mix.noisy.samples.size());
  return si_snr_db(rec.samples, mix.clean.samples);
}

Outcome criterion_oracle_mask() {
  const double white = icm_si_snr(NoiseKind::White, 11, 77, 5);
  const double pink = icm_si_snr(NoiseKind::Pink, 12, 78, 6);
  Outcome out;
  out.ok = white >= 40.0 && pink >= 40.0;
  out.detail = strf("white=%.2f dB pink=%.2f dB (floor 40)", white, pink);
  return out;
}

// ---------------------------------------------------------------------------
// 4. gradient checks
// ---------------------------------------------------------------------------

// Central finite differences of a scalar loss over every entry of v,
// compared entrywise against the analytic gradient.
template <typename F>
double fd_sweep(std::vector<double>& v, const std::vector<double>& analytic, F loss, double h) {
  double worst = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    const double keep = v[i];
    v[i] = keep + h;
    const double up = loss();
    v[i] = keep - h;
    const double dn = loss();
    v[i] = keep;
    worst = std::max(worst, rel_err(analytic[i], (up - dn) / (2.0 * h)));
  }
  return worst;
}

double fd_conv(uint64_t seed, bool transposed) {
  ConvDims d;
  d.c_in = 3;
  d.c_out = 4;
  d.f_in = 8;
  const size_t xn = size_t(d.c_in) * d.f_in;
  const size_t yn = size_t(d.c_out) * (transposed ? d.f_out_tconv() : d.f_out_conv());
  Rng rng(seed);
  std::vector<double> w(d.weight_numel()), b(d.c_out), prev(xn), cur(xn), r(yn);
  for (auto* vec : {&w, &b, &prev, &cur, &r})
    for (auto& v : *vec) v = rng.uniform(-1.0, 1.0);

  const auto loss = [&] {
    std::vector<double> y(yn);
    if (transposed)
      tconv_frame_forward(d, w.data(), b.data(), prev.data(), cur.data(), y.data());
    else
      conv_frame_forward(d, w.data(), b.data(), prev.data(), cur.data(), y.data());
    double acc = 0.0;
    for (size_t i = 0; i < yn; ++i) acc += r[i] * y[i];
    return acc;
  };

  std::vector<double> dw(w.size(), 0.0), db(b.size(), 0.0), dprev(xn, 0.0), dcur(xn, 0.0);
  if (transposed)
    tconv_frame_backward(d, w.data(), prev.data(), cur.data(), r.data(), dprev.data(),
                         dcur.data(), dw.data(), db.data());
  else
    conv_frame_backward(d, w.data(), prev.data(), cur.data(), r.data(), dprev.data(), dcur.data(),
                        dw.data(), db.data());

  const double h = 1e-5;
  double worst = fd_sweep(w, dw, loss, h);
  worst = std::max(worst, fd_sweep(b, db, loss, h));
  worst = std::max(worst, fd_sweep(prev, dprev, loss, h));
  worst = std::max(worst, fd_sweep(cur, dcur, loss, h));
  return worst;
}

double fd_prelu(uint64_t seed) {
  const size_t n = 40;
  Rng rng(seed);
  std::vector<double> pre(n), r(n);
  // keep inputs away from the kink so the finite-difference step never
  // crosses zero
  for (auto& v : pre) v = (rng.below(2) ? 1.0 : -1.0) * rng.uniform(0.1, 1.0);
  for (auto& v : r) v = rng.uniform(-1.0, 1.0);
  double alpha = rng.uniform(0.05, 0.9);

  const auto loss = [&] {
    std::vector<double> y(n);
    prelu_forward(pre.data(), y.data(), n, alpha);
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += r[i] * y[i];
    return acc;
  };

  std::vector<double> dpre(n, 0.0);
  double dalpha = 0.0;
  prelu_backward(pre.data(), r.data(), dpre.data(), n, alpha, &dalpha);

  const double h = 1e-5;
  double worst = fd_sweep(pre, dpre, loss, h);
  std::vector<double> av{alpha};
  worst = std::max(worst, fd_sweep(av, {dalpha}, [&] {
                     alpha = av[0];
                     const double l = loss();
                     return l;
                   }, h));
  alpha = av[0];
  return worst;
}

double fd_linear(uint64_t seed) {
  const int in = 6, outn = 5;
  Rng rng(seed);
  std::vector<double> w(size_t(in) * outn), b(outn), x(in), r(outn);
  for (auto* vec : {&w, &b, &x, &r})
    for (auto& v : *vec) v = rng.uniform(-1.0, 1.0);

  const auto loss = [&] {
    std::vector<double> y(outn);
    linear_forward(w.data(), b.data(), in, outn, x.data(), y.data());
    double acc = 0.0;
    for (int i = 0; i < outn; ++i) acc += r[i] * y[i];
    return acc;
  };

  std::vector<double> dw(w.size(), 0.0), db(b.size(), 0.0), dx(x.size(), 0.0);
  linear_backward(w.data(), in, outn, x.data(), r.data(), dx.data(), dw.data(), db.data());

  const double h = 1e-5;
  double worst = fd_sweep(w, dw, loss, h);
  worst = std::max(worst, fd_sweep(b, db, loss, h));
  worst = std::max(worst, fd_sweep(x, dx, loss, h));
  return worst;
}

double fd_lstm(uint64_t seed) {
  const LstmDims d{5, 4};
  const int steps = 6;
  const int H = d.hidden, D = d.input;
  Rng rng(seed);
  std::vector<double> w_ih(size_t(4) * H * D), w_hh(size_t(4) * H * H), bias(size_t(4) * H);
  std::vector<double> x(size_t(steps) * D), r(size_t(steps) * H);
  for (auto* vec : {&w_ih, &w_hh, &bias, &x, &r})
    for (auto& v : *vec) v = rng.uniform(-0.5, 0.5);

  const auto loss = [&] {
    const LstmWeights<double> wts{w_ih.data(), w_hh.data(), bias.data()};
    std::vector<double> h(H, 0.0), c(H, 0.0), h_out(size_t(steps) * H);
    lstm_seq_forward(d, wts, x.data(), steps, h.data(), c.data(), h_out.data(), nullptr, nullptr);
    double acc = 0.0;
    for (size_t i = 0; i < h_out.size(); ++i) acc += r[i] * h_out[i];
    return acc;
  };

  const LstmWeights<double> wts{w_ih.data(), w_hh.data(), bias.data()};
  std::vector<double> h(H, 0.0), c(H, 0.0), h_out(size_t(steps) * H);
  std::vector<double> gates(size_t(steps) * 4 * H), cells(size_t(steps) * H);
  lstm_seq_forward(d, wts, x.data(), steps, h.data(), c.data(), h_out.data(), gates.data(),
                   cells.data());
  std::vector<double> dx(x.size(), 0.0), dw_ih(w_ih.size(), 0.0), dw_hh(w_hh.size(), 0.0),
      dbias(bias.size(), 0.0);
  lstm_seq_backward(d, wts, x.data(), steps, h_out.data(), gates.data(), cells.data(), r.data(),
                    dx.data(), dw_ih.data(), dw_hh.data(), dbias.data());

  const double h_fd = 1e-5;
  double worst = fd_sweep(w_ih, dw_ih, loss, h_fd);
  worst = std::max(worst, fd_sweep(w_hh, dw_hh, loss, h_fd));
  worst = std::max(worst, fd_sweep(bias, dbias, loss, h_fd));
  worst = std::max(worst, fd_sweep(x, dx, loss, h_fd));
  return worst;
}

EngineConfig micro_engine_config() {
  EngineConfig cfg;
  cfg.frames.frame_len = 8;
  cfg.frames.hop = 2;
  cfg.model.input_bins = 8;
  cfg.model.encoder_channels = {2};
  cfg.model.decoder_channels = {1};
  cfg.model.lstm_layers = 2;
  cfg.model.lstm_hidden = 4;
  cfg.clip_guard = false;
  return cfg;
}

double fd_end_to_end(uint64_t seed) {
  const EngineConfig cfg = micro_engine_config();
  DctPlan<double> plan(cfg.frames.frame_len);
  auto params = init_params<double>(cfg.model, seed);
  Rng rng(Rng::mix(seed, 77));
  Wave<double> noisy, clean;
  noisy.samples.resize(8);
  clean.samples.resize(8);
  for (size_t i = 0; i < noisy.samples.size(); ++i) {
    noisy.samples[i] = rng.uniform(-0.5, 0.5);
    clean.samples[i] = rng.uniform(-0.5, 0.5);
  }
  auto grads = params.zeros_like();
  training_loss_and_grad(cfg, plan, params, noisy, clean, SiSnrOptions{}, grads);

  auto scratch = params.zeros_like();
  const auto loss = [&] {
    scratch.zero();
    return training_loss_and_grad(cfg, plan, params, noisy, clean, SiSnrOptions{}, scratch);
  };

  const double h = 1e-5;
  double worst = 0.0;
  for (auto& e : params.entries) {
    const std::vector<double>& an = grads.get(e.name).data;
    std::vector<double>& v = e.tensor.data;
    for (size_t i = 0; i < v.size(); ++i) {
      const double keep = v[i];
      v[i] = keep + h;
      const double up = loss();
      v[i] = keep - h;
      const double dn = loss();
      v[i] = keep;
      worst = std::max(worst, rel_err(an[i], (up - dn) / (2.0 * h)));
    }
  }
  return worst;
}

Outcome criterion_gradients() {
  double conv = 0.0, tconv = 0.0, prelu = 0.0, linear = 0.0, lstm = 0.0, e2e = 0.0;
  for (uint64_t s = 1; s <= 20; ++s) {
    conv = std::max(conv, fd_conv(s, false));
    tconv = std::max(tconv, fd_conv(s, true));
    prelu = std::max(prelu, fd_prelu(s));
    linear = std::max(linear, fd_linear(s));
    lstm = std::max(lstm, fd_lstm(s));
    e2e = std::max(e2e, fd_end_to_end(s));
  }
  const double worst = std::max({conv, tconv, prelu, linear, lstm, e2e});
  Outcome out;
  out.ok = worst < 1e-4;
  out.detail = strf("20 seeds/layer: conv=%.1e tconv=%.1e prelu=%.1e linear=%.1e lstm=%.1e "
                    "end_to_end=%.1e",
                    conv, tconv, prelu, linear, lstm, e2e);
  return out;
}

// ---------------------------------------------------------------------------
// 5. causality
// ---------------------------------------------------------------------------

Outcome criterion_causality() {
  int bad = 0, total = 0;

  // full model: poke one future frame, every earlier output must be
  // bitwise unchanged
  ModelConfig cfg;
  cfg.input_bins = 32;
  cfg.encoder_channels = {4, 8};
  cfg.decoder_channels = {4, 1};
  cfg.lstm_layers = 2;
  cfg.lstm_hidden = 8;
  const auto params = init_params<float>(cfg, 5);
  const int frames = 16;
  Mat<float> x(frames, cfg.input_bins);
  Rng rng(501);
  for (auto& v : x.v) v = float(rng.uniform(-1.0, 1.0));
  const Mat<float> base = model_forward(cfg, params, x);
  for (int p = 0; p < 30; ++p) {
    Rng pr(3000 + uint64_t(p));
    const int t_star = 1 + int(pr.below(uint64_t(frames - 1)));
    Mat<float> x2 = x;
    for (int j = 0; j < cfg.input_bins; ++j) x2.at(t_star, j) += float(pr.uniform(-1.0, 1.0));
    const Mat<float> mod = model_forward(cfg, params, x2);
    for (int t = 0; t < t_star; ++t)
      if (std::memcmp(base.row(t), mod.row(t), sizeof(float) * size_t(cfg.input_bins)) != 0) ++bad;
    ++total;
  }

  // recurrent layer on its own
  const LstmDims d{6, 5};
  const int steps = 12;
  Rng lr(502);
  std::vector<double> w_ih(size_t(4) * d.hidden * d.input), w_hh(size_t(4) * d.hidden * d.hidden),
      bias(size_t(4) * d.hidden);
  std::vector<double> lx(size_t(steps) * d.input);
  for (auto* vec : {&w_ih, &w_hh, &bias, &lx})
    for (auto& v : *vec) v = lr.uniform(-0.5, 0.5);
  const LstmWeights<double> wts{w_ih.data(), w_hh.data(), bias.data()};
  const auto run = [&](const std::vector<double>& input) {
    std::vector<double> h(d.hidden, 0.0), c(d.hidden, 0.0), h_out(size_t(steps) * d.hidden);
    lstm_seq_forward(d, wts, input.data(), steps, h.data(), c.data(), h_out.data(), nullptr,
                     nullptr);
    return h_out;
  };
  const std::vector<double> lbase = run(lx);
  for (int p = 0; p < 20; ++p) {
    Rng pr(4000 + uint64_t(p));
    const int t_star = 1 + int(pr.below(uint64_t(steps - 1)));
    std::vector<double> lx2 = lx;
    for (int j = 0; j < d.input; ++j) lx2[size_t(t_star) * d.input + j] += pr.uniform(-1.0, 1.0);
    const std::vector<double> lmod = run(lx2);
    if (std::memcmp(lbase.data(), lmod.data(), sizeof(double) * size_t(t_star) * d.hidden) != 0)
      ++bad;
    ++total;
  }

  Outcome out;
  out.ok = bad == 0 && total == 50;
  out.detail = strf("%d perturbations, %d leaked a future frame", total, bad);
  return out;
}

// ---------------------------------------------------------------------------
// 6. streaming equivalence
// ---------------------------------------------------------------------------

Outcome criterion_streaming() {
  EngineConfig cfg;
  const auto params = init_params<float>(cfg.model, 3);

  const Wave<float> speech = synth_speechlike<float>(21, 10.0);
  const Wave<float> noise = synth_noise<float>(NoiseKind::White, 22, 10.0);
  MixSpec spec;
  spec.snr_db = 0.0;
  spec.seed = 23;
  const Wave<float> noisy = mix_at_snr(speech, noise, spec).noisy;

  const Wave<float> offline = enhance_offline(cfg, params, noisy);
  const Wave<float> streamed = enhance_stream(cfg, params, noisy);
  double max_diff = 0.0;
  for (size_t i = 0; i < noisy.samples.size(); ++i)
    max_diff = std::max(max_diff, std::abs(double(offline.samples[i]) - streamed.samples[i]));

  // a fresh session must stay silent until exactly frame_len + hop samples
  // have gone in
  EnhancerSession<float> session(cfg, params);
  const int h = cfg.frames.hop;
  size_t first_out_samples = 0;
  for (size_t push = 1; push <= 8; ++push) {
    if (session.push_hop(noisy.samples.data() + (push - 1) * h) != nullptr) {
      first_out_samples = push * size_t(h);
      break;
    }
  }

  Outcome out;
  out.ok = max_diff < 1e-5 && first_out_samples == 640;
  out.detail = strf("max_abs_diff=%.1e on 10 s, first output after %zu samples", max_diff,
                    first_out_samples);
  return out;
}

// ---------------------------------------------------------------------------
// 7. toy training
// ---------------------------------------------------------------------------

EngineConfig toy_engine_config() {
  EngineConfig cfg;
  cfg.frames.frame_len = 64;
  cfg.frames.hop = 16;
  cfg.model.input_bins = 64;
  cfg.model.encoder_channels = {2, 4};
  cfg.model.decoder_channels = {4, 1};
  cfg.model.lstm_layers = 2;
  cfg.model.lstm_hidden = 8;
  return cfg;
}

Outcome criterion_training() {
  // held-out gain: the full trainer on dynamically remixed synthetic data
  const EngineConfig cfg = toy_engine_config();
  Manifest train_man, val_man;
  train_man.seed = Rng::mix(7, 1);
  val_man.seed = Rng::mix(7, 2);
  for (int i = 0; i < 24; ++i)
    train_man.items.push_back(
        {"synth:" + std::to_string(1000 + i),
         "synth:" + std::string(i % 2 ? "pink" : "white") + ":" + std::to_string(2000 + i)});
  for (int i = 0; i < 8; ++i)
    val_man.items.push_back(
        {"synth:" + std::to_string(5000 + i),
         "synth:" + std::string(i % 2 ? "pink" : "white") + ":" + std::to_string(6000 + i)});

  TrainConfig tc;
  tc.max_epochs = 10;
  tc.patience = 10;
  tc.batch = 1;
  tc.max_steps = 2000;
  tc.seed = 7;
  tc.data.duration_s = 4.0;
  tc.data.snr_lo_db = 0.0;
  tc.data.snr_hi_db = 0.0;
  const TrainResult<float> result = train<float>(cfg, tc, train_man, val_man);

  const EpochStream<float> val_stream(val_man, 0, tc.data);
  double snr_noisy = 0.0, snr_enh = 0.0;
  for (size_t i = 0; i < val_stream.size(); ++i) {
    const TrainPair<float> pair = val_stream.item(i);
    const Wave<float> enhanced = enhance_offline(cfg, result.best_params, pair.noisy);
    snr_noisy += si_snr_db(pair.noisy.samples, pair.clean.samples);
    snr_enh += si_snr_db(enhanced.samples, pair.clean.samples);
  }
  const double gain = (snr_enh - snr_noisy) / double(val_stream.size());

  // single-utterance overfit: a fixed 2 s mixture driven well past the
  // held-out score
  const Wave<float> speech = synth_speechlike<float>(42, 2.0);
  const Wave<float> noise = synth_noise<float>(NoiseKind::White, 43, 2.0);
  MixSpec spec;
  spec.snr_db = 0.0;
  spec.seed = 99;
  const MixResult<float> mix = mix_at_snr(speech, noise, spec);

  ParameterSet<float> params = init_params<float>(cfg.model, 7);
  ParameterSet<float> grads = params.zeros_like();
  Adam<float> opt(params);
  DctPlan<float> plan(cfg.frames.frame_len);
  for (int step = 0; step < 700; ++step) {
    grads.zero();
    training_loss_and_grad(cfg, plan, params, mix.noisy, mix.clean, SiSnrOptions{}, grads);
    clip_grad_norm(grads, 5.0);
    opt.step(params, grads, 2e-3);
  }
  const Wave<float> overfit_out = enhance_offline(cfg, params, mix.noisy);
  const double overfit = si_snr_db(overfit_out.samples, mix.clean.samples);

  Outcome out;
  out.ok = result.history.steps <= 2000 && gain >= 5.0 && overfit >= 15.0;
  out.detail = strf("held-out gain %.2f dB in %zu steps (floor 5), overfit %.2f dB after 700 "
                    "steps (floor 15)",
                    gain, result.history.steps, overfit);
  return out;
}

// ---------------------------------------------------------------------------
// 8. size accounting
// ---------------------------------------------------------------------------

Outcome criterion_accounting() {
  const ModelConfig cfg;
  const auto stats = model_layer_stats(cfg);

  // closed-form recount from the raw architecture numbers
  std::vector<size_t> want_params, want_macs;
  const int depth = int(cfg.encoder_channels.size());
  int bins = cfg.input_bins, cin = 1;
  for (int i = 0; i < depth; ++i) {
    const size_t co = size_t(cfg.encoder_channels[i]);
    const int fo = bins / 2;
    want_params.push_back(co * cin * 2 * 5 + co + 1);
    want_macs.push_back(co * size_t(fo) * cin * 2 * 5);
    cin = int(co);
    bins = fo;
  }
  size_t lstm_in = size_t(cin) * bins;
  const size_t H = size_t(cfg.lstm_hidden);
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    want_params.push_back(4 * H * (lstm_in + H + 1));
    want_macs.push_back(4 * H * (lstm_in + H));
    lstm_in = H;
  }
  want_params.push_back(size_t(cin) * bins * (H + 1));
  want_macs.push_back(size_t(cin) * bins * H);
  int path = cin;
  for (int i = 0; i < depth; ++i) {
    const size_t ci = size_t(path) + cfg.encoder_channels[depth - 1 - i];
    const size_t co = size_t(cfg.decoder_channels[i]);
    want_params.push_back(co * ci * 2 * 5 + co + (i + 1 < depth ? 1 : 0));
    want_macs.push_back(ci * size_t(bins) * co * 2 * 5);
    path = int(co);
    bins *= 2;
  }
  want_params.push_back(1);  // mask slope
  want_macs.push_back(0);

  bool layers_match = stats.size() == want_params.size();
  size_t total = 0, total_macs = 0;
  for (size_t i = 0; layers_match && i < stats.size(); ++i) {
    if (stats[i].params != want_params[i] || stats[i].macs_per_frame != want_macs[i])
      layers_match = false;
    total += stats[i].params;
    total_macs += stats[i].macs_per_frame;
  }

  // the reported count must also equal the true tensor sizes
  size_t tensor_total = 0;
  for (const auto& e : param_slots<float>(cfg).entries) tensor_total += e.tensor.data.size();

  Outcome out;
  out.ok = layers_match && total == tensor_total && total >= 2000000 && total <= 4000000;
  out.detail = strf("total_params=%zu (range [2.0M, 4.0M]), macs_per_frame=%zu, per-layer "
                    "closed-form match=%s",
                    total, total_macs, layers_match ? "yes" : "no");
  return out;
}

// ---------------------------------------------------------------------------
// 9. real-time factor
// ---------------------------------------------------------------------------

Outcome criterion_realtime() {
  EngineConfig cfg;
  const auto params = init_params<float>(cfg.model, 1);
  const RtfReport rep = rtf_benchmark(cfg, params, 10.0, 1);
  Outcome out;
  out.ok = rep.rtf < 1.0 && rep.p99_ms < 8.0;
  out.detail = strf("rtf=%.3f (<1), p99=%.2f ms (<8), mean=%.2f ms over %zu hops", rep.rtf,
                    rep.p99_ms, rep.mean_ms, rep.hops);
  return out;
}

// ---------------------------------------------------------------------------
// 10. mixing accuracy
// ---------------------------------------------------------------------------

Outcome criterion_mixing() {
  Wave<double> speech = synth_speechlike<double>(31, 4.0);
  const double rms = std::sqrt(active_speech_power(speech.samples));
  for (auto& v : speech.samples) v *= 0.05 / rms;  // quiet enough to never hit the peak ceiling

  double worst_dev = 0.0;
  bool exact = true, peak_free = true;
  int k = 0;
  for (double target : {-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0}) {
    const Wave<double> noise =
        synth_noise<double>(k % 2 ? NoiseKind::Pink : NoiseKind::White, 60 + uint64_t(k), 5.0);
    MixSpec spec;
    spec.snr_db = target;
    spec.seed = 40 + uint64_t(k);
    const MixResult<double> mix = mix_at_snr(speech, noise, spec);
    if (mix.peak_scale != 1.0) peak_free = false;  // the quiet speech keeps the limiter idle

    double p_noise = 0.0;
    for (double v : mix.scaled_noise.samples) p_noise += v * v;
    p_noise /= double(mix.scaled_noise.samples.size());
    const double achieved =
        10.0 * std::log10(active_speech_power(mix.clean.samples) / p_noise);
    worst_dev = std::max(worst_dev, std::abs(achieved - target));

    for (size_t i = 0; i < mix.noisy.samples.size(); ++i)
      if (mix.noisy.samples[i] != mix.clean.samples[i] + mix.scaled_noise.samples[i]) exact = false;
    ++k;
  }

  // the sum identity holds in single precision too
  {
    const Wave<float> s = synth_speechlike<float>(31, 2.0);
    const Wave<float> n = synth_noise<float>(NoiseKind::White, 61, 3.0);
    MixSpec spec;
    spec.snr_db = 0.0;
    spec.seed = 44;
    const MixResult<float> mix = mix_at_snr(s, n, spec);
    for (size_t i = 0; i < mix.noisy.samples.size(); ++i)
      if (mix.noisy.samples[i] != mix.clean.samples[i] + mix.scaled_noise.samples[i]) exact = false;
  }

  Outcome out;
  out.ok = worst_dev <= 0.01 && exact && peak_free;
  out.detail = strf("worst SNR deviation %.4f dB over [-10, 20] (cap 0.01), noisy == clean + "
                    "scaled_noise: %s",
                    worst_dev, exact && peak_free ? "exact" : "VIOLATED");
  return out;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    double budget_s;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"transform correctness", 10.0, criterion_transforms},
      {"analysis-synthesis reconstruction", 5.0, criterion_reconstruction},
      {"oracle mask bound", 10.0, criterion_oracle_mask},
      {"gradient checks", 60.0, criterion_gradients},
      {"causality", 30.0, criterion_causality},
      {"streaming equivalence", 30.0, criterion_streaming},
      {"toy training", 1800.0, criterion_training},
      {"size accounting", 1.0, criterion_accounting},
      {"real-time factor", 60.0, criterion_realtime},
      {"mixing accuracy", 5.0, criterion_mixing},
  };

  int failures = 0;
  int idx = 0;
  for (const Entry& e : entries) {
    ++idx;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out.ok = false;
      out.detail = std::string("exception: ") + ex.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = elapsed < e.budget_s;
    const bool pass = out.ok && in_budget;
    if (!pass) ++failures;
    std::printf("criterion %2d  %-36s  %s  %s  [%.1f s / budget %.0f s]\n", idx, e.name,
                pass ? "PASS" : "FAIL", out.detail.c_str(), elapsed, e.budget_s);
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/10 criteria passed\n", 10 - failures);
  return failures;
}
