#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dctcrn/common.h"
#include "dctcrn/rng.h"

namespace dctcrn {

// Deterministic signal generators used in place of recorded corpora. The
// speech stand-in is a harmonic series on a drifting fundamental, chopped
// into voiced and silent segments; the noise generators cover white, pink
// and a crude babble built from overlapping speech-like voices.

enum class NoiseKind { White, Pink, Babble };

inline NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "white") return NoiseKind::White;
  if (s == "pink") return NoiseKind::Pink;
  if (s == "babble") return NoiseKind::Babble;
  throw std::invalid_argument("unknown noise kind: " + s + " (want white|pink|babble)");
}

inline const char* noise_kind_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::White: return "white";
    case NoiseKind::Pink: return "pink";
    default: return "babble";
  }
}

namespace detail {

// Shift to zero mean and scale to unit sample variance.
inline void normalize_variance(std::vector<double>& x) {
  double mu = 0.0;
  for (double v : x) mu += v;
  mu /= double(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mu) * (v - mu);
  var /= double(x.size());
  const double s = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
  for (auto& v : x) v = (v - mu) * s;
}

}  // namespace detail

// Speech stand-in. Contract: deterministic per seed; alternating voiced and
// silent segments with a silent onset, so any 4 s span holds at least one
// gap of 100 ms or more; whole-signal RMS lands in [0.02, 0.5].
template <typename T>
Wave<T> synth_speechlike(uint64_t seed, double duration_s, int sample_rate = kSampleRate) {
  require(duration_s > 0.0, "synth_speechlike: duration must be > 0");
  const size_t n = size_t(std::llround(duration_s * sample_rate));
  Rng rng(Rng::mix(seed, 0x73706565636869ULL));

  const int harmonics = 3 + int(rng.below(6));  // 3..8
  std::vector<double> amp(harmonics);
  for (int k = 0; k < harmonics; ++k) amp[k] = (0.5 + 0.5 * rng.uniform()) / double(k + 1);

  const double lfo_rate = rng.uniform(0.3, 1.2);  // slow loudness wobble, Hz
  const double lfo_phase = rng.uniform(0.0, 2.0 * kPi);
  auto ms_to_samples = [&](double ms) { return size_t(ms * sample_rate / 1000.0); };

  std::vector<double> x(n, 0.0);
  std::vector<char> voiced_mark(n, 0);
  double f0 = rng.uniform(100.0, 260.0);
  double phase = 0.0;
  size_t pos = 0;
  bool voiced = false;  // start silent: a quiet onset keeps resynthesis honest
  bool first = true;
  while (pos < n) {
    size_t seg_len;
    if (!voiced) {
      seg_len = ms_to_samples(first ? rng.uniform(150.0, 250.0) : rng.uniform(100.0, 250.0));
      first = false;
      pos += seg_len;  // samples stay zero
    } else {
      seg_len = ms_to_samples(rng.uniform(250.0, 700.0));
      const size_t end = std::min(n, pos + seg_len);
      const double f0_target = rng.uniform(80.0, 300.0);
      const size_t attack = ms_to_samples(20.0), release = ms_to_samples(30.0);
      const size_t len = end - pos;
      for (size_t i = 0; i < len; ++i) {
        const double u = double(i) / double(std::max<size_t>(1, len - 1));
        const double f = f0 + (f0_target - f0) * u;
        phase += 2.0 * kPi * f / sample_rate;
        double s = 0.0;
        for (int k = 0; k < harmonics; ++k) s += amp[k] * std::sin(double(k + 1) * phase);
        double env = 1.0;
        if (i < attack) env *= 0.5 - 0.5 * std::cos(kPi * double(i) / attack);
        if (len - 1 - i < release) env *= 0.5 - 0.5 * std::cos(kPi * double(len - 1 - i) / release);
        const double t_abs = double(pos + i) / sample_rate;
        env *= 1.0 + 0.15 * std::sin(2.0 * kPi * lfo_rate * t_abs + lfo_phase);
        x[pos + i] = env * s;
        voiced_mark[pos + i] = 1;
      }
      f0 = f0_target;
      pos = end;
    }
    voiced = !voiced;
  }

  // scale the voiced region to a drawn RMS, then keep the peak sane
  double ss = 0.0;
  size_t cnt = 0;
  for (size_t i = 0; i < n; ++i)
    if (voiced_mark[i]) {
      ss += x[i] * x[i];
      ++cnt;
    }
  const double active_rms = cnt ? std::sqrt(ss / double(cnt)) : 0.0;
  const double target = rng.uniform(0.08, 0.25);
  if (active_rms > 0.0) {
    const double k = target / active_rms;
    for (auto& v : x) v *= k;
  }
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > 0.97) {
    const double k = 0.97 / peak;
    for (auto& v : x) v *= k;
  }

  Wave<T> out;
  out.sample_rate = sample_rate;
  out.samples.resize(n);
  for (size_t i = 0; i < n; ++i) out.samples[i] = T(x[i]);
  return out;
}

// Noise stand-ins, unit sample variance, deterministic per (kind, seed).
template <typename T>
Wave<T> synth_noise(NoiseKind kind, uint64_t seed, double duration_s,
                    int sample_rate = kSampleRate) {
  require(duration_s > 0.0, "synth_noise: duration must be > 0");
  const size_t n = size_t(std::llround(duration_s * sample_rate));
  std::vector<double> x(n);

  if (kind == NoiseKind::White) {
    Rng rng(Rng::mix(seed, 0x77686974ULL));
    for (auto& v : x) v = rng.gauss();
  } else if (kind == NoiseKind::Pink) {
    // Paul Kellet's refined -3 dB/octave filter over white noise.
    Rng rng(Rng::mix(seed, 0x70696e6bULL));
    double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
    for (auto& v : x) {
      const double w = rng.gauss();
      b0 = 0.99886 * b0 + w * 0.0555179;
      b1 = 0.99332 * b1 + w * 0.0750759;
      b2 = 0.96900 * b2 + w * 0.1538520;
      b3 = 0.86650 * b3 + w * 0.3104856;
      b4 = 0.55000 * b4 + w * 0.5329522;
      b5 = -0.7616 * b5 - w * 0.0168980;
      v = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
      b6 = w * 0.115926;
    }
  } else {
    // several speech-like voices, circularly shifted so gaps rarely align
    Rng rng(Rng::mix(seed, 0x626162626cULL));
    const int voices = 6;
    for (int v = 0; v < voices; ++v) {
      auto voice = synth_speechlike<double>(Rng::mix(seed, 0xb0b, uint64_t(v)), duration_s,
                                            sample_rate);
      const size_t shift = rng.below(n);
      for (size_t i = 0; i < n; ++i) x[(i + shift) % n] += voice.samples[i];
    }
  }

  detail::normalize_variance(x);
  Wave<T> out;
  out.sample_rate = sample_rate;
  out.samples.resize(n);
  for (size_t i = 0; i < n; ++i) out.samples[i] = T(x[i]);
  return out;
}

}  // namespace dctcrn
