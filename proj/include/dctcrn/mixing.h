#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dctcrn/common.h"
#include "dctcrn/rng.h"

namespace dctcrn {

// Mixes a speech signal with noise at a requested SNR. Speech power is
// measured over active frames only, so leading silence or pauses do not
// dilute the level. The returned triple satisfies
//   noisy[i] == clean[i] + scaled_noise[i]
// exactly, because both addends are scaled first and summed afterwards.

struct MixSpec {
  double snr_db = 0.0;
  uint64_t seed = 0;
  double speech_gain_db = 0.0;

  void validate() const {
    require(std::isfinite(snr_db), "mix: snr_db must be finite");
    require(std::isfinite(speech_gain_db), "mix: speech_gain_db must be finite");
  }
};

template <typename T>
struct MixResult {
  Wave<T> noisy;
  Wave<T> clean;
  Wave<T> scaled_noise;
  double noise_gain = 1.0;   // g applied to the noise before peak handling
  double peak_scale = 1.0;   // joint rescale keeping |noisy| <= 0.999
  size_t noise_offset = 0;   // crop position inside the supplied noise
};

// Mean square over frames whose RMS clears -40 dBFS (20 ms frames, 10 ms
// hop). Falls back to the whole-signal mean square when nothing clears it.
template <typename T>
double active_speech_power(const std::vector<T>& x, int sample_rate = kSampleRate) {
  require(!x.empty(), "active_speech_power: empty signal");
  const size_t frame = size_t(sample_rate) / 50;  // 20 ms
  const size_t hop = frame / 2;                   // 10 ms
  const double thresh = 0.01;                     // 10^(-40/20)
  double active_ss = 0.0;
  size_t active_n = 0;
  for (size_t start = 0; start + frame <= x.size(); start += hop) {
    double ss = 0.0;
    for (size_t i = 0; i < frame; ++i) ss += double(x[start + i]) * double(x[start + i]);
    if (std::sqrt(ss / double(frame)) > thresh) {
      active_ss += ss;
      active_n += frame;
    }
  }
  if (active_n == 0) {
    double ss = 0.0;
    for (const T& v : x) ss += double(v) * double(v);
    return ss / double(x.size());
  }
  return active_ss / double(active_n);
}

template <typename T>
MixResult<T> mix_at_snr(const Wave<T>& speech, const Wave<T>& noise, const MixSpec& spec) {
  spec.validate();
  require(speech.sample_rate == noise.sample_rate, "mix: sample rates differ");
  require(!speech.samples.empty(), "mix: empty speech");
  require(noise.samples.size() >= speech.samples.size(),
          "mix: noise must be at least as long as speech");
  const size_t n = speech.samples.size();

  // crop the noise at a seeded offset
  Rng rng(Rng::mix(spec.seed, 0x6d6978ULL));
  const size_t offset = rng.below(noise.samples.size() - n + 1);

  std::vector<double> s(n), v(n);
  const double speech_gain = std::pow(10.0, spec.speech_gain_db / 20.0);
  for (size_t i = 0; i < n; ++i) s[i] = speech_gain * double(speech.samples[i]);
  for (size_t i = 0; i < n; ++i) v[i] = double(noise.samples[offset + i]);

  const double p_speech = active_speech_power(s, speech.sample_rate);
  double p_noise = 0.0;
  for (double w : v) p_noise += w * w;
  p_noise /= double(n);
  require(p_speech >= 1e-12, "mix: speech power below 1e-12");
  require(p_noise >= 1e-12, "mix: noise power below 1e-12");

  const double g = std::sqrt(p_speech / (p_noise * std::pow(10.0, spec.snr_db / 10.0)));

  double peak = 0.0;
  for (size_t i = 0; i < n; ++i) peak = std::max(peak, std::abs(s[i] + g * v[i]));
  const double kappa = peak > 0.999 ? 0.999 / peak : 1.0;

  MixResult<T> out;
  out.noise_gain = g;
  out.peak_scale = kappa;
  out.noise_offset = offset;
  out.clean.sample_rate = out.noisy.sample_rate = out.scaled_noise.sample_rate =
      speech.sample_rate;
  out.clean.samples.resize(n);
  out.scaled_noise.samples.resize(n);
  out.noisy.samples.resize(n);
  const double gn = kappa * g;
  for (size_t i = 0; i < n; ++i) {
    const T c = T(kappa * s[i]);
    const T w = T(gn * v[i]);
    out.clean.samples[i] = c;
    out.scaled_noise.samples[i] = w;
    out.noisy.samples[i] = c + w;
  }
  return out;
}

}  // namespace dctcrn
