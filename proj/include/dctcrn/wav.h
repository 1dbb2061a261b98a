#pragma once

#include <string>
#include <vector>

#include "dctcrn/common.h"

namespace dctcrn {

// Raw file-level WAV payload. Mono 16 kHz only; PCM16 is scaled to [-1, 1)
// by 1/32768, float32 data is passed through.
struct WavData {
  std::vector<float> samples;
  int sample_rate = kSampleRate;
};

WavData wav_read_file(const std::string& path);
void wav_write_file(const std::string& path, const float* samples, size_t n, int sample_rate);

template <typename T>
Wave<T> load_wav(const std::string& path) {
  WavData d = wav_read_file(path);
  Wave<T> w;
  w.sample_rate = d.sample_rate;
  w.samples.assign(d.samples.begin(), d.samples.end());
  return w;
}

// Writes 16-bit PCM; samples outside [-1, 1) are clipped before quantization.
template <typename T>
void save_wav(const Wave<T>& w, const std::string& path) {
  std::vector<float> f(w.samples.begin(), w.samples.end());
  wav_write_file(path, f.data(), f.size(), w.sample_rate);
}

}  // namespace dctcrn
