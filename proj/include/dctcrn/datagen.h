#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dctcrn/common.h"
#include "dctcrn/manifest.h"
#include "dctcrn/mixing.h"
#include "dctcrn/rng.h"
#include "dctcrn/synth.h"
#include "dctcrn/wav.h"

namespace dctcrn {

// Turns manifest items into (noisy, clean) training pairs. Everything an
// item needs (crop positions, SNR draw, noise alignment) derives from one
// seed hashed from (manifest.seed, epoch, item index), so a given epoch is
// reproducible and successive epochs see fresh mixes of the same material.

struct DatasetOptions {
  double duration_s = 4.0;
  double snr_lo_db = 0.0;
  double snr_hi_db = 0.0;
  double speech_gain_db = 0.0;

  void validate() const {
    require(duration_s > 0.0, "dataset: duration must be > 0");
    require(snr_lo_db <= snr_hi_db, "dataset: snr_lo_db must be <= snr_hi_db");
  }
};

template <typename T>
struct TrainPair {
  Wave<T> noisy;
  Wave<T> clean;
  uint64_t seed = 0;  // the per-item seed, reported on failures
};

namespace detail {

// speech=synth:<seed>
inline uint64_t parse_synth_speech(const std::string& field) {
  const std::string body = field.substr(6);
  try {
    size_t used = 0;
    const uint64_t seed = std::stoull(body, &used);
    if (used == body.size() && !body.empty()) return seed;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("bad speech spec '" + field + "' (want synth:<seed>)");
}

// noise=synth:<white|pink|babble>:<seed>
inline std::pair<NoiseKind, uint64_t> parse_synth_noise(const std::string& field) {
  const std::string body = field.substr(6);
  const size_t colon = body.find(':');
  if (colon != std::string::npos) {
    try {
      const NoiseKind kind = parse_noise_kind(body.substr(0, colon));
      const std::string tail = body.substr(colon + 1);
      size_t used = 0;
      const uint64_t seed = std::stoull(tail, &used);
      if (used == tail.size() && !tail.empty()) return {kind, seed};
    } catch (const std::exception&) {
    }
  }
  throw std::invalid_argument("bad noise spec '" + field + "' (want synth:<kind>:<seed>)");
}

// Crops `want` samples at a seeded offset; repeats the source first when it
// is too short.
template <typename T>
std::vector<T> crop_or_tile(const std::vector<T>& src, size_t want, Rng& rng) {
  require(!src.empty(), "dataset: empty source signal");
  std::vector<T> base = src;
  while (base.size() < want) base.insert(base.end(), src.begin(), src.end());
  const size_t offset = rng.below(base.size() - want + 1);
  return std::vector<T>(base.begin() + offset, base.begin() + offset + want);
}

}  // namespace detail

template <typename T>
TrainPair<T> make_item(const Manifest& m, size_t item, uint64_t epoch,
                       const DatasetOptions& opt) {
  opt.validate();
  require(item < m.items.size(), "dataset: item index out of range");
  const ManifestItem& spec = m.items[item];
  const uint64_t seed = Rng::mix(m.seed, epoch, uint64_t(item));
  Rng rng(seed);

  const size_t want = size_t(std::llround(opt.duration_s * kSampleRate));
  const double margin_s = 1.0;

  // speech, cropped to the item duration
  Wave<T> speech;
  speech.sample_rate = kSampleRate;
  if (is_synth_spec(spec.speech)) {
    const uint64_t sseed = detail::parse_synth_speech(spec.speech);
    const double gen_s = opt.duration_s + margin_s;
    speech.samples = detail::crop_or_tile(
        synth_speechlike<T>(sseed, gen_s).samples, want, rng);
  } else {
    Wave<T> file = load_wav<T>(resolve_manifest_path(m, spec.speech));
    speech.samples = detail::crop_or_tile(file.samples, want, rng);
  }

  // noise, left longer than the speech so the mixer picks its own crop
  Wave<T> noise;
  noise.sample_rate = kSampleRate;
  if (is_synth_spec(spec.noise)) {
    const auto [kind, nseed] = detail::parse_synth_noise(spec.noise);
    noise = synth_noise<T>(kind, nseed, opt.duration_s + margin_s);
  } else {
    Wave<T> file = load_wav<T>(resolve_manifest_path(m, spec.noise));
    noise.samples = file.samples;
    while (noise.samples.size() < want)
      noise.samples.insert(noise.samples.end(), file.samples.begin(), file.samples.end());
  }

  MixSpec mix;
  mix.snr_db = opt.snr_lo_db + (opt.snr_hi_db - opt.snr_lo_db) * rng.uniform();
  mix.seed = rng.next_u64();
  mix.speech_gain_db = opt.speech_gain_db;
  MixResult<T> mixed = mix_at_snr(speech, noise, mix);

  TrainPair<T> out;
  out.noisy = std::move(mixed.noisy);
  out.clean = std::move(mixed.clean);
  out.seed = seed;
  return out;
}

// One epoch's worth of items in manifest order. Items are generated on
// demand; nothing is cached between calls.
template <typename T>
class EpochStream {
 public:
  EpochStream(const Manifest& m, uint64_t epoch, DatasetOptions opt)
      : manifest_(m), epoch_(epoch), opt_(opt) {
    require(!m.items.empty(), "dataset: manifest has no items");
    opt_.validate();
  }

  size_t size() const { return manifest_.items.size(); }
  TrainPair<T> item(size_t i) const { return make_item<T>(manifest_, i, epoch_, opt_); }

 private:
  const Manifest& manifest_;
  uint64_t epoch_;
  DatasetOptions opt_;
};

}  // namespace dctcrn
