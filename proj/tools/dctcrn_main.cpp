#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dctcrn/datagen.h"
#include "dctcrn/engine.h"
#include "dctcrn/sisnr.h"
#include "dctcrn/trainer.h"
#include "dctcrn/weights_io.h"
#include "json.hpp"

using namespace dctcrn;

// Command-line front end. Machine-readable key=value pairs go to stdout;
// progress and prose go to stderr. Exit codes: 0 success, 1 runtime
// failure, 2 usage error.

namespace {

MaskVariant parse_variant(const std::string& s) {
  if (s == "p") return MaskVariant::PReLU;
  if (s == "s") return MaskVariant::Sigmoid;
  if (s == "t") return MaskVariant::Tanh;
  throw std::invalid_argument("unknown variant '" + s + "' (want p, s or t)");
}

// Optional JSON file overriding the default geometry. Unknown keys are
// rejected so typos do not silently fall back to defaults.
EngineConfig load_engine_config(const std::string& path) {
  EngineConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  in >> j;
  for (const auto& [key, value] : j.items()) {
    if (key == "frame_len")
      cfg.frames.frame_len = value.get<int>();
    else if (key == "hop")
      cfg.frames.hop = value.get<int>();
    else if (key == "encoder_channels")
      cfg.model.encoder_channels = value.get<std::vector<int>>();
    else if (key == "decoder_channels")
      cfg.model.decoder_channels = value.get<std::vector<int>>();
    else if (key == "lstm_layers")
      cfg.model.lstm_layers = value.get<int>();
    else if (key == "lstm_hidden")
      cfg.model.lstm_hidden = value.get<int>();
    else if (key == "kernel_t")
      cfg.model.kernel_t = value.get<int>();
    else if (key == "kernel_f")
      cfg.model.kernel_f = value.get<int>();
    else if (key == "stride_f")
      cfg.model.stride_f = value.get<int>();
    else if (key == "variant")
      cfg.model.mask_variant = parse_variant(value.get<std::string>());
    else if (key == "clip_guard")
      cfg.clip_guard = value.get<bool>();
    else
      throw std::runtime_error("unknown config key: " + key);
  }
  cfg.model.input_bins = cfg.frames.frame_len;
  cfg.validate();
  return cfg;
}

// The desk-scale geometry used by train-toy and gradcheck.
EngineConfig toy_config() {
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

ParameterSet<float> load_weights(const ModelConfig& cfg, const std::string& path) {
  ParameterSet<float> params = param_slots<float>(cfg);
  load_params(path, params);
  return params;
}

// Loads a wav, tiling it up to `want` samples if needed.
Wave<float> load_noise_source(const std::string& field, size_t want, double margin_s) {
  if (is_synth_spec(field)) {
    const auto [kind, seed] = detail::parse_synth_noise(field);
    return synth_noise<float>(kind, seed, double(want) / kSampleRate + margin_s);
  }
  Wave<float> w = load_wav<float>(field);
  const std::vector<float> unit = w.samples;
  while (w.samples.size() < want) w.samples.insert(w.samples.end(), unit.begin(), unit.end());
  return w;
}

int cmd_enhance(const std::string& input, const std::string& out, const std::string& weights,
                const std::string& config, const std::string& variant) {
  EngineConfig cfg = load_engine_config(config);
  if (!variant.empty()) cfg.model.mask_variant = parse_variant(variant);
  const ParameterSet<float> params = load_weights(cfg.model, weights);

  const Wave<float> noisy = load_wav<float>(input);
  const auto t0 = std::chrono::steady_clock::now();
  const Wave<float> enhanced = enhance_stream(cfg, params, noisy);
  const auto t1 = std::chrono::steady_clock::now();
  save_wav(enhanced, out);

  const double audio_s = double(noisy.samples.size()) / kSampleRate;
  const double wall_s = std::chrono::duration<double>(t1 - t0).count();
  std::printf("samples=%zu\n", noisy.samples.size());
  std::printf("seconds=%.3f\n", audio_s);
  std::printf("rtf=%.4f\n", audio_s > 0 ? wall_s / audio_s : 0.0);
  std::fprintf(stderr, "wrote %s\n", out.c_str());
  return 0;
}

int cmd_mix(const std::string& speech_spec, const std::string& noise_spec, double snr_db,
            uint64_t seed, double duration_s, const std::string& out_prefix) {
  Wave<float> speech;
  if (is_synth_spec(speech_spec)) {
    speech = synth_speechlike<float>(detail::parse_synth_speech(speech_spec), duration_s);
  } else {
    speech = load_wav<float>(speech_spec);
  }
  Wave<float> noise = load_noise_source(noise_spec, speech.samples.size(), 1.0);

  MixSpec spec;
  spec.snr_db = snr_db;
  spec.seed = seed;
  const MixResult<float> mix = mix_at_snr(speech, noise, spec);
  save_wav(mix.noisy, out_prefix + ".noisy.wav");
  save_wav(mix.clean, out_prefix + ".clean.wav");
  save_wav(mix.scaled_noise, out_prefix + ".noise.wav");

  std::printf("snr_db=%.2f\n", snr_db);
  std::printf("noise_gain=%.6g\n", mix.noise_gain);
  std::printf("peak_scale=%.6g\n", mix.peak_scale);
  std::printf("samples=%zu\n", mix.noisy.samples.size());
  std::fprintf(stderr, "wrote %s.{noisy,clean,noise}.wav\n", out_prefix.c_str());
  return 0;
}

int cmd_train_toy(const std::string& out_dir, uint64_t seed, int epochs, int steps, int items,
                  int val_items, double snr_db, double duration_s, const std::string& variant) {
  EngineConfig cfg = toy_config();
  if (!variant.empty()) cfg.model.mask_variant = parse_variant(variant);

  Manifest train_man, val_man;
  train_man.seed = Rng::mix(seed, 1);
  val_man.seed = Rng::mix(seed, 2);
  for (int i = 0; i < items; ++i)
    train_man.items.push_back(
        {"synth:" + std::to_string(1000 + i),
         "synth:" + std::string(i % 2 ? "pink" : "white") + ":" + std::to_string(2000 + i)});
  for (int i = 0; i < val_items; ++i)
    val_man.items.push_back(
        {"synth:" + std::to_string(5000 + i),
         "synth:" + std::string(i % 2 ? "pink" : "white") + ":" + std::to_string(6000 + i)});

  TrainConfig tc;
  tc.max_epochs = epochs;
  tc.patience = epochs;  // run the full budget; the step cap bounds time
  tc.batch = 1;
  tc.max_steps = steps;
  tc.seed = seed;
  tc.data.duration_s = duration_s;
  tc.data.snr_lo_db = snr_db;
  tc.data.snr_hi_db = snr_db;
  tc.checkpoint_dir = out_dir;

  std::fprintf(stderr, "training %d items for up to %d epochs (step cap %d)\n", items, epochs,
               steps);
  const TrainResult<float> result = train<float>(cfg, tc, train_man, val_man);
  for (const auto& rec : result.history.epochs)
    std::fprintf(stderr, "epoch %d: train %.3f val %.3f lr %.2e\n", rec.epoch, rec.train_loss,
                 rec.val_loss, rec.lr);

  // held-out score: enhanced vs raw mixtures on the fixed validation set
  const EpochStream<float> val_stream(val_man, 0, tc.data);
  double snr_noisy = 0.0, snr_enh = 0.0;
  for (size_t i = 0; i < val_stream.size(); ++i) {
    const TrainPair<float> pair = val_stream.item(i);
    const Wave<float> enhanced = enhance_offline(cfg, result.best_params, pair.noisy);
    snr_noisy += si_snr_db(pair.noisy.samples, pair.clean.samples);
    snr_enh += si_snr_db(enhanced.samples, pair.clean.samples);
  }
  snr_noisy /= double(val_stream.size());
  snr_enh /= double(val_stream.size());

  std::printf("steps=%zu\n", result.history.steps);
  std::printf("best_epoch=%d\n", result.history.best_epoch);
  std::printf("best_val_loss=%.4f\n", result.history.best_val);
  std::printf("noisy_si_snr_db=%.2f\n", snr_noisy);
  std::printf("enhanced_si_snr_db=%.2f\n", snr_enh);
  std::printf("improvement_db=%.2f\n", snr_enh - snr_noisy);
  return 0;
}

int cmd_eval(const std::string& est_path, const std::string& ref_path) {
  const Wave<float> est = load_wav<float>(est_path);
  const Wave<float> ref = load_wav<float>(ref_path);
  if (est.samples.size() != ref.samples.size())
    throw std::runtime_error("length mismatch: " + std::to_string(est.samples.size()) + " vs " +
                             std::to_string(ref.samples.size()) + " samples");
  std::printf("snr_db=%.2f\n", snr_db(est.samples, ref.samples));
  std::printf("si_snr_db=%.2f\n", si_snr_db(est.samples, ref.samples));
  return 0;
}

int cmd_info(const std::string& config, const std::string& variant) {
  EngineConfig cfg = load_engine_config(config);
  if (!variant.empty()) cfg.model.mask_variant = parse_variant(variant);
  const auto stats = model_layer_stats(cfg.model);
  for (const auto& s : stats)
    std::printf("layer=%s params=%zu macs_per_frame=%zu\n", s.name.c_str(), s.params,
                s.macs_per_frame);
  std::printf("total_params=%zu\n", model_param_count(cfg.model));
  std::printf("macs_per_frame=%zu\n", model_macs_per_frame(cfg.model));
  const double frames_per_s = double(kSampleRate) / cfg.frames.hop;
  std::printf("gmac_per_s=%.3f\n", double(model_macs_per_frame(cfg.model)) * frames_per_s / 1e9);
  return 0;
}

int cmd_gradcheck(uint64_t seed, int seeds) {
  EngineConfig cfg;
  cfg.frames.frame_len = 8;
  cfg.frames.hop = 2;
  cfg.model.input_bins = 8;
  cfg.model.encoder_channels = {2};
  cfg.model.decoder_channels = {1};
  cfg.model.lstm_layers = 2;
  cfg.model.lstm_hidden = 4;
  cfg.clip_guard = false;
  DctPlan<double> plan(cfg.frames.frame_len);

  double worst = 0.0;
  for (int s = 0; s < seeds; ++s) {
    auto params = init_params<double>(cfg.model, seed + uint64_t(s));
    Rng rng(Rng::mix(seed, uint64_t(s), 77));
    Wave<double> noisy, clean;
    noisy.samples.resize(8);
    clean.samples.resize(8);
    for (size_t i = 0; i < noisy.samples.size(); ++i) {
      noisy.samples[i] = rng.uniform(-0.5, 0.5);
      clean.samples[i] = rng.uniform(-0.5, 0.5);
    }
    auto grads = params.zeros_like();
    training_loss_and_grad(cfg, plan, params, noisy, clean, SiSnrOptions{}, grads);
    const double h = 1e-5;
    for (auto& e : params.entries) {
      for (size_t i = 0; i < e.tensor.data.size(); ++i) {
        const double keep = e.tensor.data[i];
        auto scratch = params.zeros_like();
        e.tensor.data[i] = keep + h;
        const double up =
            training_loss_and_grad(cfg, plan, params, noisy, clean, SiSnrOptions{}, scratch);
        scratch.zero();
        e.tensor.data[i] = keep - h;
        const double dn =
            training_loss_and_grad(cfg, plan, params, noisy, clean, SiSnrOptions{}, scratch);
        e.tensor.data[i] = keep;
        const double fd = (up - dn) / (2.0 * h);
        const double an = grads.get(e.name).data[i];
        worst = std::max(worst, std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)}));
      }
    }
  }
  const double tolerance = 1e-4;
  std::printf("worst_rel_err=%.3e\n", worst);
  std::printf("tolerance=%.0e\n", tolerance);
  std::printf("pass=%d\n", worst < tolerance ? 1 : 0);
  return worst < tolerance ? 0 : 1;
}

int cmd_bench(const std::string& config, const std::string& weights, double seconds,
              uint64_t seed) {
  EngineConfig cfg = load_engine_config(config);
  ParameterSet<float> params =
      weights.empty() ? init_params<float>(cfg.model, seed) : load_weights(cfg.model, weights);
  const RtfReport rep = rtf_benchmark(cfg, params, seconds, seed);
  std::printf("hops=%zu\n", rep.hops);
  std::printf("rtf=%.4f\n", rep.rtf);
  std::printf("mean_ms=%.4f\n", rep.mean_ms);
  std::printf("p99_ms=%.4f\n", rep.p99_ms);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming speech enhancer in the cosine transform domain"};
  app.require_subcommand(1);

  std::string input, out, weights, config, variant, speech_spec, noise_spec, est_path, ref_path;
  double snr = 0.0, duration = 4.0, seconds = 10.0;
  uint64_t seed = 1;
  int epochs = 100, steps = 2000, items = 24, val_items = 8, seeds = 3;

  auto* enhance = app.add_subcommand("enhance", "denoise a wav file");
  enhance->add_option("input", input, "noisy wav (16 kHz mono)")->required();
  enhance->add_option("--out", out, "output wav path")->required();
  enhance->add_option("--weights", weights, "weights file")->required();
  enhance->add_option("--config", config, "engine config JSON");
  enhance->add_option("--variant", variant, "mask activation: p, s or t");

  auto* mix = app.add_subcommand("mix", "mix speech and noise at an SNR");
  mix->add_option("--speech", speech_spec, "wav path or synth:<seed>")->required();
  mix->add_option("--noise", noise_spec, "wav path or synth:<kind>:<seed>")->required();
  mix->add_option("--snr", snr, "target SNR in dB");
  mix->add_option("--seed", seed, "crop/alignment seed");
  mix->add_option("--duration", duration, "synthesized speech length in seconds");
  mix->add_option("--out", out, "output path prefix")->required();

  auto* train_toy = app.add_subcommand("train-toy", "train the desk-scale model on synthetic data");
  train_toy->add_option("--out", out, "checkpoint directory")->required();
  train_toy->add_option("--seed", seed, "initialization and data seed");
  train_toy->add_option("--epochs", epochs, "epoch budget");
  train_toy->add_option("--steps", steps, "optimizer step cap (0 = off)");
  train_toy->add_option("--items", items, "training items per epoch");
  train_toy->add_option("--val-items", val_items, "validation items");
  train_toy->add_option("--snr", snr, "mixture SNR in dB");
  train_toy->add_option("--duration", duration, "crop length in seconds");
  train_toy->add_option("--variant", variant, "mask activation: p, s or t");

  auto* eval = app.add_subcommand("eval", "score an enhanced file against its reference");
  eval->add_option("--est", est_path, "estimate wav")->required();
  eval->add_option("--ref", ref_path, "reference wav")->required();

  auto* info = app.add_subcommand("info", "print per-layer sizes and totals");
  info->add_option("--config", config, "engine config JSON");
  info->add_option("--variant", variant, "mask activation: p, s or t");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the training gradient");
  gradcheck->add_option("--seed", seed, "base seed");
  gradcheck->add_option("--seeds", seeds, "number of random models to check");

  auto* bench = app.add_subcommand("bench", "measure streaming throughput");
  bench->add_option("--config", config, "engine config JSON");
  bench->add_option("--weights", weights, "weights file (random init when absent)");
  bench->add_option("--seconds", seconds, "benchmark audio length");
  bench->add_option("--seed", seed, "input/init seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*enhance) return cmd_enhance(input, out, weights, config, variant);
    if (*mix) return cmd_mix(speech_spec, noise_spec, snr, seed, duration, out);
    if (*train_toy)
      return cmd_train_toy(out, seed, epochs, steps, items, val_items, snr, duration, variant);
    if (*eval) return cmd_eval(est_path, ref_path);
    if (*info) return cmd_info(config, variant);
    if (*gradcheck) return cmd_gradcheck(seed, seeds);
    if (*bench) return cmd_bench(config, weights, seconds, seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
