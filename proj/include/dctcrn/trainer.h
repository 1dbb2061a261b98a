#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dctcrn/adam.h"
#include "dctcrn/datagen.h"
#include "dctcrn/engine.h"
#include "dctcrn/sisnr.h"
#include "dctcrn/weights_io.h"

namespace dctcrn {

// End-to-end training on the negative SI-SNR of the resynthesized signal.
// The loss differentiates through overlap-add, the inverse transform, the
// mask and the whole recurrent network back to every parameter. Training
// skips the inference-time amplitude guard; the optimizer needs the raw
// mask output.

struct TrainConfig {
  double lr0 = 1e-3;
  double decay_factor = 0.5;
  double lr_floor = 1e-6;
  int warm_epochs = 0;  // epochs that keep lr0 before the schedule may act
  double grad_clip_norm = 5.0;
  int max_epochs = 10;
  int patience = 5;
  int batch = 1;
  int max_steps = 0;  // optional cap on optimizer steps, 0 = unlimited
  uint64_t seed = 0;
  DatasetOptions data;
  SiSnrOptions loss;
  std::string checkpoint_dir;  // empty disables checkpoint files

  void validate() const {
    require(lr0 > 0 && decay_factor > 0 && decay_factor <= 1, "train: bad learning rate config");
    require(max_epochs >= 1 && patience >= 1 && batch >= 1, "train: bad loop config");
    require(grad_clip_norm > 0, "train: grad_clip_norm must be > 0");
    data.validate();
  }
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val = 0.0;
  size_t steps = 0;
};

template <typename T>
struct TrainResult {
  ParameterSet<T> best_params;
  TrainHistory history;
};

// Learning rate for the epoch after the given validation history: halves
// whenever validation regressed against the epoch before, floored, and
// frozen for the first `warm_epochs` epochs.
inline double lr_schedule(const std::vector<double>& val_losses, double lr0, double decay_factor,
                          double lr_floor, int warm_epochs) {
  double lr = lr0;
  for (size_t i = 1; i < val_losses.size(); ++i) {
    if (int(i) + 1 <= warm_epochs) continue;
    if (val_losses[i] > val_losses[i - 1]) lr *= decay_factor;
  }
  return std::max(lr, lr_floor);
}

// Loss and parameter gradients for one (noisy, clean) pair. Gradients
// accumulate into `grads`, so zero it before a fresh batch. Returns
// -si_snr(resynthesized, clean) in dB.
template <typename T>
double training_loss_and_grad(const EngineConfig& cfg, const DctPlan<T>& plan,
                              const ParameterSet<T>& params, const Wave<T>& noisy,
                              const Wave<T>& clean, const SiSnrOptions& loss_opt,
                              ParameterSet<T>& grads) {
  cfg.validate();
  require(noisy.samples.size() == clean.samples.size(), "train: noisy/clean length mismatch");
  require(plan.size() == cfg.frames.frame_len, "train: plan size != frame length");
  const size_t n = noisy.samples.size();
  const MaskVariant variant = cfg.model.mask_variant;

  const Mat<T> frames = frame_signal(noisy, cfg.frames);
  const Mat<T> spec = stdct(frames, plan);
  ForwardTrace<T> trace;
  const Mat<T> logits = model_forward(cfg.model, params, spec, &trace);
  const T alpha = variant == MaskVariant::PReLU ? params.get("mask.alpha").data[0] : T(0.25);
  const Mat<T> est_spec = apply_mask(logits, spec, variant, alpha);
  const Mat<T> est_frames = istdct(est_spec, plan);
  const Wave<T> est = overlap_add(est_frames, cfg.frames, n);

  std::vector<T> d_est;
  const double score = si_snr_db_grad(est.samples, clean.samples, loss_opt, d_est);
  for (auto& g : d_est) g = -g;  // loss is the negated score

  const Mat<T> d_frames = overlap_add_adjoint(d_est, cfg.frames, est_frames.rows);
  // istdct applies the transform's transpose, so its adjoint is the forward
  // transform itself.
  const Mat<T> d_spec = stdct(d_frames, plan);
  Mat<T> d_logits;
  T* d_alpha = variant == MaskVariant::PReLU ? &grads.get("mask.alpha").data[0] : nullptr;
  apply_mask_backward(logits, spec, variant, alpha, d_spec, d_logits, d_alpha);
  model_backward(cfg.model, params, trace, d_logits, grads);
  return -score;
}

// Mean loss over a fixed validation pass (no gradients).
template <typename T>
double validation_loss(const EngineConfig& cfg, const DctPlan<T>& plan,
                       const ParameterSet<T>& params, const EpochStream<T>& stream,
                       const SiSnrOptions& loss_opt) {
  double total = 0.0;
  for (size_t i = 0; i < stream.size(); ++i) {
    const TrainPair<T> pair = stream.item(i);
    const Mat<T> frames = frame_signal(pair.noisy, cfg.frames);
    const Mat<T> spec = stdct(frames, plan);
    const Mat<T> logits = model_forward(cfg.model, params, spec);
    const T alpha = cfg.model.mask_variant == MaskVariant::PReLU
                        ? params.get("mask.alpha").data[0]
                        : T(0.25);
    const Mat<T> est_spec = apply_mask(logits, spec, cfg.model.mask_variant, alpha);
    const Wave<T> est =
        overlap_add(istdct(est_spec, plan), cfg.frames, pair.noisy.samples.size());
    total += -si_snr_db(est.samples, pair.clean.samples, loss_opt);
  }
  return total / double(stream.size());
}

namespace detail {

inline std::string checkpoint_name(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "epoch_%03d.dctw", epoch);
  return buf;
}

inline void write_history(const std::string& dir, const TrainHistory& h) {
  std::ofstream os(dir + "/history.txt");
  if (!os) throw std::runtime_error("cannot write history file in " + dir);
  os << "# epoch train_loss val_loss lr\n";
  for (const auto& r : h.epochs)
    os << r.epoch << " " << r.train_loss << " " << r.val_loss << " " << r.lr << "\n";
  os << "# best_epoch " << h.best_epoch << "\n";
}

}  // namespace detail

// Full training loop: dynamic remixing per epoch, Adam with gradient
// clipping, validation-driven learning rate decay, per-epoch checkpoints
// and early stopping on stalled validation loss. Deterministic for a given
// config and pair of manifests.
template <typename T>
TrainResult<T> train(const EngineConfig& cfg, const TrainConfig& tc, const Manifest& train_man,
                     const Manifest& val_man) {
  cfg.validate();
  tc.validate();
  const bool save_files = !tc.checkpoint_dir.empty();
  if (save_files) std::filesystem::create_directories(tc.checkpoint_dir);

  ParameterSet<T> params = init_params<T>(cfg.model, tc.seed);
  Adam<T> opt(params);
  ParameterSet<T> grads = params.zeros_like();
  DctPlan<T> plan(cfg.frames.frame_len);
  const EpochStream<T> val_stream(val_man, 0, tc.data);  // fixed across epochs

  TrainResult<T> out;
  out.best_params = params;
  TrainHistory& hist = out.history;
  std::vector<double> val_losses;
  bool step_cap_hit = false;

  for (int epoch = 1; epoch <= tc.max_epochs && !step_cap_hit; ++epoch) {
    const double lr =
        lr_schedule(val_losses, tc.lr0, tc.decay_factor, tc.lr_floor, tc.warm_epochs);
    const EpochStream<T> train_stream(train_man, uint64_t(epoch), tc.data);

    double epoch_loss = 0.0;
    size_t epoch_items = 0;
    for (size_t start = 0; start < train_stream.size(); start += size_t(tc.batch)) {
      const size_t stop = std::min(train_stream.size(), start + size_t(tc.batch));
      grads.zero();
      double batch_loss = 0.0;
      for (size_t i = start; i < stop; ++i) {
        const TrainPair<T> pair = train_stream.item(i);
        const double loss =
            training_loss_and_grad(cfg, plan, params, pair.noisy, pair.clean, tc.loss, grads);
        if (!std::isfinite(loss))
          throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) +
                                   " item " + std::to_string(i) + " (item seed " +
                                   std::to_string(pair.seed) + ")");
        batch_loss += loss;
      }
      const size_t count = stop - start;
      if (count > 1) {
        const T inv = T(1.0 / double(count));
        for (auto& e : grads.entries)
          for (auto& g : e.tensor.data) g *= inv;
      }
      clip_grad_norm(grads, tc.grad_clip_norm);
      opt.step(params, grads, lr);
      epoch_loss += batch_loss;
      epoch_items += count;
      ++hist.steps;
      if (tc.max_steps > 0 && hist.steps >= size_t(tc.max_steps)) {
        step_cap_hit = true;
        break;
      }
    }

    const double train_loss = epoch_loss / double(epoch_items);
    const double val_loss = validation_loss(cfg, plan, params, val_stream, tc.loss);
    val_losses.push_back(val_loss);
    hist.epochs.push_back({epoch, train_loss, val_loss, lr});

    if (hist.best_epoch == 0 || val_loss < hist.best_val) {
      hist.best_epoch = epoch;
      hist.best_val = val_loss;
      out.best_params = params;
      if (save_files) save_params(out.best_params, tc.checkpoint_dir + "/best.dctw");
    }
    if (save_files) {
      save_params(params, tc.checkpoint_dir + "/" + detail::checkpoint_name(epoch));
      detail::write_history(tc.checkpoint_dir, hist);
    }
    if (epoch - hist.best_epoch >= tc.patience) break;
  }
  return out;
}

}  // namespace dctcrn
