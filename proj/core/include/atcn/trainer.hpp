#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "atcn/blob_file.hpp"
#include "atcn/corpus.hpp"
#include "atcn/metrics.hpp"
#include "atcn/model.hpp"
#include "atcn/nn/adam.hpp"

namespace atcn {

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batchSize = 200;
  std::size_t batchesPerEpoch = 500;
  std::size_t epochSequenceLimit = 100000;
  double augmentP = 0.8;
  nn::AdamHyper adam;
  double clipNorm = 5.0;
  std::uint64_t seed = 1;
  std::size_t checkpointEvery = 1;
  std::size_t evalEveryNEpochs = 1;
  std::size_t evalBatchSize = 32;

  void validate() const;
  EpochOptions epochOptions() const;
  std::string toJson() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig fromJson(std::string_view json);
};

/// Model architecture + training settings + vocabulary settings, as read by `atcn train --config`.
struct TrainSetup {
  AtcnConfig model;
  TrainConfig train;
  std::size_t vocabMinCount = 10;
  std::string language = "hu";

  static TrainSetup fromJson(std::string_view json);
  static TrainSetup load(const std::filesystem::path& path);
  std::string toJson() const;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Evaluation

struct StripMode {
  enum class Kind { Full, Augmented } kind = Kind::Full;
  double p = 1.0;

  static StripMode full() { return {}; }
  static StripMode augmented(double p) { return {Kind::Augmented, p}; }
};

/// Inputs derived from gold: dediacritize for full, augment(p) with a per-line seed otherwise.
std::vector<std::u32string> makeInputs(std::span<const std::u32string> gold, const StripMode& mode,
                                       const DiacriticTable& table, std::uint64_t seed = 0);

using Restorer = std::function<std::vector<std::u32string>(std::span<const std::u32string>)>;

Restorer modelRestorer(const AtcnModel& model, Decoding decoding = Decoding::Unconstrained,
                       std::size_t batchSize = 32);

/// Restores `inputs` in batches of similar length, preserving order.
std::vector<std::u32string> restoreAll(const AtcnModel& model, std::span<const std::u32string> inputs,
                                       Decoding decoding = Decoding::Unconstrained, std::size_t batchSize = 32);

MetricsReport evaluate(const Restorer& restorer, std::span<const std::u32string> gold, const StripMode& mode,
                       const DiacriticTable& table, std::uint64_t seed = 0);

MetricsReport evaluateModel(const AtcnModel& model, std::span<const std::u32string> gold, const StripMode& mode,
                            const DiacriticTable& table, std::uint64_t seed = 0, std::size_t batchSize = 32);

// ---------------------------------------------------------------------------
// Training

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double trainLoss = 0.0;
  std::size_t positions = 0;
  double seconds = 0.0;
  std::optional<MetricsReport> dev;
  bool best = false;

  std::string toJsonLine() const;
};

struct TrainerPaths {
  /// Best-by-dev model (or the latest model when there is no dev set). Empty: not written.
  std::filesystem::path bestModel;
  /// Last checkpoint; the optimizer sidecar goes to the same path + ".opt". Empty: not written.
  std::filesystem::path checkpoint;
  /// JSONL training log, appended per epoch. Empty: not written.
  std::filesystem::path log;
};

class Trainer {
 public:
  Trainer(AtcnModel& model, const LineSource& train, std::span<const std::u32string> dev,
          const DiacriticTable& table, TrainConfig config, TrainerPaths paths = {});

  /// One optimizer step on a batch; returns the mean masked cross-entropy before the update.
  /// Throws DivergenceError when the loss or gradient norm is not finite.
  double step(const SequenceBatch& batch, std::uint64_t dropoutSeed);

  /// Runs the next epoch (draws, dev evaluation, checkpoints, log).
  EpochRecord runEpoch();
  /// Runs until config.epochs epochs are complete; calls `onEpoch` after each.
  std::vector<EpochRecord> run(const std::function<void(const EpochRecord&)>& onEpoch = {});

  std::size_t epochsDone() const { return epoch_; }
  double bestDevScore() const { return bestScore_; }
  const nn::AdamState<float>& optimizer() const { return adam_; }
  const EpochSampler& sampler() const { return sampler_; }

  void saveCheckpoint(const std::filesystem::path& path) const;
  /// Restores model parameters, optimizer state and progress from a checkpoint.
  void resume(const std::filesystem::path& path);

 private:
  AtcnModel& model_;
  const LineSource& train_;
  std::span<const std::u32string> dev_;
  const DiacriticTable& table_;
  TrainConfig config_;
  TrainerPaths paths_;
  EpochSampler sampler_;
  nn::AdamState<float> adam_;
  std::size_t epoch_ = 0;
  double bestScore_ = -1.0;
};

}  // namespace atcn
