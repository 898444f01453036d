#include "atcn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "atcn/random.hpp"
#include "atcn/serialize.hpp"
#include "json.hpp"

namespace atcn {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kDropoutStream = 0x64726F70ULL;

template <typename V>
void readKey(const Json& j, const char* key, V& into) {
  if (j.contains(key)) into = j.at(key).get<V>();
}

void rejectUnknown(const Json& j, std::initializer_list<const char*> known, const char* what) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      throw std::invalid_argument(std::string(what) + ": unknown key '" + key + "'");
    }
  }
}

Json trainJson(const TrainConfig& c) {
  return Json{{"epochs", c.epochs},
              {"batch_size", c.batchSize},
              {"batches_per_epoch", c.batchesPerEpoch},
              {"epoch_sequence_limit", c.epochSequenceLimit},
              {"augment_p", c.augmentP},
              {"learning_rate", c.adam.lr},
              {"beta1", c.adam.beta1},
              {"beta2", c.adam.beta2},
              {"adam_eps", c.adam.eps},
              {"clip_norm", c.clipNorm},
              {"seed", c.seed},
              {"checkpoint_every", c.checkpointEvery},
              {"eval_every", c.evalEveryNEpochs},
              {"eval_batch_size", c.evalBatchSize}};
}

TrainConfig trainFromJson(const Json& j) {
  rejectUnknown(j,
                {"epochs", "batch_size", "batches_per_epoch", "epoch_sequence_limit", "augment_p", "learning_rate",
                 "beta1", "beta2", "adam_eps", "clip_norm", "seed", "checkpoint_every", "eval_every",
                 "eval_batch_size"},
                "train config");
  TrainConfig c;
  readKey(j, "epochs", c.epochs);
  readKey(j, "batch_size", c.batchSize);
  readKey(j, "batches_per_epoch", c.batchesPerEpoch);
  readKey(j, "epoch_sequence_limit", c.epochSequenceLimit);
  readKey(j, "augment_p", c.augmentP);
  readKey(j, "learning_rate", c.adam.lr);
  readKey(j, "beta1", c.adam.beta1);
  readKey(j, "beta2", c.adam.beta2);
  readKey(j, "adam_eps", c.adam.eps);
  readKey(j, "clip_norm", c.clipNorm);
  readKey(j, "seed", c.seed);
  readKey(j, "checkpoint_every", c.checkpointEvery);
  readKey(j, "eval_every", c.evalEveryNEpochs);
  readKey(j, "eval_batch_size", c.evalBatchSize);
  c.validate();
  return c;
}

void appendLine(const std::filesystem::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot open log " + path.string());
  out << line << '\n';
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0 || batchSize == 0 || batchesPerEpoch == 0 || epochSequenceLimit == 0 || checkpointEvery == 0 ||
      evalEveryNEpochs == 0 || evalBatchSize == 0) {
    throw std::invalid_argument("TrainConfig: counts must be positive");
  }
  if (!(augmentP >= 0.0 && augmentP <= 1.0)) throw std::invalid_argument("TrainConfig: augment_p must be in [0, 1]");
  if (!(adam.lr > 0.0) || !(clipNorm > 0.0)) {
    throw std::invalid_argument("TrainConfig: learning rate and clip norm must be positive");
  }
}

EpochOptions TrainConfig::epochOptions() const {
  EpochOptions o;
  o.batchSize = batchSize;
  o.batchesPerEpoch = batchesPerEpoch;
  o.epochSequenceLimit = epochSequenceLimit;
  o.augmentP = augmentP;
  o.seed = seed;
  return o;
}

std::string TrainConfig::toJson() const { return trainJson(*this).dump(2); }

TrainConfig TrainConfig::fromJson(std::string_view json) { return trainFromJson(Json::parse(json)); }

TrainSetup TrainSetup::fromJson(std::string_view text) {
  const Json j = Json::parse(text);
  rejectUnknown(j, {"model", "train", "vocab_min_count", "language"}, "setup");
  TrainSetup s;
  if (j.contains("model")) {
    const Json& m = j.at("model");
    rejectUnknown(m,
                  {"embedding_dim", "channels", "dilations", "convs_per_block", "kernel_size", "dropout_rate",
                   "max_sequence_length", "upsampler", "batch_norm_momentum", "batch_norm_epsilon"},
                  "model config");
    Json full = Json::parse(configToJson(AtcnConfig{}));
    for (const auto& [key, value] : m.items()) full[key] = value;
    s.model = configFromJson(full.dump());
  }
  if (j.contains("train")) s.train = trainFromJson(j.at("train"));
  readKey(j, "vocab_min_count", s.vocabMinCount);
  readKey(j, "language", s.language);
  DiacriticTable::forLanguage(s.language);
  return s;
}

TrainSetup TrainSetup::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fromJson(text);
}

std::string TrainSetup::toJson() const {
  Json j;
  j["language"] = language;
  j["vocab_min_count"] = vocabMinCount;
  j["model"] = Json::parse(configToJson(model));
  j["train"] = trainJson(train);
  return j.dump(2);
}

// ---------------------------------------------------------------------------

std::vector<std::u32string> makeInputs(std::span<const std::u32string> gold, const StripMode& mode,
                                       const DiacriticTable& table, std::uint64_t seed) {
  std::vector<std::u32string> out;
  out.reserve(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (mode.kind == StripMode::Kind::Full) {
      out.push_back(dediacritize(gold[i], table));
    } else {
      out.push_back(augment(gold[i], table, mode.p, deriveSeed(seed, {i})));
    }
  }
  return out;
}

std::vector<std::u32string> restoreAll(const AtcnModel& model, std::span<const std::u32string> inputs,
                                       Decoding decoding, std::size_t batchSize) {
  if (batchSize == 0) throw std::invalid_argument("restoreAll: batch size must be positive");
  const DiacriticTable* table =
      decoding == Decoding::VariantConstrained ? &DiacriticTable::forLanguage(model.language()) : nullptr;
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return inputs[a].size() < inputs[b].size(); });
  std::vector<std::u32string> out(inputs.size());
  std::vector<std::u32string> chunk;
  for (std::size_t start = 0; start < order.size(); start += batchSize) {
    const std::size_t end = std::min(order.size(), start + batchSize);
    chunk.clear();
    for (std::size_t k = start; k < end; ++k) chunk.push_back(inputs[order[k]]);
    auto restored = restoreBatch(model, chunk, decoding, table);
    for (std::size_t k = start; k < end; ++k) out[order[k]] = std::move(restored[k - start]);
  }
  return out;
}

Restorer modelRestorer(const AtcnModel& model, Decoding decoding, std::size_t batchSize) {
  return [&model, decoding, batchSize](std::span<const std::u32string> inputs) {
    return restoreAll(model, inputs, decoding, batchSize);
  };
}

MetricsReport evaluate(const Restorer& restorer, std::span<const std::u32string> gold, const StripMode& mode,
                       const DiacriticTable& table, std::uint64_t seed) {
  const auto inputs = makeInputs(gold, mode, table, seed);
  const auto hyps = restorer(inputs);
  return scoreSequences(gold, hyps, table);
}

MetricsReport evaluateModel(const AtcnModel& model, std::span<const std::u32string> gold, const StripMode& mode,
                            const DiacriticTable& table, std::uint64_t seed, std::size_t batchSize) {
  return evaluate(modelRestorer(model, Decoding::Unconstrained, batchSize), gold, mode, table, seed);
}

// ---------------------------------------------------------------------------

std::string EpochRecord::toJsonLine() const {
  Json j;
  j["epoch"] = epoch;
  j["train_loss"] = trainLoss;
  j["positions"] = positions;
  j["seconds"] = seconds;
  if (dev) j["dev"] = Json::parse(dev->toJson());
  j["best"] = best;
  return j.dump();
}

Trainer::Trainer(AtcnModel& model, const LineSource& train, std::span<const std::u32string> dev,
                 const DiacriticTable& table, TrainConfig config, TrainerPaths paths)
    : model_(model),
      train_(train),
      dev_(dev),
      table_(table),
      config_((config.validate(), config)),
      paths_(std::move(paths)),
      sampler_(train, model.vocab(), table, config_.epochOptions()) {}

double Trainer::step(const SequenceBatch& batch, std::uint64_t dropoutSeed) {
  ForwardCache<float> cache;
  model_.zeroGrad();
  const nn::Tensor<float> logits = model_.forward(batch, nn::Mode::Train, dropoutSeed, &cache);
  const auto loss = nn::softmaxCrossEntropy(logits, batch.targetIds, batch.mask);
  if (!std::isfinite(loss.loss)) throw DivergenceError("training loss is not finite");
  model_.backward(loss.gradLogits, cache);
  auto params = model_.parameters();
  const double norm = nn::clipGradNorm<float>(params, config_.clipNorm);
  if (!std::isfinite(norm)) throw DivergenceError("gradient norm is not finite");
  nn::adamStep<float>(params, adam_, config_.adam);
  return loss.loss;
}

EpochRecord Trainer::runEpoch() {
  const auto started = std::chrono::steady_clock::now();
  EpochRecord rec;
  rec.epoch = epoch_ + 1;
  const auto draws = sampler_.epochDraws(epoch_);
  double lossSum = 0.0;
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const SequenceBatch batch =
        sampler_.buildBatch(draws[d], deriveSeed(config_.seed, {0x61756755ULL, epoch_, d}));
    const std::size_t count =
        static_cast<std::size_t>(std::count(batch.mask.begin(), batch.mask.end(), std::uint8_t{1}));
    lossSum += step(batch, deriveSeed(config_.seed, {kDropoutStream, epoch_, d})) * double(count);
    rec.positions += count;
  }
  rec.trainLoss = rec.positions == 0 ? 0.0 : lossSum / double(rec.positions);
  epoch_ += 1;

  const bool evalNow = !dev_.empty() && (epoch_ % config_.evalEveryNEpochs == 0 || epoch_ == config_.epochs);
  if (evalNow) {
    rec.dev = evaluateModel(model_, dev_, StripMode::full(), table_, 0, config_.evalBatchSize);
    const double score = rec.dev->alphaWord.value();
    if (score > bestScore_) {
      bestScore_ = score;
      rec.best = true;
    }
  } else if (dev_.empty()) {
    rec.best = true;
  }
  if (rec.best && !paths_.bestModel.empty()) saveModel(model_, paths_.bestModel);
  if (!paths_.checkpoint.empty() && (epoch_ % config_.checkpointEvery == 0 || epoch_ == config_.epochs)) {
    saveCheckpoint(paths_.checkpoint);
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (!paths_.log.empty()) appendLine(paths_.log, rec.toJsonLine());
  return rec;
}

std::vector<EpochRecord> Trainer::run(const std::function<void(const EpochRecord&)>& onEpoch) {
  std::vector<EpochRecord> records;
  while (epoch_ < config_.epochs) {
    records.push_back(runEpoch());
    if (onEpoch) onEpoch(records.back());
  }
  return records;
}

void Trainer::saveCheckpoint(const std::filesystem::path& path) const {
  io::Container opt;
  Json meta;
  meta["format"] = "atcn-optimizer";
  meta["epoch"] = epoch_;
  meta["step"] = adam_.step;
  meta["best_dev_alpha_word"] = bestScore_;
  meta["train"] = trainJson(config_);
  opt.metadata = meta.dump();
  const auto named = model_.namedParameters();
  for (std::size_t i = 0; i < adam_.m.size(); ++i) {
    const auto& shape = named.at(i).second->shape();
    opt.blobs.push_back({"m." + named[i].first, shape, adam_.m[i]});
    opt.blobs.push_back({"v." + named[i].first, shape, adam_.v[i]});
  }
  saveModel(model_, path);
  io::writeFile(path.string() + ".opt", opt);
}

void Trainer::resume(const std::filesystem::path& path) {
  AtcnModel loaded = loadModel(path);
  if (loaded.vocab().chars() != model_.vocab().chars()) {
    throw std::invalid_argument("checkpoint vocabulary differs from the model being trained");
  }
  auto dst = model_.namedParameters();
  auto src = loaded.namedParameters();
  if (dst.size() != src.size()) throw std::invalid_argument("checkpoint architecture differs");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].second->shape() != src[i].second->shape()) throw std::invalid_argument("checkpoint architecture differs");
    std::copy(src[i].second->data().begin(), src[i].second->data().end(), dst[i].second->data().begin());
  }
  for (std::size_t l = 0; l < model_.layers.size(); ++l) {
    model_.layers[l].norm.runningMean = loaded.layers[l].norm.runningMean;
    model_.layers[l].norm.runningVar = loaded.layers[l].norm.runningVar;
  }

  const io::Container opt = io::readFile(path.string() + ".opt");
  const Json meta = Json::parse(opt.metadata);
  if (meta.value("format", std::string()) != "atcn-optimizer") {
    throw io::FormatError(io::FormatErrorKind::MalformedHeader, "not an optimizer checkpoint");
  }
  epoch_ = meta.at("epoch").get<std::size_t>();
  bestScore_ = meta.at("best_dev_alpha_word").get<double>();
  adam_ = {};
  adam_.step = meta.at("step").get<std::int64_t>();
  if (adam_.step > 0) {
    for (const auto& [name, tensor] : dst) {
      const io::Blob& m = opt.blob("m." + name);
      const io::Blob& v = opt.blob("v." + name);
      if (m.data.size() != tensor->size() || v.data.size() != tensor->size()) {
        throw io::FormatError(io::FormatErrorKind::SizeMismatch, "optimizer state does not match '" + name + "'",
                              name);
      }
      adam_.m.push_back(m.data);
      adam_.v.push_back(v.data);
    }
  }
}

}  // namespace atcn
