#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "atcn/baselines.hpp"
#include "atcn/serialize.hpp"
#include "atcn/trainer.hpp"

namespace fs = std::filesystem;

namespace {

const atcn::DiacriticTable& hu() { return atcn::DiacriticTable::forLanguage("hu"); }

const std::vector<std::u32string>& sentences() {
  static const std::vector<std::u32string> s{
      U"a kék ég alatt ülünk", U"szőlőt eszünk és bort iszunk", U"a ház előtt áll egy fa",
      U"öt kis kutya fut a réten", U"holnap újra esni fog", U"a tűz mellett melegszünk",
      U"kérek egy pohár vizet", U"a gyerekek az iskolába mennek", U"ez a könyv nagyon érdekes",
      U"a folyó partján sétálunk", U"minden nap korán kelek", U"a piacon friss gyümölcsöt vettünk",
  };
  return s;
}

atcn::AtcnConfig tinyConfig() {
  atcn::AtcnConfig c;
  c.embeddingDim = 4;
  c.channels = 16;
  c.dilations = {1, 2};
  c.kernelSize = 3;
  c.dropoutRate = 0.1;
  return c;
}

atcn::TrainConfig tinyTrain(std::uint64_t seed) {
  atcn::TrainConfig t;
  t.epochs = 3;
  t.batchSize = 4;
  t.batchesPerEpoch = 3;
  t.seed = seed;
  t.adam.lr = 1e-2;
  return t;
}

atcn::AtcnModel tinyModel(std::uint64_t seed, atcn::AtcnConfig config = tinyConfig()) {
  return atcn::AtcnModel::initialized(config, atcn::buildVocab(sentences(), {1, &hu()}), "hu", seed);
}

std::vector<float> flatParams(atcn::AtcnModel& m) {
  std::vector<float> out;
  for (auto* p : m.parameters()) out.insert(out.end(), p->data().begin(), p->data().end());
  for (const auto& l : m.layers) {
    out.insert(out.end(), l.norm.runningMean.begin(), l.norm.runningMean.end());
    out.insert(out.end(), l.norm.runningVar.begin(), l.norm.runningVar.end());
  }
  return out;
}

fs::path tempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("atcn_trainer_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(TrainConfig, JsonRoundTripAndValidation) {
  atcn::TrainConfig c = tinyTrain(42);
  c.clipNorm = 2.5;
  c.evalEveryNEpochs = 2;
  const auto back = atcn::TrainConfig::fromJson(c.toJson());
  EXPECT_EQ(back.toJson(), c.toJson());
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(atcn::TrainConfig::fromJson("{\"epochs\": 7}").batchSize, 200u);
  EXPECT_THROW(atcn::TrainConfig::fromJson("{\"epoch\": 7}"), std::invalid_argument);
  atcn::TrainConfig bad;
  bad.batchSize = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = {};
  bad.augmentP = 1.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(TrainSetup, ModelKeysMergeOverDefaults) {
  const auto s = atcn::TrainSetup::fromJson(
      R"({"model": {"channels": 100, "dilations": [1, 2]}, "train": {"epochs": 2}, "vocab_min_count": 3})");
  EXPECT_EQ(s.model.channels, 100u);
  EXPECT_EQ(s.model.embeddingDim, 50u);
  EXPECT_EQ(s.model.dilations, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(s.train.epochs, 2u);
  EXPECT_EQ(s.vocabMinCount, 3u);
  EXPECT_EQ(s.language, "hu");
  EXPECT_EQ(atcn::TrainSetup::fromJson(s.toJson()).toJson(), s.toJson());
}

TEST(Trainer, LossDecreasesOverFirstStepsOnAFixedBatch) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto config = tinyConfig();
    config.dropoutRate = 0.0;
    auto model = tinyModel(seed, config);
    const atcn::MemoryLineSource src(sentences());
    auto tc = tinyTrain(seed);
    tc.batchSize = 12;
    atcn::Trainer trainer(model, src, {}, hu(), tc);
    const auto batch = trainer.sampler().batch(0, 0);
    double previous = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 5; ++i) {
      const double loss = trainer.step(batch, 0);
      EXPECT_LT(loss, previous) << "seed " << seed << " step " << i;
      previous = loss;
    }
  }
}

TEST(Trainer, SameSeedGivesIdenticalWeights) {
  const atcn::MemoryLineSource src(sentences());
  auto a = tinyModel(3);
  auto b = tinyModel(3);
  atcn::Trainer ta(a, src, {}, hu(), tinyTrain(9));
  atcn::Trainer tb(b, src, {}, hu(), tinyTrain(9));
  ta.run();
  tb.run();
  EXPECT_EQ(flatParams(a), flatParams(b));
  auto c = tinyModel(3);
  atcn::Trainer tc(c, src, {}, hu(), tinyTrain(10));
  tc.run();
  EXPECT_NE(flatParams(a), flatParams(c));
}

TEST(Trainer, ResumeMatchesUninterruptedRun) {
  const fs::path dir = tempDir("resume");
  const atcn::MemoryLineSource src(sentences());
  const std::vector<std::u32string> dev(sentences().begin(), sentences().begin() + 3);

  auto straight = tinyModel(4);
  atcn::Trainer full(straight, src, dev, hu(), tinyTrain(5));
  full.run();

  auto first = tinyModel(4);
  auto tc = tinyTrain(5);
  {
    atcn::Trainer part(first, src, dev, hu(), tc, {dir / "best.atcn", dir / "ckpt.atcn", dir / "log.jsonl"});
    part.runEpoch();
  }
  EXPECT_TRUE(fs::exists(dir / "ckpt.atcn.opt"));
  EXPECT_TRUE(fs::exists(dir / "best.atcn"));

  auto resumed = tinyModel(77);  // different init; everything comes from the checkpoint
  atcn::Trainer rest(resumed, src, dev, hu(), tc, {{}, dir / "ckpt.atcn", dir / "log.jsonl"});
  rest.resume(dir / "ckpt.atcn");
  EXPECT_EQ(rest.epochsDone(), 1u);
  rest.run();
  EXPECT_EQ(rest.epochsDone(), 3u);
  EXPECT_EQ(flatParams(resumed), flatParams(straight));
  EXPECT_EQ(rest.optimizer().step, full.optimizer().step);
  EXPECT_EQ(rest.optimizer().m, full.optimizer().m);
  EXPECT_EQ(rest.bestDevScore(), full.bestDevScore());

  std::ifstream log(dir / "log.jsonl");
  std::size_t lines = 0;
  for (std::string line; std::getline(log, line);) {
    ++lines;
    EXPECT_NE(line.find("\"epoch\""), std::string::npos);
    EXPECT_NE(line.find("\"alpha_word_accuracy\""), std::string::npos);
  }
  EXPECT_EQ(lines, 3u);
  fs::remove_all(dir);
}

TEST(Trainer, NonFiniteLossThrowsDivergence) {
  const atcn::MemoryLineSource src(sentences());
  auto model = tinyModel(6);
  model.outBias.data()[3] = std::numeric_limits<float>::quiet_NaN();
  atcn::Trainer trainer(model, src, {}, hu(), tinyTrain(1));
  EXPECT_THROW(trainer.step(trainer.sampler().batch(0, 0), 0), atcn::DivergenceError);
}

TEST(Trainer, BestModelTracksDevScore) {
  const fs::path dir = tempDir("best");
  const atcn::MemoryLineSource src(sentences());
  auto model = tinyModel(8);
  atcn::Trainer trainer(model, src, sentences(), hu(), tinyTrain(2), {dir / "best.atcn", {}, {}});
  double best = -1.0;
  for (const auto& rec : trainer.run()) {
    ASSERT_TRUE(rec.dev);
    EXPECT_EQ(rec.best, rec.dev->alphaWord.value() > best);
    best = std::max(best, rec.dev->alphaWord.value());
  }
  EXPECT_EQ(trainer.bestDevScore(), best);
  const auto saved = atcn::loadModel(dir / "best.atcn");
  EXPECT_DOUBLE_EQ(atcn::evaluateModel(saved, sentences(), atcn::StripMode::full(), hu()).alphaWord.value(), best);
  fs::remove_all(dir);
}

TEST(Evaluate, CopyBaselineAgainstHandOracle) {
  const atcn::Restorer copy = [](std::span<const std::u32string> in) {
    return std::vector<std::u32string>(in.begin(), in.end());
  };
  const auto perfect = atcn::evaluate(copy, sentences(), atcn::StripMode::augmented(0.0), hu());
  EXPECT_EQ(perfect.character.correct, perfect.character.total);
  EXPECT_EQ(perfect.sequence.correct, sentences().size());

  const auto stripped = atcn::evaluate(copy, sentences(), atcn::StripMode::full(), hu());
  std::size_t marked = 0, important = 0;
  for (const auto& s : sentences()) {
    for (char32_t c : s) {
      if (hu().isImportant(c)) {
        ++important;
        marked += hu().isDiacritized(c);
      }
    }
  }
  EXPECT_EQ(stripped.important.total, important);
  EXPECT_EQ(stripped.important.correct, important - marked);
}

TEST(Evaluate, MakeInputsModes) {
  const auto full = atcn::makeInputs(sentences(), atcn::StripMode::full(), hu());
  for (std::size_t i = 0; i < full.size(); ++i) EXPECT_EQ(full[i], atcn::dediacritize(sentences()[i], hu()));
  const auto a = atcn::makeInputs(sentences(), atcn::StripMode::augmented(0.5), hu(), 3);
  const auto b = atcn::makeInputs(sentences(), atcn::StripMode::augmented(0.5), hu(), 3);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, full);
}

TEST(Evaluate, RestoreAllKeepsOrder) {
  auto model = tinyModel(12);
  std::vector<std::u32string> inputs;
  for (const auto& s : sentences()) inputs.push_back(atcn::dediacritize(s, hu()).substr(0, 3 + inputs.size() * 2));
  inputs.push_back(U"");
  const auto out = atcn::restoreAll(model, inputs, atcn::Decoding::Unconstrained, 3);
  ASSERT_EQ(out.size(), inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    EXPECT_EQ(out[i], atcn::restore(model, inputs[i], atcn::Decoding::Unconstrained));
  }
}
