// atcn: command-line front end for the diacritics restoration toolkit.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "atcn/baselines.hpp"
#include "atcn/corpus.hpp"
#include "atcn/diacritics.hpp"
#include "atcn/metrics.hpp"
#include "atcn/model.hpp"
#include "atcn/random.hpp"
#include "atcn/serialize.hpp"
#include "atcn/trainer.hpp"
#include "atcn/utf8.hpp"
#include "atcn/vocab.hpp"
#include "json.hpp"
#include "sha256.hpp"

namespace fs = std::filesystem;
using namespace atcn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// I/O helpers

/// Writes to a file when a path is given, otherwise to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw std::runtime_error("cannot open " + path + " for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw std::runtime_error("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

class Input {
 public:
  explicit Input(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
      if (!*file_) throw std::runtime_error("cannot open " + path);
    }
  }
  std::istream& stream() { return file_ ? *file_ : std::cin; }

 private:
  std::unique_ptr<std::ifstream> file_;
};

/// Streams lines, decoding each; invalid UTF-8 raises an error naming the byte
/// offset in the whole input.
template <typename Fn>
void forEachLine(std::istream& in, Fn&& fn) {
  std::string raw;
  std::size_t lineNo = 0;
  std::uint64_t offset = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    std::u32string text;
    std::size_t bad = 0;
    if (!utf8::tryDecode(raw, text, &bad)) {
      throw std::runtime_error("invalid UTF-8 at byte offset " + std::to_string(offset + bad) + " (line " +
                               std::to_string(lineNo) + ")");
    }
    fn(text);
    offset += raw.size() + 1;
  }
}

std::vector<std::u32string> readInputLines(const std::string& path) {
  if (path.empty()) throw UsageError("an input file is required");
  return readLines(path);
}

std::string modelPathOrEnv(const std::string& given) {
  if (!given.empty()) return given;
  if (const char* env = std::getenv("ATCN_MODEL"); env != nullptr && *env != '\0') return env;
  throw UsageError("no model given (use --model or set ATCN_MODEL)");
}

StripMode stripMode(const std::string& name, double p) {
  if (name == "full") return StripMode::full();
  if (name == "augmented") return StripMode::augmented(p);
  throw UsageError("--strip must be 'full' or 'augmented'");
}

// ---------------------------------------------------------------------------
// prepare

struct PrepareArgs {
  std::string lang = "hu";
  std::string in;
  std::string outTrain;
  std::string outDev;
  std::size_t maxLen = 500;
  double minRatio = 0.05;
  std::string devShards = "0-47";
  std::string report;
};

int runPrepare(const PrepareArgs& a) {
  const DiacriticTable& table = DiacriticTable::forLanguage(a.lang);
  const std::vector<bool> dev = parseShardSet(a.devShards);
  std::ifstream in(a.in, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + a.in);

  CleanOptions opts;
  opts.maxLength = a.maxLen;
  opts.minDiacriticRatio = a.minRatio;
  LineCleaner cleaner(table, opts);
  CleanStats stats;
  std::ofstream trainOut(a.outTrain, std::ios::binary | std::ios::trunc);
  std::ofstream devOut(a.outDev, std::ios::binary | std::ios::trunc);
  if (!trainOut || !devOut) throw std::runtime_error("cannot open output files");
  DatasetStats trainStats;
  DatasetStats devStats;
  std::string raw;
  while (std::getline(in, raw)) {
    DropReason reason = DropReason::None;
    bool truncated = false;
    auto cleaned = cleaner.clean(raw, &reason, &truncated);
    stats.add(reason);
    if (!cleaned) continue;
    if (truncated) ++stats.truncated;
    const std::string bytes = utf8::encode(*cleaned);
    const bool toDev = dev[shardOf(bytes)];
    (toDev ? devOut : trainOut) << bytes << '\n';
    DatasetStats& s = toDev ? devStats : trainStats;
    s.sequences += 1;
    s.characters += cleaned->size();
  }
  if (stats.input == 0) throw std::runtime_error("input " + a.in + " is empty");
  trainOut.flush();
  devOut.flush();
  if (!trainOut || !devOut) throw std::runtime_error("write failed");

  nlohmann::ordered_json report;
  report["language"] = a.lang;
  report["max_length"] = a.maxLen;
  report["min_diacritic_ratio"] = a.minRatio;
  report["dev_shards"] = a.devShards;
  report["cleaning"] = nlohmann::ordered_json::parse(stats.toJson());
  report["train"] = nlohmann::ordered_json::parse(trainStats.toJson());
  report["dev"] = nlohmann::ordered_json::parse(devStats.toJson());
  Output out(a.report);
  out.stream() << report.dump(2) << '\n';
  out.finish();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config;
  std::string train;
  std::string dev;
  std::string outModel;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::string checkpoint;
  std::string log;
  bool resume = false;
  bool quiet = false;
};

int runTrain(const TrainArgs& a) {
  TrainSetup setup = a.config.empty() ? TrainSetup{} : TrainSetup::load(a.config);
  if (a.seed) setup.train.seed = *a.seed;
  if (a.epochs) setup.train.epochs = *a.epochs;
  setup.train.validate();
  const DiacriticTable& table = DiacriticTable::forLanguage(setup.language);

  CharVocab vocab;
  {
    const auto lines = readLines(a.train);
    VocabOptions vo;
    vo.minCount = setup.vocabMinCount;
    vo.table = &table;
    vocab = buildVocab(lines, vo);
  }
  const FileLineSource trainSource(a.train);
  if (trainSource.size() == 0) throw std::runtime_error("training file " + a.train + " has no sequences");
  std::vector<std::u32string> dev;
  if (!a.dev.empty()) dev = readLines(a.dev);

  AtcnModel model = AtcnModel::initialized(setup.model, vocab, setup.language,
                                           deriveSeed(setup.train.seed, {0x696E6974ULL}));
  TrainerPaths paths;
  paths.bestModel = a.outModel;
  paths.checkpoint = a.checkpoint;
  paths.log = a.log;
  Trainer trainer(model, trainSource, dev, table, setup.train, paths);
  if (trainer.sampler().undersized()) {
    std::cerr << "warning: training set has fewer sequences than one batch; using a single smaller batch\n";
  }
  if (a.resume) {
    if (a.checkpoint.empty()) throw UsageError("--resume needs --checkpoint");
    if (fs::exists(a.checkpoint)) {
      trainer.resume(a.checkpoint);
      if (!a.quiet) std::cerr << "resumed after epoch " << trainer.epochsDone() << '\n';
    }
  }
  if (!a.quiet) {
    std::cerr << "vocab " << vocab.size() << ", parameters " << model.parameterCount() << ", train sequences "
              << trainSource.size() << ", dev sequences " << dev.size() << '\n';
  }
  try {
    trainer.run([&](const EpochRecord& r) {
      if (!a.quiet) std::cerr << r.toJsonLine() << '\n';
    });
  } catch (const DivergenceError& e) {
    std::cerr << "atcn: training diverged: " << e.what();
    if (!a.checkpoint.empty() && fs::exists(a.checkpoint)) std::cerr << "; last good checkpoint kept at " << a.checkpoint;
    std::cerr << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// restore

struct RestoreArgs {
  std::string model;
  bool constrained = false;
  std::string in;
  std::string out;
};

int runRestore(const RestoreArgs& a) {
  const AtcnModel model = loadModel(modelPathOrEnv(a.model));
  const Decoding decoding = a.constrained ? Decoding::VariantConstrained : Decoding::Unconstrained;
  const DiacriticTable* table =
      a.constrained ? &DiacriticTable::forLanguage(model.language()) : nullptr;
  Input in(a.in);
  Output out(a.out);
  forEachLine(in.stream(), [&](const std::u32string& line) {
    out.stream() << utf8::encode(restore(model, line, decoding, table)) << '\n';
    out.stream().flush();
  });
  out.finish();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate, confusion, sample-errors

struct HypothesisArgs {
  std::string gold;
  std::string hyp;
  std::string model;
  std::string lang = "hu";
  std::string strip = "full";
  double p = 0.8;
  std::uint64_t seed = 0;
  std::size_t batchSize = 32;
  bool constrained = false;
};

/// Hypotheses either read from --hyp or produced by the model from stripped gold.
std::vector<std::u32string> hypotheses(const HypothesisArgs& a, const std::vector<std::u32string>& gold,
                                       const DiacriticTable*& table, std::optional<AtcnModel>& holder) {
  if (!a.hyp.empty()) {
    table = &DiacriticTable::forLanguage(a.lang);
    return readLines(a.hyp);
  }
  const StripMode mode = stripMode(a.strip, a.p);
  holder = loadModel(modelPathOrEnv(a.model));
  table = &DiacriticTable::forLanguage(holder->language());
  const auto inputs = makeInputs(gold, mode, *table, a.seed);
  return restoreAll(*holder, inputs, a.constrained ? Decoding::VariantConstrained : Decoding::Unconstrained,
                    a.batchSize);
}

struct EvaluateArgs {
  HypothesisArgs common;
  std::string baseline = "model";
  std::string dict;
  std::string dictTrain;
  std::string out;
};

int runEvaluate(const EvaluateArgs& a) {
  const StripMode mode = stripMode(a.common.strip, a.common.p);
  if (a.baseline != "model" && a.baseline != "copy" && a.baseline != "dict") {
    throw UsageError("--baseline must be copy, dict or model");
  }
  const auto gold = readInputLines(a.common.gold);
  MetricsReport report;
  if (!a.common.hyp.empty()) {
    report = scoreSequences(gold, readLines(a.common.hyp), DiacriticTable::forLanguage(a.common.lang));
  } else if (a.baseline == "model") {
    const AtcnModel model = loadModel(modelPathOrEnv(a.common.model));
    const DiacriticTable& table = DiacriticTable::forLanguage(model.language());
    const Decoding d = a.common.constrained ? Decoding::VariantConstrained : Decoding::Unconstrained;
    report = evaluate(modelRestorer(model, d, a.common.batchSize), gold, mode, table,
                      a.common.seed);
  } else if (a.baseline == "copy") {
    const DiacriticTable& table = DiacriticTable::forLanguage(a.common.lang);
    const Restorer copy = [](std::span<const std::u32string> in) {
      return std::vector<std::u32string>(in.begin(), in.end());
    };
    report = evaluate(copy, gold, mode, table, a.common.seed);
  } else if (a.baseline == "dict") {
    const DiacriticTable& table = DiacriticTable::forLanguage(a.common.lang);
    DiacriticDictionary dict;
    if (!a.dict.empty()) {
      dict = DiacriticDictionary::load(a.dict, table);
    } else if (!a.dictTrain.empty()) {
      dict = buildDictionary(readLines(a.dictTrain), table);
    } else {
      throw UsageError("--baseline dict needs --dict or --dict-train");
    }
    const Restorer restorer = [&dict](std::span<const std::u32string> in) {
      std::vector<std::u32string> out;
      for (const auto& l : in) out.push_back(dictionaryRestore(l, dict));
      return out;
    };
    report = evaluate(restorer, gold, mode, table, a.common.seed);
  }
  Output out(a.out);
  out.stream() << report.toJson() << '\n';
  out.finish();
  return kExitOk;
}

struct ConfusionArgs {
  HypothesisArgs common;
  std::string format = "table";
  std::string out;
};

int runConfusion(const ConfusionArgs& a) {
  if (a.format != "json" && a.format != "table") throw UsageError("--format must be table or json");
  const auto gold = readInputLines(a.common.gold);
  const DiacriticTable* table = nullptr;
  std::optional<AtcnModel> model;
  const auto hyps = hypotheses(a.common, gold, table, model);
  const ConfusionMatrix m = confusion(gold, hyps, *table);
  Output out(a.out);
  if (a.format == "json") {
    out.stream() << m.toJson() << '\n';
  } else {
    out.stream() << m.toTable();
  }
  out.finish();
  return kExitOk;
}

struct SampleArgs {
  HypothesisArgs common;
  std::size_t k = 500;
  std::string out;
};

int runSampleErrors(const SampleArgs& a) {
  const auto gold = readInputLines(a.common.gold);
  const DiacriticTable* table = nullptr;
  std::optional<AtcnModel> model;
  const auto hyps = hypotheses(a.common, gold, table, model);
  const ErrorSampleResult r = sampleErrors(gold, hyps, a.k, a.common.seed);
  if (r.exhausted) {
    std::cerr << "note: only " << r.totalErrors << " errors available, returning all of them\n";
  }
  Output out(a.out);
  out.stream() << r.toJson() << '\n';
  out.finish();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// ambiguity, dictionary

struct AmbiguityArgs {
  std::string in;
  std::string lang = "hu";
  std::string format = "table";
  std::string out;
};

int runAmbiguity(const AmbiguityArgs& a) {
  const DiacriticTable& table = DiacriticTable::forLanguage(a.lang);
  const AmbiguityStats s = analyzeAmbiguity(readInputLines(a.in), table);
  Output out(a.out);
  if (a.format == "json") {
    out.stream() << s.toJson() << '\n';
  } else if (a.format == "table") {
    out.stream() << s.toTable();
  } else {
    throw UsageError("--format must be table or json");
  }
  out.finish();
  return kExitOk;
}

struct DictBuildArgs {
  std::string in;
  std::string lang = "hu";
  std::string out;
};

int runDictBuild(const DictBuildArgs& a) {
  const DiacriticTable& table = DiacriticTable::forLanguage(a.lang);
  const DiacriticDictionary dict = buildDictionary(readInputLines(a.in), table);
  Output out(a.out);
  out.stream() << dict.toTsv();
  out.finish();
  return kExitOk;
}

struct DictRestoreArgs {
  std::string dict;
  std::string lang = "hu";
  std::string in;
  std::string out;
};

int runDictRestore(const DictRestoreArgs& a) {
  const DiacriticTable& table = DiacriticTable::forLanguage(a.lang);
  const DiacriticDictionary dict = DiacriticDictionary::load(a.dict, table);
  Input in(a.in);
  Output out(a.out);
  forEachLine(in.stream(), [&](const std::u32string& line) {
    out.stream() << utf8::encode(dictionaryRestore(line, dict)) << '\n';
  });
  out.finish();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// export-web

struct ExportArgs {
  std::string model;
  std::string outDir;
};

int runExportWeb(const ExportArgs& a) {
  const std::string path = modelPathOrEnv(a.model);
  const std::string bytes = io::readBytes(path);
  const AtcnModel model = modelFromBytes(bytes);
  fs::create_directories(a.outDir);
  const std::string fileName = model.language() + ".atcn";
  io::writeBytes(fs::path(a.outDir) / fileName, bytes);

  using Json = nlohmann::ordered_json;
  const fs::path manifestPath = fs::path(a.outDir) / "manifest.json";
  std::vector<Json> entries;
  if (fs::exists(manifestPath)) {
    std::ifstream in(manifestPath, std::ios::binary);
    const Json old = Json::parse(in);
    for (const Json& e : old.at("models")) {
      if (e.at("language") != model.language()) entries.push_back(e);
    }
  }
  Json entry;
  entry["language"] = model.language();
  entry["file"] = fileName;
  entry["bytes"] = bytes.size();
  entry["sha256"] = cli::sha256Hex(bytes);
  entry["format_version"] = io::kFormatVersion;
  entry["vocab_size"] = model.vocabSize();
  entry["parameters"] = model.parameterCount();
  entry["receptive_field"] = model.config().receptiveField();
  entries.push_back(entry);
  std::sort(entries.begin(), entries.end(),
            [](const Json& x, const Json& y) { return x.at("language").get<std::string>() < y.at("language").get<std::string>(); });
  Json manifest;
  manifest["format"] = "atcn-web-manifest";
  manifest["version"] = 1;
  manifest["initial_capacity"] = 512;
  manifest["models"] = entries;
  std::ofstream out(manifestPath, std::ios::binary | std::ios::trunc);
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + manifestPath.string());
  std::cout << manifest.dump(2) << '\n';
  return kExitOk;
}

void addHypothesisOptions(CLI::App* cmd, HypothesisArgs& a) {
  cmd->add_option("--gold", a.gold, "Gold (diacritized) text, one sequence per line")->required();
  cmd->add_option("--hyp", a.hyp, "Restored text aligned with --gold (instead of running a model)");
  cmd->add_option("--model", a.model, "Model file (default: $ATCN_MODEL)");
  cmd->add_option("--lang", a.lang, "Language table when --hyp is used")->capture_default_str();
  cmd->add_option("--strip", a.strip, "Input generation: full or augmented")->capture_default_str();
  cmd->add_option("--p", a.p, "Stripping probability for --strip augmented")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Seed for augmented stripping and sampling")->capture_default_str();
  cmd->add_option("--batch-size", a.batchSize, "Sequences per forward pass")->capture_default_str();
  cmd->add_flag("--constrained", a.constrained, "Variant-constrained decoding");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"atcn - diacritics restoration with acausal temporal convolutional networks"};
  app.require_subcommand(1);
  std::function<int()> action;

  PrepareArgs prepare;
  auto* cPrepare = app.add_subcommand("prepare", "Clean a raw corpus and split it into train/dev");
  cPrepare->add_option("--lang", prepare.lang, "Language table (hu, pl, cs, sk)")->capture_default_str();
  cPrepare->add_option("--in", prepare.in, "Raw UTF-8 corpus, one sequence per line")->required();
  cPrepare->add_option("--out-train", prepare.outTrain, "Cleaned training lines")->required();
  cPrepare->add_option("--out-dev", prepare.outDev, "Cleaned dev lines")->required();
  cPrepare->add_option("--max-len", prepare.maxLen, "Maximum sequence length")->capture_default_str();
  cPrepare->add_option("--min-diacritic-ratio", prepare.minRatio, "Minimum marked/important ratio")
      ->capture_default_str();
  cPrepare->add_option("--dev-shards", prepare.devShards, "Hash shards (of 1000) sent to dev, e.g. 0-47")
      ->capture_default_str();
  cPrepare->add_option("--report", prepare.report, "Write the statistics report here instead of stdout");
  cPrepare->callback([&] { action = [&] { return runPrepare(prepare); }; });

  TrainArgs train;
  auto* cTrain = app.add_subcommand("train", "Train a model");
  cTrain->add_option("--config", train.config, "JSON setup with model/train sections");
  cTrain->add_option("--train", train.train, "Cleaned training lines")->required();
  cTrain->add_option("--dev", train.dev, "Cleaned dev lines");
  cTrain->add_option("--out-model", train.outModel, "Best model output path")->required();
  cTrain->add_option("--seed", train.seed, "Override the configured seed");
  cTrain->add_option("--epochs", train.epochs, "Override the configured epoch count");
  cTrain->add_option("--checkpoint", train.checkpoint, "Checkpoint path (optimizer state in <path>.opt)");
  cTrain->add_option("--log", train.log, "JSONL training log");
  cTrain->add_flag("--resume", train.resume, "Continue from --checkpoint when it exists");
  cTrain->add_flag("--quiet", train.quiet, "No progress output");
  cTrain->callback([&] { action = [&] { return runTrain(train); }; });

  RestoreArgs restoreArgs;
  auto* cRestore = app.add_subcommand("restore", "Restore diacritics line by line");
  cRestore->add_option("--model", restoreArgs.model, "Model file (default: $ATCN_MODEL)");
  cRestore->add_flag("--constrained", restoreArgs.constrained, "Only choose among the input character's variants");
  cRestore->add_option("--in", restoreArgs.in, "Input file (default: stdin)");
  cRestore->add_option("--out", restoreArgs.out, "Output file (default: stdout)");
  cRestore->callback([&] { action = [&] { return runRestore(restoreArgs); }; });

  EvaluateArgs evaluateArgs;
  auto* cEvaluate = app.add_subcommand("evaluate", "Score a restorer against gold text");
  addHypothesisOptions(cEvaluate, evaluateArgs.common);
  cEvaluate->add_option("--baseline", evaluateArgs.baseline, "copy, dict or model")->capture_default_str();
  cEvaluate->add_option("--dict", evaluateArgs.dict, "Dictionary TSV for --baseline dict");
  cEvaluate->add_option("--dict-train", evaluateArgs.dictTrain, "Build the dictionary from these gold lines");
  cEvaluate->add_option("--out", evaluateArgs.out, "Report path (default: stdout)");
  cEvaluate->callback([&] { action = [&] { return runEvaluate(evaluateArgs); }; });

  ConfusionArgs confusionArgs;
  auto* cConfusion = app.add_subcommand("confusion", "Important-character confusion matrix");
  addHypothesisOptions(cConfusion, confusionArgs.common);
  cConfusion->add_option("--format", confusionArgs.format, "table or json")->capture_default_str();
  cConfusion->add_option("--out", confusionArgs.out, "Output path (default: stdout)");
  cConfusion->callback([&] { action = [&] { return runConfusion(confusionArgs); }; });

  SampleArgs sampleArgs;
  auto* cSample = app.add_subcommand("sample-errors", "Random sample of character errors with context");
  addHypothesisOptions(cSample, sampleArgs.common);
  cSample->add_option("--k", sampleArgs.k, "Number of errors to sample")->capture_default_str();
  cSample->add_option("--out", sampleArgs.out, "Output path (default: stdout)");
  cSample->callback([&] { action = [&] { return runSampleErrors(sampleArgs); }; });

  AmbiguityArgs ambiguityArgs;
  auto* cAmbiguity = app.add_subcommand("ambiguity", "Word ambiguity statistics of gold text");
  cAmbiguity->add_option("--in", ambiguityArgs.in, "Gold text")->required();
  cAmbiguity->add_option("--lang", ambiguityArgs.lang, "Language table")->capture_default_str();
  cAmbiguity->add_option("--format", ambiguityArgs.format, "table or json")->capture_default_str();
  cAmbiguity->add_option("--out", ambiguityArgs.out, "Output path (default: stdout)");
  cAmbiguity->callback([&] { action = [&] { return runAmbiguity(ambiguityArgs); }; });

  DictBuildArgs dictBuild;
  auto* cDictBuild = app.add_subcommand("dict-build", "Build the dictionary baseline from gold text");
  cDictBuild->add_option("--in", dictBuild.in, "Gold text")->required();
  cDictBuild->add_option("--lang", dictBuild.lang, "Language table")->capture_default_str();
  cDictBuild->add_option("--out", dictBuild.out, "TSV output (default: stdout)");
  cDictBuild->callback([&] { action = [&] { return runDictBuild(dictBuild); }; });

  DictRestoreArgs dictRestore;
  auto* cDictRestore = app.add_subcommand("dict-restore", "Restore diacritics with the dictionary baseline");
  cDictRestore->add_option("--dict", dictRestore.dict, "Dictionary TSV")->required();
  cDictRestore->add_option("--lang", dictRestore.lang, "Language table")->capture_default_str();
  cDictRestore->add_option("--in", dictRestore.in, "Input file (default: stdin)");
  cDictRestore->add_option("--out", dictRestore.out, "Output file (default: stdout)");
  cDictRestore->callback([&] { action = [&] { return runDictRestore(dictRestore); }; });

  ExportArgs exportArgs;
  auto* cExport = app.add_subcommand("export-web", "Copy a model into a web directory and update manifest.json");
  cExport->add_option("--model", exportArgs.model, "Model file (default: $ATCN_MODEL)");
  cExport->add_option("--out-dir", exportArgs.outDir, "Static site directory")->required();
  cExport->callback([&] { action = [&] { return runExportWeb(exportArgs); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "atcn: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "atcn: " << e.what() << '\n';
    return kExitRuntime;
  }
}
