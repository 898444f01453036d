#include "atcn/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "atcn/random.hpp"
#include "atcn/utf8.hpp"
#include "json.hpp"

namespace atcn {

std::u32string dediacritize(std::u32string_view text, const DiacriticTable& table) {
  std::u32string out(text);
  for (char32_t& c : out) c = table.base(c);
  return out;
}

std::string dediacritizeUtf8(std::string_view text, const DiacriticTable& table) {
  return utf8::encode(dediacritize(utf8::decode(text), table));
}

std::u32string augment(std::u32string_view target, const DiacriticTable& table, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("augment: p must be in [0, 1]");
  std::u32string out(target);
  Rng rng(seed);
  for (char32_t& c : out) {
    if (table.isDiacritized(c) && rng.bernoulli(p)) c = table.base(c);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view toString(DropReason reason) {
  switch (reason) {
    case DropReason::None: return "none";
    case DropReason::InvalidUtf8: return "invalid_utf8";
    case DropReason::Empty: return "empty";
    case DropReason::ExoticCharacter: return "exotic_character";
    case DropReason::LowDiacriticRatio: return "low_diacritic_ratio";
  }
  return "unknown";
}

void CleanStats::add(DropReason reason) {
  ++input;
  switch (reason) {
    case DropReason::None: ++kept; break;
    case DropReason::InvalidUtf8: ++invalidUtf8; break;
    case DropReason::Empty: ++empty; break;
    case DropReason::ExoticCharacter: ++exotic; break;
    case DropReason::LowDiacriticRatio: ++lowDiacriticRatio; break;
  }
}

std::string CleanStats::toJson() const {
  nlohmann::ordered_json j;
  j["input_lines"] = input;
  j["kept"] = kept;
  j["truncated"] = truncated;
  j["dropped"] = {{"invalid_utf8", invalidUtf8},
                  {"empty", empty},
                  {"exotic_character", exotic},
                  {"low_diacritic_ratio", lowDiacriticRatio}};
  return j.dump(2);
}

std::u32string truncateAtWhitespace(std::u32string_view text, std::size_t maxLength) {
  if (text.size() <= maxLength) return std::u32string(text);
  std::size_t cut = maxLength;
  while (cut > 0 && !utf8::isSpace(text[cut])) --cut;
  if (cut == 0) return std::u32string(text.substr(0, maxLength));
  while (cut > 0 && utf8::isSpace(text[cut - 1])) --cut;
  if (cut == 0) return std::u32string(text.substr(0, maxLength));
  return std::u32string(text.substr(0, cut));
}

double diacriticRatio(std::u32string_view text, const DiacriticTable& table) {
  std::size_t marked = 0;
  std::size_t important = 0;
  for (char32_t c : text) {
    if (!table.isImportant(c)) continue;
    ++important;
    if (table.isDiacritized(c)) ++marked;
  }
  return important == 0 ? 0.0 : double(marked) / double(important);
}

LineCleaner::LineCleaner(const DiacriticTable& table, CleanOptions options)
    : table_(table), options_(std::move(options)) {
  if (options_.maxLength == 0) throw std::invalid_argument("CleanOptions: maxLength must be positive");
}

bool LineCleaner::isExotic(char32_t c) const {
  if (c >= 0x20 && c <= 0x7E) return false;
  if (table_.isMapped(c)) return false;
  return options_.extraPunctuation.find(c) == std::u32string::npos;
}

std::optional<std::u32string> LineCleaner::clean(std::string_view line, DropReason* reason, bool* truncated) const {
  auto fail = [&](DropReason r) -> std::optional<std::u32string> {
    if (reason != nullptr) *reason = r;
    return std::nullopt;
  };
  if (truncated != nullptr) *truncated = false;
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::u32string text;
  if (!utf8::tryDecode(line, text)) return fail(DropReason::InvalidUtf8);
  if (std::all_of(text.begin(), text.end(), utf8::isSpace)) return fail(DropReason::Empty);
  for (char32_t c : text) {
    if (isExotic(c)) return fail(DropReason::ExoticCharacter);
  }
  if (text.size() > options_.maxLength) {
    text = truncateAtWhitespace(text, options_.maxLength);
    if (truncated != nullptr) *truncated = true;
  }
  const double ratio = diacriticRatio(text, table_);
  bool hasImportant = std::any_of(text.begin(), text.end(), [&](char32_t c) { return table_.isImportant(c); });
  if (!hasImportant || ratio < options_.minDiacriticRatio) return fail(DropReason::LowDiacriticRatio);
  if (reason != nullptr) *reason = DropReason::None;
  return text;
}

std::vector<std::u32string> cleanCorpus(std::span<const std::string> lines, const DiacriticTable& table,
                                        const CleanOptions& options, CleanStats* stats) {
  LineCleaner cleaner(table, options);
  std::vector<std::u32string> kept;
  for (const std::string& line : lines) {
    DropReason reason = DropReason::None;
    bool truncated = false;
    auto cleaned = cleaner.clean(line, &reason, &truncated);
    if (stats != nullptr) {
      stats->add(reason);
      if (cleaned && truncated) ++stats->truncated;
    }
    if (cleaned) kept.push_back(std::move(*cleaned));
  }
  return kept;
}

// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::size_t shardOf(std::string_view utf8Line) { return static_cast<std::size_t>(fnv1a64(utf8Line) % kShardCount); }

std::vector<bool> parseShardSet(std::string_view spec) {
  std::vector<bool> set(kShardCount, false);
  auto number = [&](std::string_view s) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || v >= kShardCount) {
      throw std::invalid_argument("bad shard '" + std::string(s) + "' (expected 0-" +
                                  std::to_string(kShardCount - 1) + ")");
    }
    return v;
  };
  if (spec.empty()) return set;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t end = spec.find(',', start);
    if (end == std::string_view::npos) end = spec.size();
    const std::string_view item = spec.substr(start, end - start);
    const std::size_t dash = item.find('-');
    if (dash == std::string_view::npos) {
      set[number(item)] = true;
    } else {
      const std::size_t lo = number(item.substr(0, dash));
      const std::size_t hi = number(item.substr(dash + 1));
      if (lo > hi) throw std::invalid_argument("bad shard range '" + std::string(item) + "'");
      for (std::size_t s = lo; s <= hi; ++s) set[s] = true;
    }
    start = end + 1;
  }
  return set;
}

std::string DatasetStats::toJson() const {
  nlohmann::ordered_json j;
  j["sequences"] = sequences;
  j["average_length"] = averageLength();
  j["characters"] = characters;
  return j.dump(2);
}

DatasetStats datasetStats(std::span<const std::u32string> lines) {
  DatasetStats s;
  s.sequences = lines.size();
  for (const auto& l : lines) s.characters += l.size();
  return s;
}

// ---------------------------------------------------------------------------

FileLineSource::FileLineSource(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in_, line)) {
    const std::uint64_t next = offset + line.size() + 1;
    std::size_t len = line.size();
    if (len > 0 && line[len - 1] == '\r') --len;
    if (len > 0) {
      offsets_.push_back(offset);
      lengths_.push_back(static_cast<std::uint32_t>(len));
    }
    offset = next;
  }
  in_.clear();
}

std::u32string FileLineSource::line(std::size_t index) const {
  std::string bytes(lengths_.at(index), '\0');
  in_.seekg(static_cast<std::streamoff>(offsets_[index]));
  in_.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!in_) throw std::runtime_error("short read in " + path_.string());
  return utf8::decode(bytes);
}

std::vector<std::string> readRawLines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::u32string> readLines(const std::filesystem::path& path) {
  std::vector<std::u32string> out;
  std::size_t number = 0;
  for (std::string& line : readRawLines(path)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::u32string text;
    std::size_t offset = 0;
    if (!utf8::tryDecode(line, text, &offset)) {
      throw utf8::DecodeError(offset, path.string() + ":" + std::to_string(number) + ": invalid UTF-8 at byte " +
                                          std::to_string(offset));
    }
    out.push_back(std::move(text));
  }
  return out;
}

void writeLines(const std::filesystem::path& path, std::span<const std::u32string> lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& l : lines) out << utf8::encode(l) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// ---------------------------------------------------------------------------

SequenceBatch makeBatch(const CharVocab& vocab, std::span<const std::u32string> inputs,
                        std::span<const std::u32string> targets) {
  if (inputs.size() != targets.size()) throw std::invalid_argument("makeBatch: input/target count mismatch");
  SequenceBatch b;
  b.batchSize = targets.size();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (inputs[i].size() != targets[i].size()) {
      throw std::invalid_argument("makeBatch: input and target lengths differ in sequence " + std::to_string(i));
    }
    b.steps = std::max(b.steps, targets[i].size());
  }
  b.inputIds.assign(b.positions(), CharVocab::kPad);
  b.targetIds.assign(b.positions(), CharVocab::kPad);
  b.mask.assign(b.positions(), 0);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    b.lengths.push_back(targets[i].size());
    for (std::size_t t = 0; t < targets[i].size(); ++t) {
      b.inputIds[i * b.steps + t] = vocab.id(inputs[i][t]);
      b.targetIds[i * b.steps + t] = vocab.id(targets[i][t]);
      b.mask[i * b.steps + t] = 1;
    }
  }
  return b;
}

EpochSampler::EpochSampler(const LineSource& source, const CharVocab& vocab, const DiacriticTable& table,
                           EpochOptions options)
    : source_(source), vocab_(vocab), table_(table), options_(options) {
  if (source.size() == 0) throw std::invalid_argument("EpochSampler: empty training set");
  if (options.batchSize == 0 || options.batchesPerEpoch == 0 || options.epochSequenceLimit == 0) {
    throw std::invalid_argument("EpochSampler: batch counts must be positive");
  }
  std::vector<std::size_t> order(source.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(deriveSeed(options.seed, {0x70617274ULL}));
  shuffle(order.begin(), order.end(), rng);
  undersized_ = source.size() < options.batchSize;
  for (std::size_t start = 0; start < order.size(); start += options.batchSize) {
    const std::size_t end = std::min(order.size(), start + options.batchSize);
    partition_.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                            order.begin() + static_cast<std::ptrdiff_t>(end));
  }
}

std::size_t EpochSampler::drawsPerEpoch() const {
  return std::max<std::size_t>(1, std::min(options_.batchesPerEpoch, options_.epochSequenceLimit / options_.batchSize));
}

std::vector<std::size_t> EpochSampler::epochDraws(std::size_t epoch) const {
  Rng rng(deriveSeed(options_.seed, {0x65706F6368ULL, epoch}));
  std::vector<std::size_t> draws(drawsPerEpoch());
  for (auto& d : draws) d = rng.below(partition_.size());
  return draws;
}

SequenceBatch EpochSampler::batch(std::size_t epoch, std::size_t draw) const {
  const std::vector<std::size_t> draws = epochDraws(epoch);
  return buildBatch(draws.at(draw), deriveSeed(options_.seed, {0x61756755ULL, epoch, draw}));
}

SequenceBatch EpochSampler::buildBatch(std::size_t partitionIndex, std::uint64_t augmentSeed,
                                       std::vector<std::u32string>* inputs,
                                       std::vector<std::u32string>* targets) const {
  const auto& members = partition_.at(partitionIndex);
  std::vector<std::u32string> tgt;
  std::vector<std::u32string> in;
  tgt.reserve(members.size());
  in.reserve(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    tgt.push_back(source_.line(members[k]));
    in.push_back(augment(tgt.back(), table_, options_.augmentP, deriveSeed(augmentSeed, {k})));
  }
  SequenceBatch b = makeBatch(vocab_, in, tgt);
  if (inputs != nullptr) *inputs = std::move(in);
  if (targets != nullptr) *targets = std::move(tgt);
  return b;
}

}  // namespace atcn
