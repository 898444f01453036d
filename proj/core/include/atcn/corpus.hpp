#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "atcn/batch.hpp"
#include "atcn/diacritics.hpp"
#include "atcn/vocab.hpp"

namespace atcn {

std::u32string dediacritize(std::u32string_view text, const DiacriticTable& table);
std::string dediacritizeUtf8(std::string_view text, const DiacriticTable& table);

/// Strips each diacritized character independently with probability p.
std::u32string augment(std::u32string_view target, const DiacriticTable& table, double p, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Cleaning

struct CleanOptions {
  std::size_t maxLength = 500;
  double minDiacriticRatio = 0.05;
  /// Allowed in addition to printable ASCII and the table's characters.
  std::u32string extraPunctuation = U"\u00A0«»°§–—‘’“”„…€";
};

enum class DropReason { None, InvalidUtf8, Empty, ExoticCharacter, LowDiacriticRatio };

std::string_view toString(DropReason reason);

struct CleanStats {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t truncated = 0;
  std::size_t invalidUtf8 = 0;
  std::size_t empty = 0;
  std::size_t exotic = 0;
  std::size_t lowDiacriticRatio = 0;

  void add(DropReason reason);
  std::string toJson() const;
};

/// Cut to at most maxLength characters at the last whitespace at or before the
/// limit, dropping trailing whitespace; hard cut when there is no whitespace.
std::u32string truncateAtWhitespace(std::u32string_view text, std::size_t maxLength);

/// Diacritized characters divided by important characters (both bases and
/// diacritized forms of multi-member families). 0 when there are none.
double diacriticRatio(std::u32string_view text, const DiacriticTable& table);

class LineCleaner {
 public:
  LineCleaner(const DiacriticTable& table, CleanOptions options = {});

  bool isExotic(char32_t c) const;
  /// The cleaned line, or nullopt with `reason` set. A trailing CR is ignored.
  std::optional<std::u32string> clean(std::string_view line, DropReason* reason = nullptr,
                                      bool* truncated = nullptr) const;
  const CleanOptions& options() const { return options_; }

 private:
  const DiacriticTable& table_;
  CleanOptions options_;
};

std::vector<std::u32string> cleanCorpus(std::span<const std::string> lines, const DiacriticTable& table,
                                        const CleanOptions& options = {}, CleanStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Splitting and statistics

inline constexpr std::size_t kShardCount = 1000;

/// 64-bit FNV-1a of the UTF-8 bytes.
std::uint64_t fnv1a64(std::string_view bytes);
std::size_t shardOf(std::string_view utf8Line);

/// Parses a shard set like "0-47" or "3,9,100-120". Throws std::invalid_argument.
std::vector<bool> parseShardSet(std::string_view spec);

struct DatasetStats {
  std::size_t sequences = 0;
  std::size_t characters = 0;
  double averageLength() const { return sequences == 0 ? 0.0 : double(characters) / double(sequences); }
  std::string toJson() const;
};

DatasetStats datasetStats(std::span<const std::u32string> lines);

// ---------------------------------------------------------------------------
// Line access

class LineSource {
 public:
  virtual ~LineSource() = default;
  virtual std::size_t size() const = 0;
  virtual std::u32string line(std::size_t index) const = 0;
};

class MemoryLineSource final : public LineSource {
 public:
  explicit MemoryLineSource(std::vector<std::u32string> lines) : lines_(std::move(lines)) {}
  std::size_t size() const override { return lines_.size(); }
  std::u32string line(std::size_t index) const override { return lines_.at(index); }
  const std::vector<std::u32string>& lines() const { return lines_; }

 private:
  std::vector<std::u32string> lines_;
};

/// Reads lines on demand through a byte-offset index; empty lines are skipped.
/// Not safe for concurrent use.
class FileLineSource final : public LineSource {
 public:
  explicit FileLineSource(const std::filesystem::path& path);
  std::size_t size() const override { return offsets_.size(); }
  std::u32string line(std::size_t index) const override;

 private:
  std::filesystem::path path_;
  mutable std::ifstream in_;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint32_t> lengths_;
};

/// Reads a UTF-8 file as lines (no trailing newline, CR stripped, empty lines dropped).
/// Throws utf8::DecodeError naming the line on invalid input.
std::vector<std::u32string> readLines(const std::filesystem::path& path);
std::vector<std::string> readRawLines(const std::filesystem::path& path);
void writeLines(const std::filesystem::path& path, std::span<const std::u32string> lines);

// ---------------------------------------------------------------------------
// Batching

/// Pads target (and input) lines into a batch. `inputs` must match `targets` in
/// count and per-line length.
SequenceBatch makeBatch(const CharVocab& vocab, std::span<const std::u32string> inputs,
                        std::span<const std::u32string> targets);

struct EpochOptions {
  std::size_t batchSize = 200;
  std::size_t batchesPerEpoch = 500;
  std::size_t epochSequenceLimit = 100000;
  double augmentP = 0.8;
  std::uint64_t seed = 0;
};

/// Persistent partition of a training set into fixed batches, and the per-epoch
/// draw of batches with replacement. Augmentation is redrawn on every access from
/// a seed derived from (seed, epoch, draw).
class EpochSampler {
 public:
  EpochSampler(const LineSource& source, const CharVocab& vocab, const DiacriticTable& table,
               EpochOptions options);

  const std::vector<std::vector<std::size_t>>& partition() const { return partition_; }
  /// min(batchesPerEpoch, epochSequenceLimit / batchSize), at least 1.
  std::size_t drawsPerEpoch() const;
  /// True when the dataset was smaller than one batch.
  bool undersized() const { return undersized_; }

  std::vector<std::size_t> epochDraws(std::size_t epoch) const;
  SequenceBatch batch(std::size_t epoch, std::size_t draw) const;
  /// Batch for a partition entry with a given augmentation seed; also returns the texts when asked.
  SequenceBatch buildBatch(std::size_t partitionIndex, std::uint64_t augmentSeed,
                           std::vector<std::u32string>* inputs = nullptr,
                           std::vector<std::u32string>* targets = nullptr) const;

 private:
  const LineSource& source_;
  const CharVocab& vocab_;
  const DiacriticTable& table_;
  EpochOptions options_;
  std::vector<std::vector<std::size_t>> partition_;
  bool undersized_ = false;
};

}  // namespace atcn
