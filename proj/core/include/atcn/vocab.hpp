#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace atcn {

class DiacriticTable;

/// Character inventory of a model. Ids 0 and 1 are reserved for padding and
/// unknown characters; real characters follow in codepoint order.
class CharVocab {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kFirstChar = 2;

  CharVocab() = default;
  /// `chars` must be distinct; they are sorted by codepoint.
  explicit CharVocab(std::u32string chars);

  std::size_t size() const { return chars_.size() + kFirstChar; }
  const std::u32string& chars() const { return chars_; }

  bool contains(char32_t c) const { return index_.contains(c); }
  /// UNK for characters outside the vocabulary.
  std::int32_t id(char32_t c) const;
  /// The character for a non-reserved id; throws std::out_of_range otherwise.
  char32_t character(std::int32_t id) const;

  std::vector<std::int32_t> encode(std::u32string_view text) const;

 private:
  std::u32string chars_;
  std::unordered_map<char32_t, std::int32_t> index_;
};

struct VocabOptions {
  std::size_t minCount = 10;
  /// When set, every character of the table (diacritized and base) is included regardless of count.
  const DiacriticTable* table = nullptr;
};

/// Builds a vocabulary from UTF-8 lines. Throws std::invalid_argument on an empty corpus.
CharVocab buildVocab(std::span<const std::u32string> lines, const VocabOptions& options);

}  // namespace atcn
