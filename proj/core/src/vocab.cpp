#include "atcn/vocab.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "atcn/diacritics.hpp"
#include "atcn/utf8.hpp"

namespace atcn {

CharVocab::CharVocab(std::u32string chars) : chars_(std::move(chars)) {
  std::sort(chars_.begin(), chars_.end());
  if (std::adjacent_find(chars_.begin(), chars_.end()) != chars_.end()) {
    throw std::invalid_argument("CharVocab: duplicate characters");
  }
  for (std::size_t i = 0; i < chars_.size(); ++i) {
    index_.emplace(chars_[i], static_cast<std::int32_t>(i) + kFirstChar);
  }
}

std::int32_t CharVocab::id(char32_t c) const {
  auto it = index_.find(c);
  return it == index_.end() ? kUnk : it->second;
}

char32_t CharVocab::character(std::int32_t id) const {
  if (id < kFirstChar || static_cast<std::size_t>(id) >= size()) {
    throw std::out_of_range("CharVocab: id " + std::to_string(id) + " has no character");
  }
  return chars_[static_cast<std::size_t>(id - kFirstChar)];
}

std::vector<std::int32_t> CharVocab::encode(std::u32string_view text) const {
  std::vector<std::int32_t> ids(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) ids[i] = id(text[i]);
  return ids;
}

CharVocab buildVocab(std::span<const std::u32string> lines, const VocabOptions& options) {
  std::map<char32_t, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& line : lines) {
    for (char32_t c : line) ++counts[c];
    total += line.size();
  }
  if (total == 0) throw std::invalid_argument("buildVocab: empty corpus");

  std::u32string chars;
  for (const auto& [c, n] : counts) {
    if (n >= options.minCount) chars.push_back(c);
  }
  if (options.table != nullptr) {
    for (char32_t c : options.table->keys() + options.table->bases()) {
      if (std::find(chars.begin(), chars.end(), c) == chars.end()) chars.push_back(c);
    }
  }
  return CharVocab(std::move(chars));
}

}  // namespace atcn
