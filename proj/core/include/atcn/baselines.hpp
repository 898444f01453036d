#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "atcn/diacritics.hpp"

namespace atcn {

/// Returns its input.
std::u32string copyRestore(std::u32string_view text);

/// Maximal runs of alphabetic characters, as [begin, end) index pairs.
std::vector<std::pair<std::size_t, std::size_t>> alphabeticRuns(std::u32string_view text);

/// Most frequent diacritization per word base.
class DiacriticDictionary {
 public:
  DiacriticDictionary() = default;
  explicit DiacriticDictionary(const DiacriticTable& table);

  void addLine(std::u32string_view goldLine);
  void addForm(std::u32string_view form, std::size_t count = 1);

  /// Highest count, ties to the codepoint-smaller form. nullptr if the base is unknown.
  const std::u32string* best(std::u32string_view base) const;
  const std::map<std::u32string, std::map<std::u32string, std::size_t>>& counts() const { return counts_; }
  std::size_t baseCount() const { return counts_.size(); }

  /// `base TAB form TAB count` lines, sorted by base then form.
  void save(const std::filesystem::path& path) const;
  std::string toTsv() const;
  static DiacriticDictionary load(const std::filesystem::path& path, const DiacriticTable& table);
  static DiacriticDictionary fromTsv(std::string_view text, const DiacriticTable& table);

  const DiacriticTable& table() const { return *table_; }

 private:
  const DiacriticTable* table_ = nullptr;
  std::map<std::u32string, std::map<std::u32string, std::size_t>> counts_;
  std::map<std::u32string, std::u32string> best_;
};

DiacriticDictionary buildDictionary(std::span<const std::u32string> goldLines, const DiacriticTable& table);

/// Replaces each alphabetic run by the dictionary's choice for its base: exact-case
/// lookup first, then lowercase lookup with the run's case pattern reapplied.
std::u32string dictionaryRestore(std::u32string_view text, const DiacriticDictionary& dict);

}  // namespace atcn
