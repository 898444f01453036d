#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace atcn {

/// Per-language map from diacritized characters to their base character.
///
/// A character's *family* is its base together with every character that strips
/// to that base. Characters whose family has at least two members are the
/// language's "important" characters: the ones a restorer has to decide on.
class DiacriticTable {
 public:
  DiacriticTable(std::string languageCode, const std::vector<std::pair<char32_t, char32_t>>& pairs);

  /// Built-in tables: "hu", "pl", "cs", "sk". Throws std::invalid_argument otherwise.
  static const DiacriticTable& forLanguage(std::string_view code);
  static std::vector<std::string> languages();

  const std::string& languageCode() const { return code_; }

  char32_t base(char32_t c) const;
  bool isDiacritized(char32_t c) const { return toBase_.contains(c); }
  bool isBase(char32_t c) const { return families_.contains(c); }
  /// True if c is a key or a base, i.e. the table has something to say about c.
  bool isMapped(char32_t c) const { return isDiacritized(c) || isBase(c); }
  bool isImportant(char32_t c) const;

  /// Family of base(c), sorted by codepoint, base included. For unmapped c: {c}.
  std::u32string variants(char32_t c) const;

  /// Diacritized characters (table keys), sorted.
  std::u32string keys() const;
  /// Base characters, sorted.
  std::u32string bases() const;

 private:
  std::string code_;
  std::map<char32_t, char32_t> toBase_;
  std::map<char32_t, std::u32string> families_;
};

}  // namespace atcn
