#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace atcn::utf8 {

/// Thrown on malformed UTF-8; `offset()` is the byte offset of the first bad byte.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::size_t offset, const std::string& what)
      : std::runtime_error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Strict decoder: rejects overlong forms, surrogates and values above U+10FFFF.
std::u32string decode(std::string_view bytes);

/// Like decode() but reports failure through the return value.
bool tryDecode(std::string_view bytes, std::u32string& out, std::size_t* errorOffset = nullptr);

std::string encode(std::u32string_view text);
std::string encode(char32_t c);

/// Number of Unicode scalar values; throws DecodeError on malformed input.
std::size_t length(std::string_view bytes);

// Simple case mapping covering Basic Latin, Latin-1 Supplement and Latin Extended-A,
// which is every script the bundled diacritic tables use. Other characters map to themselves.
char32_t toLower(char32_t c);
char32_t toUpper(char32_t c);
bool isUpper(char32_t c);

/// Letters of the Latin blocks up to Latin Extended-B.
bool isAlpha(char32_t c);
bool isSpace(char32_t c);

}  // namespace atcn::utf8
