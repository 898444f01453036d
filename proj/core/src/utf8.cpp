#include "atcn/utf8.hpp"

namespace atcn::utf8 {

namespace {

bool decodeImpl(std::string_view bytes, std::u32string& out, std::size_t& errorOffset,
                std::string& reason) {
  out.clear();
  out.reserve(bytes.size());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char b0 = p[i];
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    std::size_t extra = 0;
    char32_t cp = 0;
    char32_t minValue = 0;
    if ((b0 & 0xE0) == 0xC0) {
      extra = 1;
      cp = b0 & 0x1F;
      minValue = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      extra = 2;
      cp = b0 & 0x0F;
      minValue = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      extra = 3;
      cp = b0 & 0x07;
      minValue = 0x10000;
    } else {
      errorOffset = i;
      reason = "invalid UTF-8 lead byte";
      return false;
    }
    for (std::size_t k = 1; k <= extra; ++k) {
      if (i + k >= n) {
        errorOffset = i;
        reason = "truncated UTF-8 sequence";
        return false;
      }
      const unsigned char b = p[i + k];
      if ((b & 0xC0) != 0x80) {
        errorOffset = i + k;
        reason = "invalid UTF-8 continuation byte";
        return false;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < minValue || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      errorOffset = i;
      reason = "invalid UTF-8 code point encoding";
      return false;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return true;
}

}  // namespace

std::u32string decode(std::string_view bytes) {
  std::u32string out;
  std::size_t offset = 0;
  std::string reason;
  if (!decodeImpl(bytes, out, offset, reason)) {
    throw DecodeError(offset, reason + " at byte offset " + std::to_string(offset));
  }
  return out;
}

bool tryDecode(std::string_view bytes, std::u32string& out, std::size_t* errorOffset) {
  std::size_t offset = 0;
  std::string reason;
  const bool ok = decodeImpl(bytes, out, offset, reason);
  if (!ok && errorOffset != nullptr) *errorOffset = offset;
  return ok;
}

std::string encode(char32_t c) {
  std::string out;
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
  return out;
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size() + text.size() / 4);
  for (char32_t c : text) out += encode(c);
  return out;
}

std::size_t length(std::string_view bytes) { return decode(bytes).size(); }

namespace {

// Latin Extended-A pairs upper/lower on (even, odd) except in these two runs,
// where the pairing is shifted by one.
bool shiftedPairing(char32_t c) {
  return (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
}

}  // namespace

char32_t toLower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c == 0x178) return 0xFF;
  if (c >= 0x100 && c <= 0x17F) {
    if (c == 0x130 || c == 0x131 || c == 0x138 || c == 0x149 || c == 0x17F) return c;
    if (shiftedPairing(c)) return (c % 2 == 1) ? c + 1 : c;
    return (c % 2 == 0) ? c + 1 : c;
  }
  return c;
}

char32_t toUpper(char32_t c) {
  if (c >= U'a' && c <= U'z') return c - 32;
  if (c >= 0xE0 && c <= 0xFE && c != 0xF7) return c - 32;
  if (c == 0xFF) return 0x178;
  if (c >= 0x100 && c <= 0x17F) {
    if (c == 0x130 || c == 0x131 || c == 0x138 || c == 0x149 || c == 0x17F) return c;
    if (shiftedPairing(c)) return (c % 2 == 0) ? c - 1 : c;
    return (c % 2 == 1) ? c - 1 : c;
  }
  return c;
}

bool isUpper(char32_t c) { return toLower(c) != c; }

bool isAlpha(char32_t c) {
  if ((c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z')) return true;
  if (c == 0xAA || c == 0xBA) return true;
  if (c >= 0xC0 && c <= 0x24F) return c != 0xD7 && c != 0xF7;
  return false;
}

bool isSpace(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' || c == U'\f' ||
         c == 0xA0 || c == 0x2009 || c == 0x202F || c == 0x3000;
}

}  // namespace atcn::utf8
