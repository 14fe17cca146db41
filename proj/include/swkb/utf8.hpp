#pragma once

// Minimal UTF-8 handling: validation, code point iteration and the small
// amount of case mapping the keyboard languages need (ASCII + Latin-1).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace swkb::utf8 {

/// Decodes a UTF-8 string into code points. Returns nullopt on malformed input
/// (overlong forms, surrogates, truncated sequences).
inline std::optional<std::u32string> decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    int extra = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      extra = 1;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      extra = 2;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      extra = 3;
    } else {
      return std::nullopt;
    }
    if (extra > 0 && i + extra >= s.size()) return std::nullopt;
    for (int k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) return std::nullopt;
      cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr char32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return std::nullopt;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

inline bool is_valid(std::string_view s) { return decode(s).has_value(); }

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append(out, cp);
  return out;
}

inline bool is_upper(char32_t c) {
  return (c >= U'A' && c <= U'Z') || (c >= 0xC0 && c <= 0xDE && c != 0xD7);
}

inline bool is_lower(char32_t c) {
  return (c >= U'a' && c <= U'z') || (c >= 0xDF && c <= 0xFF && c != 0xF7);
}

inline char32_t to_lower(char32_t c) {
  if ((c >= U'A' && c <= U'Z') || (c >= 0xC0 && c <= 0xDE && c != 0xD7)) return c + 0x20;
  return c;
}

inline char32_t to_upper(char32_t c) {
  if ((c >= U'a' && c <= U'z') || (c >= 0xE0 && c <= 0xFE && c != 0xF7)) return c - 0x20;
  return c;
}

inline bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' || c == U'\f' ||
         c == 0xA0 || c == 0x2028 || c == 0x2029 || c == 0x3000;
}

// The string helpers below assume valid UTF-8 and pass malformed input through
// unchanged.

inline std::string lower(std::string_view s) {
  auto cps = decode(s);
  if (!cps) return std::string(s);
  for (auto& c : *cps) c = to_lower(c);
  return encode(*cps);
}

inline std::string lower_first(std::string_view s) {
  auto cps = decode(s);
  if (!cps || cps->empty()) return std::string(s);
  (*cps)[0] = to_lower((*cps)[0]);
  return encode(*cps);
}

inline std::string upper_first(std::string_view s) {
  auto cps = decode(s);
  if (!cps || cps->empty()) return std::string(s);
  (*cps)[0] = to_upper((*cps)[0]);
  return encode(*cps);
}

/// First code point is an upper-case letter.
inline bool is_capitalized(std::string_view s) {
  auto cps = decode(s);
  return cps && !cps->empty() && is_upper((*cps)[0]);
}

/// No upper-case letters anywhere.
inline bool is_all_lower(std::string_view s) {
  auto cps = decode(s);
  if (!cps) return false;
  for (char32_t c : *cps) {
    if (is_upper(c)) return false;
  }
  return true;
}

inline bool iequals(std::string_view a, std::string_view b) { return lower(a) == lower(b); }

inline std::size_t length(std::string_view s) {
  auto cps = decode(s);
  return cps ? cps->size() : s.size();
}

}  // namespace swkb::utf8
