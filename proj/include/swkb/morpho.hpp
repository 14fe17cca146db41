#pragma once

// Binding-typed subword units.
//
// Every unit carries a left and a right binding class. Class 0 marks a proper
// word boundary on that side; classes >= 1 mark composition points that must
// agree with the neighbouring unit. A sequence of units spells exactly one
// word when it starts with left class 0, ends with right class 0, and every
// inner junction shares a nonzero class.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "swkb/error.hpp"
#include "swkb/utf8.hpp"

namespace swkb {

using BindingClass = std::uint32_t;
using UnitId = std::int32_t;

/// Id 0 is reserved for epsilon in every FST built from a lexicon.
inline constexpr UnitId kNoUnit = 0;

struct BindingType {
  BindingClass left = 0;
  BindingClass right = 0;

  constexpr bool is_word() const { return left == 0 && right == 0; }
  friend constexpr auto operator<=>(const BindingType&, const BindingType&) = default;
};

struct SubwordUnit {
  std::string text;
  BindingType binding;
  UnitId id = kNoUnit;
};

/// A unit as it appears in annotated text, before it has an id.
struct AnnotatedToken {
  std::string text;
  BindingType binding;

  friend bool operator==(const AnnotatedToken&, const AnnotatedToken&) = default;
};

// U+27E8 / U+27E9 delimit the binding annotation.
inline constexpr std::string_view kOpenBracket = "\xE2\x9F\xA8";
inline constexpr std::string_view kCloseBracket = "\xE2\x9F\xA9";

/// True iff `a` followed by `b` continues one word: the shared class must
/// match and be nonzero. Two class-0 edges meeting are two separate words.
constexpr bool is_admissible_pair(BindingType a, BindingType b) {
  return a.right == b.left && a.right >= 1;
}

/// Throws swkb::Error on an empty sequence.
inline bool is_complete_word(std::span<const BindingType> seq) {
  if (seq.empty()) throw Error("is_complete_word: empty binding sequence");
  if (seq.front().left != 0 || seq.back().right != 0) return false;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (!is_admissible_pair(seq[i - 1], seq[i])) return false;
  }
  return true;
}

inline bool is_complete_word(std::span<const SubwordUnit> units) {
  std::vector<BindingType> b;
  b.reserve(units.size());
  for (const auto& u : units) b.push_back(u.binding);
  return is_complete_word(std::span<const BindingType>(b));
}

/// Surface form of a complete unit sequence: plain concatenation.
inline std::string assemble_word(std::span<const SubwordUnit> units) {
  if (units.empty() || !is_complete_word(units)) {
    throw Error("assemble_word: unit sequence is not a complete word");
  }
  std::string out;
  for (const auto& u : units) out += u.text;
  return out;
}

/// Empty string when valid, otherwise a description of the problem.
inline std::string validate_unit_text(std::string_view text) {
  if (text.empty()) return "empty unit text";
  auto cps = utf8::decode(text);
  if (!cps) return "unit text is not valid UTF-8";
  for (char32_t c : *cps) {
    if (utf8::is_space(c)) return "unit text contains whitespace";
    if (c == 0x27E8 || c == 0x27E9) return "unit text contains an annotation bracket";
  }
  return {};
}

/// `text` for (0,0), `text⟨l,r⟩` otherwise.
inline std::string render_annotated_token(std::string_view text, BindingClass left,
                                          BindingClass right) {
  if (auto err = validate_unit_text(text); !err.empty()) {
    throw Error("render_annotated_token: " + err + ": '" + std::string(text) + "'");
  }
  std::string out(text);
  if (left == 0 && right == 0) return out;
  out += kOpenBracket;
  out += std::to_string(left);
  out += ',';
  out += std::to_string(right);
  out += kCloseBracket;
  return out;
}

inline std::string render_annotated_token(const AnnotatedToken& t) {
  return render_annotated_token(t.text, t.binding.left, t.binding.right);
}

namespace detail {

inline BindingClass parse_class(std::string_view digits, std::size_t offset) {
  if (digits.empty()) throw ParseError("missing binding class", 0, offset);
  if (digits.size() > 9) throw ParseError("binding class out of range", 0, offset);
  BindingClass v = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    const char c = digits[i];
    if (c < '0' || c > '9') throw ParseError("non-numeric binding class", 0, offset + i);
    v = v * 10 + static_cast<BindingClass>(c - '0');
  }
  return v;
}

}  // namespace detail

/// Parses `text` or `text⟨l,r⟩`. Errors carry the byte position of the fault.
inline AnnotatedToken parse_annotated_token(std::string_view token) {
  const auto open = token.find(kOpenBracket);
  const auto close = token.find(kCloseBracket);
  if (open == std::string_view::npos) {
    if (close != std::string_view::npos) throw ParseError("unbalanced annotation bracket", 0, close);
    if (auto err = validate_unit_text(token); !err.empty()) throw ParseError(err, 0, 0);
    return {std::string(token), {0, 0}};
  }
  if (open == 0) throw ParseError("annotation without text", 0, 0);
  if (close == std::string_view::npos || close < open) {
    throw ParseError("unbalanced annotation bracket", 0, open);
  }
  if (close + kCloseBracket.size() != token.size()) {
    throw ParseError("trailing characters after annotation", 0, close + kCloseBracket.size());
  }
  const std::size_t body_start = open + kOpenBracket.size();
  const std::string_view body = token.substr(body_start, close - body_start);
  const auto comma = body.find(',');
  if (comma == std::string_view::npos) throw ParseError("annotation needs two classes", 0, body_start);
  AnnotatedToken t;
  t.text = std::string(token.substr(0, open));
  if (auto err = validate_unit_text(t.text); !err.empty()) throw ParseError(err, 0, 0);
  t.binding.left = detail::parse_class(body.substr(0, comma), body_start);
  t.binding.right = detail::parse_class(body.substr(comma + 1), body_start + comma + 1);
  return t;
}

/// Owns a set of units with dense ids starting at 1. (text, binding) pairs are
/// unique; the same text with different bindings gets distinct ids.
class SubwordLexicon {
 public:
  /// Returns the existing id when the pair is already present.
  UnitId add(std::string_view text, BindingType binding) {
    auto key = std::make_pair(std::string(text), binding);
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    if (auto err = validate_unit_text(text); !err.empty()) {
      throw Error("SubwordLexicon::add: " + err + ": '" + std::string(text) + "'");
    }
    const auto id = static_cast<UnitId>(units_.size() + 1);
    units_.push_back({std::string(text), binding, id});
    index_.emplace(std::move(key), id);
    max_class_ = std::max({max_class_, binding.left, binding.right});
    return id;
  }

  UnitId add(const AnnotatedToken& t) { return add(t.text, t.binding); }

  std::optional<UnitId> find(std::string_view text, BindingType binding) const {
    auto it = index_.find(std::make_pair(std::string(text), binding));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(UnitId id) const { return id >= 1 && static_cast<std::size_t>(id) <= units_.size(); }

  const SubwordUnit& unit(UnitId id) const {
    if (!contains(id)) throw Error("SubwordLexicon: unknown unit id " + std::to_string(id));
    return units_[static_cast<std::size_t>(id - 1)];
  }

  std::span<const SubwordUnit> units() const { return units_; }
  std::size_t size() const { return units_.size(); }
  bool empty() const { return units_.empty(); }

  /// Largest binding class used by any unit (N).
  BindingClass max_class() const { return max_class_; }

 private:
  std::vector<SubwordUnit> units_;
  std::map<std::pair<std::string, BindingType>, UnitId> index_;
  BindingClass max_class_ = 0;
};

/// Reads `text<TAB>left<TAB>right` lines; `#` starts a comment line.
inline SubwordLexicon read_lexicon(std::istream& in) {
  SubwordLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw ParseError("expected three tab-separated fields", lineno);
    }
    try {
      const auto left = detail::parse_class(std::string_view(line).substr(t1 + 1, t2 - t1 - 1), t1 + 1);
      const auto right = detail::parse_class(std::string_view(line).substr(t2 + 1), t2 + 1);
      const std::string text = line.substr(0, t1);
      if (auto err = validate_unit_text(text); !err.empty()) throw ParseError(err, 0, 0);
      lex.add(text, {left, right});
    } catch (const ParseError& e) {
      throw ParseError(e.message(), lineno, e.position());
    }
  }
  return lex;
}

inline void write_lexicon(std::ostream& out, const SubwordLexicon& lex) {
  for (const auto& u : lex.units()) {
    out << u.text << '\t' << u.binding.left << '\t' << u.binding.right << '\n';
  }
}

}  // namespace swkb
