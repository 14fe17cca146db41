#pragma once

// Keyboard geometry, the isotropic Gaussian tap model, tap simulation and the
// per-word input lattice.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "swkb/error.hpp"
#include "swkb/fst.hpp"
#include "swkb/lexicon_fst.hpp"
#include "swkb/utf8.hpp"

namespace swkb {

inline constexpr char32_t kSeparatorChar = U' ';
inline constexpr Label kSeparatorLabel = static_cast<Label>(kSeparatorChar);

struct KeyRect {
  double cx = 0, cy = 0, width = 1, height = 1;
};

struct KeyboardLayout {
  std::string name;
  std::map<char32_t, KeyRect> keys;

  void add(char32_t c, KeyRect r) {
    if (!(r.width > 0 && r.height > 0)) throw Error("KeyboardLayout: key regions need positive size");
    keys[utf8::to_lower(c)] = r;
  }
  bool has(char32_t c) const { return keys.count(utf8::to_lower(c)) > 0; }
  const KeyRect& key(char32_t c) const {
    auto it = keys.find(utf8::to_lower(c));
    if (it == keys.end()) {
      std::string s;
      utf8::append(s, c);
      throw Error("KeyboardLayout: no key for '" + s + "'");
    }
    return it->second;
  }
  /// Every character of `text` has a key; returns the first that does not.
  std::optional<char32_t> first_unmapped(std::string_view text) const {
    const auto cps = utf8::decode(text);
    if (!cps) throw Error("KeyboardLayout: invalid UTF-8");
    for (char32_t c : *cps) {
      if (!has(c)) return c;
    }
    return std::nullopt;
  }
};

namespace detail {

inline KeyboardLayout grid_layout(std::string name, const std::vector<std::u32string>& rows,
                                  const std::vector<double>& offsets) {
  KeyboardLayout l;
  l.name = std::move(name);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      l.add(rows[r][i], {offsets[r] + static_cast<double>(i) + 0.5, static_cast<double>(r) + 0.5, 1.0, 1.0});
    }
  }
  l.add(kSeparatorChar, {5.5, static_cast<double>(rows.size()) + 0.5, 5.0, 1.0});
  return l;
}

}  // namespace detail

inline KeyboardLayout qwerty_layout() {
  return detail::grid_layout("qwerty", {U"qwertyuiop", U"asdfghjkl", U"zxcvbnm"}, {0.0, 0.25, 0.75});
}

inline KeyboardLayout qwertz_layout() {
  return detail::grid_layout("qwertz", {U"qwertzuiopü", U"asdfghjklöä", U"yxcvbnmß"}, {0.0, 0.25, 0.75});
}

inline KeyboardLayout layout_by_name(std::string_view name) {
  if (name == "qwerty") return qwerty_layout();
  if (name == "qwertz") return qwertz_layout();
  throw Error("unknown layout '" + std::string(name) + "'");
}

/// TSV: character, center_x, center_y, width, height. The separator key is
/// written as the word `space`.
inline KeyboardLayout read_layout(std::istream& in) {
  KeyboardLayout l;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::size_t b = 0;
    while (true) {
      const auto t = line.find('\t', b);
      f.push_back(line.substr(b, t == std::string::npos ? std::string::npos : t - b));
      if (t == std::string::npos) break;
      b = t + 1;
    }
    if (f.size() != 5) throw ParseError("expected char, cx, cy, width, height", lineno);
    char32_t c = kSeparatorChar;
    if (f[0] != "space") {
      const auto cps = utf8::decode(f[0]);
      if (!cps || cps->size() != 1) throw ParseError("key must be a single character", lineno);
      c = (*cps)[0];
    }
    KeyRect r;
    try {
      r = {std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4])};
      l.add(c, r);
    } catch (const std::logic_error&) {
      throw ParseError("bad number", lineno);
    } catch (const Error& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (!l.has(kSeparatorChar)) throw ParseError("layout has no space key", lineno);
  return l;
}

inline void write_layout(std::ostream& out, const KeyboardLayout& l) {
  for (const auto& [c, r] : l.keys) {
    std::string s;
    if (c == kSeparatorChar) {
      s = "space";
    } else {
      utf8::append(s, c);
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "\t%g\t%g\t%g\t%g\n", r.cx, r.cy, r.width, r.height);
    out << s << buf;
  }
}

struct TouchPoint {
  double x = 0, y = 0, t = 0;
};

using TouchSequence = std::vector<TouchPoint>;

struct TapModel {
  double sigma_ratio = 0.35;
  std::size_t top_k = 3;
  /// Neglog cost of hypothesizing a separator the user did not type.
  Weight insertion_penalty = 4.0;
  /// Neglog cost of ignoring a tap.
  Weight skip_penalty = 6.0;

  void validate() const {
    if (!(sigma_ratio > 0)) throw Error("TapModel: sigma_ratio must be positive");
    if (top_k < 1) throw Error("TapModel: top_k must be >= 1");
    if (insertion_penalty < 0 || skip_penalty < 0) throw Error("TapModel: penalties must be non-negative");
  }
};

/// -ln of the Gaussian density at `p` with sigma = sigma_ratio * key width.
/// The normalizer uses sigma_ratio alone so that it is the same for every key.
inline Weight tap_log_likelihood(const KeyboardLayout& layout, const TapModel& model, const TouchPoint& p,
                                 char32_t key) {
  const auto& k = layout.key(key);
  const double sigma = model.sigma_ratio * k.width;
  const double dx = p.x - k.cx, dy = p.y - k.cy;
  return (dx * dx + dy * dy) / (2 * sigma * sigma) + std::log(2 * std::numbers::pi * model.sigma_ratio * model.sigma_ratio);
}

/// The `k` most likely non-separator keys for a tap, best first.
inline std::vector<std::pair<char32_t, Weight>> nearest_keys(const KeyboardLayout& layout, const TapModel& model,
                                                             const TouchPoint& p, std::size_t k) {
  std::vector<std::pair<char32_t, Weight>> all;
  for (const auto& [c, r] : layout.keys) {
    if (c != kSeparatorChar) all.emplace_back(c, tap_log_likelihood(layout, model, p, c));
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

/// One point per character drawn around its key center; t advances 150 ms.
inline TouchSequence simulate_taps(const KeyboardLayout& layout, const TapModel& model, std::string_view text,
                                   std::uint64_t seed) {
  const auto cps = utf8::decode(text);
  if (!cps) throw Error("simulate_taps: invalid UTF-8");
  if (auto c = layout.first_unmapped(text)) {
    std::string s;
    utf8::append(s, *c);
    throw Error("simulate_taps: no key for character '" + s + "'");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  TouchSequence out;
  out.reserve(cps->size());
  for (std::size_t i = 0; i < cps->size(); ++i) {
    const auto& k = layout.key((*cps)[i]);
    const double sigma = model.sigma_ratio * k.width;
    const double dx = n01(rng) * sigma;
    const double dy = n01(rng) * sigma;
    out.push_back({k.cx + dx, k.cy + dy, 150.0 * static_cast<double>(i)});
  }
  return out;
}

/// Splits a simulated sentence at the positions of separator characters.
inline std::vector<TouchSequence> split_words(std::string_view text, const TouchSequence& taps) {
  const auto cps = utf8::decode(text);
  if (!cps || cps->size() != taps.size()) throw Error("split_words: text and taps differ in length");
  std::vector<TouchSequence> out(1);
  for (std::size_t i = 0; i < taps.size(); ++i) {
    if ((*cps)[i] == kSeparatorChar) {
      out.emplace_back();
    } else {
      out.back().push_back(taps[i]);
    }
  }
  std::erase_if(out, [](const TouchSequence& s) { return s.empty(); });
  return out;
}

/// Per-word tap sequences of a sentence, one simulation per sentence.
inline std::vector<TouchSequence> simulate_sentence(const KeyboardLayout& layout, const TapModel& model,
                                                    const std::vector<std::string>& words, std::uint64_t seed) {
  std::string text;
  for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
  return split_words(text, simulate_taps(layout, model, text, seed));
}

/// Tap file: `x<TAB>y<TAB>t` per line, a blank line between words.
inline void write_taps(std::ostream& out, const std::vector<TouchSequence>& words) {
  char buf[96];
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (w) out << '\n';
    for (const auto& p : words[w]) {
      std::snprintf(buf, sizeof buf, "%.6f\t%.6f\t%.0f\n", p.x, p.y, p.t);
      out << buf;
    }
  }
}

inline std::vector<TouchSequence> read_taps(std::istream& in) {
  std::vector<TouchSequence> out(1);
  std::string line;
  std::size_t lineno = 0;
  double last_t = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!out.back().empty()) out.emplace_back();
      continue;
    }
    TouchPoint p;
    char extra = 0;
    if (std::sscanf(line.c_str(), "%lf\t%lf\t%lf %c", &p.x, &p.y, &p.t, &extra) != 3) {
      throw ParseError("expected x<TAB>y<TAB>t", lineno);
    }
    if (p.t < last_t) throw ParseError("timestamps must not decrease", lineno);
    last_t = p.t;
    out.back().push_back(p);
  }
  if (out.back().empty()) out.pop_back();
  return out;
}

/// Acceptor over key labels for one word's taps. States are numbered in
/// topological order: pos 0, pos 1, mid 1, pos 2, mid 2, ..., pos n.
///   pos i -> pos i+1   top_k key arcs of tap i, plus an epsilon skip arc
///   pos i -> mid i     separator arc carrying the insertion penalty (0 < i < n)
///   mid i -> pos i+1   copies of tap i's key arcs
/// Infinite penalties omit the corresponding arcs.
inline WeightedFst build_input_lattice(const KeyboardLayout& layout, const TapModel& model,
                                       const TouchSequence& taps) {
  model.validate();
  if (taps.empty()) throw Error("build_input_lattice: no taps");
  const std::size_t n = taps.size();
  WeightedFst f;
  std::vector<StateId> pos(n + 1, kNoState), mid(n + 1, kNoState);
  pos[0] = f.add_state();
  for (std::size_t i = 1; i <= n; ++i) {
    pos[i] = f.add_state();
    if (i < n && std::isfinite(model.insertion_penalty)) mid[i] = f.add_state();
  }
  f.set_start(pos[0]);
  f.set_final(pos[n], 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto keys = nearest_keys(layout, model, taps[i], model.top_k);
    for (const auto& [c, w] : keys) {
      f.add_arc(pos[i], key_label(c), key_label(c), w, pos[i + 1]);
      if (mid[i] != kNoState) f.add_arc(mid[i], key_label(c), key_label(c), w, pos[i + 1]);
    }
    if (std::isfinite(model.skip_penalty)) f.add_arc(pos[i], kEpsilon, kEpsilon, model.skip_penalty, pos[i + 1]);
    if (mid[i] != kNoState) f.add_arc(pos[i], kSeparatorLabel, kSeparatorLabel, model.insertion_penalty, mid[i]);
  }
  return f;
}

/// Nearest-key reading of a tap sequence.
inline std::string literal_string(const KeyboardLayout& layout, const TapModel& model, const TouchSequence& taps) {
  std::string s;
  for (const auto& p : taps) utf8::append(s, nearest_keys(layout, model, p, 1).at(0).first);
  return s;
}

inline Weight literal_cost(const KeyboardLayout& layout, const TapModel& model, const TouchSequence& taps) {
  Weight w = 0;
  for (const auto& p : taps) w += nearest_keys(layout, model, p, 1).at(0).second;
  return w;
}

}  // namespace swkb
