#pragma once

// Training-text preparation: dictionary-driven decompounding with interfix and
// elided-vowel handling, curated-vocabulary OOV filtering, and in-text binding
// annotation (one inner binding class: prefix ⟨0,1⟩, infix ⟨1,1⟩, suffix ⟨1,0⟩).

#include <algorithm>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "swkb/error.hpp"
#include "swkb/morpho.hpp"
#include "swkb/utf8.hpp"

namespace swkb {

inline constexpr std::string_view kUnknownToken = "<UNK>";

struct DecompoundRules {
  std::set<std::string> base_vocabulary;
  /// Glue morphemes, tried in order after each non-final part.
  std::vector<std::string> interfixes;
  /// full form -> form used as a non-final compound part (e.g. Schule -> Schul).
  std::map<std::string, std::string> final_vowel_drops;
  std::size_t min_part_length = 3;
  /// German noun mode: parts may differ from their base in first-letter case,
  /// and non-final parts are lower-cased when annotated.
  bool capitalization_policy = false;
  /// Safety valve for pathological inputs.
  std::size_t max_analyses = 64;

  void validate() const {
    for (const auto& i : interfixes) {
      if (i.empty()) throw Error("DecompoundRules: empty interfix");
      if (utf8::length(i) >= min_part_length) {
        throw Error("DecompoundRules: interfix '" + i + "' is not shorter than min_part_length");
      }
    }
  }
};

struct CuratedVocabulary {
  std::set<std::string> words;
  bool contains(std::string_view w) const { return words.count(std::string(w)) > 0; }
};

struct CompoundPart {
  /// Substring of the input word, including a trailing interfix.
  std::string surface;
  /// Dictionary form of the constituent (no interfix, elided vowel restored).
  std::string base;
  std::string interfix;

  friend bool operator==(const CompoundPart&, const CompoundPart&) = default;
};

using CompoundAnalysis = std::vector<CompoundPart>;

namespace detail {

/// Dictionary base matching `piece`, allowing a first-letter case difference.
inline std::optional<std::string> match_base(const std::set<std::string>& vocab, const std::string& piece,
                                             bool case_toggle) {
  if (vocab.count(piece)) return piece;
  if (!case_toggle) return std::nullopt;
  for (const auto& v : {utf8::upper_first(piece), utf8::lower_first(piece)}) {
    if (v != piece && vocab.count(v)) return v;
  }
  return std::nullopt;
}

}  // namespace detail

/// All segmentations of `word` into >= 2 parts. Non-final parts are a base
/// (or its elided form) plus an optional interfix; the final part is a base.
/// Parts always concatenate back to `word` exactly.
inline std::vector<CompoundAnalysis> decompound(std::string_view word, const DecompoundRules& rules) {
  if (word.empty()) throw Error("decompound: empty word");
  const auto cps = utf8::decode(word);
  if (!cps) throw Error("decompound: invalid UTF-8");
  const std::size_t n = cps->size();

  // Truncated form -> full forms present in the vocabulary.
  std::multimap<std::string, std::string> elided;
  for (const auto& [full, cut] : rules.final_vowel_drops) {
    if (rules.base_vocabulary.count(full)) elided.emplace(cut, full);
  }
  auto piece = [&](std::size_t b, std::size_t e) { return utf8::encode(std::u32string_view(*cps).substr(b, e - b)); };

  // Candidate bases for a stem, as (base) strings.
  auto stem_bases = [&](const std::string& stem, bool final_part) {
    std::vector<std::string> out;
    if (auto m = detail::match_base(rules.base_vocabulary, stem, rules.capitalization_policy)) out.push_back(*m);
    if (!final_part) {
      std::vector<std::string> forms{stem};
      if (rules.capitalization_policy) {
        forms.push_back(utf8::upper_first(stem));
        forms.push_back(utf8::lower_first(stem));
      }
      for (const auto& v : forms) {
        auto [lo, hi] = elided.equal_range(v);
        for (auto it = lo; it != hi; ++it) {
          if (std::find(out.begin(), out.end(), it->second) == out.end()) out.push_back(it->second);
        }
      }
    }
    return out;
  };

  std::vector<CompoundAnalysis> results;
  CompoundAnalysis cur;
  std::function<void(std::size_t)> rec = [&](std::size_t pos) {
    if (results.size() >= rules.max_analyses) return;
    for (std::size_t end = pos + rules.min_part_length; end <= n; ++end) {
      const bool final_part = end == n;
      if (final_part && cur.empty()) break;  // need at least two parts
      const std::string surface = piece(pos, end);
      if (final_part) {
        for (const auto& b : stem_bases(surface, true)) {
          cur.push_back({surface, b, ""});
          results.push_back(cur);
          cur.pop_back();
        }
        continue;
      }
      // Non-final: surface = stem + interfix (possibly empty).
      std::vector<std::pair<std::string, std::string>> splits{{surface, ""}};
      for (const auto& ifx : rules.interfixes) {
        const auto ifx_len = utf8::length(ifx);
        if (end - pos < ifx_len + rules.min_part_length) continue;
        if (piece(end - ifx_len, end) == ifx) splits.emplace_back(piece(pos, end - ifx_len), ifx);
      }
      for (const auto& [stem, ifx] : splits) {
        for (const auto& b : stem_bases(stem, false)) {
          cur.push_back({surface, b, ifx});
          rec(end);
          cur.pop_back();
        }
      }
    }
  };
  rec(0);
  std::sort(results.begin(), results.end(), [](const CompoundAnalysis& a, const CompoundAnalysis& b) {
    auto key = [](const CompoundAnalysis& x) {
      std::vector<std::string> k;
      for (const auto& p : x) {
        k.push_back(p.surface);
        k.push_back(p.base);
        k.push_back(p.interfix);
      }
      return k;
    };
    return key(a) < key(b);
  });
  results.erase(std::unique(results.begin(), results.end()), results.end());
  return results;
}

/// Fewest parts first, then longest first part, then lexicographic.
inline bool analysis_preferred(const CompoundAnalysis& a, const CompoundAnalysis& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  const auto la = utf8::length(a.front().surface), lb = utf8::length(b.front().surface);
  if (la != lb) return la > lb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].surface != b[i].surface) return a[i].surface < b[i].surface;
    if (a[i].base != b[i].base) return a[i].base < b[i].base;
  }
  return false;
}

struct OovDecision {
  enum class Kind { Kept, KeptWhole, Rejected };
  Kind kind = Kind::Rejected;
  CompoundAnalysis parts;  // set when kind == Kept
};

/// A compound is rejected only when it and every constituent base of every
/// analysis are out of vocabulary. Otherwise the preferred analysis with an
/// in-vocabulary constituent is kept (analyses with all constituents known
/// win), falling back to the whole word when it is itself known.
inline OovDecision apply_oov_policy(std::string_view word, const std::vector<CompoundAnalysis>& analyses,
                                    const CuratedVocabulary& vocab) {
  const CompoundAnalysis* best = nullptr;
  std::size_t best_known = 0;
  for (const auto& a : analyses) {
    std::size_t known = 0;
    for (const auto& p : a) known += vocab.contains(p.base) ? 1 : 0;
    if (known == 0) continue;
    const bool all = known == a.size();
    const bool best_all = best && best_known == best->size();
    if (!best || (all && !best_all) || (all == best_all && analysis_preferred(a, *best))) {
      best = &a;
      best_known = known;
    }
  }
  if (best) return {OovDecision::Kind::Kept, *best};
  if (vocab.contains(word)) return {OovDecision::Kind::KeptWhole, {}};
  return {OovDecision::Kind::Rejected, {}};
}

using AnnotatedSentence = std::vector<AnnotatedToken>;

inline std::string render_sentence(const AnnotatedSentence& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ' ';
    out += render_annotated_token(s[i]);
  }
  return out;
}

inline AnnotatedSentence parse_annotated_sentence(std::string_view line) {
  AnnotatedSentence out;
  std::istringstream ss{std::string(line)};
  std::string tok;
  while (ss >> tok) out.push_back(parse_annotated_token(tok));
  return out;
}

/// Surface words of an annotated sentence, joining compound parts.
inline std::vector<std::string> surface_words(const AnnotatedSentence& s) {
  std::vector<std::string> out;
  std::string cur;
  for (const auto& t : s) {
    cur += t.text;
    if (t.binding.right == 0) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream ss{std::string(line)};
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

/// Streaming annotator. Holds a per-word-type decision cache and accumulates
/// the lexicon of every (text, binding) pair it emits.
class Annotator {
 public:
  Annotator(DecompoundRules rules, CuratedVocabulary vocab, bool split_compounds = true)
      : rules_(std::move(rules)), vocab_(std::move(vocab)), split_(split_compounds) {
    rules_.validate();
  }

  /// nullopt for lines that are not valid UTF-8 (counted in skipped_lines()).
  std::optional<AnnotatedSentence> annotate_line(std::string_view line) {
    if (!utf8::is_valid(line)) {
      ++skipped_;
      return std::nullopt;
    }
    AnnotatedSentence out;
    for (const auto& word : split_whitespace(line)) {
      for (const auto& t : annotate_word(word)) {
        lexicon_.add(t);
        out.push_back(t);
      }
    }
    return out;
  }

  const std::vector<AnnotatedToken>& annotate_word(const std::string& word) {
    if (auto it = cache_.find(word); it != cache_.end()) return it->second;
    std::vector<AnnotatedToken> toks;
    if (!validate_unit_text(word).empty()) {
      toks.push_back({std::string(kUnknownToken), {0, 0}});
    } else if (!split_) {
      toks.push_back({vocab_.contains(word) ? word : std::string(kUnknownToken), {0, 0}});
    } else {
      const auto decision = apply_oov_policy(word, decompound(word, rules_), vocab_);
      switch (decision.kind) {
        case OovDecision::Kind::KeptWhole:
          toks.push_back({word, {0, 0}});
          break;
        case OovDecision::Kind::Rejected:
          toks.push_back({std::string(kUnknownToken), {0, 0}});
          break;
        case OovDecision::Kind::Kept: {
          const auto& parts = decision.parts;
          for (std::size_t i = 0; i < parts.size(); ++i) {
            std::string text = parts[i].surface;
            if (i > 0 && rules_.capitalization_policy) text = utf8::lower_first(text);
            const BindingClass l = i == 0 ? 0 : 1;
            const BindingClass r = i + 1 == parts.size() ? 0 : 1;
            toks.push_back({text, {l, r}});
          }
          break;
        }
      }
    }
    return cache_.emplace(word, std::move(toks)).first->second;
  }

  const SubwordLexicon& lexicon() const { return lexicon_; }
  std::size_t skipped_lines() const { return skipped_; }

 private:
  DecompoundRules rules_;
  CuratedVocabulary vocab_;
  bool split_;
  std::unordered_map<std::string, std::vector<AnnotatedToken>> cache_;
  SubwordLexicon lexicon_;
  std::size_t skipped_ = 0;
};

struct AnnotationResult {
  std::vector<AnnotatedSentence> sentences;
  SubwordLexicon lexicon;
  std::size_t skipped_lines = 0;
};

inline AnnotationResult annotate_corpus(std::istream& in, const DecompoundRules& rules,
                                        const CuratedVocabulary& vocab, bool split_compounds = true) {
  Annotator ann(rules, vocab, split_compounds);
  AnnotationResult res;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto s = ann.annotate_line(line)) res.sentences.push_back(std::move(*s));
  }
  res.lexicon = ann.lexicon();
  res.skipped_lines = ann.skipped_lines();
  return res;
}

inline AnnotationResult annotate_corpus(const std::vector<std::string>& lines, const DecompoundRules& rules,
                                        const CuratedVocabulary& vocab, bool split_compounds = true) {
  Annotator ann(rules, vocab, split_compounds);
  AnnotationResult res;
  for (const auto& line : lines) {
    if (auto s = ann.annotate_line(line)) res.sentences.push_back(std::move(*s));
  }
  res.lexicon = ann.lexicon();
  res.skipped_lines = ann.skipped_lines();
  return res;
}

// ---------------------------------------------------------------------------
// Files

/// Sections: [vocabulary] one word per line, [interfixes] one per line,
/// [vowel-drops] `full<TAB>truncated`, [options] key=value
/// (min_part_length, capitalization = german|off).
inline DecompoundRules read_rules(std::istream& in) {
  DecompoundRules r;
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!utf8::is_valid(line)) throw ParseError("invalid UTF-8", lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", lineno);
      section = line.substr(1, line.size() - 2);
      if (section != "vocabulary" && section != "interfixes" && section != "vowel-drops" && section != "options") {
        throw ParseError("unknown section '" + section + "'", lineno);
      }
      continue;
    }
    if (section == "vocabulary") {
      r.base_vocabulary.insert(line);
    } else if (section == "interfixes") {
      r.interfixes.push_back(line);
    } else if (section == "vowel-drops") {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw ParseError("expected full<TAB>truncated", lineno);
      r.final_vowel_drops[line.substr(0, tab)] = line.substr(tab + 1);
    } else if (section == "options") {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("expected key=value", lineno);
      const auto key = line.substr(0, eq), val = line.substr(eq + 1);
      if (key == "min_part_length") {
        try {
          r.min_part_length = std::stoul(val);
        } catch (const std::logic_error&) {
          throw ParseError("bad min_part_length", lineno);
        }
      } else if (key == "capitalization") {
        r.capitalization_policy = val == "german";
      } else {
        throw ParseError("unknown option '" + key + "'", lineno);
      }
    } else {
      throw ParseError("content outside a section", lineno);
    }
  }
  r.validate();
  return r;
}

inline void write_rules(std::ostream& out, const DecompoundRules& r) {
  out << "[options]\nmin_part_length=" << r.min_part_length
      << "\ncapitalization=" << (r.capitalization_policy ? "german" : "off") << "\n[interfixes]\n";
  for (const auto& i : r.interfixes) out << i << '\n';
  out << "[vowel-drops]\n";
  for (const auto& [full, cut] : r.final_vowel_drops) out << full << '\t' << cut << '\n';
  out << "[vocabulary]\n";
  for (const auto& w : r.base_vocabulary) out << w << '\n';
}

inline CuratedVocabulary read_vocabulary(std::istream& in) {
  CuratedVocabulary v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!validate_unit_text(line).empty()) throw ParseError("invalid vocabulary entry", lineno);
    v.words.insert(line);
  }
  return v;
}

inline void write_vocabulary(std::ostream& out, const CuratedVocabulary& v) {
  for (const auto& w : v.words) out << w << '\n';
}

}  // namespace swkb
