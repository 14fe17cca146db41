#pragma once

// Seeded generator for German-like compounding corpora. Compound types are
// split into a training pool and a held-out pool; held-out compounds appear
// only in test sentences, while each of their parts occurs in the same
// position inside some training compound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "swkb/config.hpp"
#include "swkb/corpus.hpp"
#include "swkb/error.hpp"
#include "swkb/utf8.hpp"

namespace swkb {

inline const std::vector<std::string>& default_nouns() {
  static const std::vector<std::string> v{
      "Sommer", "Winter", "Tag",    "Abend",  "Haus",   "Garten", "Tür",    "Fenster", "Schule", "Buch",
      "Wasser", "Feuer",  "Stadt",  "Land",   "Berg",   "Wald",   "Straße", "Bahn",    "Hof",    "Zeit",
      "Brot",   "Käse",   "Milch",  "Apfel",  "Baum",   "Blume",  "Markt",  "Platz",   "Kirche", "Turm",
      "Uhr",    "Licht",  "Nacht",  "Morgen", "Woche",  "Jahr",   "Feld",   "Weg",     "Auto",   "Zug",
      "Schiff", "Hafen",  "Insel",  "Fluss",  "Meer",   "Sonne",  "Regen",  "Schnee",  "Wind",   "Hand",
      "Arbeit", "Kaffee", "Tasche", "Karte",  "Brief",  "Lampe",  "Stuhl",  "Tisch",   "Wolke",  "Vogel"};
  return v;
}

inline const std::vector<std::string>& default_fillers() {
  static const std::vector<std::string> v{
      "der",  "die",   "das",   "ein",    "eine",   "und",   "oder",  "ist",  "war",  "hat",
      "wir",  "ihr",   "sie",   "mit",    "bei",    "nach",  "von",   "auf",  "für",  "über",
      "sehr", "nicht", "auch",  "noch",   "schon",  "heute", "immer", "hier", "dort", "gut",
      "schön", "groß", "klein", "neu",    "alt",    "lang",  "kurz",  "warm", "kalt", "viel"};
  return v;
}

struct SyntheticConfig {
  std::uint64_t seed = 1;
  std::size_t train_sentences = 6000;
  std::size_t test_sentences = 600;
  std::size_t min_length = 3;
  std::size_t max_length = 8;
  double noun_probability = 0.45;      // per token slot
  double compound_probability = 0.35;  // per noun slot
  double three_part_probability = 0.1;  // per compound
  double interfix_probability = 0.3;   // per noun: whether its linking form carries an interfix
  std::vector<std::string> interfixes{"s", "n"};
  std::size_t compound_types = 500;
  double heldout_fraction = 0.3;  // of compound types, never seen in training
  double novel_rate = 0.4;        // per test compound: drawn from the held-out pool
  double zipf_exponent = 1.0;
  std::vector<std::string> nouns = default_nouns();
  std::vector<std::string> fillers = default_fillers();

  void validate() const {
    auto prob = [](double p, const char* what) {
      if (!(p >= 0.0 && p <= 1.0)) throw Error(std::string("synthetic config: ") + what + " must be in [0,1]");
    };
    prob(noun_probability, "noun_probability");
    prob(compound_probability, "compound_probability");
    prob(three_part_probability, "three_part_probability");
    prob(interfix_probability, "interfix_probability");
    prob(heldout_fraction, "heldout_fraction");
    prob(novel_rate, "novel_rate");
    if (min_length == 0 || min_length > max_length) throw Error("synthetic config: need 1 <= min_length <= max_length");
    if (nouns.size() < 3) throw Error("synthetic config: need at least 3 nouns");
    if (fillers.empty()) throw Error("synthetic config: need at least one filler word");
    if (!(zipf_exponent >= 0.0)) throw Error("synthetic config: zipf_exponent must be >= 0");
    if (interfix_probability > 0 && interfixes.empty()) throw Error("synthetic config: interfixes are empty");
    for (const auto& n : nouns) {
      if (!utf8::is_capitalized(n) || utf8::length(n) < 3) {
        throw Error("synthetic config: noun '" + n + "' must be capitalized and at least 3 characters");
      }
    }
  }
};

/// Keys of the [generator] section; any other key is rejected.
inline SyntheticConfig read_synthetic_config(const ConfigSection& s) {
  s.require_known({"seed", "train_sentences", "test_sentences", "min_length", "max_length", "noun_probability",
                   "compound_probability", "three_part_probability", "interfix_probability", "interfixes",
                   "compound_types", "heldout_fraction", "novel_rate", "zipf_exponent", "nouns", "fillers"});
  SyntheticConfig c;
  c.seed = static_cast<std::uint64_t>(s.get_int("seed", static_cast<long long>(c.seed)));
  c.train_sentences = s.get_size("train_sentences", c.train_sentences);
  c.test_sentences = s.get_size("test_sentences", c.test_sentences);
  c.min_length = s.get_size("min_length", c.min_length);
  c.max_length = s.get_size("max_length", c.max_length);
  c.noun_probability = s.get_double("noun_probability", c.noun_probability);
  c.compound_probability = s.get_double("compound_probability", c.compound_probability);
  c.three_part_probability = s.get_double("three_part_probability", c.three_part_probability);
  c.interfix_probability = s.get_double("interfix_probability", c.interfix_probability);
  c.interfixes = s.get_list("interfixes", c.interfixes);
  c.compound_types = s.get_size("compound_types", c.compound_types);
  c.heldout_fraction = s.get_double("heldout_fraction", c.heldout_fraction);
  c.novel_rate = s.get_double("novel_rate", c.novel_rate);
  c.zipf_exponent = s.get_double("zipf_exponent", c.zipf_exponent);
  c.nouns = s.get_list("nouns", c.nouns);
  c.fillers = s.get_list("fillers", c.fillers);
  c.validate();
  return c;
}

/// Counts verified after generation.
struct SyntheticAudit {
  std::size_t train_tokens = 0;
  std::size_t test_tokens = 0;
  std::size_t train_compounds = 0;
  std::size_t test_compounds = 0;
  std::size_t novel_test_compounds = 0;  // test compound tokens whose surface never occurs in training
  std::size_t heldout_types = 0;

  double novel_fraction() const {
    return test_compounds ? static_cast<double>(novel_test_compounds) / static_cast<double>(test_compounds) : 0.0;
  }
};

struct SyntheticCorpus {
  std::vector<std::string> train;
  std::vector<std::string> test;
  DecompoundRules rules;         // nouns and fillers as base vocabulary, the configured interfixes
  CuratedVocabulary vocabulary;  // same words; the subword annotator's curated list
  SyntheticAudit audit;
};

namespace detail {

inline std::discrete_distribution<std::size_t> zipf(std::size_t n, double s) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i + 1), s);
  return {w.begin(), w.end()};
}

}  // namespace detail

inline SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  // Fillers must not collide with nouns when case is ignored.
  std::set<std::string> folded_nouns;
  for (const auto& n : cfg.nouns) folded_nouns.insert(utf8::lower(n));
  std::vector<std::string> fillers;
  for (const auto& f : cfg.fillers) {
    if (!folded_nouns.count(utf8::lower(f))) fillers.push_back(f);
  }
  if (fillers.empty()) throw Error("synthetic config: every filler collides with a noun");

  // Linking form of each noun when it is not the last part.
  std::vector<std::string> linking;
  for (const auto& n : cfg.nouns) {
    std::string form = n;
    if (coin(rng) < cfg.interfix_probability) {
      // "n" links nouns ending in e; the others take the remaining interfixes.
      std::vector<std::string> fits;
      for (const auto& i : cfg.interfixes) {
        if ((i == "n") == (n.back() == 'e')) fits.push_back(i);
      }
      const auto& pool = fits.empty() ? cfg.interfixes : fits;
      form += pool[rng() % pool.size()];
    }
    linking.push_back(std::move(form));
  }

  using Type = std::vector<std::size_t>;  // noun indices
  auto surface = [&](const Type& t) {
    std::string s = linking[t[0]];
    for (std::size_t i = 1; i < t.size(); ++i) {
      s += utf8::lower_first(i + 1 == t.size() ? cfg.nouns[t[i]] : linking[t[i]]);
    }
    return s;
  };

  // Distinct compound types, drawn once.
  std::vector<Type> types;
  {
    std::set<std::string> seen(cfg.nouns.begin(), cfg.nouns.end());
    seen.insert(fillers.begin(), fillers.end());
    const std::size_t n = cfg.nouns.size();
    std::size_t attempts = 0;
    while (types.size() < cfg.compound_types && attempts++ < 100 * cfg.compound_types + 1000) {
      Type t{rng() % n, rng() % n};
      if (coin(rng) < cfg.three_part_probability) t.push_back(rng() % n);
      bool repeat = false;
      for (std::size_t i = 1; i < t.size(); ++i) repeat = repeat || t[i] == t[i - 1];
      if (repeat) continue;
      if (!seen.insert(surface(t)).second) continue;
      types.push_back(std::move(t));
    }
  }

  // Split the types into a training pool and a held-out candidate pool.
  std::vector<std::size_t> order(types.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const auto want_heldout = static_cast<std::size_t>(std::floor(cfg.heldout_fraction * static_cast<double>(types.size())));
  std::vector<Type> train_types, heldout_types;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < want_heldout ? heldout_types : train_types).push_back(types[order[k]]);
  }

  auto filler_dist = detail::zipf(fillers.size(), cfg.zipf_exponent);
  auto noun_dist = detail::zipf(cfg.nouns.size(), cfg.zipf_exponent);
  auto compound_dist = detail::zipf(std::max<std::size_t>(train_types.size(), 1), cfg.zipf_exponent);
  std::uniform_int_distribution<std::size_t> length(cfg.min_length, cfg.max_length);

  SyntheticCorpus out;
  std::vector<bool> train_used(train_types.size(), false);
  // Test sentences draw seen compounds from those training really contains.
  std::vector<std::size_t> seen;
  std::discrete_distribution<std::size_t> seen_dist;

  auto sentence = [&](bool test, std::size_t& tokens, std::size_t& compounds) {
    const std::size_t len = length(rng);
    std::string line;
    for (std::size_t i = 0; i < len; ++i) {
      std::string word;
      if (coin(rng) < cfg.noun_probability) {
        const bool compound = coin(rng) < cfg.compound_probability;
        if (compound && test && !heldout_types.empty() && coin(rng) < cfg.novel_rate) {
          word = surface(heldout_types[rng() % heldout_types.size()]);
          ++compounds;
        } else if (compound && (test ? !seen.empty() : !train_types.empty())) {
          std::size_t k;
          if (test) {
            k = seen[seen_dist(rng)];
          } else {
            k = compound_dist(rng);
            train_used[k] = true;
          }
          word = surface(train_types[k]);
          ++compounds;
        } else {
          word = cfg.nouns[noun_dist(rng)];
        }
      } else {
        word = fillers[filler_dist(rng)];
      }
      if (!line.empty()) line += ' ';
      line += word;
      ++tokens;
    }
    return line;
  };

  for (std::size_t i = 0; i < cfg.train_sentences; ++i) {
    out.train.push_back(sentence(false, out.audit.train_tokens, out.audit.train_compounds));
  }
  // A held-out type stays only if each part occurs, in the same position,
  // in a compound that training actually contains.
  auto kind = [](const Type& t, std::size_t i) { return i == 0 ? 0 : (i + 1 == t.size() ? 2 : 1); };
  std::set<std::pair<int, std::size_t>> covered;
  for (std::size_t k = 0; k < train_types.size(); ++k) {
    if (!train_used[k]) continue;
    for (std::size_t i = 0; i < train_types[k].size(); ++i) covered.insert({kind(train_types[k], i), train_types[k][i]});
  }
  std::erase_if(heldout_types, [&](const Type& t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!covered.count({kind(t, i), t[i]})) return true;
    }
    return false;
  });
  std::set<std::string> heldout_surfaces;
  for (const auto& t : heldout_types) heldout_surfaces.insert(surface(t));
  for (std::size_t k = 0; k < train_types.size(); ++k) {
    if (train_used[k]) seen.push_back(k);
  }
  seen_dist = detail::zipf(std::max<std::size_t>(seen.size(), 1), cfg.zipf_exponent);

  for (std::size_t i = 0; i < cfg.test_sentences; ++i) {
    out.test.push_back(sentence(true, out.audit.test_tokens, out.audit.test_compounds));
  }

  // Audit against the emitted text, not the generator's bookkeeping.
  std::set<std::string> train_words;
  for (const auto& l : out.train) {
    for (auto& w : split_whitespace(l)) train_words.insert(std::move(w));
  }
  for (const auto& s : heldout_surfaces) {
    if (train_words.count(s)) throw Error("synthetic audit: held-out compound '" + s + "' occurs in training");
  }
  std::set<std::string> novel_types;
  for (const auto& l : out.test) {
    for (const auto& w : split_whitespace(l)) {
      if (heldout_surfaces.count(w)) {
        ++out.audit.novel_test_compounds;
        novel_types.insert(w);
      }
    }
  }
  out.audit.heldout_types = novel_types.size();
  if (cfg.compound_probability > 0 && cfg.novel_rate > 0 && cfg.heldout_fraction > 0 && cfg.test_sentences >= 50 &&
      out.audit.novel_test_compounds == 0) {
    throw Error("synthetic audit: no test compound is absent from training");
  }
  if (cfg.compound_probability == 0 && (out.audit.train_compounds || out.audit.test_compounds)) {
    throw Error("synthetic audit: compounds generated with compound_probability 0");
  }

  out.rules.base_vocabulary.insert(cfg.nouns.begin(), cfg.nouns.end());
  out.rules.base_vocabulary.insert(fillers.begin(), fillers.end());
  out.rules.interfixes = cfg.interfixes;
  out.rules.capitalization_policy = true;
  out.vocabulary.words = out.rules.base_vocabulary;
  return out;
}

inline void write_audit(std::ostream& out, const SyntheticAudit& a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", a.novel_fraction());
  out << "train_tokens=" << a.train_tokens << "\n"
      << "test_tokens=" << a.test_tokens << "\n"
      << "train_compounds=" << a.train_compounds << "\n"
      << "test_compounds=" << a.test_compounds << "\n"
      << "novel_test_compounds=" << a.novel_test_compounds << "\n"
      << "novel_compound_types=" << a.heldout_types << "\n"
      << "novel_fraction=" << buf << "\n";
}

}  // namespace swkb
