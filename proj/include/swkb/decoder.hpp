#pragma once

// Beam search over  input lattice ∘ lexicon ∘ LM,  n-best surface candidates,
// the compound-rewriting heuristic for word-based decoders, and sentence-level
// decoding with LM context carried across user-typed separators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "swkb/error.hpp"
#include "swkb/fst.hpp"
#include "swkb/lexicon_fst.hpp"
#include "swkb/lm.hpp"
#include "swkb/morpho.hpp"
#include "swkb/spatial.hpp"
#include "swkb/utf8.hpp"

namespace swkb {

enum class RewriterMode { Off, Generic, German };

inline RewriterMode parse_rewriter_mode(std::string_view s) {
  if (s == "off") return RewriterMode::Off;
  if (s == "generic") return RewriterMode::Generic;
  if (s == "german") return RewriterMode::German;
  throw Error("unknown rewriter mode '" + std::string(s) + "'");
}

inline std::string_view to_string(RewriterMode m) {
  switch (m) {
    case RewriterMode::Off: return "off";
    case RewriterMode::Generic: return "generic";
    case RewriterMode::German: return "german";
  }
  return "off";
}

struct DecoderConfig {
  /// Hypotheses kept per lattice state; 0 means unbounded.
  std::size_t beam = 64;
  std::size_t nbest = 8;
  double lm_weight = 1.0;
  char32_t separator = kSeparatorChar;
  RewriterMode rewriter = RewriterMode::Off;
  Weight rewriter_boost = 0.5;
  /// LM-side cost of the nearest-key literal candidate. Infinite: the literal
  /// string is only used when the search finds nothing.
  Weight literal_penalty = kInfinity;

  void validate() const {
    if (nbest < 1) throw Error("DecoderConfig: nbest must be >= 1");
    if (beam != 0 && beam < nbest) throw Error("DecoderConfig: beam must be >= nbest");
    if (rewriter_boost < 0) throw Error("DecoderConfig: rewriter boost must be >= 0");
    if (lm_weight < 0) throw Error("DecoderConfig: lm weight must be >= 0");
  }
};

struct Candidate {
  enum class Source { Decoded, Rewritten, Literal };

  std::vector<std::string> words;
  Weight spatial = 0;
  Weight lm = 0;
  Weight total = 0;
  Source source = Source::Decoded;
  /// Unit ids behind the surface, and the LM state after them.
  std::vector<UnitId> units;
  StateId lm_state = kNoState;

  std::string text() const {
    std::string s;
    for (std::size_t i = 0; i < words.size(); ++i) s += (i ? " " : "") + words[i];
    return s;
  }
};

inline std::string_view to_string(Candidate::Source s) {
  switch (s) {
    case Candidate::Source::Decoded: return "decoded";
    case Candidate::Source::Rewritten: return "rewritten";
    case Candidate::Source::Literal: return "literal";
  }
  return "decoded";
}

using CandidateList = std::vector<Candidate>;

inline void sort_candidates(CandidateList& c) {
  std::stable_sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
    if (a.total != b.total) return a.total < b.total;
    return a.text() < b.text();
  });
}

/// Exact failure-semantics transitions over an LM FST.
class LmTransitions {
 public:
  explicit LmTransitions(const WeightedFst& lm) : fst_(&lm) {
    const auto n = lm.num_states();
    explicit_.resize(n);
    fail_.assign(n, {kNoState, 0.0});
    for (StateId s = 0; s < static_cast<StateId>(n); ++s) {
      for (const auto& a : lm.arcs(s)) {
        if (a.ilabel == kFailureLabel) {
          fail_[static_cast<std::size_t>(s)] = {a.next, a.weight};
        } else {
          explicit_[static_cast<std::size_t>(s)].emplace(a.ilabel, std::make_pair(a.weight, a.next));
        }
      }
    }
  }

  StateId start() const { return fst_->start(); }

  /// Cost of `u` from `s` and the next state; +inf when unsupported.
  std::pair<Weight, StateId> step(StateId s, Label u) const {
    Weight acc = 0.0;
    while (s != kNoState) {
      const auto& m = explicit_[static_cast<std::size_t>(s)];
      if (auto it = m.find(u); it != m.end()) return {acc + it->second.first, it->second.second};
      acc += fail_[static_cast<std::size_t>(s)].second;
      s = fail_[static_cast<std::size_t>(s)].first;
    }
    return {kInfinity, kNoState};
  }

 private:
  const WeightedFst* fst_;
  std::vector<std::unordered_map<Label, std::pair<Weight, StateId>>> explicit_;
  std::vector<std::pair<StateId, Weight>> fail_;
};

/// Lexicon arcs indexed by input label.
class LexiconIndex {
 public:
  explicit LexiconIndex(const WeightedFst& lex) : fst_(&lex) {
    const auto n = lex.num_states();
    offsets_.assign(n + 1, 0);
    for (StateId s = 0; s < static_cast<StateId>(n); ++s) {
      offsets_[static_cast<std::size_t>(s) + 1] = offsets_[static_cast<std::size_t>(s)] + lex.arcs(s).size();
    }
    arcs_.reserve(offsets_.back());
    for (StateId s = 0; s < static_cast<StateId>(n); ++s) {
      const auto b = arcs_.size();
      arcs_.insert(arcs_.end(), lex.arcs(s).begin(), lex.arcs(s).end());
      std::stable_sort(arcs_.begin() + static_cast<std::ptrdiff_t>(b), arcs_.end(),
                       [](const Arc& x, const Arc& y) { return x.ilabel < y.ilabel; });
    }
    // Fewest input symbols from each state to a final state (0-1 BFS on the
    // reversed arcs).
    std::vector<std::vector<std::pair<StateId, int>>> rev(n);
    for (StateId s = 0; s < static_cast<StateId>(n); ++s) {
      for (const auto& a : lex.arcs(s)) rev[static_cast<std::size_t>(a.next)].push_back({s, a.ilabel != kEpsilon});
    }
    to_final_.assign(n, kUnreachable);
    std::deque<StateId> queue;
    for (StateId s = 0; s < static_cast<StateId>(n); ++s) {
      if (lex.is_final(s)) {
        to_final_[static_cast<std::size_t>(s)] = 0;
        queue.push_back(s);
      }
    }
    while (!queue.empty()) {
      const StateId s = queue.front();
      queue.pop_front();
      const int d = to_final_[static_cast<std::size_t>(s)];
      for (const auto& [p, w] : rev[static_cast<std::size_t>(s)]) {
        if (d + w >= to_final_[static_cast<std::size_t>(p)]) continue;
        to_final_[static_cast<std::size_t>(p)] = d + w;
        if (w) {
          queue.push_back(p);
        } else {
          queue.push_front(p);
        }
      }
    }
  }

  static constexpr int kUnreachable = std::numeric_limits<int>::max();

  const WeightedFst& fst() const { return *fst_; }

  /// Minimum number of input symbols needed to finish a word from `s`.
  int symbols_to_final(StateId s) const { return to_final_[static_cast<std::size_t>(s)]; }

  std::span<const Arc> matching(StateId s, Label l) const {
    const auto b = arcs_.begin() + static_cast<std::ptrdiff_t>(offsets_[static_cast<std::size_t>(s)]);
    const auto e = arcs_.begin() + static_cast<std::ptrdiff_t>(offsets_[static_cast<std::size_t>(s) + 1]);
    auto [lo, hi] = std::equal_range(b, e, Arc{l, 0, 0, 0}, [](const Arc& x, const Arc& y) { return x.ilabel < y.ilabel; });
    return {arcs_.data() + (lo - arcs_.begin()), static_cast<std::size_t>(hi - lo)};
  }

 private:
  const WeightedFst* fst_;
  std::vector<std::size_t> offsets_;
  std::vector<Arc> arcs_;
  std::vector<int> to_final_;
};

/// Holds indexes over immutable models; `decode` keeps all search state local,
/// so one Decoder may serve concurrent callers.
class Decoder {
 public:
  Decoder(const WeightedFst& lexicon_fst, const WeightedFst& lm_fst, const SubwordLexicon& units, DecoderConfig cfg)
      : lex_(lexicon_fst), lm_(lm_fst), units_(&units), cfg_(cfg) {
    cfg_.validate();
    if (!detail::has_start(lexicon_fst) || !detail::has_start(lm_fst)) throw Error("Decoder: models need start states");
  }

  const DecoderConfig& config() const { return cfg_; }
  const LmTransitions& lm() const { return lm_; }

  /// n-best distinct surfaces for one lattice, LM context given by `lm_start`
  /// (the LM start state when kNoState). The LM's sentence-end weight is not
  /// applied. Returns an empty list when nothing survives.
  CandidateList decode(const WeightedFst& lattice, StateId lm_start = kNoState) const {
    if (!detail::has_start(lattice)) return {};
    const auto order = topological_order(lattice);
    const Label sep = static_cast<Label>(cfg_.separator);
    const StateId lex_start = lex_.fst().start();
    const double lambda = cfg_.lm_weight;

    // Most key symbols any path from each lattice state can still supply;
    // hypotheses needing more can never finish their word and are dropped
    // before pruning so they do not occupy beam slots.
    std::vector<int> keys_left(lattice.num_states(), -1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      auto& k = keys_left[static_cast<std::size_t>(*it)];
      if (lattice.is_final(*it)) k = 0;
      for (const auto& a : lattice.arcs(*it)) {
        const int d = keys_left[static_cast<std::size_t>(a.next)];
        if (d < 0) continue;
        k = std::max(k, d + (a.ilabel != kEpsilon && a.ilabel != sep));
      }
    }

    std::vector<std::vector<Hyp>> pending(lattice.num_states());
    pending[static_cast<std::size_t>(lattice.start())].push_back(
        {0.0, 0.0, lex_start, lm_start == kNoState ? lm_.start() : lm_start, std::make_shared<std::string>(), {}});

    CandidateList out;
    for (StateId s : order) {
      auto hyps = closure(std::move(pending[static_cast<std::size_t>(s)]));
      const int left = keys_left[static_cast<std::size_t>(s)];
      std::erase_if(hyps, [&](const Hyp& h) { return lex_.symbols_to_final(h.lex) > left; });
      if (hyps.empty()) continue;
      if (cfg_.beam != 0 && hyps.size() > cfg_.beam) {
        std::partial_sort(hyps.begin(), hyps.begin() + static_cast<std::ptrdiff_t>(cfg_.beam), hyps.end(),
                          [&](const Hyp& a, const Hyp& b) {
                            if (a.total(lambda) != b.total(lambda)) return a.total(lambda) < b.total(lambda);
                            return *a.surface < *b.surface;
                          });
        hyps.resize(cfg_.beam);
      }
      if (lattice.is_final(s)) {
        for (const auto& h : hyps) {
          const Weight lf = lex_.fst().final_weight(h.lex);
          if (!std::isfinite(lf)) continue;
          Candidate c;
          c.spatial = h.spatial + lf + lattice.final_weight(s);
          c.lm = h.lm;
          c.total = c.spatial + lambda * c.lm;
          c.units = h.units;
          c.lm_state = h.lm_state;
          c.words = split_surface(*h.surface);
          out.push_back(std::move(c));
        }
      }
      for (const auto& a : lattice.arcs(s)) {
        auto& dst = pending[static_cast<std::size_t>(a.next)];
        for (const auto& h : hyps) {
          if (a.ilabel == kEpsilon) {
            Hyp n = h;
            n.spatial += a.weight;
            dst.push_back(std::move(n));
          } else if (a.ilabel == sep) {
            const Weight lf = lex_.fst().final_weight(h.lex);
            if (!std::isfinite(lf)) continue;
            Hyp n = h;
            n.spatial += a.weight + lf;
            n.lex = lex_start;
            n.surface = std::make_shared<std::string>(*h.surface + " ");
            dst.push_back(std::move(n));
          } else {
            for (const auto& la : lex_.matching(h.lex, a.ilabel)) {
              Hyp n = h;
              n.spatial += a.weight + la.weight;
              n.lex = la.next;
              if (la.olabel != kEpsilon && !emit(n, la.olabel)) continue;
              dst.push_back(std::move(n));
            }
          }
        }
      }
    }
    // Merge by surface, keeping the best.
    sort_candidates(out);
    CandidateList merged;
    std::unordered_map<std::string, bool> seen;
    for (auto& c : out) {
      if (!seen.emplace(c.text(), true).second) continue;
      merged.push_back(std::move(c));
      if (merged.size() == cfg_.nbest) break;
    }
    return merged;
  }

 private:
  struct Hyp {
    Weight spatial, lm;
    StateId lex, lm_state;
    std::shared_ptr<std::string> surface;
    std::vector<UnitId> units;

    Weight total(double lambda) const { return spatial + lambda * lm; }
  };

  static std::vector<std::string> split_surface(const std::string& s) {
    std::vector<std::string> words(1);
    for (char ch : s) {
      if (ch == ' ') {
        words.emplace_back();
      } else {
        words.back() += ch;
      }
    }
    return words;
  }

  bool emit(Hyp& h, Label unit) const {
    const auto [w, next] = lm_.step(h.lm_state, unit);
    if (!std::isfinite(w)) return false;
    h.lm += w;
    h.lm_state = next;
    h.units.push_back(unit);
    h.surface = std::make_shared<std::string>(*h.surface + units_->unit(unit).text);
    return true;
  }

  /// Expands lexicon epsilon-input arcs in cost order and keeps, per
  /// (lexicon, LM) state pair, the best hypothesis for each of up to nbest
  /// distinct surfaces.
  std::vector<Hyp> closure(std::vector<Hyp> in) const {
    const double lambda = cfg_.lm_weight;
    std::vector<Hyp> arena;
    std::vector<bool> alive;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> slots;
    using Item = std::pair<Weight, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;

    auto insert = [&](Hyp h) {
      const auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(h.lex)) << 32) |
                       static_cast<std::uint32_t>(h.lm_state);
      auto& slot = slots[key];
      const Weight t = h.total(lambda);
      std::size_t worst = slot.size();
      for (std::size_t i = 0; i < slot.size(); ++i) {
        const auto& o = arena[slot[i]];
        if (*o.surface == *h.surface) {
          if (o.total(lambda) <= t) return;
          alive[slot[i]] = false;
          slot.erase(slot.begin() + static_cast<std::ptrdiff_t>(i));
          worst = slot.size();
          break;
        }
      }
      if (slot.size() >= cfg_.nbest) {
        worst = 0;
        for (std::size_t i = 1; i < slot.size(); ++i) {
          if (arena[slot[i]].total(lambda) > arena[slot[worst]].total(lambda)) worst = i;
        }
        if (arena[slot[worst]].total(lambda) <= t) return;
        alive[slot[worst]] = false;
        slot.erase(slot.begin() + static_cast<std::ptrdiff_t>(worst));
      }
      arena.push_back(std::move(h));
      alive.push_back(true);
      slot.push_back(arena.size() - 1);
      queue.emplace(t, arena.size() - 1);
    };

    for (auto& h : in) insert(std::move(h));
    while (!queue.empty()) {
      const auto [t, idx] = queue.top();
      queue.pop();
      if (!alive[idx]) continue;
      const Hyp h = arena[idx];
      for (const auto& la : lex_.matching(h.lex, kEpsilon)) {
        Hyp n = h;
        n.spatial += la.weight;
        n.lex = la.next;
        if (la.olabel != kEpsilon && !emit(n, la.olabel)) continue;
        insert(std::move(n));
      }
    }
    std::vector<Hyp> out;
    for (std::size_t i = 0; i < arena.size(); ++i) {
      if (alive[i]) out.push_back(std::move(arena[i]));
    }
    return out;
  }

  LexiconIndex lex_;
  LmTransitions lm_;
  const SubwordLexicon* units_;
  DecoderConfig cfg_;
};

/// Compound-undoing heuristic for word-based decoders. Candidates are scanned
/// in order of spatial score. A two-word candidate that qualifies yields one
/// extra candidate, the concatenation, with the spatial score lowered by the
/// boost; a candidate of three or more words ends the scan with no change.
///   generic: the first two-word candidate ends the scan; it qualifies when
///            both words are lower-case.
///   german:  a two-word candidate qualifies when both words are capitalized
///            (the second is lower-cased in the concatenation). Other two-word
///            candidates are scanned past only while every candidate ranked
///            above them is a case variant of the spatially best one.
inline CandidateList rewrite_compound_candidates(CandidateList cands, const DecoderConfig& cfg) {
  if (cfg.rewriter == RewriterMode::Off || cands.empty()) return cands;
  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cands[a].spatial < cands[b].spatial; });

  auto insert = [&](const Candidate& src, std::string joined) {
    Candidate c;
    c.words = {std::move(joined)};
    c.spatial = src.spatial - cfg.rewriter_boost;
    c.lm = src.lm;
    c.total = c.spatial + cfg.lm_weight * c.lm;
    c.source = Candidate::Source::Rewritten;
    c.units = src.units;
    c.lm_state = src.lm_state;
    cands.push_back(std::move(c));
    sort_candidates(cands);
    return cands;
  };

  const std::string best_folded = utf8::lower(cands[order[0]].text());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& c = cands[order[pos]];
    if (c.words.size() == 1) continue;
    if (c.words.size() >= 3) return cands;
    const auto& w0 = c.words[0];
    const auto& w1 = c.words[1];
    if (cfg.rewriter == RewriterMode::Generic) {
      if (utf8::is_all_lower(w0) && utf8::is_all_lower(w1)) return insert(c, w0 + w1);
      return cands;
    }
    if (utf8::is_capitalized(w0) && utf8::is_capitalized(w1)) return insert(c, w0 + utf8::lower_first(w1));
    for (std::size_t j = 0; j <= pos; ++j) {
      if (utf8::lower(cands[order[j]].text()) != best_folded) return cands;
    }
  }
  return cands;
}

/// Everything needed to decode: layout, tap model, LM and lexicon transducers.
struct KeyboardModels {
  KeyboardLayout layout;
  TapModel tap;
  BackoffLm lm;
  LmFst lm_fst;
  WeightedFst lexicon_fst;

  static KeyboardModels build(BackoffLm lm, KeyboardLayout layout, TapModel tap) {
    KeyboardModels m;
    m.layout = std::move(layout);
    m.tap = tap;
    m.lm = std::move(lm);
    m.lm_fst = lm_to_fst(m.lm);
    const std::vector<UnitId> specials{kBosId, kEosId, kUnkId};
    m.lexicon_fst = build_lexicon_fst(m.lm.vocab, specials);
    return m;
  }
};

struct SentenceResult {
  std::vector<std::string> words;
  /// Per typed word: the candidate list after rewriting.
  std::vector<CandidateList> candidates;
};

/// Candidates for one typed word given the LM state of its left context:
/// search, the nearest-key literal (fallback or competitor, per config), then
/// the compound rewriter. Never empty.
inline CandidateList decode_word(const TouchSequence& taps, const KeyboardModels& models, const Decoder& decoder,
                                 StateId lm_state) {
  if (taps.empty()) throw Error("decode_word: no taps");
  const auto& cfg = decoder.config();
  const auto lattice = build_input_lattice(models.layout, models.tap, taps);
  auto cands = decoder.decode(lattice, lm_state);
  if (std::isfinite(cfg.literal_penalty) || cands.empty()) {
    Candidate lit;
    lit.words = {literal_string(models.layout, models.tap, taps)};
    lit.spatial = literal_cost(models.layout, models.tap, taps);
    lit.lm = std::isfinite(cfg.literal_penalty) ? cfg.literal_penalty : 0.0;
    lit.total = lit.spatial + cfg.lm_weight * lit.lm;
    lit.source = Candidate::Source::Literal;
    const auto unk = decoder.lm().step(lm_state, kUnkId);
    lit.lm_state = unk.second != kNoState ? unk.second : decoder.lm().start();
    bool dup = false;
    for (const auto& c : cands) dup = dup || c.text() == lit.text();
    if (!dup) {
      cands.push_back(std::move(lit));
      sort_candidates(cands);
    }
  }
  return rewrite_compound_candidates(std::move(cands), cfg);
}

/// LM state after committed context words, from the LM start. Each word is
/// read through its cheapest unit analysis with exactly that surface; words
/// without one advance on <UNK>.
inline StateId context_state(const Decoder& decoder, std::span<const std::string> words) {
  StateId s = decoder.lm().start();
  for (const auto& w : words) {
    if (!utf8::is_valid(w) || w.empty()) throw Error("context word is not valid UTF-8 text");
    const auto chain = make_string_acceptor(key_labels(w));
    StateId next = kNoState;
    for (const auto& c : decoder.decode(chain, s)) {
      if (c.words.size() == 1 && c.words[0] == w) {
        next = c.lm_state;
        break;
      }
    }
    if (next == kNoState) {
      const auto unk = decoder.lm().step(s, kUnkId);
      next = unk.second != kNoState ? unk.second : decoder.lm().start();
    }
    s = next;
  }
  return s;
}

/// Decodes word by word, carrying the LM state of each chosen candidate into
/// the next word.
inline SentenceResult decode_sentence(const std::vector<TouchSequence>& words, const KeyboardModels& models,
                                      const Decoder& decoder, StateId lm_state = kNoState) {
  SentenceResult res;
  if (lm_state == kNoState) lm_state = decoder.lm().start();
  for (const auto& taps : words) {
    if (taps.empty()) continue;
    auto cands = decode_word(taps, models, decoder, lm_state);
    const auto& top = cands.front();
    res.words.insert(res.words.end(), top.words.begin(), top.words.end());
    lm_state = top.lm_state;
    res.candidates.push_back(std::move(cands));
  }
  return res;
}

}  // namespace swkb
