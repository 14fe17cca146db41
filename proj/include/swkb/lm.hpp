#pragma once

// Back-off n-gram models over binding-typed units.
//
// Estimation is absolute discounting with explicit back-off weights. The
// empty context is then split into one state per binding class [·^c] whose
// distribution is the unigram restricted to units with left class c, and all
// back-off weights are recomputed so that every state distributes exactly
// unit mass over the continuations that can legally follow it.
//
// All probabilities are stored as natural-log costs (-ln p). Files use log10.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "swkb/corpus.hpp"
#include "swkb/error.hpp"
#include "swkb/fst.hpp"
#include "swkb/morpho.hpp"

namespace swkb {

inline constexpr std::string_view kSentenceStart = "<s>";
inline constexpr std::string_view kSentenceEnd = "</s>";

using Ngram = std::vector<UnitId>;

/// A vocabulary whose first three ids are <s>, </s> and <UNK>.
inline SubwordLexicon make_lm_vocabulary() {
  SubwordLexicon v;
  v.add(kSentenceStart, {0, 0});
  v.add(kSentenceEnd, {0, 0});
  v.add(kUnknownToken, {0, 0});
  return v;
}

inline constexpr UnitId kBosId = 1;
inline constexpr UnitId kEosId = 2;
inline constexpr UnitId kUnkId = 3;

struct NgramCounts {
  int order = 3;
  SubwordLexicon vocab = make_lm_vocabulary();
  std::map<Ngram, std::uint64_t> counts;
};

/// Counts every n-gram of length 1..order over `<s> tokens </s>`. Ids are
/// assigned in order of first appearance after the three specials.
inline NgramCounts count_ngrams(std::span<const AnnotatedSentence> corpus, int order = 3) {
  if (order < 1) throw Error("count_ngrams: order must be >= 1");
  NgramCounts c;
  c.order = order;
  std::vector<UnitId> ids;
  for (const auto& sentence : corpus) {
    ids.assign(1, kBosId);
    for (const auto& t : sentence) ids.push_back(c.vocab.add(t));
    ids.push_back(kEosId);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t k = 1; k <= static_cast<std::size_t>(order) && i + k <= ids.size(); ++k) {
        ++c.counts[Ngram(ids.begin() + static_cast<std::ptrdiff_t>(i), ids.begin() + static_cast<std::ptrdiff_t>(i + k))];
      }
    }
  }
  return c;
}

struct PruningConfig {
  std::size_t max_unigrams = 5000;
  std::size_t max_ngrams = 50000;
  /// Minimum count per order (index 0 = unigrams); missing entries mean 1.
  std::vector<std::uint64_t> count_cutoffs;

  void validate() const {
    if (max_unigrams > max_ngrams) throw Error("PruningConfig: max_unigrams exceeds max_ngrams");
  }
  std::uint64_t cutoff(std::size_t k) const {
    return k >= 1 && k <= count_cutoffs.size() ? std::max<std::uint64_t>(1, count_cutoffs[k - 1]) : 1;
  }
};

struct BackoffLm {
  int order = 3;
  SubwordLexicon vocab = make_lm_vocabulary();
  bool normalized = false;
  /// -ln p1(u), indexed by id; +inf for <s> and unseen specials.
  std::vector<Weight> unigram;
  /// -ln p(u|h) for explicit grams of length >= 2.
  std::map<Ngram, Weight> prob;
  /// -ln bow(h) for every context h (a gram with explicit continuations).
  std::map<Ngram, Weight> bow;
  /// -ln p(u | [·^c]).
  std::map<BindingClass, std::map<UnitId, Weight>> class_unigram;

  std::optional<UnitId> find(const AnnotatedToken& t) const { return vocab.find(t.text, t.binding); }
  BindingClass left(UnitId u) const { return vocab.unit(u).binding.left; }
  BindingClass right(UnitId u) const { return vocab.unit(u).binding.right; }
  Weight unigram_cost(UnitId u) const {
    return u >= 1 && static_cast<std::size_t>(u) < unigram.size() ? unigram[static_cast<std::size_t>(u)] : kInfinity;
  }
  bool is_context(const Ngram& h) const { return bow.count(h) > 0; }
  /// Units that may be predicted: finite unigram, excluding <s>.
  std::vector<UnitId> predictable() const {
    std::vector<UnitId> out;
    for (const auto& u : vocab.units()) {
      if (u.id != kBosId && std::isfinite(unigram_cost(u.id))) out.push_back(u.id);
    }
    return out;
  }
};

namespace detail {

inline Weight neglog(double p) { return p > 0 ? -std::log(p) : kInfinity; }
inline double prob_of(Weight w) { return std::exp(-w); }

/// Failure-semantics cost of `u` after history [begin, end). The empty context
/// uses class_unigram[cls] when `use_classes`, otherwise the plain unigram.
inline Weight cond_cost(const BackoffLm& lm, const UnitId* begin, const UnitId* end, UnitId u, bool use_classes,
                        BindingClass cls) {
  const std::size_t max_ctx = static_cast<std::size_t>(std::max(lm.order - 1, 0));
  if (static_cast<std::size_t>(end - begin) > max_ctx) begin = end - max_ctx;
  Weight acc = 0.0;
  Ngram g;
  for (const UnitId* b = begin; b != end; ++b) {
    g.assign(b, end);
    auto bit = lm.bow.find(g);
    if (bit == lm.bow.end()) continue;  // not a context: no grams, bow 1
    g.push_back(u);
    if (auto pit = lm.prob.find(g); pit != lm.prob.end()) return acc + pit->second;
    acc += bit->second;
  }
  if (!use_classes) return acc + lm.unigram_cost(u);
  auto cit = lm.class_unigram.find(cls);
  if (cit == lm.class_unigram.end()) return kInfinity;
  auto uit = cit->second.find(u);
  return uit == cit->second.end() ? kInfinity : acc + uit->second;
}

/// Sets bow(h) so that explicit + backed-off mass over `admissible` is one.
/// When the explicit grams already cover all lower-order mass they are
/// rescaled to sum to one and the back-off weight is 1.
inline void fit_backoff(BackoffLm& lm, const Ngram& h, bool use_classes,
                        BindingClass cls, const std::map<UnitId, Weight*>& explicit_grams) {
  double num = 1.0, den = 1.0, explicit_mass = 0.0;
  const UnitId* lo_b = h.data() + 1;
  const UnitId* lo_e = h.data() + h.size();
  for (const auto& [u, w] : explicit_grams) {
    explicit_mass += prob_of(*w);
    den -= prob_of(cond_cost(lm, lo_b, lo_e, u, use_classes, cls));
  }
  num -= explicit_mass;
  if (den <= 1e-12 || num <= 1e-15) {
    for (auto& [u, w] : explicit_grams) *w = neglog(prob_of(*w) / explicit_mass);
    lm.bow[h] = 0.0;
    return;
  }
  lm.bow[h] = neglog(num / den);
}

/// Contexts grouped with their explicit continuations, shortest first.
inline std::vector<std::pair<Ngram, std::map<UnitId, Weight*>>> contexts_by_length(BackoffLm& lm) {
  std::map<Ngram, std::map<UnitId, Weight*>> grouped;
  for (auto& [g, w] : lm.prob) grouped[Ngram(g.begin(), g.end() - 1)][g.back()] = &w;
  std::vector<std::pair<Ngram, std::map<UnitId, Weight*>>> out(grouped.begin(), grouped.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first.size() < b.first.size(); });
  return out;
}

}  // namespace detail

/// Absolute-discounting back-off model, normalized over the whole vocabulary
/// but not yet split by binding class. class_unigram holds the plain unigram
/// restricted to each left class (which is what an unsplit model assigns).
inline BackoffLm estimate_lm(const NgramCounts& counts, const PruningConfig& pruning = {}, double discount = 0.4) {
  if (!(discount > 0.0 && discount < 1.0)) throw Error("estimate_lm: discount must lie in (0,1)");
  pruning.validate();
  if (counts.counts.empty()) throw Error("estimate_lm: empty counts");

  // Unigram selection: cutoff, then frequency cap. Specials are always kept.
  std::vector<std::pair<std::uint64_t, UnitId>> uni;
  for (const auto& [g, c] : counts.counts) {
    if (g.size() != 1 || g[0] <= kUnkId) continue;
    if (c >= pruning.cutoff(1)) uni.emplace_back(c, g[0]);
  }
  std::sort(uni.begin(), uni.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  if (uni.size() > pruning.max_unigrams) uni.resize(pruning.max_unigrams);
  std::vector<UnitId> kept_old{kBosId, kEosId, kUnkId};
  for (const auto& [c, id] : uni) kept_old.push_back(id);
  std::sort(kept_old.begin() + 3, kept_old.end());

  BackoffLm lm;
  lm.order = counts.order;
  std::unordered_map<UnitId, UnitId> remap;
  for (UnitId old : kept_old) remap[old] = lm.vocab.add(counts.vocab.unit(old).text, counts.vocab.unit(old).binding);

  auto count_of = [&](const Ngram& g) {
    auto it = counts.counts.find(g);
    return it == counts.counts.end() ? std::uint64_t{0} : it->second;
  };

  // Unigram distribution over kept units (never <s>).
  lm.unigram.assign(lm.vocab.size() + 1, kInfinity);
  double total = 0;
  for (UnitId old : kept_old) {
    if (old != kBosId) total += static_cast<double>(count_of({old}));
  }
  if (total <= 0) throw Error("estimate_lm: no predictable tokens");
  for (UnitId old : kept_old) {
    if (old == kBosId) continue;
    lm.unigram[static_cast<std::size_t>(remap[old])] = detail::neglog(static_cast<double>(count_of({old})) / total);
  }

  // Higher-order selection: cutoffs, then a rank cap with prefix closure.
  struct Cand {
    std::uint64_t count;
    Ngram old_ids;
  };
  std::vector<Cand> cands;
  for (const auto& [g, c] : counts.counts) {
    if (g.size() < 2) continue;
    if (c < pruning.cutoff(g.size())) continue;
    if (!std::all_of(g.begin(), g.end(), [&](UnitId u) { return remap.count(u); })) continue;
    cands.push_back({c, g});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.old_ids.size() != b.old_ids.size()) return a.old_ids.size() < b.old_ids.size();
    return a.old_ids < b.old_ids;
  });
  const std::size_t budget = pruning.max_ngrams > uni.size() ? pruning.max_ngrams - uni.size() : 0;
  std::set<Ngram> kept;
  for (const auto& c : cands) {
    if (kept.size() >= budget) break;
    if (c.old_ids.size() > 2 && !kept.count(Ngram(c.old_ids.begin(), c.old_ids.end() - 1))) continue;
    kept.insert(c.old_ids);
  }

  // Continuation totals from the unpruned counts.
  std::map<Ngram, double> ctx_total;
  for (const auto& [g, c] : counts.counts) {
    if (g.size() >= 2) ctx_total[Ngram(g.begin(), g.end() - 1)] += static_cast<double>(c);
  }
  for (const auto& g : kept) {
    Ngram h(g.begin(), g.end() - 1);
    Ngram ng;
    for (UnitId u : g) ng.push_back(remap[u]);
    lm.prob[ng] = detail::neglog((static_cast<double>(count_of(g)) - discount) / ctx_total[h]);
  }

  // Back-off weights against the unsplit lower-order model.
  for (auto& [h, grams] : detail::contexts_by_length(lm)) detail::fit_backoff(lm, h, false, 0, grams);

  for (const auto& u : lm.vocab.units()) {
    const Weight w = lm.unigram_cost(u.id);
    if (std::isfinite(w)) lm.class_unigram[u.binding.left][u.id] = w;
  }
  return lm;
}

/// Splits the empty context into per-class states [·^c] with
/// p(u|[·^c]) = p1(u) / sum over left(u') = c of p1(u'). With
/// `recompute_backoff`, every back-off weight is then refitted bottom-up
/// against the admissible continuations of its context; without it only the
/// empty-context arcs are renormalized.
inline BackoffLm normalize_backoff_by_binding_class(BackoffLm lm, bool recompute_backoff = true) {
  std::map<BindingClass, double> z;
  for (UnitId u : lm.predictable()) z[lm.left(u)] += detail::prob_of(lm.unigram_cost(u));

  // Classes that some context or unit can leave us in must have support.
  std::set<BindingClass> needed{0};
  for (UnitId u : lm.predictable()) needed.insert(lm.right(u));
  for (BindingClass c : needed) {
    if (z[c] <= 0) throw Error("normalize_backoff_by_binding_class: binding class " + std::to_string(c) +
                               " has no unigram support");
  }
  lm.class_unigram.clear();
  for (UnitId u : lm.predictable()) {
    const auto c = lm.left(u);
    lm.class_unigram[c][u] = detail::neglog(detail::prob_of(lm.unigram_cost(u)) / z[c]);
  }
  if (recompute_backoff) {
    for (auto& [h, grams] : detail::contexts_by_length(lm)) detail::fit_backoff(lm, h, true, lm.right(h.back()), grams);
  }
  lm.normalized = true;
  return lm;
}

/// -ln P(u | history) with failure semantics. The empty context is the class
/// state of the history's last right class (class 0 for an empty history).
inline Weight conditional_cost(const BackoffLm& lm, std::span<const UnitId> history, UnitId u) {
  if (!lm.vocab.contains(u)) return kInfinity;
  const BindingClass cls = history.empty() ? 0 : lm.right(history.back());
  return detail::cond_cost(lm, history.data(), history.data() + history.size(), u, true, cls);
}

/// Total cost of `tokens` after `<s>`. Include </s> explicitly to score the
/// sentence end. Unknown ids or unsupported continuations give +inf.
inline Weight score_sequence(const BackoffLm& lm, std::span<const UnitId> tokens) {
  std::vector<UnitId> hist{kBosId};
  Weight total = 0.0;
  for (UnitId u : tokens) {
    total += conditional_cost(lm, hist, u);
    if (!std::isfinite(total)) return kInfinity;
    hist.push_back(u);
  }
  return total;
}

inline Weight score_sequence(const BackoffLm& lm, std::span<const AnnotatedToken> tokens) {
  std::vector<UnitId> ids;
  for (const auto& t : tokens) {
    auto id = lm.find(t);
    if (!id) return kInfinity;
    ids.push_back(*id);
  }
  return score_sequence(lm, ids);
}

// ---------------------------------------------------------------------------
// FST form

struct LmFst {
  WeightedFst fst;
  /// Context of each state; empty for the class states.
  std::vector<Ngram> context;
  /// Right class of each state's last token, or the class of a class state.
  std::vector<BindingClass> state_class;
  /// Class state ids indexed by class.
  std::vector<StateId> class_state;

  std::map<Ngram, StateId> index;
  int order = 1;

  /// Longest-suffix context state of `seq`, or kNoState.
  StateId context_state(const Ngram& seq) const {
    const std::size_t max_ctx = static_cast<std::size_t>(std::max(order - 1, 0));
    for (std::size_t k = std::min(max_ctx, seq.size()); k >= 1; --k) {
      if (auto it = index.find(Ngram(seq.end() - static_cast<std::ptrdiff_t>(k), seq.end())); it != index.end()) {
        return it->second;
      }
    }
    return kNoState;
  }
};

/// One state per context plus one per binding class. Word arcs carry the unit
/// id on both sides; back-off arcs carry kFailureLabel and must be read with
/// failure semantics. The sentence end is the final weight.
inline LmFst lm_to_fst(const BackoffLm& lm) {
  LmFst out;
  out.order = lm.order;
  auto& index = out.index;
  for (const auto& [h, w] : lm.bow) {
    index.emplace(h, out.fst.add_state());
    out.context.push_back(h);
    out.state_class.push_back(lm.right(h.back()));
  }
  const auto nclass = lm.vocab.max_class() + 1;
  for (BindingClass c = 0; c < nclass; ++c) {
    out.class_state.push_back(out.fst.add_state());
    out.context.emplace_back();
    out.state_class.push_back(c);
  }
  auto dest = [&](const Ngram& seq) {
    const auto s = out.context_state(seq);
    return s != kNoState ? s : out.class_state[lm.right(seq.back())];
  };
  const auto start = index.count({kBosId}) ? index.at({kBosId}) : out.class_state[0];
  out.fst.set_start(start);

  for (const auto& [g, w] : lm.prob) {
    if (g.back() == kEosId) continue;
    const Ngram h(g.begin(), g.end() - 1);
    out.fst.add_arc(index.at(h), g.back(), g.back(), w, dest(g));
  }
  for (const auto& [h, w] : lm.bow) {
    Ngram lower(h.begin() + 1, h.end());
    const auto s = lower.empty() ? kNoState : out.context_state(lower);
    out.fst.add_arc(index.at(h), kFailureLabel, kFailureLabel, w,
                    s != kNoState ? s : out.class_state[lm.right(h.back())]);
  }
  for (const auto& [c, dist] : lm.class_unigram) {
    if (c >= nclass) continue;
    for (const auto& [u, w] : dist) {
      if (u == kEosId) continue;
      out.fst.add_arc(out.class_state[c], u, u, w, dest({u}));
    }
  }
  for (StateId s = 0; s < static_cast<StateId>(out.fst.num_states()); ++s) {
    const auto& h = out.context[static_cast<std::size_t>(s)];
    const Weight f = h.empty() ? (out.state_class[static_cast<std::size_t>(s)] == 0
                                      ? detail::cond_cost(lm, nullptr, nullptr, kEosId, true, 0)
                                      : kInfinity)
                               : detail::cond_cost(lm, h.data(), h.data() + h.size(), kEosId, true,
                                                   out.state_class[static_cast<std::size_t>(s)]);
    if (std::isfinite(f)) out.fst.set_final(s, f);
  }
  return out;
}

/// Cost of `u` from FST state `s`, following failure arcs.
inline Weight fst_transition_cost(const WeightedFst& f, StateId s, Label u, StateId* next = nullptr) {
  Weight acc = 0.0;
  while (s != kNoState) {
    StateId fail = kNoState;
    Weight fail_w = 0.0;
    for (const auto& a : f.arcs(s)) {
      if (a.ilabel == u) {
        if (next) *next = a.next;
        return acc + a.weight;
      }
      if (a.ilabel == kFailureLabel) {
        fail = a.next;
        fail_w = a.weight;
      }
    }
    acc += fail_w;
    s = fail;
  }
  return kInfinity;
}

struct MassReport {
  double max_error = 0.0;
  StateId worst_state = kNoState;
  /// States whose mass deviates by more than the tolerance.
  std::vector<StateId> violations;
};

/// Sum over the admissible continuations of every state (units whose left
/// class equals the state's class, plus the sentence end for class 0).
inline MassReport check_admissible_mass(const BackoffLm& lm, const LmFst& f, double tolerance = 1e-9) {
  std::map<BindingClass, std::vector<UnitId>> admissible;
  for (UnitId u : lm.predictable()) {
    if (u != kEosId) admissible[lm.left(u)].push_back(u);
  }
  MassReport rep;
  for (StateId s = 0; s < static_cast<StateId>(f.fst.num_states()); ++s) {
    const auto c = f.state_class[static_cast<std::size_t>(s)];
    double mass = 0.0;
    for (UnitId u : admissible[c]) mass += detail::prob_of(fst_transition_cost(f.fst, s, u));
    mass += detail::prob_of(f.fst.final_weight(s));
    const double err = std::abs(mass - 1.0);
    if (err > rep.max_error) {
      rep.max_error = err;
      rep.worst_state = s;
    }
    if (err > tolerance) rep.violations.push_back(s);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline constexpr double kLn10 = 2.302585092994045684;
inline constexpr double kLog10Floor = -99.0;

inline std::string format_log10(Weight cost) {
  if (!std::isfinite(cost)) return "-99";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", -cost / kLn10);
  return buf;
}

inline Weight parse_log10(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::logic_error&) {
    throw ParseError("bad number '" + s + "'", line);
  }
  if (used != s.size()) throw ParseError("bad number '" + s + "'", line);
  if (v <= kLog10Floor) return kInfinity;
  return -v * kLn10;
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t b = 0;
  while (true) {
    const auto t = line.find('\t', b);
    out.push_back(line.substr(b, t == std::string::npos ? std::string::npos : t - b));
    if (t == std::string::npos) break;
    b = t + 1;
  }
  return out;
}

}  // namespace detail

/// ARPA-style text. Sections `\k-grams:` hold `log10 p<TAB>tokens[<TAB>log10 bow]`
/// (the back-off field is present for every gram of order < N); the
/// `\class-unigrams:` section holds `class<TAB>log10 p<TAB>token`.
inline void write_lm(std::ostream& out, const BackoffLm& lm) {
  std::map<std::size_t, std::vector<std::pair<Ngram, Weight>>> by_order;
  for (const auto& u : lm.vocab.units()) by_order[1].emplace_back(Ngram{u.id}, lm.unigram_cost(u.id));
  for (const auto& [g, w] : lm.prob) by_order[g.size()].emplace_back(g, w);
  auto tokens = [&](const Ngram& g) {
    std::string s;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (i) s += ' ';
      s += render_annotated_token(lm.vocab.unit(g[i]).text, lm.left(g[i]), lm.right(g[i]));
    }
    return s;
  };
  out << "\\data\\\norder=" << lm.order << "\nnormalized=" << (lm.normalized ? 1 : 0) << '\n';
  for (int k = 1; k <= lm.order; ++k) out << "ngram " << k << '=' << by_order[static_cast<std::size_t>(k)].size() << '\n';
  for (int k = 1; k <= lm.order; ++k) {
    out << "\n\\" << k << "-grams:\n";
    for (const auto& [g, w] : by_order[static_cast<std::size_t>(k)]) {
      out << detail::format_log10(w) << '\t' << tokens(g);
      if (k < lm.order) {
        auto it = lm.bow.find(g);
        out << '\t' << (it == lm.bow.end() ? std::string("0") : detail::format_log10(it->second));
      }
      out << '\n';
    }
  }
  out << "\n\\class-unigrams:\n";
  for (const auto& [c, dist] : lm.class_unigram) {
    for (const auto& [u, w] : dist) out << c << '\t' << detail::format_log10(w) << '\t' << tokens({u}) << '\n';
  }
  out << "\n\\end\\\n";
}

inline BackoffLm read_lm(std::istream& in) {
  BackoffLm lm;
  lm.vocab = SubwordLexicon{};
  std::string line;
  std::size_t lineno = 0;
  std::string section;
  std::map<int, std::size_t> declared;
  std::map<Ngram, Weight> bows;
  bool saw_data = false, saw_end = false;

  auto lookup = [&](const std::string& text, std::size_t ln, bool create) -> UnitId {
    AnnotatedToken t;
    try {
      t = parse_annotated_token(text);
    } catch (const ParseError& e) {
      throw ParseError(e.message(), ln, e.position());
    }
    if (auto id = lm.vocab.find(t.text, t.binding)) return *id;
    if (!create) throw ParseError("unknown token '" + text + "'", ln);
    return lm.vocab.add(t);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (saw_end) throw ParseError("content after \\end\\", lineno);
    if (line == "\\data\\") {
      saw_data = true;
      section = "data";
      continue;
    }
    if (line == "\\end\\") {
      saw_end = true;
      continue;
    }
    if (line.front() == '\\') {
      if (!saw_data) throw ParseError("missing \\data\\ header", lineno);
      section = line;
      continue;
    }
    if (section == "data") {
      if (line.rfind("order=", 0) == 0) {
        lm.order = std::atoi(line.c_str() + 6);
        if (lm.order < 1) throw ParseError("bad order", lineno);
      } else if (line.rfind("normalized=", 0) == 0) {
        lm.normalized = line.substr(11) == "1";
      } else if (line.rfind("ngram ", 0) == 0) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("bad ngram count line", lineno);
        declared[std::atoi(line.c_str() + 6)] = std::stoul(line.substr(eq + 1));
      } else {
        throw ParseError("unexpected header line", lineno);
      }
      continue;
    }
    const auto f = detail::split_tabs(line);
    if (section == "\\class-unigrams:") {
      if (f.size() != 3) throw ParseError("expected class<TAB>logprob<TAB>token", lineno);
      const auto c = detail::parse_class(f[0], 0);
      lm.class_unigram[c][lookup(f[2], lineno, false)] = detail::parse_log10(f[1], lineno);
      continue;
    }
    int k = 0;
    if (std::sscanf(section.c_str(), "\\%d-grams:", &k) != 1 || k < 1 || k > lm.order) {
      throw ParseError("line outside a known section", lineno);
    }
    const std::size_t want = k < lm.order ? 3 : 2;
    if (f.size() < want) throw ParseError(k < lm.order ? "missing back-off field" : "missing field", lineno);
    if (f.size() > want) throw ParseError("too many fields", lineno);
    const Weight w = detail::parse_log10(f[0], lineno);
    Ngram g;
    for (const auto& tok : split_whitespace(f[1])) g.push_back(lookup(tok, lineno, k == 1));
    if (g.size() != static_cast<std::size_t>(k)) throw ParseError("gram length does not match section", lineno);
    if (k == 1) {
      if (lm.unigram.size() <= static_cast<std::size_t>(g[0])) lm.unigram.resize(static_cast<std::size_t>(g[0]) + 1, kInfinity);
      lm.unigram[static_cast<std::size_t>(g[0])] = w;
    } else {
      lm.prob[g] = w;
    }
    if (want == 3) bows[g] = detail::parse_log10(f[2], lineno);
  }
  if (!saw_data || !saw_end) throw ParseError("truncated model file", lineno);
  if (lm.vocab.size() < 3 || lm.vocab.unit(kBosId).text != kSentenceStart || lm.vocab.unit(kEosId).text != kSentenceEnd ||
      lm.vocab.unit(kUnkId).text != kUnknownToken) {
    throw ParseError("the first three unigrams must be <s>, </s>, <UNK>", lineno);
  }
  lm.unigram.resize(lm.vocab.size() + 1, kInfinity);
  // Contexts are exactly the grams with explicit continuations.
  for (const auto& [g, w] : lm.prob) {
    Ngram h(g.begin(), g.end() - 1);
    auto it = bows.find(h);
    if (it == bows.end()) throw ParseError("gram without a back-off entry for its context", lineno);
    lm.bow[h] = it->second;
  }
  return lm;
}

}  // namespace swkb
