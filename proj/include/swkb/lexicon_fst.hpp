#pragma once

// Lexicon transducers built from binding-typed subword units.
//
//   R(l,r)  acceptor over unit ids with binding type exactly (l,r)
//   W       acceptor of every unit sequence spelling exactly one word,
//           obtained by eliminating binding classes N..1:
//             R'(l,r) = R(l,r) + R(l,n) R(n,n)* R(n,r)
//   L_s     key-sequence -> single unit id transducer (a trie)
//   L_w     (L_s L_s*) ∘ W, key sequences -> complete single-word unit sequences

#include <map>
#include <span>
#include <unordered_set>
#include <vector>

#include "swkb/fst.hpp"
#include "swkb/morpho.hpp"
#include "swkb/utf8.hpp"

namespace swkb {

/// Key label of a character: the lower-cased code point.
inline Label key_label(char32_t c) { return static_cast<Label>(utf8::to_lower(c)); }

inline std::vector<Label> key_labels(std::string_view text) {
  auto cps = utf8::decode(text);
  if (!cps) throw Error("key_labels: invalid UTF-8");
  std::vector<Label> out;
  out.reserve(cps->size());
  for (char32_t c : *cps) out.push_back(key_label(c));
  return out;
}

inline WeightedFst build_binding_acceptor(const SubwordLexicon& lexicon, BindingClass l, BindingClass r) {
  if (l > lexicon.max_class() || r > lexicon.max_class()) {
    throw Error("build_binding_acceptor: class exceeds lexicon maximum");
  }
  WeightedFst f;
  const auto s = f.add_state();
  f.set_start(s);
  StateId fin = kNoState;
  for (const auto& u : lexicon.units()) {
    if (u.binding.left != l || u.binding.right != r) continue;
    if (fin == kNoState) {
      fin = f.add_state();
      f.set_final(fin, 0.0);
    }
    f.add_arc(s, u.id, u.id, 0.0, fin);
  }
  return f;
}

namespace detail {

inline bool is_empty_language(const WeightedFst& f) {
  const auto c = connect(f);
  return c.num_states() <= 1 && !c.is_final(c.start()) && c.arcs(c.start()).empty();
}

}  // namespace detail

/// W: accepts exactly the unit-id sequences whose bindings form a complete
/// word. Built by the class-elimination recurrence from n = N down to 1.
inline WeightedFst build_word_acceptor(const SubwordLexicon& lexicon) {
  if (lexicon.empty()) throw Error("build_word_acceptor: empty lexicon");
  const auto N = lexicon.max_class();
  const std::size_t dim = N + 1;
  std::vector<std::vector<WeightedFst>> R(dim, std::vector<WeightedFst>(dim));
  std::vector<std::vector<bool>> empty(dim, std::vector<bool>(dim));
  for (BindingClass l = 0; l <= N; ++l) {
    for (BindingClass r = 0; r <= N; ++r) {
      R[l][r] = build_binding_acceptor(lexicon, l, r);
      empty[l][r] = R[l][r].arcs(R[l][r].start()).empty();
    }
  }
  for (BindingClass n = N; n >= 1; --n) {
    const WeightedFst star = closure(R[n][n]);
    for (BindingClass l = 0; l < n; ++l) {
      for (BindingClass r = 0; r < n; ++r) {
        if (empty[l][n] || empty[n][r]) continue;
        WeightedFst through = concat(R[l][n], concat(star, R[n][r]));
        R[l][r] = empty[l][r] ? connect(through) : connect(fst_union(R[l][r], through));
        empty[l][r] = detail::is_empty_language(R[l][r]);
      }
    }
  }
  return connect(R[0][0]);
}

/// L_s: a trie over key labels whose leaves emit the unit id on an
/// epsilon-input arc into the single final state. Units listed in `exclude`
/// (sentence markers, the unknown token) are left out.
inline WeightedFst build_subword_key_fst(const SubwordLexicon& lexicon, std::span<const UnitId> exclude = {}) {
  const std::unordered_set<UnitId> skip(exclude.begin(), exclude.end());
  WeightedFst f;
  const auto root = f.add_state();
  f.set_start(root);
  const auto fin = f.add_state();
  f.set_final(fin, 0.0);
  std::vector<std::map<Label, StateId>> children(2);
  for (const auto& u : lexicon.units()) {
    if (skip.count(u.id)) continue;
    StateId cur = root;
    for (Label l : key_labels(u.text)) {
      auto& ch = children[static_cast<std::size_t>(cur)];
      auto it = ch.find(l);
      if (it == ch.end()) {
        const auto nxt = f.add_state();
        children.emplace_back();
        children[static_cast<std::size_t>(cur)].emplace(l, nxt);
        f.add_arc(cur, l, kEpsilon, 0.0, nxt);
        cur = nxt;
      } else {
        cur = it->second;
      }
    }
    f.add_arc(cur, kEpsilon, u.id, 0.0, fin);
  }
  return f;
}

/// L_w = (L_s L_s*) ∘ W. May be non-functional: one key sequence can map to
/// several unit sequences.
inline WeightedFst build_lexicon_fst(const WeightedFst& ls, const WeightedFst& w) {
  return compose(concat(ls, closure(ls)), w);
}

inline WeightedFst build_lexicon_fst(const SubwordLexicon& lexicon, std::span<const UnitId> exclude = {}) {
  return build_lexicon_fst(build_subword_key_fst(lexicon, exclude), build_word_acceptor(lexicon));
}

}  // namespace swkb
