#pragma once

// A small weighted finite-state kernel over negative natural-log weights.
//
// Path weights combine by addition. Search (shortest_paths, decoding) uses the
// tropical convention (min over alternative paths); probability-mass checks
// use log_add. Label 0 is epsilon. Label kFailureLabel marks back-off arcs
// that may only be taken when no explicit arc matches (see compose()).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "swkb/error.hpp"

namespace swkb {

using Label = std::int32_t;
using StateId = std::int32_t;
/// Negative natural-log probability; +inf is probability zero.
using Weight = double;

inline constexpr Label kEpsilon = 0;
inline constexpr Label kFailureLabel = -1;
inline constexpr StateId kNoState = -1;
inline constexpr Weight kInfinity = std::numeric_limits<Weight>::infinity();

/// -log(exp(-a) + exp(-b))
inline Weight log_add(Weight a, Weight b) {
  if (a == kInfinity) return b;
  if (b == kInfinity) return a;
  const Weight lo = std::min(a, b);
  return lo - std::log1p(std::exp(lo - std::max(a, b)));
}

struct Arc {
  Label ilabel = kEpsilon;
  Label olabel = kEpsilon;
  Weight weight = 0.0;
  StateId next = kNoState;
};

class WeightedFst {
 public:
  StateId add_state() {
    arcs_.emplace_back();
    final_.push_back(kInfinity);
    return static_cast<StateId>(arcs_.size() - 1);
  }

  void reserve_states(std::size_t n) {
    arcs_.reserve(n);
    final_.reserve(n);
  }

  void set_start(StateId s) {
    check_state(s);
    start_ = s;
  }
  StateId start() const { return start_; }

  void add_arc(StateId from, Arc arc) {
    check_state(from);
    arcs_[static_cast<std::size_t>(from)].push_back(arc);
  }
  void add_arc(StateId from, Label il, Label ol, Weight w, StateId to) { add_arc(from, Arc{il, ol, w, to}); }

  void set_final(StateId s, Weight w = 0.0) {
    check_state(s);
    final_[static_cast<std::size_t>(s)] = w;
  }
  Weight final_weight(StateId s) const { return final_[static_cast<std::size_t>(s)]; }
  bool is_final(StateId s) const { return final_weight(s) != kInfinity; }

  std::size_t num_states() const { return arcs_.size(); }
  std::size_t num_arcs() const {
    std::size_t n = 0;
    for (const auto& a : arcs_) n += a.size();
    return n;
  }
  std::span<const Arc> arcs(StateId s) const { return arcs_[static_cast<std::size_t>(s)]; }
  std::vector<Arc>& mutable_arcs(StateId s) { return arcs_[static_cast<std::size_t>(s)]; }

  bool is_acceptor() const {
    for (const auto& v : arcs_) {
      for (const auto& a : v) {
        if (a.ilabel != a.olabel) return false;
      }
    }
    return true;
  }

  /// Structural check: start and all arc targets are valid states, weights are
  /// not NaN. Throws swkb::Error.
  void audit() const {
    const auto n = static_cast<StateId>(num_states());
    if (n > 0 && (start_ < 0 || start_ >= n)) throw Error("fst audit: invalid start state");
    for (StateId s = 0; s < n; ++s) {
      if (std::isnan(final_weight(s))) throw Error("fst audit: NaN final weight");
      for (const auto& a : arcs(s)) {
        if (a.next < 0 || a.next >= n) {
          throw Error("fst audit: arc from state " + std::to_string(s) + " targets invalid state " +
                      std::to_string(a.next));
        }
        if (std::isnan(a.weight)) throw Error("fst audit: NaN arc weight");
      }
    }
  }

 private:
  void check_state(StateId s) const {
    if (s < 0 || static_cast<std::size_t>(s) >= arcs_.size()) {
      throw Error("WeightedFst: invalid state " + std::to_string(s));
    }
  }

  std::vector<std::vector<Arc>> arcs_;
  std::vector<Weight> final_;
  StateId start_ = kNoState;
};

// ---------------------------------------------------------------------------
// Elementary machines

/// Accepts nothing.
inline WeightedFst make_empty_fst() {
  WeightedFst f;
  f.set_start(f.add_state());
  return f;
}

/// Accepts exactly the empty string.
inline WeightedFst make_epsilon_fst(Weight w = 0.0) {
  WeightedFst f;
  const auto s = f.add_state();
  f.set_start(s);
  f.set_final(s, w);
  return f;
}

/// Linear acceptor for `labels`.
inline WeightedFst make_string_acceptor(std::span<const Label> labels, Weight w = 0.0) {
  WeightedFst f;
  StateId cur = f.add_state();
  f.set_start(cur);
  for (Label l : labels) {
    const auto nxt = f.add_state();
    f.add_arc(cur, l, l, 0.0, nxt);
    cur = nxt;
  }
  f.set_final(cur, w);
  return f;
}

inline WeightedFst make_string_acceptor(std::initializer_list<Label> labels, Weight w = 0.0) {
  return make_string_acceptor(std::span<const Label>(labels.begin(), labels.size()), w);
}

/// Linear transducer mapping `in` to `out` (the shorter side is padded with epsilons).
inline WeightedFst make_string_transducer(std::span<const Label> in, std::span<const Label> out,
                                          Weight w = 0.0) {
  WeightedFst f;
  StateId cur = f.add_state();
  f.set_start(cur);
  const std::size_t n = std::max(in.size(), out.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto nxt = f.add_state();
    f.add_arc(cur, i < in.size() ? in[i] : kEpsilon, i < out.size() ? out[i] : kEpsilon, 0.0, nxt);
    cur = nxt;
  }
  f.set_final(cur, w);
  return f;
}

namespace detail {

/// Copies all states of `src` into `dst`; returns the state offset.
inline StateId append_states(WeightedFst& dst, const WeightedFst& src) {
  const auto offset = static_cast<StateId>(dst.num_states());
  dst.reserve_states(dst.num_states() + src.num_states());
  for (std::size_t i = 0; i < src.num_states(); ++i) dst.add_state();
  for (StateId s = 0; s < static_cast<StateId>(src.num_states()); ++s) {
    for (Arc a : src.arcs(s)) {
      a.next += offset;
      dst.add_arc(s + offset, a);
    }
    if (src.is_final(s)) dst.set_final(s + offset, src.final_weight(s));
  }
  return offset;
}

inline bool has_start(const WeightedFst& f) { return f.num_states() > 0 && f.start() != kNoState; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Rational operations

/// Accepts what either operand accepts; a string accepted by both keeps both
/// paths (tropical search then takes the min, log mass adds them).
inline WeightedFst fst_union(const WeightedFst& a, const WeightedFst& b) {
  WeightedFst out;
  const auto s = out.add_state();
  out.set_start(s);
  for (const WeightedFst* part : {&a, &b}) {
    if (!detail::has_start(*part)) continue;
    const auto off = detail::append_states(out, *part);
    out.add_arc(s, kEpsilon, kEpsilon, 0.0, part->start() + off);
  }
  return out;
}

inline WeightedFst concat(const WeightedFst& a, const WeightedFst& b) {
  if (!detail::has_start(a) || !detail::has_start(b)) return make_empty_fst();
  WeightedFst out;
  const auto off_a = detail::append_states(out, a);
  const auto off_b = detail::append_states(out, b);
  out.set_start(a.start() + off_a);
  for (StateId s = 0; s < static_cast<StateId>(a.num_states()); ++s) {
    if (!a.is_final(s)) continue;
    out.add_arc(s + off_a, kEpsilon, kEpsilon, a.final_weight(s), b.start() + off_b);
    out.set_final(s + off_a, kInfinity);
  }
  return out;
}

/// Kleene star.
inline WeightedFst closure(const WeightedFst& a) {
  WeightedFst out;
  const auto s = out.add_state();
  out.set_start(s);
  out.set_final(s, 0.0);
  if (!detail::has_start(a)) return out;
  const auto off = detail::append_states(out, a);
  const auto inner_start = a.start() + off;
  out.add_arc(s, kEpsilon, kEpsilon, 0.0, inner_start);
  for (StateId q = 0; q < static_cast<StateId>(a.num_states()); ++q) {
    if (a.is_final(q)) out.add_arc(q + off, kEpsilon, kEpsilon, a.final_weight(q), inner_start);
  }
  return out;
}

/// Removes states that are not both reachable from the start and able to
/// reach a final state. An FST with an empty language becomes make_empty_fst().
inline WeightedFst connect(const WeightedFst& a) {
  if (!detail::has_start(a)) return make_empty_fst();
  const auto n = a.num_states();
  std::vector<char> acc(n, 0), coacc(n, 0);
  std::vector<StateId> stack{a.start()};
  acc[static_cast<std::size_t>(a.start())] = 1;
  std::vector<std::vector<StateId>> rev(n);
  while (!stack.empty()) {
    const auto s = stack.back();
    stack.pop_back();
    for (const auto& arc : a.arcs(s)) {
      if (arc.weight == kInfinity) continue;
      rev[static_cast<std::size_t>(arc.next)].push_back(s);
      if (!acc[static_cast<std::size_t>(arc.next)]) {
        acc[static_cast<std::size_t>(arc.next)] = 1;
        stack.push_back(arc.next);
      }
    }
  }
  for (StateId s = 0; s < static_cast<StateId>(n); ++s) {
    if (acc[static_cast<std::size_t>(s)] && a.is_final(s)) {
      coacc[static_cast<std::size_t>(s)] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const auto s = stack.back();
    stack.pop_back();
    for (StateId p : rev[static_cast<std::size_t>(s)]) {
      if (!coacc[static_cast<std::size_t>(p)]) {
        coacc[static_cast<std::size_t>(p)] = 1;
        stack.push_back(p);
      }
    }
  }
  if (!coacc[static_cast<std::size_t>(a.start())]) return make_empty_fst();
  std::vector<StateId> remap(n, kNoState);
  WeightedFst out;
  // Start state first keeps dumps readable.
  remap[static_cast<std::size_t>(a.start())] = out.add_state();
  for (StateId s = 0; s < static_cast<StateId>(n); ++s) {
    if (s != a.start() && acc[static_cast<std::size_t>(s)] && coacc[static_cast<std::size_t>(s)]) {
      remap[static_cast<std::size_t>(s)] = out.add_state();
    }
  }
  out.set_start(remap[static_cast<std::size_t>(a.start())]);
  for (StateId s = 0; s < static_cast<StateId>(n); ++s) {
    const auto ns = remap[static_cast<std::size_t>(s)];
    if (ns == kNoState) continue;
    for (Arc arc : a.arcs(s)) {
      const auto nt = remap[static_cast<std::size_t>(arc.next)];
      if (nt == kNoState || arc.weight == kInfinity) continue;
      arc.next = nt;
      out.add_arc(ns, arc);
    }
    if (a.is_final(s)) out.set_final(ns, a.final_weight(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Composition

struct ComposeOptions {
  /// Treat kFailureLabel arcs of the right operand as failure transitions:
  /// taken only when the current state has no arc matching the label.
  bool right_failure_arcs = false;
  /// Drop states that cannot reach a final state.
  bool connect_result = true;
};

/// Weighted composition a ∘ b (a's output labels meet b's input labels).
///
/// Epsilons are handled with the standard three-state sequencing filter: after
/// the left side moves alone on an output epsilon, the right side may not move
/// alone on an input epsilon before a real match, and vice versa, so every
/// pair of alignments yields exactly one composed path.
inline WeightedFst compose(const WeightedFst& a, const WeightedFst& b, const ComposeOptions& opts = {}) {
  if (!detail::has_start(a) || !detail::has_start(b)) return make_empty_fst();

  // Sorted input-label index over b for matching.
  struct Indexed {
    std::vector<Arc> by_label;  // sorted by ilabel
    std::vector<Arc> eps;       // ilabel == 0
    const Arc* failure = nullptr;
  };
  std::vector<Indexed> bidx(b.num_states());
  for (StateId s = 0; s < static_cast<StateId>(b.num_states()); ++s) {
    auto& ix = bidx[static_cast<std::size_t>(s)];
    for (const auto& arc : b.arcs(s)) {
      if (arc.ilabel == kEpsilon) {
        ix.eps.push_back(arc);
      } else {
        ix.by_label.push_back(arc);
      }
    }
    std::stable_sort(ix.by_label.begin(), ix.by_label.end(),
                     [](const Arc& x, const Arc& y) { return x.ilabel < y.ilabel; });
    if (opts.right_failure_arcs) {
      for (const auto& arc : ix.by_label) {
        if (arc.ilabel == kFailureLabel) {
          ix.failure = &arc;
          break;
        }
      }
    }
  }

  using Triple = std::tuple<StateId, StateId, int>;
  std::map<Triple, StateId> ids;
  std::vector<Triple> queue;
  WeightedFst out;
  auto get = [&](StateId qa, StateId qb, int f) {
    const Triple t{qa, qb, f};
    auto it = ids.find(t);
    if (it != ids.end()) return it->second;
    const auto s = out.add_state();
    ids.emplace(t, s);
    queue.push_back(t);
    return s;
  };
  out.set_start(get(a.start(), b.start(), 0));

  auto matches = [&](StateId qb, Label l) {
    const auto& v = bidx[static_cast<std::size_t>(qb)].by_label;
    return std::equal_range(v.begin(), v.end(), Arc{l, 0, 0.0, 0},
                            [](const Arc& x, const Arc& y) { return x.ilabel < y.ilabel; });
  };

  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const auto [qa, qb, f] = queue[qi];
    const StateId src = ids.at(queue[qi]);
    if (a.is_final(qa) && b.is_final(qb)) out.set_final(src, a.final_weight(qa) + b.final_weight(qb));

    for (const auto& arc_a : a.arcs(qa)) {
      if (arc_a.olabel == kEpsilon) {
        // Left moves alone.
        if (f != 1) {
          out.add_arc(src, arc_a.ilabel, kEpsilon, arc_a.weight, get(arc_a.next, qb, 2));
        }
        // Both move on epsilon.
        if (f == 0) {
          for (const auto& arc_b : bidx[static_cast<std::size_t>(qb)].eps) {
            out.add_arc(src, arc_a.ilabel, arc_b.olabel, arc_a.weight + arc_b.weight,
                        get(arc_a.next, arc_b.next, 0));
          }
        }
        continue;
      }
      // Real label: match, following failure arcs of b when allowed.
      StateId cur_b = qb;
      Weight fail_w = 0.0;
      for (int guard = 0; guard < 1 << 20; ++guard) {
        auto [lo, hi] = matches(cur_b, arc_a.olabel);
        if (lo != hi) {
          for (auto it = lo; it != hi; ++it) {
            out.add_arc(src, arc_a.ilabel, it->olabel, arc_a.weight + fail_w + it->weight,
                        get(arc_a.next, it->next, 0));
          }
          break;
        }
        const Arc* fail = bidx[static_cast<std::size_t>(cur_b)].failure;
        if (!opts.right_failure_arcs || fail == nullptr) break;
        fail_w += fail->weight;
        cur_b = fail->next;
      }
    }
    // Right moves alone on input epsilon.
    if (f != 2) {
      for (const auto& arc_b : bidx[static_cast<std::size_t>(qb)].eps) {
        out.add_arc(src, kEpsilon, arc_b.olabel, arc_b.weight, get(qa, arc_b.next, 1));
      }
    }
  }
  return opts.connect_result ? connect(out) : out;
}

/// Swaps input to output side: the result accepts the output language.
inline WeightedFst project_output(const WeightedFst& a) {
  WeightedFst out = a;
  for (StateId s = 0; s < static_cast<StateId>(out.num_states()); ++s) {
    for (auto& arc : out.mutable_arcs(s)) arc.ilabel = arc.olabel;
  }
  return out;
}

inline WeightedFst project_input(const WeightedFst& a) {
  WeightedFst out = a;
  for (StateId s = 0; s < static_cast<StateId>(out.num_states()); ++s) {
    for (auto& arc : out.mutable_arcs(s)) arc.olabel = arc.ilabel;
  }
  return out;
}

/// Identity transducer over `labels` (single state, one loop per label).
inline WeightedFst make_identity(std::span<const Label> labels) {
  WeightedFst f;
  const auto s = f.add_state();
  f.set_start(s);
  f.set_final(s, 0.0);
  for (Label l : labels) f.add_arc(s, l, l, 0.0, s);
  return f;
}

// ---------------------------------------------------------------------------
// Search

struct Path {
  std::vector<Label> ilabels;  // epsilons removed
  std::vector<Label> olabels;  // epsilons removed
  Weight weight = 0.0;
};

inline bool has_cycle(const WeightedFst& a) {
  const auto n = a.num_states();
  std::vector<int> color(n, 0);
  for (StateId root = 0; root < static_cast<StateId>(n); ++root) {
    if (color[static_cast<std::size_t>(root)] != 0) continue;
    std::vector<std::pair<StateId, std::size_t>> stack{{root, 0}};
    color[static_cast<std::size_t>(root)] = 1;
    while (!stack.empty()) {
      auto& [s, i] = stack.back();
      const auto arcs = a.arcs(s);
      if (i < arcs.size()) {
        const auto t = arcs[i++].next;
        if (color[static_cast<std::size_t>(t)] == 1) return true;
        if (color[static_cast<std::size_t>(t)] == 0) {
          color[static_cast<std::size_t>(t)] = 1;
          stack.emplace_back(t, 0);
        }
      } else {
        color[static_cast<std::size_t>(s)] = 2;
        stack.pop_back();
      }
    }
  }
  return false;
}

/// Up to `n` accepting paths in nondecreasing weight (tropical). Each state is
/// expanded at most `n` times, which is exact for nonnegative weights. Equal
/// weights are ordered lexicographically by output labels. With an unbounded
/// `n` (SIZE_MAX) the FST must be acyclic.
inline std::vector<Path> shortest_paths(const WeightedFst& a, std::size_t n) {
  std::vector<Path> result;
  if (!detail::has_start(a) || n == 0) return result;
  if (n == std::numeric_limits<std::size_t>::max() && has_cycle(a)) {
    throw Error("shortest_paths: unbounded path count requested on a cyclic FST");
  }
  struct Node {
    StateId state;  // kNoState marks a completed path
    Weight weight;
    std::int64_t parent;
    Label il, ol;
  };
  std::vector<Node> nodes;
  using Entry = std::tuple<Weight, std::uint64_t, std::int64_t>;  // weight, seq, node
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  std::uint64_t seq = 0;
  nodes.push_back({a.start(), 0.0, -1, kEpsilon, kEpsilon});
  pq.emplace(0.0, seq++, 0);
  std::vector<std::size_t> pops(a.num_states(), 0);

  auto labels_of = [&](std::int64_t idx, Path& p) {
    std::vector<Label> il, ol;
    for (auto i = idx; i >= 0; i = nodes[static_cast<std::size_t>(i)].parent) {
      const auto& nd = nodes[static_cast<std::size_t>(i)];
      if (nd.il != kEpsilon) il.push_back(nd.il);
      if (nd.ol != kEpsilon) ol.push_back(nd.ol);
    }
    p.ilabels.assign(il.rbegin(), il.rend());
    p.olabels.assign(ol.rbegin(), ol.rend());
  };

  while (!pq.empty() && result.size() < n) {
    const auto [w, sq, idx] = pq.top();
    pq.pop();
    const Node node = nodes[static_cast<std::size_t>(idx)];
    if (node.state == kNoState) {
      Path p;
      p.weight = w;
      labels_of(idx, p);
      result.push_back(std::move(p));
      continue;
    }
    auto& cnt = pops[static_cast<std::size_t>(node.state)];
    if (cnt >= n) continue;
    ++cnt;
    if (a.is_final(node.state)) {
      nodes.push_back({kNoState, w + a.final_weight(node.state), idx, kEpsilon, kEpsilon});
      pq.emplace(w + a.final_weight(node.state), seq++, static_cast<std::int64_t>(nodes.size() - 1));
    }
    for (const auto& arc : a.arcs(node.state)) {
      if (arc.weight == kInfinity) continue;
      nodes.push_back({arc.next, w + arc.weight, idx, arc.ilabel, arc.olabel});
      pq.emplace(w + arc.weight, seq++, static_cast<std::int64_t>(nodes.size() - 1));
    }
  }
  std::stable_sort(result.begin(), result.end(), [](const Path& x, const Path& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    return x.olabels < y.olabels;
  });
  return result;
}

/// States in topological order; throws on cycles.
inline std::vector<StateId> topological_order(const WeightedFst& a) {
  const auto n = a.num_states();
  std::vector<std::size_t> indeg(n, 0);
  for (StateId s = 0; s < static_cast<StateId>(n); ++s) {
    for (const auto& arc : a.arcs(s)) ++indeg[static_cast<std::size_t>(arc.next)];
  }
  std::vector<StateId> order, ready;
  for (StateId s = static_cast<StateId>(n) - 1; s >= 0; --s) {
    if (indeg[static_cast<std::size_t>(s)] == 0) ready.push_back(s);
  }
  while (!ready.empty()) {
    const auto s = ready.back();
    ready.pop_back();
    order.push_back(s);
    for (const auto& arc : a.arcs(s)) {
      if (--indeg[static_cast<std::size_t>(arc.next)] == 0) ready.push_back(arc.next);
    }
  }
  if (order.size() != n) throw Error("topological_order: FST is cyclic");
  return order;
}

// ---------------------------------------------------------------------------
// Text format: `src dst ilabel olabel weight` per arc and `state weight` per
// final state, tab separated. The first line's source is the start state.

namespace detail {

inline std::string format_weight(Weight w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", w);
  return buf;
}

}  // namespace detail

inline void write_text(std::ostream& out, const WeightedFst& a) {
  if (!detail::has_start(a)) return;
  std::vector<StateId> order;
  order.push_back(a.start());
  for (StateId s = 0; s < static_cast<StateId>(a.num_states()); ++s) {
    if (s != a.start()) order.push_back(s);
  }
  bool wrote_any = false;
  for (StateId s : order) {
    for (const auto& arc : a.arcs(s)) {
      out << s << '\t' << arc.next << '\t' << arc.ilabel << '\t' << arc.olabel << '\t'
          << detail::format_weight(arc.weight) << '\n';
      wrote_any = true;
    }
    if (a.is_final(s)) {
      out << s << '\t' << detail::format_weight(a.final_weight(s)) << '\n';
      wrote_any = true;
    }
  }
  if (!wrote_any) out << a.start() << '\t' << "inf" << '\n';
}

inline WeightedFst read_text(std::istream& in) {
  WeightedFst f;
  auto ensure = [&](StateId s) {
    while (static_cast<StateId>(f.num_states()) <= s) f.add_state();
  };
  std::string line;
  std::size_t lineno = 0;
  bool have_start = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, '\t')) fields.push_back(tok);
    try {
      if (fields.size() == 5) {
        const auto src = static_cast<StateId>(std::stol(fields[0]));
        const auto dst = static_cast<StateId>(std::stol(fields[1]));
        if (src < 0 || dst < 0) throw ParseError("negative state id", lineno);
        ensure(std::max(src, dst));
        if (!have_start) {
          f.set_start(src);
          have_start = true;
        }
        f.add_arc(src, static_cast<Label>(std::stol(fields[2])), static_cast<Label>(std::stol(fields[3])),
                  std::stod(fields[4]), dst);
      } else if (fields.size() == 2) {
        const auto s = static_cast<StateId>(std::stol(fields[0]));
        if (s < 0) throw ParseError("negative state id", lineno);
        ensure(s);
        if (!have_start) {
          f.set_start(s);
          have_start = true;
        }
        const double w = fields[1] == "inf" ? kInfinity : std::stod(fields[1]);
        if (w != kInfinity) f.set_final(s, w);
      } else {
        throw ParseError("expected 2 or 5 tab-separated fields", lineno);
      }
    } catch (const std::logic_error&) {
      throw ParseError("malformed number", lineno);
    }
  }
  if (!have_start) return make_empty_fst();
  return f;
}

}  // namespace swkb
