#pragma once

// Word alignment, error rates and the paired simulation experiment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "swkb/corpus.hpp"
#include "swkb/decoder.hpp"
#include "swkb/error.hpp"
#include "swkb/spatial.hpp"
#include "swkb/utf8.hpp"

namespace swkb {

struct AlignmentStats {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t reference_words = 0;

  std::size_t errors() const { return substitutions + insertions + deletions; }

  AlignmentStats& operator+=(const AlignmentStats& o) {
    substitutions += o.substitutions;
    insertions += o.insertions;
    deletions += o.deletions;
    reference_words += o.reference_words;
    return *this;
  }
  friend bool operator==(const AlignmentStats&, const AlignmentStats&) = default;
};

/// Unit-cost edit distance. Among alignments of equal cost the one with the
/// most substitutions (fewest insertion/deletion pairs) is reported.
inline AlignmentStats align(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  // (cost, insertions + deletions) compared lexicographically.
  struct Cell {
    std::size_t cost = 0, indel = 0, s = 0, i = 0, d = 0;
    bool operator<(const Cell& o) const { return cost != o.cost ? cost < o.cost : indel < o.indel; }
  };
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (std::size_t j = 1; j <= m; ++j) prev[j] = {j, j, 0, j, 0};
  for (std::size_t r = 1; r <= n; ++r) {
    cur[0] = {r, r, 0, 0, r};
    for (std::size_t j = 1; j <= m; ++j) {
      Cell diag = prev[j - 1];
      if (ref[r - 1] != hyp[j - 1]) {
        ++diag.cost;
        ++diag.s;
      }
      Cell del = prev[j];
      ++del.cost, ++del.indel, ++del.d;
      Cell ins = cur[j - 1];
      ++ins.cost, ++ins.indel, ++ins.i;
      Cell best = diag;
      if (del < best) best = del;
      if (ins < best) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  const Cell& c = prev[m];
  return {c.s, c.i, c.d, n};
}

inline double wer(const AlignmentStats& s) {
  if (s.reference_words == 0) throw Error("wer: no reference words");
  return static_cast<double>(s.errors()) / static_cast<double>(s.reference_words);
}

inline double insertion_rate(const AlignmentStats& s) {
  if (s.reference_words == 0) throw Error("insertion_rate: no reference words");
  return static_cast<double>(s.insertions) / static_cast<double>(s.reference_words);
}

/// (exp - base) / base; NaN when the baseline is zero and the experiment is not.
inline double relative_delta(double base, double exp) {
  if (base == 0.0) return exp == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  return (exp - base) / base;
}

struct ExperimentSystem {
  std::string name;
  const KeyboardModels* models = nullptr;
  DecoderConfig config;
};

struct SystemResult {
  std::string name;
  AlignmentStats stats;
  std::vector<std::string> hypotheses;  // one decoded line per test sentence
  double wer = 0, insertion_rate = 0;
  double delta_wer = 0, delta_ins = 0;  // versus the first system
};

struct ExperimentReport {
  std::vector<SystemResult> systems;
  std::size_t sentences = 0;
  /// Digest of the simulated taps every system decoded.
  std::uint64_t tap_digest = 0;
};

/// FNV-1a over the raw coordinates and word boundaries.
inline std::uint64_t digest_taps(const std::vector<std::vector<TouchSequence>>& taps) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& sentence : taps) {
    for (const auto& word : sentence) {
      for (const auto& p : word) {
        mix(&p.x, sizeof p.x);
        mix(&p.y, sizeof p.y);
        mix(&p.t, sizeof p.t);
      }
      const char sep = ' ';
      mix(&sep, 1);
    }
    const char eol = '\n';
    mix(&eol, 1);
  }
  return h;
}

/// Per-sentence simulation seed, independent of thread scheduling.
inline std::uint64_t sentence_seed(std::uint64_t seed, std::size_t i) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(i) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::vector<std::vector<TouchSequence>> simulate_test_set(const std::vector<std::string>& sentences,
                                                                 const KeyboardLayout& layout, const TapModel& tap,
                                                                 std::uint64_t seed) {
  std::vector<std::vector<TouchSequence>> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    out.push_back(simulate_sentence(layout, tap, split_whitespace(sentences[i]), sentence_seed(seed, i)));
  }
  return out;
}

/// Decodes the same simulated taps with every system and aligns against the
/// reference text. Sentences are spread over `threads` workers; results are
/// reduced in sentence order, so the report does not depend on scheduling.
inline ExperimentReport run_experiment(const std::vector<std::string>& sentences, const KeyboardLayout& layout,
                                       const TapModel& tap, const std::vector<ExperimentSystem>& systems,
                                       std::uint64_t seed, unsigned threads = 0) {
  if (systems.empty()) throw Error("run_experiment: no systems");
  const auto taps = simulate_test_set(sentences, layout, tap, seed);
  ExperimentReport rep;
  rep.sentences = sentences.size();
  rep.tap_digest = digest_taps(taps);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(sentences.size(), 1)));

  for (const auto& sys : systems) {
    if (!sys.models) throw Error("run_experiment: system '" + sys.name + "' has no models");
    const Decoder decoder(sys.models->lexicon_fst, sys.models->lm_fst.fst, sys.models->lm.vocab, sys.config);
    std::vector<AlignmentStats> per(sentences.size());
    std::vector<std::string> hyps(sentences.size());
    auto work = [&](unsigned t) {
      for (std::size_t i = t; i < sentences.size(); i += threads) {
        const auto out = decode_sentence(taps[i], *sys.models, decoder);
        per[i] = align(split_whitespace(sentences[i]), out.words);
        std::string line;
        for (const auto& w : out.words) line += (line.empty() ? "" : " ") + w;
        hyps[i] = std::move(line);
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work, t);
    work(0);
    for (auto& th : pool) th.join();

    SystemResult r;
    r.name = sys.name;
    for (const auto& s : per) r.stats += s;
    r.hypotheses = std::move(hyps);
    r.wer = r.stats.reference_words ? wer(r.stats) : 0.0;
    r.insertion_rate = r.stats.reference_words ? insertion_rate(r.stats) : 0.0;
    rep.systems.push_back(std::move(r));
  }
  const auto& base = rep.systems.front();
  for (auto& r : rep.systems) {
    r.delta_wer = relative_delta(base.wer, r.wer);
    r.delta_ins = relative_delta(base.insertion_rate, r.insertion_rate);
  }
  return rep;
}

namespace detail {

inline std::string percent(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

inline std::string signed_percent(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f%%", 100.0 * v);
  return buf;
}

inline std::string pad(const std::string& s, std::size_t width, bool left_align) {
  const std::size_t len = utf8::length(s);
  if (len >= width) return s;
  const std::string fill(width - len, ' ');
  return left_align ? s + fill : fill + s;
}

}  // namespace detail

/// Aligned text table: one row per system, deltas relative to the first.
inline void write_report(std::ostream& out, const ExperimentReport& rep) {
  const std::vector<std::string> head{"System", "WER", "S", "D", "I", "Ins", "ΔWER", "ΔIns"};
  std::vector<std::vector<std::string>> rows{head};
  for (std::size_t k = 0; k < rep.systems.size(); ++k) {
    const auto& r = rep.systems[k];
    rows.push_back({r.name, detail::percent(r.wer), std::to_string(r.stats.substitutions),
                    std::to_string(r.stats.deletions), std::to_string(r.stats.insertions),
                    detail::percent(r.insertion_rate), k ? detail::signed_percent(r.delta_wer) : "-",
                    k ? detail::signed_percent(r.delta_ins) : "-"});
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], utf8::length(row[c]));
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      line += detail::pad(row[c], width[c], c == 0);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  }
  out << "sentences: " << rep.sentences;
  if (!rep.systems.empty()) out << ", reference words: " << rep.systems.front().stats.reference_words;
  out << "\n";
}

/// Machine-readable companion: system, WER, S, D, I, ΔWER, ΔIns.
inline void write_report_tsv(std::ostream& out, const ExperimentReport& rep) {
  out << "system\tWER\tS\tD\tI\tΔWER\tΔIns\n";
  char buf[64];
  auto num = [&](double v) {
    if (std::isnan(v)) return std::string("nan");
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  for (const auto& r : rep.systems) {
    out << r.name << '\t' << num(r.wer) << '\t' << r.stats.substitutions << '\t' << r.stats.deletions << '\t'
        << r.stats.insertions << '\t' << num(r.delta_wer) << '\t' << num(r.delta_ins) << '\n';
  }
}

}  // namespace swkb
