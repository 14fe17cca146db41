// Acceptance run: one PASS/FAIL line per headline requirement, each checked
// against an oracle that does not share code with the path under test.
// Exit status is nonzero when any line fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "swkb/swkb.hpp"
#include "test_support.hpp"

using namespace swkb;
namespace oracle = swkb::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* spec, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, spec, args...);
  return buf;
}

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  std::printf("[%s] %-22s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

// ---------------------------------------------------------------------------
// Binding rules

// All id sequences of length 1..max_len filtered by is_complete_word.
std::set<std::vector<Label>> complete_word_filter(const SubwordLexicon& lex, std::size_t max_len) {
  std::set<std::vector<Label>> out;
  std::vector<Label> cur;
  std::function<void()> rec = [&] {
    if (!cur.empty()) {
      std::vector<SubwordUnit> units;
      for (Label l : cur) units.push_back(lex.unit(l));
      if (is_complete_word(units)) out.insert(cur);
    }
    if (cur.size() == max_len) return;
    for (const auto& u : lex.units()) {
      cur.push_back(u.id);
      rec();
      cur.pop_back();
    }
  };
  rec();
  return out;
}

void binding_oracle() {
  const auto t0 = Clock::now();
  std::mt19937 rng(5);
  const char* texts[] = {"a", "b", "c", "d", "e", "f", "g", "h"};
  int lexica = 0, mismatches = 0;
  std::size_t words = 0;
  for (; lexica < 60; ++lexica) {
    SubwordLexicon lex;
    const std::size_t n = 1 + rng() % 8;
    while (lex.size() < n) {
      lex.add(texts[rng() % 8], {static_cast<BindingClass>(rng() % 3), static_cast<BindingClass>(rng() % 3)});
    }
    const auto got = oracle::enumerate_language(build_word_acceptor(lex), 4);
    const auto want = complete_word_filter(lex, 4);
    mismatches += got != want;
    words += want.size();
  }
  const double secs = seconds_since(t0);
  report(mismatches == 0 && lexica >= 50 && secs < 10, "binding-oracle",
         fmt("%d lexica (<=8 units, N<=2), %zu words of length <=4, %d mismatches, %.2f s (limit 10 s)", lexica,
             words, mismatches, secs));
}

void lexicon_fixture() {
  auto lex = oracle::foot_base_ball();
  const auto first = oracle::surfaces(lex, oracle::enumerate_language(build_word_acceptor(lex), 4));
  const std::set<std::string> want1{"foot", "base", "ball", "football", "baseball"};
  const auto un = lex.add("un", {0, 2});
  lex.add("usual", {2, 0});
  lex.add("happy", {2, 0});
  const auto lang = oracle::enumerate_language(build_word_acceptor(lex), 4);
  const auto second = oracle::surfaces(lex, lang);
  std::set<std::string> want2 = want1;
  want2.insert({"unusual", "unhappy"});
  const bool no_unball = lang.count({un, *lex.find("ball", {1, 0})}) == 0 && !second.count("unball");
  report(first == want1 && second == want2 && no_unball, "lexicon-fixture",
         fmt("foot/base/ball -> %zu words, +un/usual/happy -> %zu words, un+ball %s", first.size(), second.size(),
             no_unball ? "rejected" : "ACCEPTED"));
}

// ---------------------------------------------------------------------------
// LM

// Plain words and compounds; a middle part switches the junction to class 2.
std::vector<AnnotatedSentence> random_corpus(std::mt19937_64& rng, std::size_t sentences) {
  const std::vector<std::string> words{"der", "die", "und", "ist", "Haus", "Baum", "nicht"};
  const std::vector<std::string> heads{"Sommer", "Garten", "Apfel", "Winter"};
  const std::vector<std::string> mids{"haus", "tür"};
  const std::vector<std::string> tails{"tag", "zaun", "baum", "abend"};
  std::vector<AnnotatedSentence> out;
  for (std::size_t i = 0; i < sentences; ++i) {
    AnnotatedSentence s;
    const auto len = 1 + rng() % 5;
    for (std::size_t j = 0; j < len; ++j) {
      if (rng() % 3) {
        s.push_back({words[rng() % words.size()], {0, 0}});
        continue;
      }
      s.push_back({heads[rng() % heads.size()], {0, 1}});
      BindingClass join = 1;
      if (rng() % 3 == 0) {
        s.push_back({mids[rng() % mids.size()], {1, 2}});
        join = 2;
      }
      s.push_back({tails[rng() % tails.size()], {join, 0}});
    }
    out.push_back(std::move(s));
  }
  return out;
}

// Back-off cost read straight off the model tables: explicit gram, else
// bow(h) plus the cost under the shortened history; the empty history is the
// class distribution of the last right class.
Weight table_cost(const BackoffLm& lm, const Ngram& h, BindingClass empty_class, UnitId u) {
  if (h.empty()) {
    const auto c = lm.class_unigram.find(empty_class);
    if (c == lm.class_unigram.end()) return kInfinity;
    const auto it = c->second.find(u);
    return it == c->second.end() ? kInfinity : it->second;
  }
  Ngram g = h;
  g.push_back(u);
  if (const auto it = lm.prob.find(g); it != lm.prob.end()) return it->second;
  const auto b = lm.bow.find(h);
  const Weight bow = b == lm.bow.end() ? 0.0 : b->second;
  const Ngram lower(h.begin() + 1, h.end());
  return bow + table_cost(lm, lower, lower.empty() ? lm.right(h.back()) : empty_class, u);
}

struct MassCheck {
  double max_error = 0;
  std::size_t states = 0;
  std::size_t class_states = 0, class_violations = 0;
};

// Mass over admissible continuations at every context of the model and at
// every empty-context class state.
MassCheck table_mass(const BackoffLm& lm, double tol) {
  std::map<BindingClass, std::vector<UnitId>> admissible;
  for (UnitId u : lm.predictable()) {
    if (u != kEosId) admissible[lm.left(u)].push_back(u);
  }
  auto mass_at = [&](const Ngram& h, BindingClass c) {
    double m = 0;
    for (UnitId u : admissible[c]) m += std::exp(-table_cost(lm, h, c, u));
    if (c == 0) m += std::exp(-table_cost(lm, h, c, kEosId));
    return m;
  };
  MassCheck r;
  std::set<Ngram> contexts;
  for (const auto& [h, w] : lm.bow) contexts.insert(h);
  contexts.insert({kBosId});
  for (const auto& h : contexts) {
    r.max_error = std::max(r.max_error, std::abs(mass_at(h, lm.right(h.back())) - 1.0));
    ++r.states;
  }
  for (const auto& [c, units] : admissible) {
    const double err = std::abs(mass_at({}, c) - 1.0);
    r.max_error = std::max(r.max_error, err);
    ++r.states;
    ++r.class_states;
    r.class_violations += err > tol;
  }
  return r;
}

struct TrainedModel {
  BackoffLm raw, lm;
};

std::vector<TrainedModel> desk_scale_models(std::size_t& skipped) {
  std::mt19937_64 rng(31);
  std::vector<TrainedModel> out;
  skipped = 0;
  while (out.size() < 24) {
    const int order = 1 + static_cast<int>(out.size() % 3);
    const double discount = 0.2 + 0.6 * (rng() % 100) / 100.0;
    auto raw = estimate_lm(count_ngrams(random_corpus(rng, 30 + rng() % 90), order), {}, discount);
    auto lm = normalize_backoff_by_binding_class(raw);
    if (lm_to_fst(lm).fst.num_states() > 200) {
      ++skipped;
      continue;
    }
    out.push_back({std::move(raw), std::move(lm)});
  }
  return out;
}

void lm_mass(const std::vector<TrainedModel>& models) {
  double after = 0, fst_after = 0;
  std::size_t states = 0, raw_class_states = 0, raw_violations = 0, models_with_split = 0;
  for (const auto& m : models) {
    const auto a = table_mass(m.lm, 1e-9);
    after = std::max(after, a.max_error);
    states += a.states;
    fst_after = std::max(fst_after, check_admissible_mass(m.lm, lm_to_fst(m.lm)).max_error);
    const auto b = table_mass(m.raw, 1e-9);
    if (b.class_states > 1) {
      ++models_with_split;
      raw_class_states += b.class_states;
      raw_violations += b.class_violations;
    }
  }
  const bool pass = after <= 1e-9 && fst_after <= 1e-9 && models_with_split == models.size() &&
                    raw_violations == raw_class_states;
  report(pass, "lm-admissible-mass",
         fmt("%zu models, %zu states: max |mass-1| %.2g (tables), %.2g (FST); before normalization "
             "%zu/%zu class states violate",
             models.size(), states, after, fst_after, raw_violations, raw_class_states));
}

std::vector<UnitId> random_admissible(const BackoffLm& lm, std::mt19937_64& rng) {
  std::map<BindingClass, std::vector<UnitId>> by_left;
  for (UnitId u : lm.predictable()) {
    if (u != kEosId && u != kUnkId) by_left[lm.left(u)].push_back(u);
  }
  std::vector<UnitId> out;
  BindingClass c = 0;
  while (!(c == 0 && (out.size() >= 8 || (!out.empty() && rng() % 4 == 0)))) {
    const auto& pool = by_left[c];
    const UnitId u = pool[rng() % pool.size()];
    out.push_back(u);
    c = lm.right(u);
  }
  out.push_back(kEosId);
  return out;
}

void scoring_oracle(const std::vector<TrainedModel>& models) {
  std::mt19937_64 rng(8);
  double max_diff = 0;
  std::size_t sequences = 0, nonfinite = 0;
  for (const auto& m : models) {
    const auto f = lm_to_fst(m.lm);
    for (int i = 0; i < 100; ++i) {
      const auto seq = random_admissible(m.lm, rng);
      const Weight direct = score_sequence(m.lm, seq);
      const std::vector<Label> labels(seq.begin(), seq.end() - 1);
      const auto paths = shortest_paths(
          compose(make_string_acceptor(labels), f.fst, ComposeOptions{.right_failure_arcs = true}), 1);
      const Weight via_fst = paths.empty() ? kInfinity : paths[0].weight;
      Weight tables = 0;
      Ngram history{kBosId};
      for (UnitId u : seq) {
        const auto keep = std::min<std::size_t>(history.size(), static_cast<std::size_t>(m.lm.order - 1));
        const Ngram h(history.end() - static_cast<std::ptrdiff_t>(keep), history.end());
        tables += table_cost(m.lm, h, m.lm.right(history.back()), u);
        history.push_back(u);
      }
      if (!std::isfinite(direct) || !std::isfinite(via_fst)) {
        ++nonfinite;
        continue;
      }
      max_diff = std::max({max_diff, std::abs(direct - via_fst), std::abs(direct - tables)});
      ++sequences;
    }
  }
  report(max_diff <= 1e-6 && nonfinite == 0 && sequences == 100 * models.size(), "scoring-oracle",
         fmt("%zu models x 100 admissible sequences: max |score_sequence - FST| and |- tables| %.2g (tol 1e-6), "
             "%zu infinite",
             models.size(), max_diff, nonfinite));
}

// ---------------------------------------------------------------------------
// Decoder

void decoder_exactness() {
  std::mt19937_64 rng(2025);
  const auto layout = qwerty_layout();
  int compared = 0, top_mismatch = 0, empty_agree = 0, trials = 0;
  double max_diff = 0;
  std::size_t max_states = 0;
  for (; trials < 1000 && compared < 150; ++trials) {
    const auto inst = oracle::random_decoding_instance(rng, layout);
    const auto models = KeyboardModels::build(inst.lm, layout, inst.tap);
    max_states = std::max(max_states, models.lm_fst.fst.num_states());
    DecoderConfig cfg;
    cfg.beam = 0;
    cfg.nbest = 1;
    cfg.lm_weight = inst.lambda;
    const Decoder d(models.lexicon_fst, models.lm_fst.fst, models.lm.vocab, cfg);
    const auto lattice = build_input_lattice(layout, inst.tap, inst.taps);
    const auto got = d.decode(lattice);
    const auto want = oracle::brute_force_decode(lattice, models.lm, inst.lambda, 2 * inst.taps.size());
    if (want.empty()) {
      empty_agree += got.empty();
      top_mismatch += !got.empty();
      continue;
    }
    ++compared;
    if (got.empty()) {
      ++top_mismatch;
      continue;
    }
    Weight best = kInfinity;
    std::string best_text;
    for (const auto& [s, w] : want) {
      if (w < best) {
        best = w;
        best_text = s;
      }
    }
    max_diff = std::max(max_diff, std::abs(got[0].total - best));
    // Equal-cost surfaces may tie; the top must be one of the optimal ones.
    const auto it = want.find(got[0].text());
    top_mismatch += it == want.end() || std::abs(it->second - best) > 1e-6;
  }
  report(compared >= 100 && top_mismatch == 0 && max_diff <= 1e-6 && max_states <= 200, "decoder-exactness",
         fmt("%d instances (<=6 taps, <=%zu LM states) vs exhaustive enumeration: %d top mismatches, max score "
             "diff %.2g; %d more with no complete word on either side",
             compared, max_states, top_mismatch, max_diff, empty_agree));
}

Candidate cand(const std::string& text, Weight spatial, Weight lm = 1.0) {
  Candidate c;
  std::istringstream in(text);
  for (std::string w; in >> w;) c.words.push_back(w);
  c.spatial = spatial;
  c.lm = lm;
  c.total = spatial + lm;
  return c;
}

std::vector<std::string> texts(const CandidateList& l) {
  std::vector<std::string> out;
  for (const auto& c : l) out.push_back(c.text());
  return out;
}

const Candidate* find(const CandidateList& l, const std::string& t) {
  for (const auto& c : l) {
    if (c.text() == t) return &c;
  }
  return nullptr;
}

void rewriter_conformance() {
  DecoderConfig generic, german;
  generic.rewriter = RewriterMode::Generic;
  german.rewriter = RewriterMode::German;
  generic.rewriter_boost = german.rewriter_boost = 0.5;
  std::vector<std::string> failed;
  auto check = [&](bool ok, const char* what) {
    if (!ok) failed.push_back(what);
  };

  {
    CandidateList in{cand("summer day", 5.0, 3.0), cand("summery", 6.0, 1.0), cand("sum merry", 7.0, 4.0)};
    sort_candidates(in);
    const auto out = rewrite_compound_candidates(in, generic);
    const auto* r = find(out, "summerday");
    check(out.size() == in.size() + 1 && r && r->spatial == 4.5 && r->lm == 3.0 &&
              r->source == Candidate::Source::Rewritten,
          "two-word insert with boosted spatial score");
    check(!find(out, "summerry"), "stop after first insert");
  }
  {
    CandidateList in{cand("summery", 4.0, 5.0), cand("sum merry", 6.0, 0.1), cand("summer day", 5.0, 3.0)};
    sort_candidates(in);
    check(find(rewrite_compound_candidates(in, generic), "summerday") != nullptr, "scan in spatial order");
  }
  {
    CandidateList in{cand("sum mer day", 5.0), cand("summer day", 6.0)};
    check(texts(rewrite_compound_candidates(in, generic)) == texts(in), "three-word candidate: unchanged");
    CandidateList de{cand("Som mer Tag", 5.0), cand("Sommer Tag", 6.0)};
    check(texts(rewrite_compound_candidates(de, german)) == texts(de), "three-word candidate (german): unchanged");
  }
  {
    CandidateList in{cand("Summer day", 5.0), cand("summer day", 6.0)};
    check(texts(rewrite_compound_candidates(in, generic)) == texts(in), "generic needs lower case");
  }
  {
    const auto out = rewrite_compound_candidates({cand("Sommer Tag", 5.0)}, german);
    check(out.size() == 2 && find(out, "Sommertag"), "german capitalized pair");
    check(rewrite_compound_candidates({cand("sommer tag", 5.0)}, german).size() == 1, "german lower-case pair");
    CandidateList a{cand("Sommer tag", 5.0), cand("sommer tag", 5.5), cand("Sommer Tag", 6.0)};
    check(find(rewrite_compound_candidates(a, german), "Sommertag") != nullptr, "german scans case variants");
    CandidateList b{cand("Sonne", 4.0), cand("Sommer tag", 5.0), cand("Sommer Tag", 6.0)};
    check(texts(rewrite_compound_candidates(b, german)) == texts(b), "german stops at non-variant");
  }
  {
    CandidateList in{cand("summer day", 5.0)};
    DecoderConfig off;
    check(texts(rewrite_compound_candidates(in, off)) == texts(in), "off leaves list unchanged");
  }
  std::string detail = fmt("%zu of 10 rewriter cases", 10 - failed.size());
  for (const auto& f : failed) detail += "; failed: " + f;
  report(failed.empty(), "rewriter-conformance", detail);
}

// ---------------------------------------------------------------------------
// Desk experiment and determinism

struct DeskRun {
  std::string annotated, taps, report;
  ExperimentReport rep;
  SyntheticAudit audit;
  double seconds = 0;
};

DeskRun desk_run(unsigned threads) {
  const auto t0 = Clock::now();
  PipelineConfig cfg;
  cfg.generator = SyntheticConfig{};
  cfg.threads = threads;
  const auto layout = qwertz_layout();
  const auto data = load_desk_data(cfg);
  DeskRun r;
  r.audit = *data.audit;

  std::ostringstream ann, taps, rep;
  for (const auto& s : annotate_corpus(data.train, data.rules, data.vocabulary, true).sentences) {
    ann << render_sentence(s) << '\n';
  }
  for (const auto& t : simulate_test_set(data.test, layout, cfg.tap, cfg.seed)) write_taps(taps, t);
  const auto systems = build_desk_systems(data, cfg, layout);
  r.rep = run_desk_experiment(data, systems, cfg, layout);
  write_report(rep, r.rep);
  write_report_tsv(rep, r.rep);
  r.annotated = ann.str();
  r.taps = taps.str();
  r.report = rep.str();
  r.seconds = seconds_since(t0);
  return r;
}

void directional_result(const DeskRun& r) {
  const auto& s = r.rep.systems;
  const auto& word = s.at(0);
  const auto& rewriter = s.at(1);
  const auto& sub = s.at(2);
  const TapModel tap;
  const bool setup = r.audit.train_tokens > 0 && r.rep.sentences >= 500 && r.audit.novel_fraction() >= 0.2 &&
                     tap.sigma_ratio == 0.35 && SyntheticConfig{}.train_sentences >= 5000;
  const bool pass = setup && sub.delta_wer <= -0.10 && sub.delta_ins <= -0.40 && rewriter.wer < word.wer &&
                    rewriter.wer > sub.wer && r.seconds < 300;
  report(pass, "directional-result",
         fmt("%zu train / %zu test sentences, %.1f%% novel compounds, sigma 0.35: WER word %.1f%%, +rewriter "
             "%.1f%%, subword %.1f%%; subword dWER %+.1f%% (<= -10%%), dIns %+.1f%% (<= -40%%); %.1f s",
             SyntheticConfig{}.train_sentences, r.rep.sentences, 100 * r.audit.novel_fraction(), 100 * word.wer,
             100 * rewriter.wer, 100 * sub.wer, 100 * sub.delta_wer, 100 * sub.delta_ins, r.seconds));
}

void determinism(const DeskRun& a, const DeskRun& b) {
  const bool same_ann = a.annotated == b.annotated, same_taps = a.taps == b.taps, same_rep = a.report == b.report;
  report(same_ann && same_taps && same_rep, "determinism",
         fmt("two seeded runs (threads 0 vs 1): annotated corpus %s (%zu bytes), taps %s (%zu bytes), report %s",
             same_ann ? "identical" : "DIFFERS", a.annotated.size(), same_taps ? "identical" : "DIFFERS",
             a.taps.size(), same_rep ? "identical" : "DIFFERS"));
}

// ---------------------------------------------------------------------------
// WER

// Minimum (errors, insertions + deletions) by memoized recursion.
std::pair<std::size_t, std::size_t> edit_oracle(const std::vector<std::string>& r, const std::vector<std::string>& h) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> memo(
      r.size() + 1, std::vector<std::pair<std::size_t, std::size_t>>(h.size() + 1, {SIZE_MAX, SIZE_MAX}));
  std::function<std::pair<std::size_t, std::size_t>(std::size_t, std::size_t)> best = [&](std::size_t i,
                                                                                           std::size_t j) {
    if (i == r.size() && j == h.size()) return std::pair<std::size_t, std::size_t>{0, 0};
    auto& m = memo[i][j];
    if (m.first != SIZE_MAX) return m;
    std::pair<std::size_t, std::size_t> b{SIZE_MAX, SIZE_MAX};
    if (i < r.size() && j < h.size()) {
      auto x = best(i + 1, j + 1);
      x.first += r[i] != h[j];
      b = std::min(b, x);
    }
    if (i < r.size()) {
      auto x = best(i + 1, j);
      b = std::min(b, {x.first + 1, x.second + 1});
    }
    if (j < h.size()) {
      auto x = best(i, j + 1);
      b = std::min(b, {x.first + 1, x.second + 1});
    }
    return m = b;
  };
  return best(0, 0);
}

void wer_oracle() {
  std::vector<std::vector<std::string>> lists{{}}, frontier{{}};
  for (int len = 1; len <= 6; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& w : frontier) {
      for (const char* s : {"a", "b", "c"}) {
        next.push_back(w);
        next.back().push_back(s);
      }
    }
    lists.insert(lists.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::size_t pairs = 0, mismatches = 0;
  for (const auto& r : lists) {
    for (const auto& h : lists) {
      const auto [cost, indel] = edit_oracle(r, h);
      const auto s = align(r, h);
      mismatches += s.errors() != cost || s.insertions + s.deletions != indel || s.reference_words != r.size();
      ++pairs;
    }
  }
  report(mismatches == 0, "wer-oracle",
         fmt("%zu list pairs (length <=6 over {a,b,c}): %zu mismatches against brute-force edit distance", pairs,
             mismatches));
}

}  // namespace

int main() {
  try {
    binding_oracle();
    lexicon_fixture();
    std::size_t skipped = 0;
    const auto models = desk_scale_models(skipped);
    lm_mass(models);
    scoring_oracle(models);
    decoder_exactness();
    rewriter_conformance();
    const auto first = desk_run(0);
    directional_result(first);
    wer_oracle();
    determinism(first, desk_run(1));
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d failing\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
