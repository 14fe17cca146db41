#include <gtest/gtest.h>

#include <random>

#include "swkb/decoder.hpp"
#include "test_support.hpp"

namespace swkb {
namespace {

TouchSequence exact_taps(const KeyboardLayout& l, std::string_view word) {
  TouchSequence s;
  const auto cps = utf8::decode(word).value();
  for (char32_t c : cps) s.push_back({l.key(c).cx, l.key(c).cy, 0});
  return s;
}

BackoffLm train(std::initializer_list<const char*> lines, int order = 2) {
  std::vector<AnnotatedSentence> c;
  for (const char* l : lines) c.push_back(parse_annotated_sentence(l));
  return normalize_backoff_by_binding_class(estimate_lm(count_ngrams(c, order)));
}

TapModel exact_model() {
  TapModel m;
  m.top_k = 1;
  return m;
}

struct Fixture {
  KeyboardModels models;
  Decoder decoder;

  Fixture(BackoffLm lm, KeyboardLayout layout, TapModel tap, DecoderConfig cfg = {})
      : models(KeyboardModels::build(std::move(lm), std::move(layout), tap)),
        decoder(models.lexicon_fst, models.lm_fst.fst, models.lm.vocab, cfg) {}

  CandidateList decode(std::string_view typed) const {
    return decoder.decode(build_input_lattice(models.layout, models.tap, exact_taps(models.layout, typed)));
  }
};

BackoffLm foot_base_ball_lm() {
  return train({"foot⟨0,1⟩ ball⟨1,0⟩", "base⟨0,1⟩ ball⟨1,0⟩", "foot", "base", "ball"});
}

TEST(Decode, Football) {
  const Fixture f(foot_base_ball_lm(), qwerty_layout(), exact_model());
  const auto c = f.decode("football");
  ASSERT_FALSE(c.empty());
  EXPECT_EQ(c[0].words, (std::vector<std::string>{"football"}));
  EXPECT_EQ(c[0].source, Candidate::Source::Decoded);
  EXPECT_NEAR(c[0].total, c[0].spatial + c[0].lm, 1e-12);
  // The split reading is also found, costing the inserted separator.
  bool split = false;
  for (const auto& x : c) split = split || x.words == std::vector<std::string>{"foot", "ball"};
  EXPECT_TRUE(split);
}

TEST(Decode, AmbiguousAnalysesMergeToOneSurface) {
  const auto lm = train({"Stau⟨0,1⟩ becken⟨1,0⟩", "Staub⟨0,1⟩ ecken⟨1,0⟩", "Stau", "Staub", "Becken", "Ecken"});
  const Fixture f(lm, qwertz_layout(), exact_model());
  const auto c = f.decode("staubecken");
  ASSERT_FALSE(c.empty());
  EXPECT_EQ(c[0].text(), "Staubecken");
  int n = 0;
  for (const auto& x : c) n += x.text() == "Staubecken";
  EXPECT_EQ(n, 1);
}

TEST(Decode, BindingRulesForbidJoiningWords) {
  const Fixture f(foot_base_ball_lm(), qwerty_layout(), exact_model());
  const auto c = f.decode("basebase");
  ASSERT_FALSE(c.empty());
  EXPECT_EQ(c[0].words, (std::vector<std::string>{"base", "base"}));
  for (const auto& x : c) EXPECT_NE(x.text(), "basebase");

  const auto s = decode_sentence({exact_taps(f.models.layout, "base"), exact_taps(f.models.layout, "base")}, f.models,
                                 f.decoder);
  EXPECT_EQ(s.words, (std::vector<std::string>{"base", "base"}));
}

TEST(Decode, EmptyCompositionFallsBackToLiteral) {
  TapModel m = exact_model();
  m.skip_penalty = kInfinity;
  const Fixture f(foot_base_ball_lm(), qwerty_layout(), m);
  EXPECT_TRUE(f.decode("zzz").empty());
  const auto s = decode_sentence({exact_taps(f.models.layout, "zzz")}, f.models, f.decoder);
  EXPECT_EQ(s.words, (std::vector<std::string>{"zzz"}));
  EXPECT_EQ(s.candidates[0][0].source, Candidate::Source::Literal);
}

TEST(Decode, ConfigValidation) {
  DecoderConfig c;
  c.nbest = 0;
  EXPECT_THROW(c.validate(), Error);
  c.nbest = 8;
  c.beam = 4;
  EXPECT_THROW(c.validate(), Error);
  c.beam = 0;
  EXPECT_NO_THROW(c.validate());
  c.rewriter_boost = -1;
  EXPECT_THROW(c.validate(), Error);
}

// Unbounded beam equals exhaustive enumeration of all hypotheses.
TEST(Decode, PropertyExactAgainstBruteForce) {
  std::mt19937_64 rng(2024);
  const auto layout = qwerty_layout();
  int compared = 0;
  for (int trial = 0; trial < 600 && compared < 120; ++trial) {
    const auto inst = testing::random_decoding_instance(rng, layout);
    const auto models = KeyboardModels::build(inst.lm, layout, inst.tap);
    ASSERT_LE(models.lm_fst.fst.num_states(), 200u);
    DecoderConfig cfg;
    cfg.beam = 0;
    cfg.nbest = 1;
    cfg.lm_weight = inst.lambda;
    const Decoder d(models.lexicon_fst, models.lm_fst.fst, models.lm.vocab, cfg);
    const auto lattice = build_input_lattice(layout, inst.tap, inst.taps);
    const auto got = d.decode(lattice);
    const auto oracle = testing::brute_force_decode(lattice, models.lm, inst.lambda, 2 * inst.taps.size());
    if (oracle.empty()) {
      EXPECT_TRUE(got.empty());
      continue;
    }
    ASSERT_FALSE(got.empty()) << "trial " << trial;
    Weight best = kInfinity;
    for (const auto& [s, w] : oracle) best = std::min(best, w);
    EXPECT_NEAR(got[0].total, best, 1e-6) << "trial " << trial;
    ASSERT_TRUE(oracle.count(got[0].text()));
    EXPECT_NEAR(oracle.at(got[0].text()), best, 1e-6);
    ++compared;
  }
  EXPECT_GE(compared, 120);
}

// n-best lists are exact too: the k best distinct surfaces match.
TEST(Decode, PropertyNbestExact) {
  std::mt19937_64 rng(99);
  const auto layout = qwerty_layout();
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = testing::random_decoding_instance(rng, layout);
    const auto models = KeyboardModels::build(inst.lm, layout, inst.tap);
    DecoderConfig cfg;
    cfg.beam = 0;
    cfg.nbest = 4;
    cfg.lm_weight = inst.lambda;
    const Decoder d(models.lexicon_fst, models.lm_fst.fst, models.lm.vocab, cfg);
    const auto lattice = build_input_lattice(layout, inst.tap, inst.taps);
    const auto got = d.decode(lattice);
    auto oracle = testing::brute_force_decode(lattice, models.lm, inst.lambda, 2 * inst.taps.size());
    std::vector<Weight> expect;
    for (const auto& [s, w] : oracle) expect.push_back(w);
    std::sort(expect.begin(), expect.end());
    if (expect.size() > 4) expect.resize(4);
    ASSERT_EQ(got.size(), expect.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got[i].total, expect[i], 1e-6);
      EXPECT_NEAR(oracle.at(got[i].text()), got[i].total, 1e-6);
    }
  }
}

// Widening the beam never worsens the best total.
TEST(Decode, PropertyBeamMonotone) {
  std::mt19937_64 rng(7);
  const auto layout = qwerty_layout();
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = testing::random_decoding_instance(rng, layout);
    const auto models = KeyboardModels::build(inst.lm, layout, inst.tap);
    const auto lattice = build_input_lattice(layout, inst.tap, inst.taps);
    Weight prev = kInfinity;
    for (std::size_t beam : {1, 2, 4, 8, 32, 0}) {
      DecoderConfig cfg;
      cfg.beam = beam;
      cfg.nbest = 1;
      cfg.lm_weight = inst.lambda;
      const Decoder d(models.lexicon_fst, models.lm_fst.fst, models.lm.vocab, cfg);
      const auto got = d.decode(lattice);
      const Weight w = got.empty() ? kInfinity : got[0].total;
      EXPECT_LE(w, prev + 1e-9) << "trial " << trial << " beam " << beam;
      prev = w;
    }
  }
}

// Every surfaced word is the assembly of a complete binding sequence.
TEST(Decode, PropertyOnlyCompleteWords) {
  std::mt19937_64 rng(17);
  const auto layout = qwerty_layout();
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = testing::random_decoding_instance(rng, layout);
    const auto models = KeyboardModels::build(inst.lm, layout, inst.tap);
    DecoderConfig cfg;
    cfg.nbest = 8;
    const Decoder d(models.lexicon_fst, models.lm_fst.fst, models.lm.vocab, cfg);
    for (const auto& c : d.decode(build_input_lattice(layout, inst.tap, inst.taps))) {
      std::vector<SubwordUnit> word;
      std::vector<std::string> words;
      for (UnitId u : c.units) {
        word.push_back(models.lm.vocab.unit(u));
        if (word.back().binding.right == 0) {
          words.push_back(assemble_word(word));
          word.clear();
        }
      }
      EXPECT_TRUE(word.empty());
      EXPECT_EQ(words, c.words);
    }
  }
}

// ---------------------------------------------------------------------------
// Rewriter

Candidate cand(std::string text, Weight spatial, Weight lm = 1.0) {
  Candidate c;
  std::string cur;
  for (char ch : text) {
    if (ch == ' ') {
      c.words.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  c.words.push_back(cur);
  c.spatial = spatial;
  c.lm = lm;
  c.total = spatial + lm;
  return c;
}

DecoderConfig rewriter(RewriterMode m) {
  DecoderConfig c;
  c.rewriter = m;
  c.rewriter_boost = 0.5;
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

TEST(Rewriter, GenericInsertsConcatenationAndStops) {
  CandidateList in{cand("summer day", 5.0, 3.0), cand("summery", 6.0, 1.0), cand("sum merry", 7.0, 4.0)};
  sort_candidates(in);
  const auto out = rewrite_compound_candidates(in, rewriter(RewriterMode::Generic));
  ASSERT_EQ(out.size(), in.size() + 1);
  const auto* r = find(out, "summerday");
  ASSERT_NE(r, nullptr);
  EXPECT_DOUBLE_EQ(r->spatial, 4.5);
  EXPECT_DOUBLE_EQ(r->lm, 3.0);
  EXPECT_DOUBLE_EQ(r->total, 7.5);
  EXPECT_EQ(r->source, Candidate::Source::Rewritten);
  EXPECT_EQ(find(out, "summerry"), nullptr);
  // Sorted by total.
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_LE(out[i - 1].total, out[i].total);
}

TEST(Rewriter, ScansInSpatialOrderPastSingleWords) {
  // "sum merry" has the better total but the worse spatial score.
  CandidateList in{cand("summery", 4.0, 5.0), cand("sum merry", 6.0, 0.1), cand("summer day", 5.0, 3.0)};
  sort_candidates(in);
  const auto out = rewrite_compound_candidates(in, rewriter(RewriterMode::Generic));
  EXPECT_NE(find(out, "summerday"), nullptr);
  EXPECT_EQ(find(out, "summerry"), nullptr);
}

TEST(Rewriter, GenericRequiresLowerCaseAndDoesNotScanPast) {
  CandidateList in{cand("Summer day", 5.0), cand("summer day", 6.0)};
  const auto out = rewrite_compound_candidates(in, rewriter(RewriterMode::Generic));
  EXPECT_EQ(texts(out), texts(in));
}

TEST(Rewriter, ThreeWordCandidateLeavesListUnchanged) {
  CandidateList in{cand("sum mer day", 5.0), cand("summer day", 6.0)};
  EXPECT_EQ(texts(rewrite_compound_candidates(in, rewriter(RewriterMode::Generic))), texts(in));
  CandidateList de{cand("Som mer Tag", 5.0), cand("Sommer Tag", 6.0)};
  EXPECT_EQ(texts(rewrite_compound_candidates(de, rewriter(RewriterMode::German))), texts(de));
}

TEST(Rewriter, GermanCapitalizedPair) {
  CandidateList in{cand("Sommer Tag", 5.0)};
  const auto out = rewrite_compound_candidates(in, rewriter(RewriterMode::German));
  ASSERT_EQ(out.size(), 2u);
  const auto* r = find(out, "Sommertag");
  ASSERT_NE(r, nullptr);
  EXPECT_DOUBLE_EQ(r->spatial, 4.5);
  // Lower-case pairs do not qualify in German mode.
  EXPECT_EQ(rewrite_compound_candidates({cand("sommer tag", 5.0)}, rewriter(RewriterMode::German)).size(), 1u);
}

TEST(Rewriter, GermanScansPastLowerCasePairOnlyAmongCaseVariants) {
  // Best is a lower-case pair; the capitalized variant below it qualifies.
  CandidateList a{cand("Sommer tag", 5.0), cand("sommer tag", 5.5), cand("Sommer Tag", 6.0)};
  const auto out_a = rewrite_compound_candidates(a, rewriter(RewriterMode::German));
  EXPECT_NE(find(out_a, "Sommertag"), nullptr);

  // A different word ranks above the lower-case pair: stop there.
  CandidateList b{cand("Sonne", 4.0), cand("Sommer tag", 5.0), cand("Sommer Tag", 6.0)};
  EXPECT_EQ(texts(rewrite_compound_candidates(b, rewriter(RewriterMode::German))), texts(b));

  // Single-word candidates above a capitalized pair are scanned past.
  CandidateList c{cand("Sonne", 4.0), cand("Sommer Tag", 6.0)};
  EXPECT_NE(find(rewrite_compound_candidates(c, rewriter(RewriterMode::German)), "Sommertag"), nullptr);
}

TEST(Rewriter, OffAndInsertsAtMostOne) {
  CandidateList in{cand("summer day", 5.0), cand("winter day", 5.2)};
  EXPECT_EQ(texts(rewrite_compound_candidates(in, rewriter(RewriterMode::Off))), texts(in));
  std::mt19937_64 rng(3);
  const std::vector<std::string> pool{"a", "Ab", "a b", "A B", "a B", "ab c", "Ab Cd", "x y z", "xy", "X Y"};
  for (int trial = 0; trial < 500; ++trial) {
    CandidateList l;
    const auto n = 1 + rng() % 5;
    for (std::size_t i = 0; i < n; ++i) l.push_back(cand(pool[rng() % pool.size()], static_cast<double>(rng() % 10)));
    for (auto mode : {RewriterMode::Generic, RewriterMode::German}) {
      const auto out = rewrite_compound_candidates(l, rewriter(mode));
      ASSERT_TRUE(out.size() == l.size() || out.size() == l.size() + 1);
      for (const auto& c : l) EXPECT_NE(find(out, c.text()), nullptr);
    }
  }
}

// ---------------------------------------------------------------------------
// Sentences

TEST(Sentence, ExactTapsRecoverText) {
  const auto lm = train({"der Sommer⟨0,1⟩ abend⟨1,0⟩ ist lang", "der Winter⟨0,1⟩ tag⟨1,0⟩ ist kurz", "ein Tag"}, 3);
  TapModel m;
  m.sigma_ratio = 1e-9;
  m.top_k = 1;
  const Fixture f(lm, qwertz_layout(), m);
  const auto taps = simulate_sentence(f.models.layout, m, {"der", "Winterabend", "ist", "lang"}, 5);
  EXPECT_EQ(decode_sentence(taps, f.models, f.decoder).words,
            (std::vector<std::string>{"der", "Winterabend", "ist", "lang"}));
}

TEST(Sentence, NovelCompoundSplitByWordModelKeptBySubwordModel) {
  const auto word_lm = train({"der Sommer ist lang", "der Tag ist kurz", "ein Wintertag", "ein Sommerabend"}, 2);
  const auto sub_lm = train({"der Sommer ist lang", "der Tag ist kurz", "ein Winter⟨0,1⟩ tag⟨1,0⟩",
                             "ein Sommer⟨0,1⟩ abend⟨1,0⟩"},
                            2);
  TapModel m;
  m.top_k = 1;
  const auto layout = qwertz_layout();
  const std::vector<TouchSequence> taps{exact_taps(layout, "ein"), exact_taps(layout, "sommertag")};

  const Fixture base(word_lm, layout, m);
  EXPECT_EQ(decode_sentence(taps, base.models, base.decoder).words, (std::vector<std::string>{"ein", "Sommer", "Tag"}));

  DecoderConfig rw;
  rw.rewriter = RewriterMode::German;
  const Fixture rewritten(word_lm, layout, m, rw);
  EXPECT_EQ(decode_sentence(taps, rewritten.models, rewritten.decoder).words,
            (std::vector<std::string>{"ein", "Sommertag"}));

  const Fixture sub(sub_lm, layout, m);
  EXPECT_EQ(decode_sentence(taps, sub.models, sub.decoder).words, (std::vector<std::string>{"ein", "Sommertag"}));
}

}  // namespace
}  // namespace swkb
