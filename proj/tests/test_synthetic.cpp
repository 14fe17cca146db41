#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "swkb/pipeline.hpp"

namespace swkb {
namespace {

ConfigFile parse(const std::string& text) {
  std::istringstream in(text);
  return read_config(in);
}

TEST(Config, SectionsAndTypes) {
  const auto c = parse(
      "# comment\n"
      "top = 1\n"
      "[lm]\n"
      "order = 3\n"
      "  discount=0.5  \n"
      "cutoffs = 0, 1,2\n"
      "flag = yes\n"
      "[decoder]\n"
      "literal_penalty = inf\n");
  EXPECT_EQ(c.section("").get_int("top", 0), 1);
  EXPECT_EQ(c.section("lm").get_int("order", 0), 3);
  EXPECT_DOUBLE_EQ(c.section("lm").get_double("discount", 0), 0.5);
  EXPECT_EQ(c.section("lm").get_list("cutoffs"), (std::vector<std::string>{"0", "1", "2"}));
  EXPECT_TRUE(c.section("lm").get_bool("flag", false));
  EXPECT_TRUE(std::isinf(c.section("decoder").get_double("literal_penalty", 0)));
  EXPECT_EQ(c.section("missing").get_int("x", 7), 7);
  EXPECT_THROW(c.section("lm").get_int("discount", 0), ParseError);
  EXPECT_THROW(c.section("lm").require_known({"order"}), ParseError);
}

TEST(Config, Errors) {
  try {
    parse("[a]\nx = 1\nnot a pair\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse("[a\n"), ParseError);
  EXPECT_THROW(parse("x=1\nx=2\n"), ParseError);
  EXPECT_THROW(parse("=1\n"), ParseError);
}

SyntheticConfig small(std::uint64_t seed = 3) {
  SyntheticConfig c;
  c.seed = seed;
  c.train_sentences = 800;
  c.test_sentences = 200;
  c.compound_types = 150;
  return c;
}

TEST(Synthetic, DeterministicUnderSeed) {
  const auto a = generate_synthetic_corpus(small());
  const auto b = generate_synthetic_corpus(small());
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(generate_synthetic_corpus(small(4)).train, a.train);
  EXPECT_EQ(a.train.size(), 800u);
  EXPECT_EQ(a.test.size(), 200u);
}

TEST(Synthetic, NoCompoundsWhenProbabilityZero) {
  auto c = small();
  c.compound_probability = 0;
  const auto s = generate_synthetic_corpus(c);
  std::set<std::string> base(c.nouns.begin(), c.nouns.end());
  base.insert(c.fillers.begin(), c.fillers.end());
  for (const auto* set : {&s.train, &s.test}) {
    for (const auto& l : *set) {
      for (const auto& w : split_whitespace(l)) EXPECT_TRUE(base.count(w)) << w;
    }
  }
  EXPECT_EQ(s.audit.test_compounds, 0u);
}

TEST(Synthetic, InvalidConfig) {
  auto c = small();
  c.novel_rate = 1.5;
  EXPECT_THROW(generate_synthetic_corpus(c), Error);
  c = small();
  c.compound_probability = -0.1;
  EXPECT_THROW(c.validate(), Error);
  c = small();
  c.min_length = 5;
  c.max_length = 2;
  EXPECT_THROW(c.validate(), Error);
  c = small();
  c.nouns = {"Sommer", "tag", "Abend"};
  EXPECT_THROW(c.validate(), Error);
}

TEST(Synthetic, FiftyNounsYieldNovelTestCompound) {
  auto c = small();
  c.nouns.resize(50);
  c.compound_probability = 0.2;
  const auto s = generate_synthetic_corpus(c);
  EXPECT_GE(s.audit.novel_test_compounds, 1u);
}

// Held-out compounds never occur in training, and every subword unit the
// annotator produces for them occurs in the annotated training corpus.
TEST(Synthetic, PropertyNovelCompoundsHaveTrainedParts) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto s = generate_synthetic_corpus(small(seed));
    std::set<std::string> train_words;
    for (const auto& l : s.train) {
      for (auto& w : split_whitespace(l)) train_words.insert(std::move(w));
    }
    Annotator ann(s.rules, s.vocabulary, true);
    for (const auto& l : s.train) ann.annotate_line(l);
    const SubwordLexicon train_units = ann.lexicon();

    std::size_t novel = 0;
    std::set<std::string> base(s.rules.base_vocabulary);
    for (const auto& l : s.test) {
      for (const auto& w : split_whitespace(l)) {
        if (train_words.count(w) || base.count(w)) continue;
        ++novel;
        for (const auto& t : ann.annotate_word(w)) {
          EXPECT_NE(t.text, kUnknownToken) << w;
          EXPECT_TRUE(train_units.find(t.text, t.binding).has_value()) << w << " part " << t.text;
        }
      }
    }
    EXPECT_EQ(novel, s.audit.novel_test_compounds);
    EXPECT_GT(s.audit.novel_fraction(), 0.2);
  }
}

TEST(Synthetic, ReadConfig) {
  const auto f = parse("[generator]\nseed = 9\ntrain_sentences = 10\nnouns = Haus, Garten, Tor\ninterfixes = s\n");
  const auto c = read_synthetic_config(f.section("generator"));
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.train_sentences, 10u);
  EXPECT_EQ(c.nouns, (std::vector<std::string>{"Haus", "Garten", "Tor"}));
  EXPECT_THROW(read_synthetic_config(parse("[g]\nsed = 1\n").section("g")), ParseError);
  EXPECT_THROW(read_synthetic_config(parse("[g]\ncompound_probability = 2\n").section("g")), Error);
}

TEST(Pipeline, ConfigResolvesPathsAndValidates) {
  const auto dir = std::filesystem::temp_directory_path() / "swkb_pipeline_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "train.txt") << "der Sommer\n";
  std::ofstream(dir / "test.txt") << "der Sommer\n";
  const auto f = parse(
      "[corpus]\ntrain = train.txt\ntest = test.txt\nlayout = qwerty\n"
      "[lm]\norder = 2\ncutoffs = 0,1\n"
      "[tap]\nsigma_ratio = 0.3\n"
      "[decoder]\nbeam = 32\nrewriter = generic\n"
      "[experiment]\nseed = 4\n");
  const auto c = read_pipeline_config(f, dir);
  EXPECT_EQ(c.train_path, dir / "train.txt");
  EXPECT_EQ(c.layout_name, "qwerty");
  EXPECT_EQ(c.lm.order, 2);
  EXPECT_EQ(c.lm.pruning.count_cutoffs, (std::vector<std::size_t>{0, 1}));
  EXPECT_DOUBLE_EQ(c.tap.sigma_ratio, 0.3);
  EXPECT_EQ(c.decoder.rewriter, RewriterMode::Generic);
  EXPECT_EQ(c.seed, 4u);

  EXPECT_THROW(read_pipeline_config(parse("[corpus]\ntrain = nope.txt\ntest = nope.txt\n"), dir), Error);
  EXPECT_THROW(read_pipeline_config(parse("[lm]\norder = 2\n"), dir), Error);
  EXPECT_THROW(read_pipeline_config(parse("[bogus]\n[generator]\n"), dir), ParseError);
  EXPECT_THROW(read_pipeline_config(parse("[generator]\n[decoder]\nbeam = 2\nnbest = 8\n"), dir), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace swkb
