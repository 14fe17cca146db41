#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "swkb/spatial.hpp"
#include "test_support.hpp"

namespace swkb {
namespace {

TouchPoint center(const KeyboardLayout& l, char32_t c) {
  const auto& k = l.key(c);
  return {k.cx, k.cy, 0};
}

TouchSequence exact_taps(const KeyboardLayout& l, std::u32string_view word) {
  TouchSequence s;
  for (char32_t c : word) s.push_back(center(l, c));
  return s;
}

std::vector<Label> labels(std::string_view s) {
  const auto cps = utf8::decode(s).value();
  std::vector<Label> out;
  for (char32_t c : cps) out.push_back(static_cast<Label>(c));
  return out;
}

TEST(TapModel, CenterIsMinimum) {
  const auto l = qwerty_layout();
  const TapModel m;
  for (char32_t c : std::u32string(U"qazm")) {
    const auto p = center(l, c);
    const auto best = nearest_keys(l, m, p, 1);
    EXPECT_EQ(best[0].first, c);
  }
}

TEST(TapModel, OneSigmaCostsHalf) {
  const auto l = qwerty_layout();
  const TapModel m;
  auto p = center(l, U'g');
  const Weight at_center = tap_log_likelihood(l, m, p, U'g');
  p.x += m.sigma_ratio * l.key(U'g').width;
  EXPECT_NEAR(tap_log_likelihood(l, m, p, U'g') - at_center, 0.5, 1e-12);
}

TEST(TapModel, SymmetryBetweenNeighbours) {
  const auto l = qwerty_layout();
  const TapModel m;
  const auto a = center(l, U'f'), b = center(l, U'g');
  const TouchPoint mid{(a.x + b.x) / 2, (a.y + b.y) / 2, 0};
  EXPECT_DOUBLE_EQ(tap_log_likelihood(l, m, mid, U'f'), tap_log_likelihood(l, m, mid, U'g'));
  EXPECT_THROW(tap_log_likelihood(l, m, mid, U'1'), Error);
}

// The argmin key is the nearest in sigma-normalized distance, including on a
// layout with keys of different widths.
TEST(TapModel, PropertyArgminIsNearestNormalized) {
  auto l = qwerty_layout();
  l.add(U'w', {1.5, 0.5, 1.6, 1.0});
  const TapModel m;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(-0.5, 10.5), uy(-0.5, 3.5);
  for (int i = 0; i < 2000; ++i) {
    const TouchPoint p{ux(rng), uy(rng), 0};
    char32_t best = 0;
    double best_d = 1e300;
    for (const auto& [c, k] : l.keys) {
      if (c == kSeparatorChar) continue;
      const double s = m.sigma_ratio * k.width;
      const double d = ((p.x - k.cx) * (p.x - k.cx) + (p.y - k.cy) * (p.y - k.cy)) / (s * s);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    EXPECT_EQ(nearest_keys(l, m, p, 1)[0].first, best);
  }
}

TEST(Simulate, DeterministicAndNearCenters) {
  const auto l = qwertz_layout();
  TapModel m;
  const auto a = simulate_taps(l, m, "Sommer Tag", 42);
  const auto b = simulate_taps(l, m, "Sommer Tag", 42);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x, b[i].x);
    EXPECT_EQ(a[i].y, b[i].y);
    if (i) EXPECT_GT(a[i].t, a[i - 1].t);
  }
  EXPECT_NE(simulate_taps(l, m, "Sommer Tag", 43)[0].x, a[0].x);

  m.sigma_ratio = 1e-12;
  const auto c = simulate_taps(l, m, "tag", 1);
  EXPECT_NEAR(c[0].x, l.key(U't').cx, 1e-9);
  EXPECT_NEAR(c[2].y, l.key(U'g').cy, 1e-9);
}

TEST(Simulate, EmpiricalSigma) {
  const auto l = qwerty_layout();
  const TapModel m;
  const std::string text(10000, 'k');
  const auto taps = simulate_taps(l, m, text, 7);
  double sx = 0, sxx = 0;
  for (const auto& p : taps) {
    sx += p.x;
    sxx += p.x * p.x;
  }
  const double n = static_cast<double>(taps.size());
  const double sd = std::sqrt(sxx / n - (sx / n) * (sx / n));
  const double sigma = m.sigma_ratio * l.key(U'k').width;
  EXPECT_NEAR(sd, sigma, 0.05 * sigma);
}

TEST(Simulate, UnmappedCharacterNamed) {
  try {
    simulate_taps(qwerty_layout(), TapModel{}, "café", 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'é'"), std::string::npos);
  }
  EXPECT_NO_THROW(simulate_taps(qwertz_layout(), TapModel{}, "Bücher", 1));
}

TEST(Simulate, SplitWords) {
  const auto l = qwerty_layout();
  const auto words = simulate_sentence(l, TapModel{}, {"ab", "cde"}, 3);
  ASSERT_EQ(words.size(), 2u);
  EXPECT_EQ(words[0].size(), 2u);
  EXPECT_EQ(words[1].size(), 3u);
}

TEST(Lattice, ExactTapsNoPenalties) {
  const auto l = qwerty_layout();
  TapModel m;
  m.top_k = 1;
  m.insertion_penalty = kInfinity;
  m.skip_penalty = kInfinity;
  const auto f = build_input_lattice(l, m, exact_taps(l, U"foot"));
  const auto lang = testing::enumerate_language(f, 8);
  ASSERT_EQ(lang.size(), 1u);
  EXPECT_EQ(*lang.begin(), labels("foot"));
  EXPECT_THROW(build_input_lattice(l, m, {}), Error);
}

TEST(Lattice, SeparatorInsertion) {
  const auto l = qwerty_layout();
  TapModel m;
  m.top_k = 1;
  m.skip_penalty = kInfinity;
  const auto f = build_input_lattice(l, m, exact_taps(l, U"summerday"));
  const auto rel = testing::enumerate_relation(f, 12);
  const auto whole = rel.find({labels("summerday"), labels("summerday")});
  const auto split = rel.find({labels("summer day"), labels("summer day")});
  ASSERT_NE(whole, rel.end());
  ASSERT_NE(split, rel.end());
  EXPECT_NEAR(split->second - whole->second, m.insertion_penalty, 1e-9);
  // A separator never starts or ends the word.
  for (const auto& [k, w] : rel) {
    EXPECT_NE(k.first.front(), kSeparatorLabel);
    EXPECT_NE(k.first.back(), kSeparatorLabel);
  }
}

TEST(Lattice, PathCountTopTwo) {
  const auto l = qwerty_layout();
  TapModel m;
  m.top_k = 2;
  const auto taps = exact_taps(l, U"abc");
  const auto rel = testing::enumerate_relation(build_input_lattice(l, m, taps), 8);
  std::size_t key_only = 0;
  for (const auto& [k, w] : rel) {
    if (k.first.size() == 3 && std::find(k.first.begin(), k.first.end(), kSeparatorLabel) == k.first.end()) {
      ++key_only;
    }
  }
  EXPECT_EQ(key_only, 8u);
  m.insertion_penalty = kInfinity;
  m.skip_penalty = kInfinity;
  EXPECT_EQ(testing::enumerate_relation(build_input_lattice(l, m, taps), 8).size(), 8u);
}

// Path weights equal the per-tap weights plus penalties, checked against an
// independent enumeration of tap choices.
TEST(Lattice, PropertyPathWeights) {
  const auto l = qwerty_layout();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(0, 10), uy(0, 3);
  for (int trial = 0; trial < 40; ++trial) {
    TapModel m;
    m.top_k = 1 + rng() % 3;
    m.insertion_penalty = 1.0 + (rng() % 50) / 10.0;
    m.skip_penalty = 2.0 + (rng() % 50) / 10.0;
    const std::size_t n = 1 + rng() % 4;
    TouchSequence taps;
    for (std::size_t i = 0; i < n; ++i) taps.push_back({ux(rng), uy(rng), static_cast<double>(i)});

    std::map<std::vector<Label>, Weight> expect;
    std::vector<Label> cur;
    std::function<void(std::size_t, Weight)> rec = [&](std::size_t i, Weight w) {
      if (i == n) {
        auto [it, ins] = expect.emplace(cur, w);
        if (!ins) it->second = std::min(it->second, w);
        return;
      }
      rec(i + 1, w + m.skip_penalty);
      for (const auto& [c, kw] : nearest_keys(l, m, taps[i], m.top_k)) {
        for (int sep = 0; sep < (i > 0 ? 2 : 1); ++sep) {
          const auto mark = cur.size();
          if (sep) cur.push_back(kSeparatorLabel);
          cur.push_back(static_cast<Label>(c));
          rec(i + 1, w + kw + (sep ? m.insertion_penalty : 0.0));
          cur.resize(mark);
        }
      }
    };
    rec(0, 0.0);
    const auto rel = testing::enumerate_relation(build_input_lattice(l, m, taps), 2 * n);
    ASSERT_EQ(rel.size(), expect.size());
    for (const auto& [k, w] : rel) {
      ASSERT_TRUE(expect.count(k.first));
      EXPECT_NEAR(w, expect.at(k.first), 1e-9);
    }
  }
}

TEST(Files, LayoutAndTapsRoundTrip) {
  const auto l = qwertz_layout();
  std::stringstream ss;
  write_layout(ss, l);
  const auto back = read_layout(ss);
  ASSERT_EQ(back.keys.size(), l.keys.size());
  for (const auto& [c, k] : l.keys) {
    EXPECT_DOUBLE_EQ(back.key(c).cx, k.cx);
    EXPECT_DOUBLE_EQ(back.key(c).width, k.width);
  }
  std::istringstream bad("a\t1\t1\t0\t1\nspace\t5\t4\t5\t1\n");
  EXPECT_THROW(read_layout(bad), ParseError);

  const std::vector<TouchSequence> words{{{1.25, 2.5, 0}, {3, 1, 150}}, {{4, 0.5, 450}}};
  std::stringstream ts;
  write_taps(ts, words);
  const auto got = read_taps(ts);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].size(), 2u);
  EXPECT_DOUBLE_EQ(got[0][0].x, 1.25);
  EXPECT_DOUBLE_EQ(got[1][0].t, 450);
  std::istringstream backwards("1\t1\t100\n1\t1\t50\n");
  EXPECT_THROW(read_taps(backwards), ParseError);
}

}  // namespace
}  // namespace swkb
