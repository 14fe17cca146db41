#pragma once

// End-to-end plumbing: configuration, model training for the word-based and
// subword systems, and the baseline / rewriter / subword comparison.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "swkb/config.hpp"
#include "swkb/corpus.hpp"
#include "swkb/decoder.hpp"
#include "swkb/eval.hpp"
#include "swkb/lm.hpp"
#include "swkb/spatial.hpp"
#include "swkb/synthetic.hpp"

namespace swkb {

struct LmTrainingConfig {
  int order = 3;
  PruningConfig pruning;
  double discount = 0.4;
  bool recompute_backoff = true;
};

/// Sections: [corpus] (train, test, rules, layout paths; empty means
/// generate / built-in), [generator], [lm], [tap], [decoder], [experiment].
/// Relative paths resolve against the config file's directory.
struct PipelineConfig {
  std::filesystem::path train_path, test_path, rules_path, layout_path;
  std::string layout_name = "qwertz";
  std::optional<SyntheticConfig> generator;
  LmTrainingConfig lm;
  TapModel tap;
  DecoderConfig decoder;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  void validate() const {
    for (const auto* p : {&train_path, &test_path, &rules_path, &layout_path}) {
      if (!p->empty() && !std::filesystem::exists(*p)) throw Error("config: file not found: " + p->string());
    }
    if (!generator && (train_path.empty() || test_path.empty())) {
      throw Error("config: give [corpus] train and test, or a [generator] section");
    }
    if (lm.order < 1) throw Error("config: lm order must be >= 1");
    if (!(lm.discount > 0 && lm.discount < 1)) throw Error("config: lm discount must be in (0,1)");
    lm.pruning.validate();
    tap.validate();
    decoder.validate();
  }
};

inline PipelineConfig read_pipeline_config(const ConfigFile& f, const std::filesystem::path& base_dir = {}) {
  f.require_known_sections({"", "corpus", "generator", "lm", "tap", "decoder", "experiment"});
  f.section("").require_known({});
  PipelineConfig c;
  auto path = [&](const std::string& v) -> std::filesystem::path {
    if (v.empty()) return {};
    std::filesystem::path p(v);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };

  const auto& corpus = f.section("corpus");
  corpus.require_known({"train", "test", "rules", "layout"});
  c.train_path = path(corpus.get_string("train"));
  c.test_path = path(corpus.get_string("test"));
  c.rules_path = path(corpus.get_string("rules"));
  const std::string layout = corpus.get_string("layout", "qwertz");
  if (layout == "qwerty" || layout == "qwertz") {
    c.layout_name = layout;
  } else {
    c.layout_path = path(layout);
  }
  if (f.has_section("generator")) c.generator = read_synthetic_config(f.section("generator"));

  const auto& lm = f.section("lm");
  lm.require_known({"order", "max_unigrams", "max_ngrams", "discount", "cutoffs", "recompute_backoff"});
  c.lm.order = static_cast<int>(lm.get_int("order", c.lm.order));
  c.lm.pruning.max_unigrams = lm.get_size("max_unigrams", c.lm.pruning.max_unigrams);
  c.lm.pruning.max_ngrams = lm.get_size("max_ngrams", c.lm.pruning.max_ngrams);
  c.lm.discount = lm.get_double("discount", c.lm.discount);
  c.lm.recompute_backoff = lm.get_bool("recompute_backoff", c.lm.recompute_backoff);
  c.lm.pruning.count_cutoffs.clear();
  for (const auto& v : lm.get_list("cutoffs")) {
    ConfigSection one;
    one.set("cutoffs", v);
    c.lm.pruning.count_cutoffs.push_back(one.get_size("cutoffs", 0));
  }

  const auto& tap = f.section("tap");
  tap.require_known({"sigma_ratio", "top_k", "insertion_penalty", "skip_penalty"});
  c.tap.sigma_ratio = tap.get_double("sigma_ratio", c.tap.sigma_ratio);
  c.tap.top_k = tap.get_size("top_k", c.tap.top_k);
  c.tap.insertion_penalty = tap.get_double("insertion_penalty", c.tap.insertion_penalty);
  c.tap.skip_penalty = tap.get_double("skip_penalty", c.tap.skip_penalty);

  const auto& dec = f.section("decoder");
  dec.require_known({"beam", "nbest", "lm_weight", "rewriter", "rewriter_boost", "literal_penalty"});
  c.decoder.beam = dec.get_size("beam", c.decoder.beam);
  c.decoder.nbest = dec.get_size("nbest", c.decoder.nbest);
  c.decoder.lm_weight = dec.get_double("lm_weight", c.decoder.lm_weight);
  c.decoder.rewriter = parse_rewriter_mode(dec.get_string("rewriter", std::string(to_string(c.decoder.rewriter))));
  c.decoder.rewriter_boost = dec.get_double("rewriter_boost", c.decoder.rewriter_boost);
  c.decoder.literal_penalty = dec.get_double("literal_penalty", c.decoder.literal_penalty);

  const auto& exp = f.section("experiment");
  exp.require_known({"seed", "threads"});
  c.seed = static_cast<std::uint64_t>(exp.get_int("seed", static_cast<long long>(c.seed)));
  c.threads = static_cast<unsigned>(exp.get_size("threads", c.threads));
  c.validate();
  return c;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open config " + file.string());
  return read_pipeline_config(read_config(in), file.parent_path());
}

inline std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot open " + p.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(std::move(line));
  }
  return out;
}

inline KeyboardLayout load_layout(const PipelineConfig& c) {
  if (c.layout_path.empty()) return layout_by_name(c.layout_name);
  std::ifstream in(c.layout_path);
  if (!in) throw Error("cannot open layout " + c.layout_path.string());
  return read_layout(in);
}

inline BackoffLm train_lm(const std::vector<AnnotatedSentence>& corpus, const LmTrainingConfig& c) {
  return normalize_backoff_by_binding_class(estimate_lm(count_ngrams(corpus, c.order), c.pruning, c.discount),
                                            c.recompute_backoff);
}

/// Every word type of the training text is a unit with binding (0,0).
inline KeyboardModels train_word_system(const std::vector<std::string>& train, const LmTrainingConfig& lm,
                                        const KeyboardLayout& layout, const TapModel& tap) {
  CuratedVocabulary vocab;
  for (const auto& l : train) {
    for (auto& w : split_whitespace(l)) vocab.words.insert(std::move(w));
  }
  const auto ann = annotate_corpus(train, DecompoundRules{}, vocab, false);
  return KeyboardModels::build(train_lm(ann.sentences, lm), layout, tap);
}

/// Compounds are split by the decompounder into binding-typed parts.
inline KeyboardModels train_subword_system(const std::vector<std::string>& train, const DecompoundRules& rules,
                                           const CuratedVocabulary& vocab, const LmTrainingConfig& lm,
                                           const KeyboardLayout& layout, const TapModel& tap) {
  const auto ann = annotate_corpus(train, rules, vocab, true);
  return KeyboardModels::build(train_lm(ann.sentences, lm), layout, tap);
}

struct DeskData {
  std::vector<std::string> train, test;
  DecompoundRules rules;
  CuratedVocabulary vocabulary;
  std::optional<SyntheticAudit> audit;
};

inline DeskData load_desk_data(const PipelineConfig& c) {
  DeskData d;
  if (c.generator) {
    auto s = generate_synthetic_corpus(*c.generator);
    d.train = std::move(s.train);
    d.test = std::move(s.test);
    d.rules = std::move(s.rules);
    d.vocabulary = std::move(s.vocabulary);
    d.audit = s.audit;
  }
  if (!c.train_path.empty()) d.train = read_lines(c.train_path);
  if (!c.test_path.empty()) d.test = read_lines(c.test_path);
  if (!c.rules_path.empty()) {
    std::ifstream in(c.rules_path);
    d.rules = read_rules(in);
    d.vocabulary.words = d.rules.base_vocabulary;
  }
  return d;
}

/// The three systems of the comparison: word LM, word LM with the compound
/// rewriter, subword LM. The rewriter mode is taken from the decoder config
/// (german when it is off).
struct DeskSystems {
  KeyboardModels word, subword;
  DecoderConfig plain, rewriting;
};

inline DeskSystems build_desk_systems(const DeskData& d, const PipelineConfig& c, const KeyboardLayout& layout) {
  DeskSystems s{train_word_system(d.train, c.lm, layout, c.tap),
                train_subword_system(d.train, d.rules, d.vocabulary, c.lm, layout, c.tap), c.decoder, c.decoder};
  s.plain.rewriter = RewriterMode::Off;
  if (s.rewriting.rewriter == RewriterMode::Off) s.rewriting.rewriter = RewriterMode::German;
  return s;
}

inline ExperimentReport run_desk_experiment(const DeskData& d, const DeskSystems& s, const PipelineConfig& c,
                                            const KeyboardLayout& layout) {
  const std::vector<ExperimentSystem> systems{{"word", &s.word, s.plain},
                                              {"word+rewriter", &s.word, s.rewriting},
                                              {"subword", &s.subword, s.plain}};
  return run_experiment(d.test, layout, c.tap, systems, c.seed, c.threads);
}

}  // namespace swkb
