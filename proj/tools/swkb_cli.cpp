// swkb: command-line front end for the subword keyboard pipeline.
//
// Exit codes: 0 success, 1 pipeline error, 2 usage error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swkb/service.hpp"
#include "swkb/swkb.hpp"

namespace fs = std::filesystem;
using namespace swkb;

namespace {

// ---------------------------------------------------------------------------
// I/O helpers

struct Output {
  std::ofstream file;
  std::ostream* stream = &std::cout;

  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file.open(path, std::ios::binary);
    if (!file) throw Error("cannot write " + path);
    stream = &file;
  }
  std::ostream& operator*() { return *stream; }
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return in;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << content;
}

KeyboardLayout layout_arg(const std::string& v) {
  if (v == "qwerty" || v == "qwertz") return layout_by_name(v);
  auto in = open_in(v);
  return read_layout(in);
}

BackoffLm load_lm(const std::string& path) {
  auto in = open_in(path);
  return read_lm(in);
}

std::vector<AnnotatedSentence> read_annotated(const std::string& path) {
  std::vector<AnnotatedSentence> out;
  auto in = open_in(path);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      out.push_back(parse_annotated_sentence(line));
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.message(), no, e.position());
    }
  }
  return out;
}

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

const char* source_name(Candidate::Source s) {
  switch (s) {
    case Candidate::Source::Decoded: return "decoded";
    case Candidate::Source::Rewritten: return "rewritten";
    case Candidate::Source::Literal: return "literal";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Shared option groups

void add_tap_options(CLI::App* cmd, TapModel& tap) {
  cmd->add_option("--sigma", tap.sigma_ratio, "tap noise, as a fraction of key width")->capture_default_str();
  cmd->add_option("--top-k", tap.top_k, "keys considered per tap")->capture_default_str();
  cmd->add_option("--insertion-penalty", tap.insertion_penalty, "cost of a decoder-inserted separator")
      ->capture_default_str();
  cmd->add_option("--skip-penalty", tap.skip_penalty, "cost of ignoring a tap")->capture_default_str();
}

struct DecoderArgs {
  DecoderConfig cfg;
  std::string rewriter = "off";

  void add(CLI::App* cmd) {
    cmd->add_option("--beam", cfg.beam, "hypotheses kept per lattice state, 0 = unbounded")->capture_default_str();
    cmd->add_option("--nbest", cfg.nbest, "candidates per word")->capture_default_str();
    cmd->add_option("--lm-weight", cfg.lm_weight, "LM scale")->capture_default_str();
    cmd->add_option("--rewriter", rewriter, "compound rewriter")
        ->check(CLI::IsMember({"off", "generic", "german"}))
        ->capture_default_str();
    cmd->add_option("--boost", cfg.rewriter_boost, "rewriter spatial-score boost")->capture_default_str();
    cmd->add_option("--literal-penalty", cfg.literal_penalty, "LM cost of the nearest-key literal (default: fallback only)");
  }
  DecoderConfig get() const {
    DecoderConfig c = cfg;
    c.rewriter = parse_rewriter_mode(rewriter);
    c.validate();
    return c;
  }
};

// ---------------------------------------------------------------------------
// Subcommands

struct AnnotateArgs {
  std::string rules, vocab, in = "-", out = "-", lexicon;
  bool no_split = false;
};

int run_annotate(const AnnotateArgs& a) {
  auto rin = open_in(a.rules);
  const auto rules = read_rules(rin);
  CuratedVocabulary vocab{rules.base_vocabulary};
  if (!a.vocab.empty()) {
    auto vin = open_in(a.vocab);
    vocab = read_vocabulary(vin);
  }
  AnnotationResult res;
  if (a.in == "-") {
    res = annotate_corpus(std::cin, rules, vocab, !a.no_split);
  } else {
    auto in = open_in(a.in);
    res = annotate_corpus(in, rules, vocab, !a.no_split);
  }
  Output out(a.out);
  for (const auto& s : res.sentences) *out << render_sentence(s) << '\n';
  if (!a.lexicon.empty()) {
    Output lex(a.lexicon);
    write_lexicon(*lex, res.lexicon);
  }
  std::cerr << "annotated " << res.sentences.size() << " sentences, " << res.lexicon.size() << " units";
  if (res.skipped_lines) std::cerr << ", skipped " << res.skipped_lines << " invalid lines";
  std::cerr << '\n';
  return 0;
}

int run_build_lexicon(const std::string& in, const std::string& out, const std::string& fst_out) {
  SubwordLexicon lex;
  for (const auto& s : read_annotated(in)) {
    for (const auto& t : s) lex.add(t);
  }
  Output o(out);
  write_lexicon(*o, lex);
  if (!fst_out.empty()) {
    Output f(fst_out);
    write_text(*f, build_lexicon_fst(lex));
  }
  std::cerr << "lexicon: " << lex.size() << " units\n";
  return 0;
}

struct TrainArgs {
  std::string in, out = "-";
  LmTrainingConfig lm;
};

int run_train_lm(const TrainArgs& a) {
  const auto corpus = read_annotated(a.in);
  a.lm.pruning.validate();
  const auto lm = estimate_lm(count_ngrams(corpus, a.lm.order), a.lm.pruning, a.lm.discount);
  Output out(a.out);
  write_lm(*out, lm);
  std::cerr << "trained order-" << lm.order << " LM over " << lm.vocab.size() << " units\n";
  return 0;
}

int run_normalize_lm(const std::string& in, const std::string& out, bool weak) {
  const auto lm = normalize_backoff_by_binding_class(load_lm(in), !weak);
  Output o(out);
  write_lm(*o, lm);
  const auto fst = lm_to_fst(lm);
  const auto rep = check_admissible_mass(lm, fst);
  std::cerr << "max admissible-mass error " << fmt(rep.max_error, "%.3g") << '\n';
  return 0;
}

int run_build_fsts(const std::string& lm_path, const std::string& dir) {
  const auto lm = load_lm(lm_path);
  fs::create_directories(dir);
  const auto models = KeyboardModels::build(lm, qwerty_layout(), TapModel{});
  std::ostringstream lex, lmf;
  write_text(lex, models.lexicon_fst);
  write_text(lmf, models.lm_fst.fst);
  write_file(fs::path(dir) / "lexicon.fst", lex.str());
  write_file(fs::path(dir) / "lm.fst", lmf.str());
  std::cerr << "lexicon FST: " << models.lexicon_fst.num_states() << " states; LM FST: "
            << models.lm_fst.fst.num_states() << " states\n";
  return 0;
}

struct SimulateArgs {
  std::string layout = "qwertz", text, in, out = "-", out_dir;
  TapModel tap;
  std::uint64_t seed = 1;
};

int run_simulate(const SimulateArgs& a) {
  a.tap.validate();
  const auto layout = layout_arg(a.layout);
  if (!a.text.empty()) {
    Output out(a.out);
    write_taps(*out, simulate_sentence(layout, a.tap, split_whitespace(a.text), a.seed));
    return 0;
  }
  if (a.in.empty() || a.out_dir.empty()) throw Error("simulate: give --text, or --in with --out-dir");
  fs::create_directories(a.out_dir);
  const auto taps = simulate_test_set(read_lines(a.in), layout, a.tap, a.seed);
  for (std::size_t i = 0; i < taps.size(); ++i) {
    std::ostringstream s;
    write_taps(s, taps[i]);
    char name[32];
    std::snprintf(name, sizeof name, "%05zu.tsv", i + 1);
    write_file(fs::path(a.out_dir) / name, s.str());
  }
  std::cerr << "simulated " << taps.size() << " sentences\n";
  return 0;
}

struct DecodeArgs {
  std::string lm, layout = "qwertz", taps, out = "-";
  std::vector<std::string> context;
  TapModel tap;
  DecoderArgs dec;
};

int run_decode(const DecodeArgs& a) {
  a.tap.validate();
  const auto cfg = a.dec.get();
  const auto models = KeyboardModels::build(load_lm(a.lm), layout_arg(a.layout), a.tap);
  const Decoder decoder(models.lexicon_fst, models.lm_fst.fst, models.lm.vocab, cfg);
  auto in = open_in(a.taps);
  const auto words = read_taps(in);
  const auto res = decode_sentence(words, models, decoder, context_state(decoder, a.context));
  Output out(a.out);
  for (std::size_t w = 0; w < res.candidates.size(); ++w) {
    *out << "# word " << w + 1 << '\n';
    const auto& cands = res.candidates[w];
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const auto& c = cands[i];
      *out << i + 1 << '\t' << fmt(c.total) << '\t' << fmt(c.spatial) << '\t' << fmt(c.lm) << '\t'
           << source_name(c.source) << '\t' << c.text() << '\n';
    }
  }
  std::string line;
  for (const auto& w : res.words) line += (line.empty() ? "" : " ") + w;
  *out << "result\t" << line << '\n';
  return 0;
}

struct EvalArgs {
  std::string config, tsv, hyps;
  unsigned threads = 0;
  bool threads_set = false;
};

int run_eval(const EvalArgs& a) {
  auto cfg = load_pipeline_config(a.config);
  if (a.threads_set) cfg.threads = a.threads;
  const auto layout = load_layout(cfg);
  const auto data = load_desk_data(cfg);
  if (data.audit) {
    std::cout << "corpus: " << data.train.size() << " train / " << data.test.size() << " test sentences, "
              << data.audit->novel_test_compounds << " of " << data.audit->test_compounds
              << " test compounds unseen in training (" << fmt(100 * data.audit->novel_fraction(), "%.1f")
              << "%)\n\n";
  }
  const auto systems = build_desk_systems(data, cfg, layout);
  const auto rep = run_desk_experiment(data, systems, cfg, layout);
  write_report(std::cout, rep);
  if (!a.tsv.empty()) {
    Output t(a.tsv);
    write_report_tsv(*t, rep);
  }
  if (!a.hyps.empty()) {
    fs::create_directories(a.hyps);
    for (const auto& s : rep.systems) {
      std::string text;
      for (const auto& h : s.hypotheses) text += h + '\n';
      write_file(fs::path(a.hyps) / (s.name + ".txt"), text);
    }
  }
  return 0;
}

int run_gen_corpus(const std::string& config, const std::string& dir, std::optional<std::uint64_t> seed) {
  auto in = open_in(config);
  auto cfg = read_synthetic_config(read_config(in).section("generator"));
  if (seed) cfg.seed = *seed;
  const auto corpus = generate_synthetic_corpus(cfg);
  fs::create_directories(dir);
  auto lines = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& l : v) s += l + '\n';
    return s;
  };
  write_file(fs::path(dir) / "train.txt", lines(corpus.train));
  write_file(fs::path(dir) / "test.txt", lines(corpus.test));
  std::ostringstream rules, audit;
  write_rules(rules, corpus.rules);
  write_audit(audit, corpus.audit);
  write_file(fs::path(dir) / "rules.txt", rules.str());
  write_file(fs::path(dir) / "audit.txt", audit.str());
  std::cerr << audit.str();
  return 0;
}

int run_dump(const std::string& lm_path, const std::string& fst_kind) {
  const auto lm = load_lm(lm_path);
  if (!fst_kind.empty()) {
    const auto models = KeyboardModels::build(lm, qwerty_layout(), TapModel{});
    write_text(std::cout, fst_kind == "lexicon" ? models.lexicon_fst : models.lm_fst.fst);
    return 0;
  }
  std::cout << "order\t" << lm.order << "\nnormalized\t" << (lm.normalized ? "yes" : "no") << "\nunits\t"
            << lm.vocab.size() << '\n';
  std::cout << "ngrams.1\t" << lm.predictable().size() << '\n';
  for (int k = 2; k <= lm.order; ++k) {
    std::size_t n = 0;
    for (const auto& [g, w] : lm.prob) n += static_cast<int>(g.size()) == k;
    std::cout << "ngrams." << k << '\t' << n << '\n';
  }
  std::map<BindingClass, std::size_t> by_left;
  for (UnitId u = 1; u <= static_cast<UnitId>(lm.vocab.size()); ++u) ++by_left[lm.vocab.unit(u).binding.left];
  for (const auto& [c, n] : by_left) std::cout << "units.left_class" << c << '\t' << n << '\n';
  const auto fst = lm_to_fst(lm);
  const auto rep = check_admissible_mass(lm, fst);
  std::cout << "lm_fst.states\t" << fst.fst.num_states() << "\nlm_fst.arcs\t" << fst.fst.num_arcs()
            << "\nmass.max_error\t" << fmt(rep.max_error, "%.3g") << "\nmass.violations\t" << rep.violations.size() << '\n';
  return 0;
}

struct ServeArgs {
  std::string lm, layout = "qwertz", host = "127.0.0.1";
  int port = 8080;
  long idle = 600;
  TapModel tap;
  DecoderArgs dec;
};

int run_serve(const ServeArgs& a) {
  a.tap.validate();
  const auto cfg = a.dec.get();
  auto models = std::make_shared<const KeyboardModels>(KeyboardModels::build(load_lm(a.lm), layout_arg(a.layout), a.tap));
  ServiceOptions opt;
  opt.idle_timeout = std::chrono::seconds(a.idle);
  DecodeService svc(models, cfg, opt);
  httplib::Server server;
  server.set_payload_max_length(1 << 20);
  svc.mount(server);
  if (!server.bind_to_port(a.host, a.port)) throw Error("cannot bind " + a.host + ":" + std::to_string(a.port));
  std::cerr << "listening on http://" << a.host << ":" << a.port << '\n';
  if (!server.listen_after_bind()) throw Error("server stopped with an error");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binding-typed subword keyboard decoding: corpora, LMs, FSTs, decoding and evaluation."};
  app.require_subcommand(1);
  std::function<int()> action;

  AnnotateArgs ann;
  auto* c_ann = app.add_subcommand("annotate", "decompound a corpus into binding-typed subword tokens");
  c_ann->add_option("--rules", ann.rules, "decompounding rules file")->required();
  c_ann->add_option("--vocab", ann.vocab, "curated vocabulary (default: the rules' base vocabulary)");
  c_ann->add_option("--in", ann.in, "input text, one sentence per line (- for stdin)")->capture_default_str();
  c_ann->add_option("--out", ann.out, "annotated output")->capture_default_str();
  c_ann->add_option("--lexicon", ann.lexicon, "also write the emitted unit lexicon");
  c_ann->add_flag("--no-split", ann.no_split, "keep words whole (word-based baseline)");
  c_ann->callback([&] { action = [&] { return run_annotate(ann); }; });

  std::string bl_in, bl_out = "-", bl_fst;
  auto* c_bl = app.add_subcommand("build-lexicon", "collect the unit lexicon of an annotated corpus");
  c_bl->add_option("--in", bl_in, "annotated corpus")->required();
  c_bl->add_option("--out", bl_out, "lexicon TSV")->capture_default_str();
  c_bl->add_option("--fst", bl_fst, "also write the lexicon FST (text)");
  c_bl->callback([&] { action = [&] { return run_build_lexicon(bl_in, bl_out, bl_fst); }; });

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train-lm", "estimate a back-off n-gram LM (not class-normalized)");
  c_tr->add_option("--in", tr.in, "annotated corpus")->required();
  c_tr->add_option("--out", tr.out, "LM file")->capture_default_str();
  c_tr->add_option("--order", tr.lm.order, "n-gram order")->capture_default_str()->check(CLI::Range(1, 9));
  c_tr->add_option("--max-unigrams", tr.lm.pruning.max_unigrams)->capture_default_str();
  c_tr->add_option("--max-ngrams", tr.lm.pruning.max_ngrams)->capture_default_str();
  c_tr->add_option("--cutoffs", tr.lm.pruning.count_cutoffs, "minimum count per order")->delimiter(',');
  c_tr->add_option("--discount", tr.lm.discount, "absolute discount")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  c_tr->callback([&] { action = [&] { return run_train_lm(tr); }; });

  std::string nl_in, nl_out = "-";
  bool nl_weak = false;
  auto* c_nl = app.add_subcommand("normalize-lm", "renormalize back-off per binding class");
  c_nl->add_option("--in", nl_in, "LM file")->required();
  c_nl->add_option("--out", nl_out, "normalized LM file")->capture_default_str();
  c_nl->add_flag("--weak", nl_weak, "keep back-off weights, only rescale class unigrams");
  c_nl->callback([&] { action = [&] { return run_normalize_lm(nl_in, nl_out, nl_weak); }; });

  std::string bf_lm, bf_dir;
  auto* c_bf = app.add_subcommand("build-fsts", "write the lexicon and LM transducers");
  c_bf->add_option("--lm", bf_lm, "normalized LM file")->required();
  c_bf->add_option("--out-dir", bf_dir, "output directory")->required();
  c_bf->callback([&] { action = [&] { return run_build_fsts(bf_lm, bf_dir); }; });

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "simulate noisy taps for text");
  c_sim->add_option("--layout", sim.layout, "qwerty, qwertz or a layout TSV")->capture_default_str();
  c_sim->add_option("--text", sim.text, "one sentence");
  c_sim->add_option("--in", sim.in, "sentences, one per line (needs --out-dir)");
  c_sim->add_option("--out", sim.out, "tap file for --text")->capture_default_str();
  c_sim->add_option("--out-dir", sim.out_dir, "one tap file per input sentence");
  c_sim->add_option("--seed", sim.seed)->capture_default_str();
  add_tap_options(c_sim, sim.tap);
  c_sim->callback([&] { action = [&] { return run_simulate(sim); }; });

  DecodeArgs dec;
  auto* c_dec = app.add_subcommand("decode", "decode a tap file and print n-best candidates per word");
  c_dec->add_option("--lm", dec.lm, "normalized LM file")->required();
  c_dec->add_option("--taps", dec.taps, "tap file")->required();
  c_dec->add_option("--layout", dec.layout, "qwerty, qwertz or a layout TSV")->capture_default_str();
  c_dec->add_option("--context", dec.context, "committed words preceding the input");
  c_dec->add_option("--out", dec.out)->capture_default_str();
  add_tap_options(c_dec, dec.tap);
  dec.dec.add(c_dec);
  c_dec->callback([&] { action = [&] { return run_decode(dec); }; });

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "word LM vs word LM + rewriter vs subword LM on simulated taps");
  c_ev->add_option("--config", ev.config, "pipeline config")->required();
  c_ev->add_option("--tsv", ev.tsv, "also write the report as TSV");
  c_ev->add_option("--hyps", ev.hyps, "write each system's decoded sentences to this directory");
  auto* thr = c_ev->add_option("--threads", ev.threads, "worker threads (default: config, else all cores)");
  c_ev->callback([&] {
    ev.threads_set = thr->count() > 0;
    action = [&] { return run_eval(ev); };
  });

  std::string gc_config, gc_dir;
  std::optional<std::uint64_t> gc_seed;
  auto* c_gc = app.add_subcommand("gen-corpus", "generate a synthetic compounding corpus");
  c_gc->add_option("--config", gc_config, "config with a [generator] section")->required();
  c_gc->add_option("--out-dir", gc_dir, "writes train.txt, test.txt, rules.txt, audit.txt")->required();
  c_gc->add_option("--seed", gc_seed, "override the generator seed");
  c_gc->callback([&] { action = [&] { return run_gen_corpus(gc_config, gc_dir, gc_seed); }; });

  std::string dump_lm, dump_fst;
  auto* c_dump = app.add_subcommand("dump", "summarize an LM, or print one of its transducers");
  c_dump->add_option("--lm", dump_lm, "LM file")->required();
  c_dump->add_option("--fst", dump_fst, "print the lexicon or lm transducer")->check(CLI::IsMember({"lexicon", "lm"}));
  c_dump->callback([&] { action = [&] { return run_dump(dump_lm, dump_fst); }; });

  ServeArgs sv;
  auto* c_sv = app.add_subcommand("serve", "HTTP decode service (POST /decode, GET /layout, POST /commit)");
  c_sv->add_option("--lm", sv.lm, "normalized LM file")->required();
  c_sv->add_option("--layout", sv.layout, "qwerty, qwertz or a layout TSV")->capture_default_str();
  c_sv->add_option("--host", sv.host)->capture_default_str();
  c_sv->add_option("--port", sv.port)->capture_default_str()->check(CLI::Range(1, 65535));
  c_sv->add_option("--idle-timeout", sv.idle, "session idle timeout in seconds")->capture_default_str();
  add_tap_options(c_sv, sv.tap);
  sv.dec.add(c_sv);
  c_sv->callback([&] { action = [&] { return run_serve(sv); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    return action();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
