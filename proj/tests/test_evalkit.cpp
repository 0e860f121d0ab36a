#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "lcmt/evalkit.hpp"
#include "lcmt/optim.hpp"
#include "test_support.hpp"

using namespace lcmt;
using testutil::TempDir;

namespace {

/// Independent BLEU re-derivation for randomized cross-checks. Inputs are
/// plain space-joined letters, so 13a tokenization is the identity.
double oracle_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
  std::array<long, 4> correct{}, total{};
  long hyp_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    auto h = split_ws(hyps[i]);
    auto r = split_ws(refs[i]);
    hyp_len += (long)h.size();
    ref_len += (long)r.size();
    for (int n = 1; n <= 4; ++n) {
      if ((int)h.size() < n) continue;
      total[n - 1] += (long)h.size() - n + 1;
      std::map<std::string, long> ref_counts, hyp_counts;
      for (int j = 0; j + n <= (int)r.size(); ++j) {
        std::string key;
        for (int t = 0; t < n; ++t) key += r[j + t] + ' ';
        ++ref_counts[key];
      }
      for (int j = 0; j + n <= (int)h.size(); ++j) {
        std::string key;
        for (int t = 0; t < n; ++t) key += h[j + t] + ' ';
        ++hyp_counts[key];
      }
      for (const auto& [key, count] : hyp_counts) {
        auto it = ref_counts.find(key);
        if (it != ref_counts.end()) correct[n - 1] += std::min(count, it->second);
      }
    }
  }
  if (hyp_len == 0) return 0.0;
  double smooth = 1.0, log_sum = 0.0;
  for (int n = 0; n < 4; ++n) {
    if (total[n] == 0) return 0.0;
    double p;
    if (correct[n] == 0) {
      smooth *= 2.0;
      p = 1.0 / (smooth * (double)total[n]);
    } else {
      p = (double)correct[n] / (double)total[n];
    }
    log_sum += std::log(p);
  }
  double bp = hyp_len >= ref_len ? 1.0 : std::exp(1.0 - (double)ref_len / (double)hyp_len);
  return bp * std::exp(log_sum / 4.0) * 100.0;
}

nn::TransformerConfig tiny_cfg() {
  nn::TransformerConfig cfg;
  cfg.d_model = 16;
  cfg.n_heads = 2;
  cfg.n_layers = 1;
  cfg.d_ff = 32;
  cfg.max_positions = 32;
  cfg.dropout = 0.0;
  return cfg;
}

/// Overfits a word model on three pairs (one carrying a placeholder), so the
/// evaluation grid has fully predictable hypotheses.
struct EvalFixture {
  std::vector<ParallelExample> train, test;
  SubwordVocab vocab;
  CharVocab chars;
  WordModel<float> word;
  std::vector<DictEntry> noun_dict;
  InflectionLexicon lexicon;
};

const EvalFixture& eval_fixture() {
  static const EvalFixture fx = [] {
    EvalFixture f;
    std::vector<std::vector<std::string>> srcs = {{"kono", "neko", "wa", "hashiru"},
                                                  {"sono", "inu", "wa", "suwaru"},
                                                  {"kono", "[NOUN]", "wa", "hashiru"}};
    std::vector<std::vector<std::string>> tgts = {{"the", "cat", "ran", "today"},
                                                  {"the", "dog", "sat", "down"},
                                                  {"the", "[NOUN]", "ran", "today"}};
    for (int i = 0; i < 3; ++i) {
      ParallelExample ex;
      ex.id = i;
      ex.src_tokens = srcs[i];
      ex.tgt_tokens = tgts[i];
      f.train.push_back(ex);
    }
    ParallelExample test_pair;
    test_pair.id = 0;
    test_pair.src_tokens = {"kono", "neko", "wa", "hashiru"};
    test_pair.tgt_tokens = {"the", "cats", "ran", "today"};
    f.test.push_back(test_pair);

    std::vector<ParallelExample> vocab_corpus;
    for (int rep = 0; rep < 4; ++rep)
      for (const auto& ex : f.train) vocab_corpus.push_back(ex);
    f.vocab = SubwordVocab::train(vocab_corpus, 96);
    f.chars = CharVocab::build(f.train, {"cats"});

    DictEntry entry;
    entry.src_phrase = {"neko"};
    entry.tgt_phrase = {"cats"};
    entry.tgt_lemma = {"cat"};
    entry.pos_class = PosClass::Noun;
    f.noun_dict.push_back(entry);
    f.lexicon.add({"cat", PosClass::Noun, "<NN>", "cat"});
    f.lexicon.add({"cat", PosClass::Noun, "<NNS>", "cats"});
    f.lexicon.add({"run", PosClass::Verb, "<VBD>", "ran"});

    Rng rng(31);
    f.word.init(tiny_cfg(), f.vocab.size(), rng);
    nn::Adam<float> opt;
    f.word.visit([&opt](const std::string& name, const nn::TensorPtr<float>& t) {
      opt.register_param(name, t);
    });
    std::vector<WordBatchItem> batch;
    for (const auto& ex : f.train)
      batch.push_back({f.vocab.encode(ex.src_tokens), f.vocab.encode(ex.tgt_tokens)});
    for (int step = 0; step < 1200; ++step) {
      opt.zero_grad();
      train_step_word(f.word, batch, {});
      opt.step(1e-3);
    }
    return f;
  }();
  return fx;
}

ConstrainedOutput make_output(const std::string& hyp, const std::vector<std::string>& surface) {
  ConstrainedOutput out;
  out.hypothesis = hyp;
  out.constraint.reference_surface = surface;
  return out;
}

}  // namespace

TEST_CASE("13a tokenization handles punctuation, digits, and entities") {
  CHECK(tokenize_13a("Hello, world!") ==
        std::vector<std::string>{"Hello", ",", "world", "!"});
  CHECK(tokenize_13a("pi is 3.14.") == std::vector<std::string>{"pi", "is", "3.14", "."});
  CHECK(tokenize_13a("1,000 cats") == std::vector<std::string>{"1,000", "cats"});
  CHECK(tokenize_13a("pages 3-4") == std::vector<std::string>{"pages", "3", "-", "4"});
  CHECK(tokenize_13a("well-known fact") == std::vector<std::string>{"well-known", "fact"});
  CHECK(tokenize_13a("don't stop") == std::vector<std::string>{"don't", "stop"});
  CHECK(tokenize_13a("a &amp; b") == std::vector<std::string>{"a", "&", "b"});
  CHECK(tokenize_13a("&lt;tag&gt;") == std::vector<std::string>{"<", "tag", ">"});
  CHECK(tokenize_13a("one\ntwo") == std::vector<std::string>{"one", "two"});
  CHECK(tokenize_13a("a <skipped> b") == std::vector<std::string>{"a", "b"});
  CHECK(tokenize_13a("") == std::vector<std::string>{});
  CHECK(tokenize_13a("   ") == std::vector<std::string>{});
}

TEST_CASE("identical corpora score exactly 100") {
  std::vector<std::string> text{"the cat sat on the mat", "a dog ran"};
  auto res = corpus_bleu(text, text);
  CHECK(res.score == 100.0);
  CHECK(res.brevity_penalty == 1.0);
  for (double p : res.precisions) CHECK(p == 1.0);
}

TEST_CASE("unigram counts are clipped against the reference") {
  auto res = corpus_bleu({"the the the the"}, {"the cat"});
  CHECK(res.hyp_len == 4);
  CHECK(res.ref_len == 2);
  CHECK(res.precisions[0] == 0.25);  // one clipped match out of four
  CHECK(res.brevity_penalty == 1.0);
  CHECK(res.score > 0.0);
  CHECK(res.score < 100.0);
}

TEST_CASE("degenerate inputs score zero without crashing") {
  CHECK(corpus_bleu({""}, {"a b c"}).score == 0.0);
  CHECK(corpus_bleu({""}, {"a b c"}).brevity_penalty == 0.0);
  // No 4-grams anywhere: smoothing cannot rescue an order with no mass.
  CHECK(corpus_bleu({"a b"}, {"a b"}).score == 0.0);
  CHECK_THROWS_WITH_AS(corpus_bleu({}, {}), doctest::Contains("empty hypothesis"), Error);
  CHECK_THROWS_WITH_AS(corpus_bleu({"a"}, {"a", "b"}), doctest::Contains("hypotheses vs"),
                       Error);
}

TEST_CASE("randomized corpora agree with an independent reimplementation") {
  Rng rng(77);
  const std::vector<std::string> alphabet{"a", "b", "c", "d"};
  for (int trial = 0; trial < 50; ++trial) {
    int n_sents = 1 + (int)rng.next_below(6);
    std::vector<std::string> hyps, refs;
    for (int s = 0; s < n_sents; ++s) {
      auto sentence = [&rng, &alphabet](int max_len) {
        int len = (int)rng.next_below((std::uint64_t)max_len + 1);
        std::vector<std::string> toks;
        for (int t = 0; t < len; ++t) toks.push_back(alphabet[rng.next_below(alphabet.size())]);
        return join(toks);
      };
      hyps.push_back(sentence(9));
      refs.push_back(sentence(9));
    }
    auto got = corpus_bleu(hyps, refs).score;
    auto want = oracle_bleu(hyps, refs);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("corpus BLEU is invariant to sentence order") {
  std::vector<std::string> hyps{"a b c d e", "b b c", "d e a b c d", "a"};
  std::vector<std::string> refs{"a b c d d", "b c c", "d e a b c e", "b"};
  auto base = corpus_bleu(hyps, refs).score;
  auto order = shuffled_indices(hyps.size(), 5);
  std::vector<std::string> hyps2, refs2;
  for (auto i : order) {
    hyps2.push_back(hyps[i]);
    refs2.push_back(refs[i]);
  }
  CHECK(corpus_bleu(hyps2, refs2).score == base);
}

TEST_CASE("term matching is case-insensitive and contiguous") {
  CHECK(term_match("The Cats sat down", {"cats"}));
  CHECK(term_match("see the guest houses there", {"guest", "houses"}));
  CHECK_FALSE(term_match("guest big houses", {"guest", "houses"}));
  CHECK(term_match("it was CATS.", {"cats"}));  // punctuation splits off
  CHECK_FALSE(term_match("the cat sat", {"cats"}));
  CHECK_FALSE(term_match("anything", {}));

  std::vector<ConstrainedOutput> outputs{make_output("the cats ran", {"cats"}),
                                         make_output("the cat ran", {"cats"})};
  CHECK(term_use_rate(outputs) == 0.5);
  CHECK_THROWS_WITH_AS(term_use_rate({}), doctest::Contains("no outputs"), Error);
}

TEST_CASE("evaluation reports round-trip through json") {
  EvalReport report;
  report.strategy = "proposed";
  report.seeds = {1, 2, 3};
  EvalCell cell;
  cell.present = true;
  cell.bleu = 41.25;
  cell.term_use_rate = 0.875;
  cell.n_constrained = 40;
  cell.n_matched = 35;
  cell.n_placeholder_emitted = 38;
  report.cells["NOUN-seen"] = cell;
  report.cells["VERB-unseen"] = EvalCell{};  // absent

  auto j = report.to_json();
  CHECK(j["cells"]["VERB-unseen"].is_null());
  CHECK(j["cells"]["NOUN-seen"]["bleu"] == 41.25);

  auto back = EvalReport::from_json(j);
  CHECK(back.strategy == "proposed");
  CHECK(back.seeds == report.seeds);
  REQUIRE(back.cells.count("NOUN-seen") == 1);
  CHECK(back.cells["NOUN-seen"].present);
  CHECK(back.cells["NOUN-seen"].bleu == 41.25);
  CHECK(back.cells["NOUN-seen"].term_use_rate == 0.875);
  CHECK(back.cells["NOUN-seen"].n_matched == 35);
  REQUIRE(back.cells.count("VERB-unseen") == 1);
  CHECK_FALSE(back.cells["VERB-unseen"].present);

  auto table = report.render_table();
  CHECK(table.find("strategy: proposed") != std::string::npos);
  CHECK(table.find("NOUN-seen") != std::string::npos);
  CHECK(table.find("(absent)") != std::string::npos);
  CHECK(table.find("41.25") != std::string::npos);
}

TEST_CASE("annotation samples are deterministic and size-checked") {
  TempDir dir("annot");
  std::vector<ConstrainedOutput> outputs;
  for (int i = 0; i < 5; ++i) {
    auto out = make_output("hyp " + std::to_string(i), {"term"});
    out.source = "src " + std::to_string(i);
    out.reference = "ref " + std::to_string(i);
    outputs.push_back(out);
  }
  sample_for_annotation(outputs, 3, 9, dir.file("a.tsv"));
  sample_for_annotation(outputs, 3, 9, dir.file("b.tsv"));
  sample_for_annotation(outputs, 3, 10, dir.file("c.tsv"));
  auto a = testutil::read_text(dir.file("a.tsv"));
  CHECK(a == testutil::read_text(dir.file("b.tsv")));
  CHECK(std::count(a.begin(), a.end(), '\n') == 4);  // header + 3 rows
  CHECK(a.find("source\treference\thypothesis\tconstraint\ttag") != std::string::npos);
  CHECK_THROWS_WITH_AS(sample_for_annotation(outputs, 6, 9, dir.file("d.tsv")),
                       doctest::Contains("exceeds"), Error);
}

TEST_CASE("the evaluation fixture model reproduces its training pairs") {
  const auto& fx = eval_fixture();
  DecodeOptions opt;
  opt.beam_size = 1;
  opt.max_len = 16;
  for (const auto& ex : fx.train) {
    REQUIRE(decode_word(fx.word, fx.vocab.encode(ex.src_tokens), opt) ==
            fx.vocab.encode(ex.tgt_tokens));
  }
}

TEST_CASE("run_cell scores a constrained cell end to end") {
  const auto& fx = eval_fixture();
  ModelBundle bundle{&fx.word, nullptr, 31};

  auto base = run_cell(bundle, Strategy::None, fx.noun_dict, fx.test, fx.vocab, fx.chars,
                       fx.lexicon, PosClass::Noun, 1);
  REQUIRE(base.cell.present);
  CHECK(base.cell.n_constrained == 1.0);
  REQUIRE(base.outputs.size() == 1);
  CHECK(base.outputs[0].hypothesis == "the cat ran today");  // overfit output, wrong inflection
  CHECK(base.cell.term_use_rate == 0.0);
  CHECK(base.cell.n_placeholder_emitted == 0.0);
  CHECK(base.cell.bleu < 100.0);

  auto oracle = run_cell(bundle, Strategy::PhOracle, fx.noun_dict, fx.test, fx.vocab, fx.chars,
                         fx.lexicon, PosClass::Noun, 1);
  REQUIRE(oracle.cell.present);
  CHECK(oracle.outputs[0].hypothesis == "the cats ran today");
  CHECK(oracle.cell.term_use_rate == 1.0);
  CHECK(oracle.cell.n_placeholder_emitted == 1.0);
  CHECK(oracle.cell.bleu == doctest::Approx(100.0));
  CHECK(oracle.cell.bleu > base.cell.bleu);

  auto verb = run_cell(bundle, Strategy::None, fx.noun_dict, fx.test, fx.vocab, fx.chars,
                       fx.lexicon, PosClass::Verb, 1);
  CHECK_FALSE(verb.cell.present);
  CHECK(verb.outputs.empty());

  ModelBundle empty;
  CHECK_THROWS_WITH_AS(run_cell(empty, Strategy::None, fx.noun_dict, fx.test, fx.vocab, fx.chars,
                                fx.lexicon, PosClass::Noun, 1),
                       doctest::Contains("missing word model"), Error);
}

TEST_CASE("run_grid produces all four cells and averages over models") {
  const auto& fx = eval_fixture();
  ModelBundle bundle{&fx.word, nullptr, 31};

  auto report = run_grid({bundle}, Strategy::PhOracle, fx.noun_dict, {}, fx.test, fx.vocab,
                         fx.chars, fx.lexicon, 1);
  CHECK(report.strategy == "ph-oracle");
  CHECK(report.seeds == std::vector<std::uint64_t>{31});
  REQUIRE(report.cells.size() == 4);
  for (const auto& key : {"NOUN-seen", "NOUN-unseen", "VERB-seen", "VERB-unseen"})
    CHECK(report.cells.count(key) == 1);
  CHECK(report.cells["NOUN-seen"].present);
  CHECK_FALSE(report.cells["NOUN-unseen"].present);  // empty unseen dictionary
  CHECK_FALSE(report.cells["VERB-seen"].present);
  CHECK(report.cells["NOUN-seen"].term_use_rate == 1.0);

  auto averaged = run_grid({bundle, bundle}, Strategy::PhOracle, fx.noun_dict, {}, fx.test,
                           fx.vocab, fx.chars, fx.lexicon, 1);
  CHECK(averaged.seeds.size() == 2);
  CHECK(averaged.cells["NOUN-seen"].bleu == report.cells["NOUN-seen"].bleu);
  CHECK(averaged.cells["NOUN-seen"].n_constrained == 1.0);

  CHECK_THROWS_WITH_AS(run_grid({}, Strategy::None, fx.noun_dict, {}, fx.test, fx.vocab,
                                fx.chars, fx.lexicon, 1),
                       doctest::Contains("no models"), Error);
}
