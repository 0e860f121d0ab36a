#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "lcmt/optim.hpp"
#include "lcmt/translator.hpp"
#include "test_support.hpp"

using namespace lcmt;

namespace {

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

/// One parallel pair, a vocab that keeps its words whole, and a word model
/// overfitted to reproduce the pair, so decoding is predictable.
struct Fixture {
  SubwordVocab vocab;
  CharVocab chars;
  WordModel<float> word;
  std::vector<std::string> src_tokens{"kono", "[NOUN]", "wa"};
  std::vector<std::string> tgt_tokens{"the", "[NOUN]", "ran"};
  std::vector<int> src_ids, tgt_ids;
};

const Fixture& fixture() {
  static const Fixture fx = [] {
    Fixture f;
    std::vector<ParallelExample> corpus;
    for (int i = 0; i < 4; ++i) {
      ParallelExample ex;
      ex.id = i;
      ex.src_tokens = f.src_tokens;
      ex.tgt_tokens = f.tgt_tokens;
      corpus.push_back(ex);
    }
    f.vocab = SubwordVocab::train(corpus, 64);
    f.chars = CharVocab::build(corpus, {"cat", "cats", "run", "ran"});
    f.src_ids = f.vocab.encode(f.src_tokens);
    f.tgt_ids = f.vocab.encode(f.tgt_tokens);

    Rng rng(77);
    f.word.init(tiny_cfg(), f.vocab.size(), rng);
    nn::Adam<float> opt;
    f.word.visit([&opt](const std::string& name, const nn::TensorPtr<float>& t) {
      opt.register_param(name, t);
    });
    std::vector<WordBatchItem> batch{{f.src_ids, f.tgt_ids}};
    for (int step = 0; step < 400; ++step) {
      opt.zero_grad();
      train_step_word(f.word, batch, {});
      opt.step(1e-3);
    }
    return f;
  }();
  return fx;
}

InflectionLexicon toy_lexicon() {
  InflectionLexicon lex;
  lex.add({"cat", PosClass::Noun, "<NN>", "cat"});
  lex.add({"cat", PosClass::Noun, "<NNS>", "cats"});
  lex.add({"run", PosClass::Verb, "<VB>", "run"});
  lex.add({"run", PosClass::Verb, "<VBD>", "ran"});
  return lex;
}

ConstraintAnnotation noun_constraint() {
  ConstraintAnnotation c;
  c.pair_id = 0;
  c.entry.src_phrase = {"neko"};
  c.entry.tgt_phrase = {"cats"};
  c.entry.tgt_lemma = {"cat"};
  c.entry.pos_class = PosClass::Noun;
  c.src_begin = 1;
  c.src_end = 2;
  c.tgt_begin = 1;
  c.tgt_end = 2;
  c.reference_surface = {"cats"};
  return c;
}

std::uint64_t addon_checksum(const InflectorAddon<float>& addon) {
  return param_checksum<float>(
      [&addon](const nn::ParamVisitor<float>& fn) { addon.visit(fn); });
}

}  // namespace

TEST_CASE("strategy names round-trip") {
  for (auto s : {Strategy::None, Strategy::PhOracle, Strategy::PhLemma, Strategy::PhCommon,
                 Strategy::PhMorph, Strategy::Cs, Strategy::Proposed}) {
    CHECK(strategy_from(to_string(s)) == s);
  }
  CHECK_THROWS_WITH_AS(strategy_from("beam"), doctest::Contains("unknown strategy"), Error);
}

TEST_CASE("the overfitted model reproduces its training pair") {
  const auto& fx = fixture();
  REQUIRE(fx.src_ids.size() == 3);
  REQUIRE(fx.tgt_ids.size() == 3);
  DecodeOptions opt;
  opt.beam_size = 1;
  opt.max_len = 16;
  REQUIRE(decode_word(fx.word, fx.src_ids, opt) == fx.tgt_ids);
  opt.beam_size = 4;
  CHECK(decode_word(fx.word, fx.src_ids, opt) == fx.tgt_ids);
}

TEST_CASE("greedy decoding matches a hand-rolled argmax loop") {
  const auto& fx = fixture();
  nn::NoGradGuard guard;
  auto src_eos = fx.src_ids;
  src_eos.push_back(Specials::kEos);
  auto memory = fx.word.encode(src_eos, {});
  std::vector<int> prefix{Specials::kBos};
  std::vector<int> expected;
  for (int step = 0; step < 16; ++step) {
    auto logits = fx.word.logits(prefix, memory, {});
    int r = logits->rows - 1;
    int best = -1;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < logits->cols; ++j) {
      if (j == Specials::kPad || j == Specials::kBos) continue;
      if ((double)logits->at(r, j) > best_v) {
        best_v = logits->at(r, j);
        best = j;
      }
    }
    if (best == Specials::kEos) break;
    prefix.push_back(best);
    expected.push_back(best);
  }
  DecodeOptions opt;
  opt.beam_size = 1;
  opt.max_len = 16;
  CHECK(decode_word(fx.word, fx.src_ids, opt) == expected);
}

TEST_CASE("decoding validates its options") {
  const auto& fx = fixture();
  DecodeOptions opt;
  opt.beam_size = 0;
  CHECK_THROWS_WITH_AS(decode_word(fx.word, fx.src_ids, opt),
                       doctest::Contains("beam size"), Error);
  opt.beam_size = 1;
  opt.max_len = 0;
  CHECK_THROWS_WITH_AS(decode_word(fx.word, fx.src_ids, opt),
                       doctest::Contains("max_len"), Error);
}

TEST_CASE("context encoding locates the placeholder and spares the embedding") {
  const auto& fx = fixture();
  Rng rng(8);
  InflectorAddon<float> addon;
  addon.init(fx.word.cfg, fx.chars.size(), rng);

  auto ctx = context_encode(addon, fx.word, fx.tgt_ids, fx.vocab);
  CHECK(ctx.placeholder_index == 1);
  CHECK(ctx.states->rows == 3);
  CHECK(ctx.states->cols == fx.word.cfg.d_model);

  fx.word.embedding->zero_grad();
  nn::backward(nn::sum(ctx.states));
  float leak = 0.0f;
  for (float g : fx.word.embedding->g) leak += std::fabs(g);
  CHECK(leak == 0.0f);
  bool addon_has_grad = false;
  addon.visit([&addon_has_grad](const std::string&, const nn::TensorPtr<float>& t) {
    if (!t->g.empty()) addon_has_grad = true;
  });
  CHECK(addon_has_grad);

  std::vector<int> no_ph{fx.tgt_ids[0], fx.tgt_ids[2]};
  CHECK_THROWS_WITH_AS(context_encode(addon, fx.word, no_ph, fx.vocab),
                       doctest::Contains("found 0"), Error);
  std::vector<int> two_ph{fx.vocab.noun_id(), fx.tgt_ids[0], fx.vocab.verb_id()};
  CHECK_THROWS_WITH_AS(context_encode(addon, fx.word, two_ph, fx.vocab),
                       doctest::Contains("found 2"), Error);
  CHECK_THROWS_WITH_AS(context_encode_at(addon, fx.word, {}, 0),
                       doctest::Contains("empty target"), Error);
  CHECK_THROWS_WITH_AS(context_encode_at(addon, fx.word, fx.tgt_ids, 5),
                       doctest::Contains("outside"), Error);
}

TEST_CASE("memory assembly prefixes the placeholder state verbatim") {
  const auto& fx = fixture();
  Rng rng(9);
  InflectorAddon<float> addon;
  addon.init(fx.word.cfg, fx.chars.size(), rng);
  nn::NoGradGuard guard;
  auto ctx = context_encode(addon, fx.word, fx.tgt_ids, fx.vocab);
  auto h_p = nn::row(ctx.states, ctx.placeholder_index);

  auto mem = assemble_memory(addon, h_p, "cat", fx.chars);
  CHECK(mem.memory->rows == 4);  // h_p + 3 characters
  CHECK(mem.unk_chars == 0);
  for (int j = 0; j < mem.memory->cols; ++j) CHECK(mem.memory->at(0, j) == h_p->at(0, j));

  CHECK(assemble_memory(addon, h_p, "qz", fx.chars).unk_chars == 2);
  CHECK(assemble_memory(addon, h_p, "cat run", fx.chars).memory->rows == 8);

  CHECK_THROWS_WITH_AS(assemble_memory(addon, h_p, "", fx.chars),
                       doctest::Contains("empty lemma"), Error);
  auto bad = nn::make_tensor<float>(2, fx.word.cfg.d_model);
  CHECK_THROWS_WITH_AS(assemble_memory(addon, bad, "cat", fx.chars),
                       doctest::Contains("must be 1x"), Error);
}

TEST_CASE("character decoding is deterministic and bounded") {
  const auto& fx = fixture();
  Rng rng(10);
  InflectorAddon<float> addon;
  addon.init(fx.word.cfg, fx.chars.size(), rng);
  nn::NoGradGuard guard;
  auto ctx = context_encode(addon, fx.word, fx.tgt_ids, fx.vocab);
  auto h_p = nn::row(ctx.states, ctx.placeholder_index);
  auto mem = assemble_memory(addon, h_p, "cat", fx.chars);

  auto r1 = char_decode(addon, mem.memory, fx.chars, 10);
  auto r2 = char_decode(addon, mem.memory, fx.chars, 10);
  CHECK(r1.text == r2.text);
  CHECK(r1.truncated == r2.truncated);
  CHECK(utf8_chars(r1.text).size() <= 10);

  auto one = char_decode(addon, mem.memory, fx.chars, 1);
  CHECK(utf8_chars(one.text).size() <= 1);
  CHECK_THROWS_WITH_AS(char_decode(addon, mem.memory, fx.chars, 0),
                       doctest::Contains("max_len"), Error);
}

TEST_CASE("translate applies each strategy's fill") {
  const auto& fx = fixture();
  auto lex = toy_lexicon();
  auto c = noun_constraint();
  TranslateOptions opt;

  opt.strategy = Strategy::None;
  auto none = translate(fx.word, nullptr, fx.vocab, fx.chars, fx.src_tokens, nullptr, nullptr,
                        opt);
  CHECK(none.tokens == fx.tgt_tokens);
  CHECK(none.placeholder_count == 1);
  CHECK(none.fills.empty());

  opt.strategy = Strategy::Cs;
  auto cs = translate(fx.word, nullptr, fx.vocab, fx.chars, fx.src_tokens, nullptr, nullptr, opt);
  CHECK(cs.tokens == fx.tgt_tokens);
  CHECK(cs.fills.empty());

  opt.strategy = Strategy::PhOracle;
  auto oracle = translate(fx.word, nullptr, fx.vocab, fx.chars, fx.src_tokens, &c, nullptr, opt);
  CHECK(oracle.tokens == std::vector<std::string>{"the", "cats", "ran"});
  REQUIRE(oracle.fills.size() == 1);
  CHECK(oracle.fills[0].token_index == 1);
  CHECK(oracle.fills[0].placeholder == "[NOUN]");
  CHECK(oracle.fills[0].filled_with == "cats");

  // Splicing the placeholder back over the fill recovers the raw hypothesis.
  auto spliced = oracle.tokens;
  auto filled = split_ws(oracle.fills[0].filled_with);
  spliced.erase(spliced.begin() + oracle.fills[0].token_index,
                spliced.begin() + oracle.fills[0].token_index + (long)filled.size());
  spliced.insert(spliced.begin() + oracle.fills[0].token_index, oracle.fills[0].placeholder);
  CHECK(spliced == none.tokens);

  opt.strategy = Strategy::PhLemma;
  auto lemma = translate(fx.word, nullptr, fx.vocab, fx.chars, fx.src_tokens, &c, nullptr, opt);
  CHECK(lemma.tokens == std::vector<std::string>{"the", "cat", "ran"});

  opt.strategy = Strategy::PhCommon;
  auto common = translate(fx.word, nullptr, fx.vocab, fx.chars, fx.src_tokens, &c, &lex, opt);
  CHECK(common.tokens == std::vector<std::string>{"the", "cat", "ran"});

  auto verb_c = c;
  verb_c.entry.tgt_lemma = {"run"};
  verb_c.entry.pos_class = PosClass::Verb;
  auto common_v =
      translate(fx.word, nullptr, fx.vocab, fx.chars, fx.src_tokens, &verb_c, &lex, opt);
  CHECK(common_v.tokens == std::vector<std::string>{"the", "ran", "ran"});

  auto miss_c = c;
  miss_c.entry.tgt_lemma = {"dog"};
  auto common_miss =
      translate(fx.word, nullptr, fx.vocab, fx.chars, fx.src_tokens, &miss_c, &lex, opt);
  CHECK(common_miss.tokens == std::vector<std::string>{"the", "dog", "ran"});

  opt.strategy = Strategy::PhMorph;
  auto morph = translate(fx.word, nullptr, fx.vocab, fx.chars, fx.src_tokens, nullptr, &lex, opt);
  CHECK(morph.tokens == fx.tgt_tokens);  // no lemma+tag pairs to rewrite

  Rng rng(11);
  InflectorAddon<float> addon;
  addon.init(fx.word.cfg, fx.chars.size(), rng);
  opt.strategy = Strategy::Proposed;
  auto prop = translate(fx.word, &addon, fx.vocab, fx.chars, fx.src_tokens, &c, nullptr, opt);
  CHECK(prop.placeholder_count == 1);
  REQUIRE(prop.fills.size() == 1);
  CHECK(prop.fills[0].placeholder == "[NOUN]");
  CHECK(prop.unk_chars == 0);
}

TEST_CASE("translate validates strategy prerequisites") {
  const auto& fx = fixture();
  auto lex = toy_lexicon();
  auto c = noun_constraint();
  TranslateOptions opt;

  for (auto s : {Strategy::PhOracle, Strategy::PhLemma, Strategy::PhCommon, Strategy::Proposed}) {
    opt.strategy = s;
    CHECK_THROWS_WITH_AS(
        translate(fx.word, nullptr, fx.vocab, fx.chars, fx.src_tokens, nullptr, &lex, opt),
        doctest::Contains("requires a constraint"), Error);
  }
  opt.strategy = Strategy::Proposed;
  CHECK_THROWS_WITH_AS(
      translate(fx.word, nullptr, fx.vocab, fx.chars, fx.src_tokens, &c, nullptr, opt),
      doctest::Contains("add-on"), Error);
  opt.strategy = Strategy::PhCommon;
  CHECK_THROWS_WITH_AS(
      translate(fx.word, nullptr, fx.vocab, fx.chars, fx.src_tokens, &c, nullptr, opt),
      doctest::Contains("lexicon"), Error);
  opt.strategy = Strategy::PhMorph;
  CHECK_THROWS_WITH_AS(
      translate(fx.word, nullptr, fx.vocab, fx.chars, fx.src_tokens, nullptr, nullptr, opt),
      doctest::Contains("lexicon"), Error);
}

TEST_CASE("word training steps collect gradients and reduce the loss") {
  const auto& fx = fixture();
  Rng rng(12);
  WordModel<float> model;
  model.init(tiny_cfg(), fx.vocab.size(), rng);
  nn::Adam<float> opt;
  model.visit([&opt](const std::string& name, const nn::TensorPtr<float>& t) {
    opt.register_param(name, t);
  });
  std::vector<WordBatchItem> batch{{fx.src_ids, fx.tgt_ids}};

  double first = train_step_word(model, batch, {});
  CHECK(first > 0.0);
  CHECK_FALSE(model.embedding->g.empty());
  opt.step(1e-3);
  double last = first;
  for (int step = 0; step < 60; ++step) {
    opt.zero_grad();
    last = train_step_word(model, batch, {});
    opt.step(1e-3);
  }
  CHECK(last < first);

  CHECK_THROWS_WITH_AS(train_step_word(model, {}, {}), doctest::Contains("empty batch"), Error);
  std::vector<WordBatchItem> bad{{fx.src_ids, {}}};
  CHECK_THROWS_WITH_AS(train_step_word(model, bad, {}), doctest::Contains("empty target"), Error);
}

TEST_CASE("add-on training learns while the word model stays frozen") {
  const auto& fx = fixture();
  Rng rng(13);
  InflectorAddon<float> addon;
  addon.init(fx.word.cfg, fx.chars.size(), rng);
  nn::Adam<float> opt;
  addon.visit([&opt](const std::string& name, const nn::TensorPtr<float>& t) {
    opt.register_param(name, t);
  });

  AddonBatchItem item;
  item.context_ids = fx.tgt_ids;
  item.lemma = "cat";
  item.surface = "cats";

  auto word_before = word_model_checksum(fx.word);
  auto addon_before = addon_checksum(addon);
  double no_grad_loss = addon_example_loss(fx.word, addon, item, fx.vocab, fx.chars);
  fx.word.embedding->zero_grad();

  double first = 0.0, last = 0.0;
  for (int step = 0; step < 50; ++step) {
    opt.zero_grad();
    double loss = train_step_addon(fx.word, addon, {item}, fx.vocab, fx.chars, {});
    if (step == 0) first = loss;
    last = loss;
    opt.step(1e-3);
  }
  CHECK(first == doctest::Approx(no_grad_loss));
  CHECK(last < first);
  float leak = 0.0f;
  for (float g : fx.word.embedding->g) leak += std::fabs(g);
  CHECK(leak == 0.0f);
  CHECK(word_model_checksum(fx.word) == word_before);
  CHECK(addon_checksum(addon) != addon_before);
}

TEST_CASE("add-on training rejects malformed batches") {
  const auto& fx = fixture();
  Rng rng(14);
  InflectorAddon<float> addon;
  addon.init(fx.word.cfg, fx.chars.size(), rng);

  CHECK_THROWS_WITH_AS(train_step_addon(fx.word, addon, {}, fx.vocab, fx.chars, {}),
                       doctest::Contains("empty batch"), Error);
  AddonBatchItem no_surface{fx.tgt_ids, "cat", ""};
  CHECK_THROWS_WITH_AS(train_step_addon(fx.word, addon, {no_surface}, fx.vocab, fx.chars, {}),
                       doctest::Contains("empty reference surface"), Error);
  AddonBatchItem no_ph{{fx.tgt_ids[0], fx.tgt_ids[2]}, "cat", "cats"};
  CHECK_THROWS_WITH_AS(train_step_addon(fx.word, addon, {no_ph}, fx.vocab, fx.chars, {}),
                       doctest::Contains("found 0"), Error);
}
