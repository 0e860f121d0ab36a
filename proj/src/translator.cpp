#include "lcmt/translator.hpp"

#include <algorithm>
#include <cmath>

namespace lcmt {
namespace {

std::vector<int> with_eos(std::vector<int> ids) {
  ids.push_back(Specials::kEos);
  return ids;
}

/// Log-softmax of one logits row.
std::vector<double> log_probs_row(const nn::TensorPtr<float>& logits, int r) {
  double mx = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < logits->cols; ++j) mx = std::max(mx, (double)logits->at(r, j));
  double z = 0;
  for (int j = 0; j < logits->cols; ++j) z += std::exp((double)logits->at(r, j) - mx);
  double lse = mx + std::log(z);
  std::vector<double> out(logits->cols);
  for (int j = 0; j < logits->cols; ++j) out[j] = (double)logits->at(r, j) - lse;
  return out;
}

bool is_placeholder_token(const std::string& token) {
  return token == Specials::kNoun || token == Specials::kVerb;
}

}  // namespace

Strategy strategy_from(const std::string& s) {
  if (s == "none") return Strategy::None;
  if (s == "ph-oracle") return Strategy::PhOracle;
  if (s == "ph-lemma") return Strategy::PhLemma;
  if (s == "ph-common") return Strategy::PhCommon;
  if (s == "ph-morph") return Strategy::PhMorph;
  if (s == "cs") return Strategy::Cs;
  if (s == "proposed") return Strategy::Proposed;
  fail("unknown strategy '", s,
       "' (expected none, ph-oracle, ph-lemma, ph-common, ph-morph, cs, or proposed)");
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::None: return "none";
    case Strategy::PhOracle: return "ph-oracle";
    case Strategy::PhLemma: return "ph-lemma";
    case Strategy::PhCommon: return "ph-common";
    case Strategy::PhMorph: return "ph-morph";
    case Strategy::Cs: return "cs";
    case Strategy::Proposed: return "proposed";
  }
  fail("bad strategy value");
}

ContextEncoding context_encode_at(const InflectorAddon<float>& addon,
                                  const WordModel<float>& word,
                                  const std::vector<int>& target_ids, int placeholder_index,
                                  const nn::DropoutCtx<float>& drop) {
  check(!target_ids.empty(), "context encoder: empty target sequence");
  check(placeholder_index >= 0 && placeholder_index < (int)target_ids.size(),
        "context encoder: placeholder index ", placeholder_index, " outside sequence of ",
        target_ids.size(), " tokens");
  auto table = nn::detach(word.embedding);
  auto x = drop(nn::embed_sequence(table, target_ids, addon.ctx_cfg));
  ContextEncoding out;
  out.states = addon.context_encoder.forward(x, drop);
  out.placeholder_index = placeholder_index;
  return out;
}

ContextEncoding context_encode(const InflectorAddon<float>& addon, const WordModel<float>& word,
                               const std::vector<int>& target_ids, const SubwordVocab& vocab,
                               const nn::DropoutCtx<float>& drop) {
  int noun = vocab.noun_id(), verb = vocab.verb_id();
  int index = -1, count = 0;
  for (std::size_t i = 0; i < target_ids.size(); ++i) {
    if (target_ids[i] == noun || target_ids[i] == verb) {
      ++count;
      if (index < 0) index = (int)i;
    }
  }
  check(count == 1, "context encoder expects exactly one placeholder, found ", count);
  return context_encode_at(addon, word, target_ids, index, drop);
}

MemoryResult assemble_memory(const InflectorAddon<float>& addon, const nn::TensorPtr<float>& h_p,
                             const std::string& lemma, const CharVocab& chars) {
  check(!lemma.empty(), "assemble_memory: empty lemma");
  check(h_p->rows == 1 && h_p->cols == addon.ctx_cfg.d_model,
        "assemble_memory: placeholder state must be 1x", addon.ctx_cfg.d_model);
  auto ids = chars.encode(lemma);
  MemoryResult out;
  for (int id : ids)
    if (id == Specials::kUnk) ++out.unk_chars;
  auto embedded = nn::embed_sequence(addon.char_embedding, ids, addon.char_cfg);
  out.memory = nn::concat_rows(h_p, embedded);
  return out;
}

CharDecodeResult char_decode(const InflectorAddon<float>& addon,
                             const nn::TensorPtr<float>& memory, const CharVocab& chars,
                             int max_len) {
  check(max_len >= 1, "char_decode: max_len must be >= 1");
  nn::NoGradGuard guard;
  std::vector<int> ids{Specials::kBos};
  CharDecodeResult out;
  out.truncated = true;
  while ((int)ids.size() - 1 < max_len) {
    auto x = nn::embed_sequence(addon.char_embedding, ids, addon.char_cfg);
    auto logits = addon.char_decoder.forward(x, memory, {});
    int next = nn::argmax_row(logits, logits->rows - 1);
    if (next == Specials::kEos) {
      out.truncated = false;
      break;
    }
    ids.push_back(next);
  }
  out.text = chars.decode(std::vector<int>(ids.begin() + 1, ids.end()));
  return out;
}

std::vector<int> decode_word(const WordModel<float>& word, const std::vector<int>& src_ids,
                             const DecodeOptions& opt) {
  check(opt.beam_size >= 1, "decode: beam size must be >= 1");
  check(opt.max_len >= 1, "decode: max_len must be >= 1");
  nn::NoGradGuard guard;
  auto memory = word.encode(with_eos(src_ids), {});

  struct Hyp {
    std::vector<int> ids;  // starts with BOS
    double logp = 0.0;
    bool finished = false;
    double normalized() const {
      return logp / std::max<std::size_t>(1, ids.size() - 1);
    }
  };
  std::vector<Hyp> beams{{{Specials::kBos}, 0.0, false}};
  for (int step = 0; step < opt.max_len + 1; ++step) {
    bool all_done = std::all_of(beams.begin(), beams.end(),
                                [](const Hyp& h) { return h.finished; });
    if (all_done) break;
    std::vector<Hyp> candidates;
    for (const auto& hyp : beams) {
      if (hyp.finished) {
        candidates.push_back(hyp);
        continue;
      }
      auto logits = word.logits(hyp.ids, memory, {});
      auto lp = log_probs_row(logits, logits->rows - 1);
      // PAD and BOS never belong in a hypothesis.
      lp[Specials::kPad] = -std::numeric_limits<double>::infinity();
      lp[Specials::kBos] = -std::numeric_limits<double>::infinity();
      std::vector<int> order(lp.size());
      for (std::size_t j = 0; j < order.size(); ++j) order[j] = (int)j;
      int top = std::min<int>(opt.beam_size, (int)order.size());
      std::partial_sort(order.begin(), order.begin() + top, order.end(),
                        [&lp](int a, int b) { return lp[a] > lp[b] || (lp[a] == lp[b] && a < b); });
      for (int j = 0; j < top; ++j) {
        Hyp next = hyp;
        next.logp += lp[order[j]];
        if (order[j] == Specials::kEos) {
          next.finished = true;
        } else {
          next.ids.push_back(order[j]);
          if ((int)next.ids.size() - 1 >= opt.max_len) next.finished = true;
        }
        candidates.push_back(std::move(next));
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Hyp& a, const Hyp& b) { return a.logp > b.logp; });
    if ((int)candidates.size() > opt.beam_size) candidates.resize(opt.beam_size);
    beams = std::move(candidates);
  }
  auto best = std::max_element(beams.begin(), beams.end(), [](const Hyp& a, const Hyp& b) {
    if (a.finished != b.finished) return !a.finished && b.finished;
    return a.normalized() < b.normalized();
  });
  return std::vector<int>(best->ids.begin() + 1, best->ids.end());
}

TranslationResult translate(const WordModel<float>& word, const InflectorAddon<float>* addon,
                            const SubwordVocab& vocab, const CharVocab& chars,
                            const std::vector<std::string>& src_tokens,
                            const ConstraintAnnotation* constraint,
                            const InflectionLexicon* lexicon, const TranslateOptions& opt) {
  bool needs_constraint = opt.strategy != Strategy::None && opt.strategy != Strategy::Cs &&
                          opt.strategy != Strategy::PhMorph;
  check(!needs_constraint || constraint, "strategy ", to_string(opt.strategy),
        " requires a constraint");
  check(opt.strategy != Strategy::Proposed || addon,
        "strategy proposed requires an inflection add-on");
  check((opt.strategy != Strategy::PhCommon && opt.strategy != Strategy::PhMorph) || lexicon,
        "strategy ", to_string(opt.strategy), " requires an inflection lexicon");

  auto src_ids = vocab.encode(src_tokens);
  DecodeOptions dec;
  dec.beam_size = opt.beam_size;
  dec.max_len = std::min(word.cfg.max_positions - 1, 2 * (int)src_ids.size() + 8);
  auto hyp_ids = decode_word(word, src_ids, dec);
  auto tokens = vocab.decode(hyp_ids);

  TranslationResult res;
  for (const auto& tok : tokens)
    if (is_placeholder_token(tok)) ++res.placeholder_count;

  auto fill_all = [&res, &tokens](const std::vector<std::string>& fill) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!is_placeholder_token(tokens[i])) {
        out.push_back(tokens[i]);
        continue;
      }
      res.fills.push_back({(int)i, tokens[i], join(fill)});
      out.insert(out.end(), fill.begin(), fill.end());
    }
    return out;
  };

  switch (opt.strategy) {
    case Strategy::None:
    case Strategy::Cs:
      res.tokens = tokens;
      break;
    case Strategy::PhOracle:
      res.tokens = fill_all(constraint->reference_surface);
      break;
    case Strategy::PhLemma:
      res.tokens = fill_all(constraint->entry.tgt_lemma);
      break;
    case Strategy::PhCommon: {
      // Common-form fill: singular for nouns, past tense for verbs.
      auto fill = constraint->entry.tgt_lemma;
      const std::string tag = constraint->entry.pos_class == PosClass::Noun ? "<NN>" : "<VBD>";
      auto surface = lexicon->lookup(fill.back(), constraint->entry.pos_class, tag);
      if (surface) fill.back() = *surface;
      res.tokens = fill_all(fill);
      break;
    }
    case Strategy::PhMorph:
      res.tokens = apply_morph_postprocess(tokens, *lexicon);
      break;
    case Strategy::Proposed: {
      if (res.placeholder_count == 0) {
        res.tokens = tokens;
        break;
      }
      int noun = vocab.noun_id(), verb = vocab.verb_id();
      int index = -1;
      for (std::size_t i = 0; i < hyp_ids.size(); ++i) {
        if (hyp_ids[i] == noun || hyp_ids[i] == verb) {
          index = (int)i;
          break;
        }
      }
      nn::NoGradGuard guard;
      auto ctx = context_encode_at(*addon, word, hyp_ids, index, {});
      auto h_p = nn::row(ctx.states, ctx.placeholder_index);
      std::string lemma = join(constraint->entry.tgt_lemma);
      auto mem = assemble_memory(*addon, h_p, lemma, chars);
      res.unk_chars = mem.unk_chars;
      int max_len = (int)utf8_chars(lemma).size() + 8;
      auto decoded = char_decode(*addon, mem.memory, chars, max_len);
      res.char_truncated = decoded.truncated;
      res.tokens = fill_all(split_ws(decoded.text));
      break;
    }
  }
  return res;
}

double train_step_word(const WordModel<float>& word, const std::vector<WordBatchItem>& batch,
                       const nn::DropoutCtx<float>& drop) {
  check(!batch.empty(), "train_step_word: empty batch");
  std::size_t total_tokens = 0;
  for (const auto& item : batch) {
    check(!item.tgt_ids.empty(), "train_step_word: empty target");
    total_tokens += item.tgt_ids.size() + 1;  // EOS
  }
  double loss_value = 0.0;
  for (const auto& item : batch) {
    auto memory = word.encode(with_eos(item.src_ids), drop);
    std::vector<int> tgt_in{Specials::kBos};
    tgt_in.insert(tgt_in.end(), item.tgt_ids.begin(), item.tgt_ids.end());
    auto logits = word.logits(tgt_in, memory, drop);
    auto loss = nn::cross_entropy(logits, with_eos(item.tgt_ids));
    double weight = (double)(item.tgt_ids.size() + 1) / (double)total_tokens;
    nn::backward(nn::scale(loss, weight));
    loss_value += loss->v[0] * weight;
  }
  return loss_value;
}

namespace {

nn::TensorPtr<float> addon_example_logits(const WordModel<float>& word,
                                          const InflectorAddon<float>& addon,
                                          const AddonBatchItem& item, const SubwordVocab& vocab,
                                          const CharVocab& chars,
                                          const nn::DropoutCtx<float>& drop,
                                          std::vector<int>* char_out) {
  check(!item.surface.empty(), "addon training: empty reference surface");
  auto ctx = context_encode(addon, word, item.context_ids, vocab, drop);
  auto h_p = nn::row(ctx.states, ctx.placeholder_index);
  auto mem = assemble_memory(addon, h_p, item.lemma, chars);
  auto surface_ids = chars.encode(item.surface);
  std::vector<int> char_in{Specials::kBos};
  char_in.insert(char_in.end(), surface_ids.begin(), surface_ids.end());
  *char_out = with_eos(surface_ids);
  auto x = drop(nn::embed_sequence(addon.char_embedding, char_in, addon.char_cfg));
  return addon.char_decoder.forward(x, mem.memory, drop);
}

}  // namespace

double train_step_addon(const WordModel<float>& word, const InflectorAddon<float>& addon,
                        const std::vector<AddonBatchItem>& batch, const SubwordVocab& vocab,
                        const CharVocab& chars, const nn::DropoutCtx<float>& drop) {
  check(!batch.empty(), "train_step_addon: empty batch");
  std::size_t total_chars = 0;
  for (const auto& item : batch) total_chars += utf8_chars(item.surface).size() + 1;
  double loss_value = 0.0;
  for (const auto& item : batch) {
    std::vector<int> char_out;
    auto logits = addon_example_logits(word, addon, item, vocab, chars, drop, &char_out);
    auto loss = nn::cross_entropy(logits, char_out);
    double weight = (double)char_out.size() / (double)total_chars;
    nn::backward(nn::scale(loss, weight));
    loss_value += loss->v[0] * weight;
  }
  return loss_value;
}

double addon_example_loss(const WordModel<float>& word, const InflectorAddon<float>& addon,
                          const AddonBatchItem& item, const SubwordVocab& vocab,
                          const CharVocab& chars) {
  nn::NoGradGuard guard;
  std::vector<int> char_out;
  auto logits = addon_example_logits(word, addon, item, vocab, chars, {}, &char_out);
  return nn::cross_entropy(logits, char_out)->v[0];
}

}  // namespace lcmt
