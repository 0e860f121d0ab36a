#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "lcmt/checkpoint.hpp"
#include "lcmt/transformer.hpp"

namespace lcmt {

nlohmann::json config_to_json(const nn::TransformerConfig& cfg);
nn::TransformerConfig config_from_json(const nlohmann::json& j);

/// Word-level encoder-decoder with one embedding table shared between the
/// source and target sides.
template <typename Real>
struct WordModel {
  nn::TransformerConfig cfg;
  int vocab = 0;
  nn::TensorPtr<Real> embedding;  // vocab x d_model
  nn::EncoderStackParams<Real> encoder;
  nn::DecoderStackParams<Real> decoder;

  void init(const nn::TransformerConfig& c, int vocab_size, Rng& rng) {
    c.validate();
    check(vocab_size >= 5, "word model needs at least the reserved tokens, got vocab ",
          vocab_size);
    cfg = c;
    vocab = vocab_size;
    embedding = nn::make_param<Real>(vocab, cfg.d_model, rng);
    encoder.init(cfg, rng);
    decoder.init(cfg, vocab, rng);
  }

  void visit(const nn::ParamVisitor<Real>& fn) const {
    fn("word.emb", embedding);
    encoder.visit("word.enc", fn);
    decoder.visit("word.dec", fn);
  }

  nn::TensorPtr<Real> encode(const std::vector<int>& src_ids,
                             const nn::DropoutCtx<Real>& drop) const {
    auto x = drop(nn::embed_sequence(embedding, src_ids, cfg));
    return encoder.forward(x, drop);
  }

  /// Next-token logits for a (BOS-led) target prefix against encoded source.
  nn::TensorPtr<Real> logits(const std::vector<int>& tgt_in, const nn::TensorPtr<Real>& memory,
                             const nn::DropoutCtx<Real>& drop) const {
    auto x = drop(nn::embed_sequence(embedding, tgt_in, cfg));
    return decoder.forward(x, memory, drop);
  }
};

/// The inflection add-on: target context encoder, character embeddings, and
/// character-level decoder. Word embeddings come from the word model and stay
/// frozen here.
template <typename Real>
struct InflectorAddon {
  nn::TransformerConfig ctx_cfg;
  nn::TransformerConfig char_cfg;
  int char_vocab = 0;
  nn::EncoderStackParams<Real> context_encoder;
  nn::TensorPtr<Real> char_embedding;  // char_vocab x d_model
  nn::DecoderStackParams<Real> char_decoder;

  /// Both add-on stacks use 2 layers and d_ff = 2 * d_model at the word
  /// model's width.
  void init(const nn::TransformerConfig& word_cfg, int char_vocab_size, Rng& rng) {
    check(char_vocab_size >= 5, "char vocab too small: ", char_vocab_size);
    ctx_cfg = word_cfg;
    ctx_cfg.n_layers = 2;
    ctx_cfg.d_ff = 2 * word_cfg.d_model;
    char_cfg = ctx_cfg;
    char_vocab = char_vocab_size;
    context_encoder.init(ctx_cfg, rng);
    char_embedding = nn::make_param<Real>(char_vocab, ctx_cfg.d_model, rng);
    char_decoder.init(char_cfg, char_vocab, rng);
  }

  void visit(const nn::ParamVisitor<Real>& fn) const {
    context_encoder.visit("addon.ctx", fn);
    fn("addon.char_emb", char_embedding);
    char_decoder.visit("addon.dec", fn);
  }
};

/// Parameter checksum, for freeze-law checks.
template <typename Real>
std::uint64_t param_checksum(const std::function<void(const nn::ParamVisitor<Real>&)>& visit_fn) {
  std::uint64_t h = kFnvBasis;
  visit_fn([&h](const std::string& name, const nn::TensorPtr<Real>& t) {
    h = fnv1a(name.data(), name.size(), h);
    h = fnv1a(t->v.data(), t->v.size() * sizeof(Real), h);
  });
  return h;
}

template <typename Real>
std::uint64_t word_model_checksum(const WordModel<Real>& model) {
  return param_checksum<Real>([&model](const nn::ParamVisitor<Real>& fn) { model.visit(fn); });
}

/// Bundles word model (and add-on when present) into one checkpoint file.
void save_model(const std::string& path, const WordModel<float>& word,
                const InflectorAddon<float>* addon, nlohmann::json extra_meta = {});

struct LoadedModel {
  WordModel<float> word;
  InflectorAddon<float> addon;  // valid only when has_addon
  bool has_addon = false;
  nlohmann::json meta;
};

LoadedModel load_model(const std::string& path);

}  // namespace lcmt
