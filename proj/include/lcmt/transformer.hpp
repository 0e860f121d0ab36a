#pragma once

#include <map>
#include <string>
#include <type_traits>

#include "lcmt/tensor.hpp"

namespace lcmt::nn {

struct TransformerConfig {
  int d_model = 64;
  int n_heads = 4;
  int n_layers = 2;
  int d_ff = 128;
  int max_positions = 512;
  double dropout = 0.1;

  void validate() const {
    check(d_model >= 1 && n_heads >= 1 && n_layers >= 1 && d_ff >= 1 && max_positions >= 1,
          "transformer config: all dimensions must be >= 1");
    check(d_model % n_heads == 0, "transformer config: d_model ", d_model,
          " not divisible by n_heads ", n_heads);
    check(dropout >= 0.0 && dropout < 1.0, "transformer config: dropout must be in [0, 1)");
  }
};

/// Training-time context: non-null rng enables dropout.
template <typename Real>
struct DropoutCtx {
  Rng* rng = nullptr;
  double rate = 0.0;

  TensorPtr<Real> operator()(const TensorPtr<Real>& x) const {
    if (!rng || rate == 0.0) return x;
    return dropout(x, rate, *rng);
  }
};

template <typename Real>
using ParamVisitor = std::function<void(const std::string&, const TensorPtr<Real>&)>;

template <typename Real>
struct LayerNormParams {
  TensorPtr<Real> gain, bias;

  void init(int d) {
    gain = make_const_param<Real>(1, d, Real(1));
    bias = make_const_param<Real>(1, d, Real(0));
  }
  void visit(const std::string& prefix, const ParamVisitor<Real>& fn) const {
    fn(prefix + ".gain", gain);
    fn(prefix + ".bias", bias);
  }
  TensorPtr<Real> operator()(const TensorPtr<Real>& x) const { return layer_norm(x, gain, bias); }
};

template <typename Real>
struct AttentionParams {
  TensorPtr<Real> wq, wk, wv, wo;

  void init(int d, Rng& rng) {
    wq = make_param<Real>(d, d, rng);
    wk = make_param<Real>(d, d, rng);
    wv = make_param<Real>(d, d, rng);
    wo = make_param<Real>(d, d, rng);
  }
  void visit(const std::string& prefix, const ParamVisitor<Real>& fn) const {
    fn(prefix + ".wq", wq);
    fn(prefix + ".wk", wk);
    fn(prefix + ".wv", wv);
    fn(prefix + ".wo", wo);
  }
};

template <typename Real>
struct FfnParams {
  TensorPtr<Real> w1, b1, w2, b2;

  void init(int d, int d_ff, Rng& rng) {
    w1 = make_param<Real>(d, d_ff, rng);
    b1 = make_const_param<Real>(1, d_ff, Real(0));
    w2 = make_param<Real>(d_ff, d, rng);
    b2 = make_const_param<Real>(1, d, Real(0));
  }
  void visit(const std::string& prefix, const ParamVisitor<Real>& fn) const {
    fn(prefix + ".w1", w1);
    fn(prefix + ".b1", b1);
    fn(prefix + ".w2", w2);
    fn(prefix + ".b2", b2);
  }
  TensorPtr<Real> operator()(const TensorPtr<Real>& x) const {
    return add(matmul(relu(add(matmul(x, w1), b1)), w2), b2);
  }
};

/// Additive attention mask, rows = queries, cols = keys; blocked entries
/// hold -1e9 so their post-softmax weight is exactly zero at single
/// precision.
template <typename Real>
TensorPtr<Real> causal_mask(int n) {
  auto m = make_tensor<Real>(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) m->at(i, j) = (Real)-1e9;
  return m;
}

/// Multi-head scaled dot-product attention. queries: Tq x d, keys/values
/// from kv: Tk x d; mask (optional) is Tq x Tk additive.
template <typename Real>
TensorPtr<Real> multi_head_attention(const AttentionParams<Real>& p, int n_heads,
                                     const TensorPtr<Real>& queries, const TensorPtr<Real>& kv,
                                     const std::type_identity_t<TensorPtr<Real>>& mask = {}) {
  int d = p.wq->cols;
  int dk = d / n_heads;
  auto q = matmul(queries, p.wq);
  auto k = matmul(kv, p.wk);
  auto v = matmul(kv, p.wv);
  TensorPtr<Real> merged;
  for (int h = 0; h < n_heads; ++h) {
    auto qh = slice_cols(q, h * dk, (h + 1) * dk);
    auto kh = slice_cols(k, h * dk, (h + 1) * dk);
    auto vh = slice_cols(v, h * dk, (h + 1) * dk);
    auto scores = scale(matmul(qh, transpose(kh)), 1.0 / std::sqrt((double)dk));
    auto weights = softmax_rows(scores, mask);
    auto head = matmul(weights, vh);
    merged = h == 0 ? head : concat_cols(merged, head);
  }
  return matmul(merged, p.wo);
}

template <typename Real>
struct EncoderLayerParams {
  LayerNormParams<Real> ln1, ln2;
  AttentionParams<Real> attn;
  FfnParams<Real> ffn;

  void init(const TransformerConfig& cfg, Rng& rng) {
    ln1.init(cfg.d_model);
    ln2.init(cfg.d_model);
    attn.init(cfg.d_model, rng);
    ffn.init(cfg.d_model, cfg.d_ff, rng);
  }
  void visit(const std::string& prefix, const ParamVisitor<Real>& fn) const {
    ln1.visit(prefix + ".ln1", fn);
    ln2.visit(prefix + ".ln2", fn);
    attn.visit(prefix + ".attn", fn);
    ffn.visit(prefix + ".ffn", fn);
  }
};

template <typename Real>
struct DecoderLayerParams {
  LayerNormParams<Real> ln1, ln2, ln3;
  AttentionParams<Real> self_attn, cross_attn;
  FfnParams<Real> ffn;

  void init(const TransformerConfig& cfg, Rng& rng) {
    ln1.init(cfg.d_model);
    ln2.init(cfg.d_model);
    ln3.init(cfg.d_model);
    self_attn.init(cfg.d_model, rng);
    cross_attn.init(cfg.d_model, rng);
    ffn.init(cfg.d_model, cfg.d_ff, rng);
  }
  void visit(const std::string& prefix, const ParamVisitor<Real>& fn) const {
    ln1.visit(prefix + ".ln1", fn);
    ln2.visit(prefix + ".ln2", fn);
    ln3.visit(prefix + ".ln3", fn);
    self_attn.visit(prefix + ".self", fn);
    cross_attn.visit(prefix + ".cross", fn);
    ffn.visit(prefix + ".ffn", fn);
  }
};

/// Pre-norm transformer encoder over one sequence of embedded inputs.
template <typename Real>
struct EncoderStackParams {
  TransformerConfig cfg;
  std::vector<EncoderLayerParams<Real>> layers;
  LayerNormParams<Real> final_ln;

  void init(const TransformerConfig& c, Rng& rng) {
    c.validate();
    cfg = c;
    layers.resize(cfg.n_layers);
    for (auto& layer : layers) layer.init(cfg, rng);
    final_ln.init(cfg.d_model);
  }
  void visit(const std::string& prefix, const ParamVisitor<Real>& fn) const {
    for (std::size_t i = 0; i < layers.size(); ++i)
      layers[i].visit(prefix + ".l" + std::to_string(i), fn);
    final_ln.visit(prefix + ".final_ln", fn);
  }

  /// x: T x d_model already embedded and position-encoded.
  TensorPtr<Real> forward(TensorPtr<Real> x, const DropoutCtx<Real>& drop) const {
    for (const auto& layer : layers) {
      auto h = layer.ln1(x);
      x = add(x, drop(multi_head_attention(layer.attn, cfg.n_heads, h, h, nullptr)));
      x = add(x, drop(layer.ffn(layer.ln2(x))));
    }
    return final_ln(x);
  }
};

/// Pre-norm transformer decoder; forward returns per-position next-token
/// logits (T x vocab) with a causal self-attention mask.
template <typename Real>
struct DecoderStackParams {
  TransformerConfig cfg;
  std::vector<DecoderLayerParams<Real>> layers;
  LayerNormParams<Real> final_ln;
  TensorPtr<Real> out_proj;  // d_model x vocab

  void init(const TransformerConfig& c, int vocab, Rng& rng) {
    c.validate();
    check(vocab >= 1, "decoder: vocab must be >= 1");
    cfg = c;
    layers.resize(cfg.n_layers);
    for (auto& layer : layers) layer.init(cfg, rng);
    final_ln.init(cfg.d_model);
    out_proj = make_param<Real>(cfg.d_model, vocab, rng);
  }
  void visit(const std::string& prefix, const ParamVisitor<Real>& fn) const {
    for (std::size_t i = 0; i < layers.size(); ++i)
      layers[i].visit(prefix + ".l" + std::to_string(i), fn);
    final_ln.visit(prefix + ".final_ln", fn);
    fn(prefix + ".out_proj", out_proj);
  }

  /// States before output projection, for callers that need h_t.
  TensorPtr<Real> forward_states(TensorPtr<Real> x, const TensorPtr<Real>& memory,
                                 const DropoutCtx<Real>& drop) const {
    auto mask = causal_mask<Real>(x->rows);
    for (const auto& layer : layers) {
      auto h = layer.ln1(x);
      x = add(x, drop(multi_head_attention(layer.self_attn, cfg.n_heads, h, h, mask)));
      x = add(x, drop(multi_head_attention(layer.cross_attn, cfg.n_heads, layer.ln2(x), memory,
                                           nullptr)));
      x = add(x, drop(layer.ffn(layer.ln3(x))));
    }
    return final_ln(x);
  }

  TensorPtr<Real> forward(const TensorPtr<Real>& x, const TensorPtr<Real>& memory,
                          const DropoutCtx<Real>& drop) const {
    return matmul(forward_states(x, memory, drop), out_proj);
  }
};

/// Token ids -> scaled embeddings + sinusoidal positions. Errors past
/// max_positions.
template <typename Real>
TensorPtr<Real> embed_sequence(const TensorPtr<Real>& table, const std::vector<int>& ids,
                               const TransformerConfig& cfg) {
  check((int)ids.size() <= cfg.max_positions, "sequence of ", ids.size(),
        " tokens exceeds max positions ", cfg.max_positions);
  auto x = scale(embedding_lookup(table, ids), std::sqrt((double)cfg.d_model));
  return add(x, sinusoidal_positions<Real>((int)ids.size(), cfg.d_model));
}

}  // namespace lcmt::nn
