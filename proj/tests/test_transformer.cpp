#include <cmath>
#include <vector>

#include "doctest.h"
#include "lcmt/transformer.hpp"
#include "test_support.hpp"

using namespace lcmt;
using namespace lcmt::nn;
using testutil::fd_max_err;
using testutil::TwinList;

namespace {

TransformerConfig small_cfg() {
  TransformerConfig cfg;
  cfg.d_model = 8;
  cfg.n_heads = 2;
  cfg.n_layers = 2;
  cfg.d_ff = 16;
  cfg.max_positions = 32;
  return cfg;
}

/// Parameter tensors of twin float/double modules, paired in visit order.
template <typename ModF, typename ModD>
TwinList param_twins(const ModF& mf, const ModD& md) {
  std::vector<TensorPtr<float>> fs;
  std::vector<TensorPtr<double>> ds;
  mf.visit("m", [&](const std::string&, const TensorPtr<float>& t) { fs.push_back(t); });
  md.visit("m", [&](const std::string&, const TensorPtr<double>& t) { ds.push_back(t); });
  REQUIRE(fs.size() == ds.size());
  TwinList twins;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    REQUIRE(fs[i]->size() == ds[i]->size());
    for (std::size_t k = 0; k < fs[i]->size(); ++k)
      REQUIRE((double)fs[i]->v[k] == ds[i]->v[k]);
    twins.emplace_back(fs[i], ds[i]);
  }
  return twins;
}

}  // namespace

TEST_CASE("config validation rejects inconsistent dimensions") {
  auto cfg = small_cfg();
  CHECK_NOTHROW(cfg.validate());
  cfg.n_heads = 3;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_cfg();
  cfg.d_model = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_cfg();
  cfg.n_layers = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("causal mask blocks strictly-future positions") {
  auto m = causal_mask<float>(4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(m->at(i, j) == (j > i ? -1e9f : 0.0f));
}

TEST_CASE("embedded sequences are scaled and position-coded") {
  auto cfg = small_cfg();
  Rng rng(3);
  auto table = make_param<float>(10, cfg.d_model, rng);
  auto x = embed_sequence(table, {7, 2}, cfg);
  REQUIRE(x->rows == 2);
  REQUIRE(x->cols == cfg.d_model);
  const float s = std::sqrt((float)cfg.d_model);
  // Position 0: sin terms are 0, cos terms are 1.
  CHECK(x->at(0, 0) == doctest::Approx(table->at(7, 0) * s).epsilon(1e-6));
  CHECK(x->at(0, 1) == doctest::Approx(table->at(7, 1) * s + 1.0f).epsilon(1e-6));
  CHECK(x->at(1, 0) == doctest::Approx(table->at(2, 0) * s + std::sin(1.0)).epsilon(1e-6));
  std::vector<int> too_long(cfg.max_positions + 1, 0);
  CHECK_THROWS_WITH_AS(embed_sequence(table, too_long, cfg),
                       doctest::Contains("max positions"), Error);
}

TEST_CASE("encoder stack gradients match central differences") {
  auto cfg = small_cfg();
  Rng rf(21), rd(21), rx(22);
  EncoderStackParams<float> pf;
  pf.init(cfg, rf);
  EncoderStackParams<double> pd;
  pd.init(cfg, rd);
  auto twins = param_twins(pf, pd);
  auto [xf, xd] = testutil::twin_input(3, cfg.d_model, rx);
  twins.emplace_back(xf, xd);
  auto wf = make_tensor<float>(3, cfg.d_model);
  auto wd = make_tensor<double>(3, cfg.d_model);
  for (std::size_t i = 0; i < wf->size(); ++i) {
    float w = rx.next_symmetric(1.0f);
    wf->v[i] = w;
    wd->v[i] = w;
  }
  auto fwd_f = [&] { return sum(hadamard(pf.forward(xf, {}), wf)); };
  auto fwd_d = [&] { return sum(hadamard(pd.forward(xd, {}), wd)); };
  CHECK(fd_max_err(twins, fwd_f, fwd_d) < 1e-4);
}

TEST_CASE("decoder stack gradients match central differences") {
  auto cfg = small_cfg();
  const int vocab = 11;
  Rng rf(31), rd(31), rx(32);
  DecoderStackParams<float> pf;
  pf.init(cfg, vocab, rf);
  DecoderStackParams<double> pd;
  pd.init(cfg, vocab, rd);
  auto twins = param_twins(pf, pd);
  auto [xf, xd] = testutil::twin_input(3, cfg.d_model, rx);
  auto [mf, md] = testutil::twin_input(4, cfg.d_model, rx);
  twins.emplace_back(xf, xd);
  twins.emplace_back(mf, md);
  const std::vector<int> targets{4, 0, 9};
  auto fwd_f = [&] { return cross_entropy(pf.forward(xf, mf, {}), targets); };
  auto fwd_d = [&] { return cross_entropy(pd.forward(xd, md, {}), targets); };
  CHECK(fd_max_err(twins, fwd_f, fwd_d) < 1e-4);
}

TEST_CASE("multi-head attention preserves the query shape") {
  auto cfg = small_cfg();
  Rng rng(41);
  AttentionParams<float> p;
  p.init(cfg.d_model, rng);
  auto q = make_param<float>(3, cfg.d_model, rng);
  auto kv = make_param<float>(5, cfg.d_model, rng);
  auto out = multi_head_attention(p, cfg.n_heads, q, kv);
  CHECK(out->rows == 3);
  CHECK(out->cols == cfg.d_model);
  auto self = multi_head_attention(p, cfg.n_heads, q, q, causal_mask<float>(3));
  CHECK(self->rows == 3);
}

TEST_CASE("decoder outputs at position t ignore later inputs bit-exactly") {
  auto cfg = small_cfg();
  const int vocab = 7;
  Rng rp(51), rx(52);
  DecoderStackParams<float> params;
  params.init(cfg, vocab, rp);
  auto memory = make_param<float>(5, cfg.d_model, rx);

  auto x1 = make_tensor<float>(4, cfg.d_model);
  for (auto& v : x1->v) v = rx.next_symmetric(1.0f);
  auto x2 = make_tensor<float>(4, cfg.d_model);
  x2->v = x1->v;
  for (int j = 0; j < cfg.d_model; ++j) x2->at(3, j) += 0.5f + j;

  NoGradGuard guard;
  auto y1 = params.forward(x1, memory, {});
  auto y2 = params.forward(x2, memory, {});
  for (int t = 0; t < 3; ++t)
    for (int j = 0; j < vocab; ++j) CHECK(y1->at(t, j) == y2->at(t, j));
  bool last_changed = false;
  for (int j = 0; j < vocab; ++j) last_changed |= y1->at(3, j) != y2->at(3, j);
  CHECK(last_changed);
}

TEST_CASE("encoder outputs react to every input position") {
  auto cfg = small_cfg();
  Rng rp(61), rx(62);
  EncoderStackParams<float> params;
  params.init(cfg, rp);
  auto x1 = make_tensor<float>(3, cfg.d_model);
  for (auto& v : x1->v) v = rx.next_symmetric(1.0f);
  auto x2 = make_tensor<float>(3, cfg.d_model);
  x2->v = x1->v;
  x2->at(2, 0) += 1.0f;

  NoGradGuard guard;
  auto y1 = params.forward(x1, {});
  auto y2 = params.forward(x2, {});
  bool first_row_changed = false;
  for (int j = 0; j < cfg.d_model; ++j) first_row_changed |= y1->at(0, j) != y2->at(0, j);
  CHECK(first_row_changed);  // bidirectional self-attention
}

TEST_CASE("single-token sequences flow through both stacks") {
  auto cfg = small_cfg();
  Rng rng(71);
  EncoderStackParams<float> enc;
  enc.init(cfg, rng);
  DecoderStackParams<float> dec;
  dec.init(cfg, 5, rng);
  auto x = make_param<float>(1, cfg.d_model, rng);
  NoGradGuard guard;
  auto memory = enc.forward(x, {});
  CHECK(memory->rows == 1);
  auto logits = dec.forward(x, memory, {});
  CHECK(logits->rows == 1);
  CHECK(logits->cols == 5);
}

TEST_CASE("dropout context perturbs training forwards only") {
  auto cfg = small_cfg();
  Rng rp(81), rx(82), rdrop(83);
  EncoderStackParams<float> params;
  params.init(cfg, rp);
  auto x = make_param<float>(3, cfg.d_model, rx);
  NoGradGuard guard;
  auto clean1 = params.forward(x, {});
  auto clean2 = params.forward(x, {});
  CHECK(clean1->v == clean2->v);
  DropoutCtx<float> drop{&rdrop, 0.5};
  auto noisy = params.forward(x, drop);
  CHECK(noisy->v != clean1->v);
}
