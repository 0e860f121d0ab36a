#include "lcmt/model.hpp"

namespace lcmt {

nlohmann::json config_to_json(const nn::TransformerConfig& cfg) {
  return {{"d_model", cfg.d_model},   {"n_heads", cfg.n_heads},
          {"n_layers", cfg.n_layers}, {"d_ff", cfg.d_ff},
          {"max_positions", cfg.max_positions}, {"dropout", cfg.dropout}};
}

nn::TransformerConfig config_from_json(const nlohmann::json& j) {
  nn::TransformerConfig cfg;
  cfg.d_model = j.at("d_model").get<int>();
  cfg.n_heads = j.at("n_heads").get<int>();
  cfg.n_layers = j.at("n_layers").get<int>();
  cfg.d_ff = j.at("d_ff").get<int>();
  cfg.max_positions = j.at("max_positions").get<int>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.validate();
  return cfg;
}

void save_model(const std::string& path, const WordModel<float>& word,
                const InflectorAddon<float>* addon, nlohmann::json extra_meta) {
  nn::Checkpoint ckpt;
  ckpt.meta = std::move(extra_meta);
  ckpt.meta["word_cfg"] = config_to_json(word.cfg);
  ckpt.meta["vocab"] = word.vocab;
  ckpt.meta["has_addon"] = addon != nullptr;
  if (addon) ckpt.meta["char_vocab"] = addon->char_vocab;
  word.visit([&ckpt](const std::string& name, const nn::TensorPtr<float>& t) {
    ckpt.put(name, t);
  });
  if (addon) {
    addon->visit([&ckpt](const std::string& name, const nn::TensorPtr<float>& t) {
      ckpt.put(name, t);
    });
  }
  nn::save_checkpoint(ckpt, path);
}

LoadedModel load_model(const std::string& path) {
  auto ckpt = nn::load_checkpoint(path);
  LoadedModel out;
  out.meta = ckpt.meta;
  check(ckpt.meta.contains("word_cfg") && ckpt.meta.contains("vocab"),
        "checkpoint ", path, " lacks model metadata");
  auto cfg = config_from_json(ckpt.meta["word_cfg"]);
  Rng rng(0);
  out.word.init(cfg, ckpt.meta["vocab"].get<int>(), rng);
  out.word.visit([&ckpt](const std::string& name, const nn::TensorPtr<float>& t) {
    ckpt.restore(name, t);
  });
  out.has_addon = ckpt.meta.value("has_addon", false);
  if (out.has_addon) {
    out.addon.init(cfg, ckpt.meta.at("char_vocab").get<int>(), rng);
    out.addon.visit([&ckpt](const std::string& name, const nn::TensorPtr<float>& t) {
      ckpt.restore(name, t);
    });
  }
  return out;
}

}  // namespace lcmt
