#include "lcmt/config.hpp"

#include <fstream>
#include <set>

#include "lcmt/common.hpp"

namespace lcmt {

void RunConfig::apply_preset(const std::string& name) {
  if (name == "desk") {
    model.d_model = 64;
    model.n_heads = 4;
    model.n_layers = 2;
    model.d_ff = 128;
    vocab_size = 1000;
    warmup = 200;
    min_pair_count = 1;
  } else if (name == "paper") {
    model.d_model = 512;
    model.n_heads = 8;
    model.n_layers = 6;
    model.d_ff = 2048;
    vocab_size = 16000;
    warmup = 8000;
    min_pair_count = 101;  // "more than 100" pair occurrences
  } else {
    fail("unknown preset '", name, "' (expected desk or paper)");
  }
  preset = name;
  thresholds.noun_max_freq = 20;
  thresholds.verb_max_freq = 2000;
  patience_stage1 = 3;
  patience_stage2 = 5;
  model.dropout = dropout;
}

void RunConfig::validate() const {
  model.validate();
  check(vocab_size >= 8, "config: vocab_size must be >= 8");
  check(warmup >= 1, "config: warmup must be >= 1");
  check(batch_tokens >= 1, "config: batch_tokens must be >= 1");
  check(max_epochs >= 1, "config: max_epochs must be >= 1");
  check(patience_stage1 >= 1 && patience_stage2 >= 1, "config: patience must be >= 1");
  check(beam >= 1, "config: beam must be >= 1");
  check(dropout >= 0.0 && dropout < 1.0, "config: dropout must be in [0, 1)");
  check(min_pair_count >= 1, "config: min_pair_count must be >= 1");
  check(thresholds.noun_max_freq >= 0 && thresholds.verb_max_freq >= 0,
        "config: frequency caps must be >= 0");
  check(target_ratio >= 0.0, "config: target_ratio must be >= 0");
  check(phrase_max_len >= 1, "config: phrase_max_len must be >= 1");
  check(threads >= 1, "config: threads must be >= 1");
}

nlohmann::json RunConfig::to_json() const {
  return nlohmann::json{{"preset", preset},
                        {"seed", seed},
                        {"threads", threads},
                        {"d_model", model.d_model},
                        {"n_heads", model.n_heads},
                        {"n_layers", model.n_layers},
                        {"d_ff", model.d_ff},
                        {"max_positions", model.max_positions},
                        {"vocab_size", vocab_size},
                        {"warmup", warmup},
                        {"batch_tokens", batch_tokens},
                        {"max_epochs", max_epochs},
                        {"patience_stage1", patience_stage1},
                        {"patience_stage2", patience_stage2},
                        {"beam", beam},
                        {"dropout", dropout},
                        {"min_pair_count", min_pair_count},
                        {"noun_max_freq", thresholds.noun_max_freq},
                        {"verb_max_freq", thresholds.verb_max_freq},
                        {"target_ratio", target_ratio},
                        {"phrase_max_len", phrase_max_len}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  check(j.is_object(), "config: top level must be a JSON object");
  RunConfig cfg;
  if (j.contains("preset")) cfg.apply_preset(j.at("preset").get<std::string>());

  static const std::set<std::string> known = {
      "preset",          "seed",         "threads",       "d_model",
      "n_heads",         "n_layers",     "d_ff",          "max_positions",
      "vocab_size",      "warmup",       "batch_tokens",  "max_epochs",
      "patience_stage1", "patience_stage2", "beam",       "dropout",
      "min_pair_count",  "noun_max_freq", "verb_max_freq", "target_ratio",
      "phrase_max_len"};
  for (const auto& [key, value] : j.items()) {
    check(known.count(key) > 0, "config: unknown key '", key, "'");
    (void)value;
  }

  auto get = [&j](const char* key, auto* dst) {
    if (j.contains(key)) *dst = j.at(key).get<std::decay_t<decltype(*dst)>>();
  };
  get("seed", &cfg.seed);
  get("threads", &cfg.threads);
  get("d_model", &cfg.model.d_model);
  get("n_heads", &cfg.model.n_heads);
  get("n_layers", &cfg.model.n_layers);
  get("d_ff", &cfg.model.d_ff);
  get("max_positions", &cfg.model.max_positions);
  get("vocab_size", &cfg.vocab_size);
  get("warmup", &cfg.warmup);
  get("batch_tokens", &cfg.batch_tokens);
  get("max_epochs", &cfg.max_epochs);
  get("patience_stage1", &cfg.patience_stage1);
  get("patience_stage2", &cfg.patience_stage2);
  get("beam", &cfg.beam);
  get("dropout", &cfg.dropout);
  get("min_pair_count", &cfg.min_pair_count);
  get("noun_max_freq", &cfg.thresholds.noun_max_freq);
  get("verb_max_freq", &cfg.thresholds.verb_max_freq);
  get("target_ratio", &cfg.target_ratio);
  get("phrase_max_len", &cfg.phrase_max_len);
  cfg.model.dropout = cfg.dropout;
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), "config: cannot open ", path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail("config: ", path, " is not valid JSON: ", e.what());
  }
  return RunConfig::from_json(j);
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  check(out.good(), "config: cannot write ", path);
  out << cfg.to_json().dump(2) << "\n";
}

}  // namespace lcmt
