#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "lcmt/augment.hpp"
#include "lcmt/transformer.hpp"

namespace lcmt {

/// Every tunable the CLI accepts, with desk-scale defaults. A preset fills
/// the scale-dependent fields; a config file and then flags override on top.
struct RunConfig {
  std::string preset = "desk";

  std::uint64_t seed = 1;
  int threads = 1;

  // Word-model dimensions. The inflection add-on derives its own dimensions
  // from these (2 layers, d_ff = 2 * d_model).
  nn::TransformerConfig model;

  int vocab_size = 1000;     // subword merge target
  int warmup = 200;          // noam warmup steps
  int batch_tokens = 2000;   // token budget per batch
  int max_epochs = 40;
  int patience_stage1 = 3;   // epochs without val BLEU gain
  int patience_stage2 = 5;   // epochs without val char-loss drop
  int beam = 4;
  double dropout = 0.1;

  // Dictionary extraction and augmentation thresholds.
  long min_pair_count = 1;   // phrase pairs below this are dropped
  AugmentThresholds thresholds;
  double target_ratio = 0.5;  // augmented copies per original, 0 = unlimited
  int phrase_max_len = 4;

  /// "desk" or "paper". Paper scale mirrors the full experiment: 16k vocab,
  /// Transformer-base dims, 8000 warmup, pair_count > 100.
  void apply_preset(const std::string& name);

  void validate() const;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

/// Parses a JSON config file. Unknown keys are rejected with an Error naming
/// the key.
RunConfig load_run_config(const std::string& path);

/// Writes the resolved config as pretty JSON; called once per run, next to
/// the run's outputs.
void save_run_config(const RunConfig& cfg, const std::string& path);

}  // namespace lcmt
