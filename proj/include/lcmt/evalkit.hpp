#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lcmt/translator.hpp"

namespace lcmt {

/// mteval-13a-style tokenization: entity unescaping, punctuation split,
/// digit-aware period/comma/dash handling, whitespace split.
std::vector<std::string> tokenize_13a(const std::string& text);

struct BleuResult {
  double score = 0.0;  // 0..100
  double brevity_penalty = 1.0;
  std::array<double, 4> precisions{};  // fractions, after smoothing
  long hyp_len = 0, ref_len = 0;
};

/// Corpus BLEU-4, mixed case, one reference per hypothesis, exponential
/// smoothing of zero higher-order counts. Identical corpora score exactly
/// 100.
BleuResult corpus_bleu(const std::vector<std::string>& hypotheses,
                       const std::vector<std::string>& references);

/// One constrained test sentence after translation and post-processing.
struct ConstrainedOutput {
  std::string source;
  std::string reference;
  std::string hypothesis;
  ConstraintAnnotation constraint;
  int placeholder_count = 0;
};

/// True when the surface tokens occur contiguously (case-insensitive, 13a
/// tokens) in the hypothesis.
bool term_match(const std::string& hypothesis, const std::vector<std::string>& surface);

double term_use_rate(const std::vector<ConstrainedOutput>& outputs);

struct EvalCell {
  bool present = false;
  double bleu = 0.0;
  double term_use_rate = 0.0;
  double n_constrained = 0.0;
  double n_matched = 0.0;
  double n_placeholder_emitted = 0.0;
};

struct EvalReport {
  std::string strategy;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, EvalCell> cells;  // keys like "VERB-seen"

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  std::string render_table() const;
};

struct ModelBundle {
  const WordModel<float>* word = nullptr;
  const InflectorAddon<float>* addon = nullptr;  // required by strategy proposed
  std::uint64_t seed = 0;
};

/// Evaluates one strategy on one dictionary over constrained test pairs.
/// Pairs with no matching entry are skipped (they belong to no cell).
struct CellResult {
  EvalCell cell;
  std::vector<ConstrainedOutput> outputs;  // per constrained pair, one per POS
};

CellResult run_cell(const ModelBundle& model, Strategy strategy,
                    const std::vector<DictEntry>& dict, const std::vector<ParallelExample>& test,
                    const SubwordVocab& vocab, const CharVocab& chars,
                    const InflectionLexicon& lexicon, PosClass pos, int beam_size);

/// The 2x2 grid (POS class x seen/unseen), averaged over the given models.
EvalReport run_grid(const std::vector<ModelBundle>& models, Strategy strategy,
                    const std::vector<DictEntry>& seen_dict,
                    const std::vector<DictEntry>& unseen_dict,
                    const std::vector<ParallelExample>& test, const SubwordVocab& vocab,
                    const CharVocab& chars, const InflectionLexicon& lexicon, int beam_size);

/// Reproducible annotation sheet: source, reference, hypothesis, constraint,
/// empty tag column for correct/incorrect/null.
void sample_for_annotation(const std::vector<ConstrainedOutput>& outputs, std::size_t n,
                           std::uint64_t seed, const std::string& path);

}  // namespace lcmt
