#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lcmt/augment.hpp"
#include "lcmt/model.hpp"
#include "lcmt/subword.hpp"

namespace lcmt {

enum class Strategy { None, PhOracle, PhLemma, PhCommon, PhMorph, Cs, Proposed };

Strategy strategy_from(const std::string& s);
std::string to_string(Strategy s);

// ---- inflection add-on forward path ----

struct ContextEncoding {
  nn::TensorPtr<float> states;  // T x d_model, one row per target token
  int placeholder_index = -1;
};

/// Contextualizes a target token sequence holding exactly one placeholder.
/// The word model's embedding table is read through a detached copy, so no
/// gradient ever reaches it from here.
ContextEncoding context_encode(const InflectorAddon<float>& addon, const WordModel<float>& word,
                               const std::vector<int>& target_ids, const SubwordVocab& vocab,
                               const nn::DropoutCtx<float>& drop = {});

/// Same encoding with the placeholder position supplied by the caller; used
/// on anomalous hypotheses that emit several placeholders.
ContextEncoding context_encode_at(const InflectorAddon<float>& addon,
                                  const WordModel<float>& word,
                                  const std::vector<int>& target_ids, int placeholder_index,
                                  const nn::DropoutCtx<float>& drop = {});

struct MemoryResult {
  nn::TensorPtr<float> memory;  // (L+1) x d_model; row 0 is h_p verbatim
  int unk_chars = 0;
};

/// [h_p; positionally-encoded lemma character embeddings].
MemoryResult assemble_memory(const InflectorAddon<float>& addon, const nn::TensorPtr<float>& h_p,
                             const std::string& lemma, const CharVocab& chars);

struct CharDecodeResult {
  std::string text;
  bool truncated = false;
};

/// Greedy character decoding from BOS until EOS or max_len characters.
CharDecodeResult char_decode(const InflectorAddon<float>& addon,
                             const nn::TensorPtr<float>& memory, const CharVocab& chars,
                             int max_len);

// ---- word-level decoding ----

struct DecodeOptions {
  int beam_size = 4;  // 1 = greedy
  int max_len = 128;  // generated target tokens, EOS excluded
};

/// Length-normalized beam search over subword ids (no BOS/EOS in the result).
std::vector<int> decode_word(const WordModel<float>& word, const std::vector<int>& src_ids,
                             const DecodeOptions& opt);

// ---- end-to-end constrained translation ----

struct TranslateOptions {
  Strategy strategy = Strategy::None;
  int beam_size = 4;
};

struct FillRecord {
  int token_index = 0;          // position in the pre-fill hypothesis
  std::string placeholder;      // the emitted placeholder token
  std::string filled_with;      // space-joined fill
};

struct TranslationResult {
  std::vector<std::string> tokens;  // final hypothesis
  int placeholder_count = 0;        // placeholders emitted by the word decoder
  std::vector<FillRecord> fills;
  bool char_truncated = false;
  int unk_chars = 0;
};

/// Decodes src_tokens and applies the strategy's placeholder handling. The
/// constraint is required for the ph-* and proposed strategies; the lexicon
/// for ph-common and ph-morph; the addon for proposed.
TranslationResult translate(const WordModel<float>& word, const InflectorAddon<float>* addon,
                            const SubwordVocab& vocab, const CharVocab& chars,
                            const std::vector<std::string>& src_tokens,
                            const ConstraintAnnotation* constraint,
                            const InflectionLexicon* lexicon, const TranslateOptions& opt);

// ---- training steps ----

struct WordBatchItem {
  std::vector<int> src_ids, tgt_ids;  // subword ids, no BOS/EOS
};

/// Token cross-entropy over the batch; gradients accumulate into the word
/// model. Returns the per-token loss.
double train_step_word(const WordModel<float>& word, const std::vector<WordBatchItem>& batch,
                       const nn::DropoutCtx<float>& drop);

struct AddonBatchItem {
  std::vector<int> context_ids;  // reference target with its placeholder
  std::string lemma;             // space-joined lemma phrase
  std::string surface;           // space-joined reference surface
};

/// Character cross-entropy of the reference surface under teacher forcing;
/// gradients accumulate into the add-on only. Returns the per-char loss.
double train_step_addon(const WordModel<float>& word, const InflectorAddon<float>& addon,
                        const std::vector<AddonBatchItem>& batch, const SubwordVocab& vocab,
                        const CharVocab& chars, const nn::DropoutCtx<float>& drop);

/// Teacher-forced per-char loss of one example without touching gradients.
double addon_example_loss(const WordModel<float>& word, const InflectorAddon<float>& addon,
                          const AddonBatchItem& item, const SubwordVocab& vocab,
                          const CharVocab& chars);

}  // namespace lcmt
