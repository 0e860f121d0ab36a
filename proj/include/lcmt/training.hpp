#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lcmt/translator.hpp"

namespace lcmt {

struct TrainPlan {
  int stage = 1;
  int batch_tokens = 2000;  // examples per batch are packed up to this many tokens
  int max_epochs = 40;
  int patience = 3;  // stage 1 default; stage 2 uses 5
  std::uint64_t seed = 1;
  std::string checkpoint_dir;
  long warmup = 200;
  double dropout = 0.1;
  bool resume = false;
  int val_beam = 1;   // greedy validation decoding
  long max_steps = 0;  // 0 = no cap; handy for overfit checks

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  long step = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_metric = 0.0;
};

struct TrainResult {
  std::string best_checkpoint;
  std::string last_checkpoint;
  double best_metric = 0.0;
  int best_epoch = -1;
  int epochs_run = 0;
  bool aborted = false;
  std::string abort_reason;
  std::vector<EpochLog> log;
};

/// Stage 1: word model on the mixed (original + augmented) corpus, early
/// stopping on validation BLEU.
TrainResult run_stage1(const TrainPlan& plan, WordModel<float>& model,
                       const std::vector<ParallelExample>& train,
                       const std::vector<ParallelExample>& val, const SubwordVocab& vocab);

/// Stage 2: add-on modules on constrained examples with the stage-1 word
/// model loaded and frozen, early stopping on validation character loss.
/// Returns the bundled (word + addon) checkpoint.
TrainResult run_stage2(const TrainPlan& plan, const std::string& stage1_checkpoint,
                       const std::vector<AddonBatchItem>& train_items,
                       const std::vector<AddonBatchItem>& val_items, const SubwordVocab& vocab,
                       const CharVocab& chars);

/// Addon training examples from a constraint manifest: the placeholder
/// rendering of each referenced pair supplies the target context, the entry
/// the lemma, and the annotation the reference surface.
std::vector<AddonBatchItem> build_addon_examples(const std::vector<ParallelExample>& corpus,
                                                 const std::vector<ConstraintAnnotation>& manifest,
                                                 const SubwordVocab& vocab);

/// Teacher-forced next-token accuracy of the word model over a corpus.
double token_accuracy(const WordModel<float>& model, const std::vector<ParallelExample>& corpus,
                      const SubwordVocab& vocab);

/// Deterministic per-epoch generator seed.
std::uint64_t epoch_seed(std::uint64_t base, int epoch);

}  // namespace lcmt
