#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lcmt/corpus.hpp"

namespace lcmt {

/// Word alignment for one sentence pair: links are (src_index, tgt_index).
struct AlignmentMatrix {
  int pair_id = 0;
  std::vector<std::pair<int, int>> links;  // sorted, unique

  bool has_link(int s, int t) const;
};

struct Ibm1Result {
  std::vector<AlignmentMatrix> alignments;
  /// Corpus log-likelihood after each EM iteration (non-decreasing).
  std::vector<double> log_likelihood;
  /// t(tgt|src) lookup for tests and diagnostics.
  double translation_prob(const std::string& src, const std::string& tgt) const;

  // internal table: src word -> (tgt word -> prob), deterministic ordering
  std::vector<std::string> src_words;
  std::vector<std::string> tgt_words;
  std::vector<std::vector<double>> table;  // [src][tgt], dense over observed vocab
};

/// IBM Model 1 EM without a NULL word: uniform initialization over the
/// observed target vocabulary, fixed iteration order, argmax link per target
/// token (ties to the lowest source index).
Ibm1Result align_ibm1(const std::vector<ParallelExample>& corpus, int iterations);

/// Reads Pharaoh "i-j" lines, one line per corpus pair. Validates bounds
/// against the corpus and that line count matches corpus size.
std::vector<AlignmentMatrix> ingest_alignments(const std::string& path,
                                               const std::vector<ParallelExample>& corpus);

void save_alignments(const std::vector<AlignmentMatrix>& alignments, const std::string& path);

}  // namespace lcmt
