#pragma once

#include <optional>
#include <string>
#include <vector>

namespace lcmt {

/// One aligned sentence pair. Annotation columns are optional but, when
/// present, must be aligned 1:1 with their token list.
struct ParallelExample {
  int id = 0;
  std::vector<std::string> src_tokens;
  std::vector<std::string> tgt_tokens;
  std::vector<std::string> src_pos;     // empty = absent
  std::vector<std::string> tgt_pos;     // empty = absent
  std::vector<std::string> tgt_lemmas;  // empty = absent

  bool has_src_pos() const { return !src_pos.empty(); }
  bool has_tgt_pos() const { return !tgt_pos.empty(); }
  bool has_tgt_lemmas() const { return !tgt_lemmas.empty(); }
};

enum class CorpusFormat { Tsv, Jsonl };

/// Loads a corpus file. TSV columns: src, tgt[, src_pos, tgt_pos, tgt_lemmas],
/// annotations space-separated. JSONL uses the same field names; token fields
/// may be arrays of strings or space-joined strings. Ids are assigned
/// sequentially from 0. Malformed records raise an Error naming the line.
std::vector<ParallelExample> load_corpus(const std::string& path, CorpusFormat format);

/// Guesses the format from the file extension (.jsonl/.json -> Jsonl, else Tsv).
CorpusFormat corpus_format_for(const std::string& path);

void save_corpus_tsv(const std::vector<ParallelExample>& corpus, const std::string& path);

}  // namespace lcmt
