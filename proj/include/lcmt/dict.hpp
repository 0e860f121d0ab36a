#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lcmt/align.hpp"
#include "lcmt/corpus.hpp"

namespace lcmt {

enum class PosClass { Noun, Verb };

std::string to_string(PosClass pos);
PosClass pos_class_from(const std::string& s);

/// One dictionary entry. pair_count is the phrase-pair co-occurrence count
/// from extraction; train_freq counts training pairs in which both sides of
/// the entry occur. The two feed different filters: pair_count gates
/// extraction, train_freq gates augmentation.
struct DictEntry {
  std::vector<std::string> src_phrase;
  std::vector<std::string> tgt_phrase;
  std::vector<std::string> tgt_lemma;
  PosClass pos_class = PosClass::Noun;
  long pair_count = 1;
  long train_freq = 0;
};

/// Phrase-pair candidate before POS classification. Keeps one exemplar
/// occurrence so classification can read the annotation columns.
struct PhraseCandidate {
  std::vector<std::string> src_phrase;
  std::vector<std::string> tgt_phrase;
  long pair_count = 0;
  long train_freq = 0;
  int exemplar_pair = 0;  // corpus index of one extraction site
  int exemplar_src_begin = 0;
  int exemplar_tgt_begin = 0;
};

/// Consistent phrase pairs up to max_len tokens per side: the target span is
/// the hull of the links leaving the source span, kept only when no link
/// crosses the span boundary in either direction and at least one link lies
/// inside. Candidates below min_pair_count are dropped.
std::vector<PhraseCandidate> extract_phrases(const std::vector<ParallelExample>& corpus,
                                             const std::vector<AlignmentMatrix>& alignments,
                                             int max_len, long min_pair_count);

/// Tag sets that drive classification. Defaults cover the annotation schemes
/// used by the synthetic generator and common Penn-style tags.
struct PosRules {
  std::vector<std::string> noun_tags = {"NN", "NNS", "NNP", "NNPS", "NOUN"};
  std::vector<std::string> nominal_verb_tags = {"SAHEN", "VS"};
  std::vector<std::string> verb_tags = {"VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "VERB"};

  bool is_noun(const std::string& tag) const;
  bool is_nominal_verb(const std::string& tag) const;
  bool is_verb(const std::string& tag) const;
};

struct ClassifiedDicts {
  std::vector<DictEntry> noun_dict;
  std::vector<DictEntry> verb_dict;
};

/// Noun entry: every token of both phrases noun-tagged. Verb entry: every
/// source token in the nominal-verb class and the target head (last token)
/// verb-tagged. Everything else is dropped. Lemmas come from the annotation
/// column at the exemplar site.
ClassifiedDicts classify_entries(const std::vector<PhraseCandidate>& table,
                                 const std::vector<ParallelExample>& corpus,
                                 const PosRules& rules = {});

struct DictSplit {
  std::vector<DictEntry> seen;
  std::vector<DictEntry> unseen;
  std::uint64_t seed = 0;
};

/// Uniform 50/50 split of the evaluation dictionary under the seed, plus the
/// training dictionary with every unseen entry removed (matched on pos class,
/// source phrase, and target lemma).
DictSplit split_seen_unseen(const std::vector<DictEntry>& eval_dict, std::uint64_t seed);
std::vector<DictEntry> prune_training_dict(const std::vector<DictEntry>& train_dict,
                                           const std::vector<DictEntry>& unseen);

void save_dict(const std::vector<DictEntry>& dict, const std::string& path);
std::vector<DictEntry> load_dict(const std::string& path);

}  // namespace lcmt
