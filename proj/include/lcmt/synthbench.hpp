#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lcmt/augment.hpp"
#include "lcmt/corpus.hpp"
#include "lcmt/dict.hpp"

namespace lcmt {

enum class Tense { Prs, Pst, Prog };

Tense tense_from(const std::string& s);
std::string to_string(Tense t);

/// Deterministic bilingual toy language. Source words are reversed target
/// lemmas plus a tense marker token; the target inflects its verb by suffix
/// rules and carries the tense as a time word, so target context alone
/// determines the verb form.
struct SynthGrammar {
  // Verb lemma inventory, partitioned. Unseen lemmas never occur in the
  // training split.
  std::vector<std::string> train_verbs, seen_verbs, unseen_verbs;
  // Nouns: train nouns are frequent context fillers; seen nouns are rare
  // enough to qualify for augmentation; unseen nouns are eval-only.
  std::vector<std::string> train_nouns, seen_nouns, unseen_nouns;
  // (lemma, tense) -> surface overrides, taking precedence over the rules.
  std::map<std::pair<std::string, Tense>, std::string> irregulars;

  /// 200 verbs (160/20/20), 35 nouns (15/15/5), unique stems so no two
  /// surface forms collide; includes the irregular ("kemo", PST) -> "keta".
  static SynthGrammar standard(std::uint64_t seed = 7);

  void validate() const;
};

/// Rule application: PRS keeps the lemma, PROG appends "na", PST drops the
/// final vowel and appends "ta" with t+t collapsed ("patu" -> "pata",
/// "miko" -> "mikta"). Irregulars win.
std::string oracle_inflect(const SynthGrammar& grammar, const std::string& lemma, Tense tense);

struct SynthData {
  std::vector<ParallelExample> train, val, test;
  std::vector<DictEntry> train_dict;   // augmentation source
  std::vector<DictEntry> seen_dict;    // eval entries attested in training
  std::vector<DictEntry> unseen_dict;  // eval entries unseen in training
  InflectionLexicon lexicon;
};

/// n training sentences plus validation and test splits, dictionaries, and
/// the inflection lexicon. Pure function of (grammar, n, seed).
SynthData gen_corpus(const SynthGrammar& grammar, int n, std::uint64_t seed, int n_val = 0,
                     int n_test = 0);  // 0 = derived from n

}  // namespace lcmt
