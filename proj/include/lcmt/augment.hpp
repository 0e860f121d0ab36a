#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcmt/corpus.hpp"
#include "lcmt/dict.hpp"

namespace lcmt {

/// Table-driven stand-in for an external inflector. lookup maps
/// (lemma, pos, tag) to a surface; reverse recovers (lemma, tag) from a
/// surface. Phrases are space-joined token sequences; inflection applies to
/// the head (last) token.
class InflectionLexicon {
public:
  struct Form {
    std::string lemma;
    PosClass pos = PosClass::Verb;
    std::string tag;      // e.g. <VBD>
    std::string surface;  // inflected head token
  };

  void add(Form form);

  /// Surface for (lemma, pos, tag), or nullopt.
  std::optional<std::string> lookup(const std::string& lemma, PosClass pos,
                                    const std::string& tag) const;
  /// (lemma, tag) for a surface, or nullopt. Surfaces attested for several
  /// lemmas resolve to the first form added.
  std::optional<std::pair<std::string, std::string>> reverse(const std::string& surface) const;

  /// Every attested surface of a head lemma, the lemma itself included when
  /// attested; deterministic order.
  std::vector<std::string> surfaces_of(const std::string& lemma, PosClass pos) const;

  const std::vector<Form>& forms() const { return forms_; }
  std::size_t size() const { return forms_.size(); }

  void save(const std::string& path) const;
  static InflectionLexicon load(const std::string& path);

private:
  std::vector<Form> forms_;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> by_key_;
  std::map<std::string, std::size_t> by_surface_;
};

/// The single constrained span chosen in a pair, plus everything needed to
/// render or score it later.
struct ConstraintAnnotation {
  int pair_id = 0;
  DictEntry entry;
  int src_begin = 0, src_end = 0;  // token span [begin, end)
  int tgt_begin = 0, tgt_end = 0;
  std::vector<std::string> reference_surface;  // target span as it appears in the reference

  std::string to_jsonl() const;
  static ConstraintAnnotation from_jsonl(const std::string& line);
};

struct AugmentThresholds {
  long noun_max_freq = 20;
  long verb_max_freq = 2000;
};

/// Chooses at most one constraint: the entry must match the source phrase,
/// an attested inflection of its lemma must appear on the target side, and
/// its train_freq must pass the POS threshold. Ties break leftmost source
/// position first, then longest source phrase.
std::optional<ConstraintAnnotation> select_constraint(const ParallelExample& pair,
                                                      const std::vector<DictEntry>& dicts,
                                                      const InflectionLexicon& lexicon,
                                                      const AugmentThresholds& thresholds);

enum class AugmentMode { Placeholder, CodeswitchOracle, CodeswitchLemma, Morphtag };

AugmentMode augment_mode_from(const std::string& s);
std::string to_string(AugmentMode mode);

/// Both spans replaced by one [NOUN]/[VERB] token; annotations re-aligned.
ParallelExample render_placeholder(const ParallelExample& pair, const ConstraintAnnotation& c);

/// Source span replaced by the reference surface (oracle) or the lemma; the
/// target side is untouched.
ParallelExample render_codeswitch(const ParallelExample& pair, const ConstraintAnnotation& c,
                                  bool oracle_form);

/// Source span replaced by the lemma; target span replaced by the lemma
/// followed by the form tag of the reference surface. Throws Error when the
/// surface is not in the lexicon (callers count and skip).
ParallelExample render_morphtag(const ParallelExample& pair, const ConstraintAnnotation& c,
                                const InflectionLexicon& lexicon);

/// Replaces every (lemma, tag) pair found in the lexicon by its surface;
/// unknown pairs keep the lemma and drop the tag; dangling tags are dropped.
std::vector<std::string> apply_morph_postprocess(const std::vector<std::string>& tokens,
                                                 const InflectionLexicon& lexicon);

struct AugmentResult {
  std::vector<ParallelExample> corpus;  // originals followed by augmented copies
  std::vector<ConstraintAnnotation> manifest;
  long skipped_lexicon_misses = 0;
  std::size_t original_size = 0;
};

/// One augmented copy per qualifying pair, originals retained. target_ratio
/// > 0 caps augmented copies at round(ratio * originals) via a seeded
/// subsample; 0 keeps every qualifying pair.
AugmentResult augment_corpus(const std::vector<ParallelExample>& corpus,
                             const std::vector<DictEntry>& dicts,
                             const InflectionLexicon& lexicon, AugmentMode mode,
                             const AugmentThresholds& thresholds, double target_ratio,
                             std::uint64_t seed);

void save_manifest(const std::vector<ConstraintAnnotation>& manifest, const std::string& path);
std::vector<ConstraintAnnotation> load_manifest(const std::string& path);

}  // namespace lcmt
