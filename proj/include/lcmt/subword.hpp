#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lcmt/corpus.hpp"

namespace lcmt {

/// Reserved token ids. PAD..UNK are structural; the placeholder and morph-tag
/// tokens are atomic: a literal whole-token match protects them from subword
/// segmentation in both directions.
struct Specials {
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr const char* kPadSurface = "<pad>";
  static constexpr const char* kBosSurface = "<s>";
  static constexpr const char* kEosSurface = "</s>";
  static constexpr const char* kUnkSurface = "<unk>";
  static constexpr const char* kNoun = "[NOUN]";
  static constexpr const char* kVerb = "[VERB]";
};

/// Default morph-tag token set: nouns {<NN>, <NNS>}, verbs {<VB>, <VBD>,
/// <VBG>, <VBN>, <VBZ>}.
std::vector<std::string> default_tag_tokens();

/// Shared source/target subword inventory learned with frequency-greedy
/// byte-pair merging. Word starts carry the "▁" marker so decoding restores
/// token boundaries exactly.
class SubwordVocab {
public:
  SubwordVocab() = default;

  /// Learns a vocabulary of at most target_size pieces over both sides of the
  /// corpus. Ties between equally frequent merge pairs break on the
  /// lexicographically smaller (left, right) pair, so the result is a pure
  /// function of the corpus and size. Sets undersized() when the corpus runs
  /// out of repeated pairs first.
  static SubwordVocab train(const std::vector<ParallelExample>& corpus, int target_size,
                            const std::vector<std::string>& tag_tokens = default_tag_tokens());

  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  int size() const { return static_cast<int>(pieces_.size()); }
  int num_specials() const { return num_specials_; }
  bool undersized() const { return undersized_; }
  const std::string& piece(int id) const;
  bool is_special(int id) const { return id >= 0 && id < num_specials_; }
  /// Id of an exact piece, or -1.
  int id_of(const std::string& piece) const;

  int noun_id() const { return id_of(Specials::kNoun); }
  int verb_id() const { return id_of(Specials::kVerb); }

  void save(const std::string& path) const;
  static SubwordVocab load(const std::string& path);

private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> ids_;
  int num_specials_ = 0;
  std::size_t max_piece_chars_ = 1;
  bool undersized_ = false;

  void index_pieces();
  void encode_word(const std::string& word, std::vector<int>* out) const;
};

/// Target-language character inventory for the character decoder.
class CharVocab {
public:
  CharVocab() = default;

  /// Covers every character of the corpus target side plus every character of
  /// the given extra strings (dictionary lemmas and surfaces).
  static CharVocab build(const std::vector<ParallelExample>& corpus,
                         const std::vector<std::string>& extra_strings = {});

  /// Unknown characters map to UNK.
  std::vector<int> encode(const std::string& text) const;
  std::string decode(const std::vector<int>& ids) const;

  int size() const { return static_cast<int>(chars_.size()); }
  bool covers(const std::string& text) const;

  void save(const std::string& path) const;
  static CharVocab load(const std::string& path);

private:
  std::vector<std::string> chars_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace lcmt
