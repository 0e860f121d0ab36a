#include "lcmt/dict.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "lcmt/common.hpp"

namespace lcmt {

std::string to_string(PosClass pos) { return pos == PosClass::Noun ? "NOUN" : "VERB"; }

PosClass pos_class_from(const std::string& s) {
  if (s == "NOUN") return PosClass::Noun;
  if (s == "VERB") return PosClass::Verb;
  fail("unknown pos class '", s, "', expected NOUN or VERB");
}

namespace {

bool contains_phrase(const std::vector<std::string>& tokens,
                     const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + i)) return true;
  }
  return false;
}

}  // namespace

std::vector<PhraseCandidate> extract_phrases(const std::vector<ParallelExample>& corpus,
                                             const std::vector<AlignmentMatrix>& alignments,
                                             int max_len, long min_pair_count) {
  check(max_len >= 1, "extract_phrases: max_len must be >= 1, got ", max_len);
  check(corpus.size() == alignments.size(), "extract_phrases: ", corpus.size(), " pairs vs ",
        alignments.size(), " alignments");

  using Key = std::pair<std::vector<std::string>, std::vector<std::string>>;
  std::map<Key, PhraseCandidate> counts;

  for (std::size_t p = 0; p < corpus.size(); ++p) {
    const auto& ex = corpus[p];
    const auto& links = alignments[p].links;
    const int slen = static_cast<int>(ex.src_tokens.size());
    const int tlen = static_cast<int>(ex.tgt_tokens.size());
    for (int i1 = 0; i1 < slen; ++i1) {
      for (int i2 = i1; i2 < std::min(slen, i1 + max_len); ++i2) {
        // Hull of target positions linked from the source span.
        int j1 = tlen, j2 = -1;
        for (auto [s, t] : links) {
          if (s >= i1 && s <= i2) {
            j1 = std::min(j1, t);
            j2 = std::max(j2, t);
          }
        }
        if (j2 < 0 || j2 - j1 + 1 > max_len) continue;
        // Consistency: no link from inside the target span may leave the
        // source span.
        bool consistent = true;
        for (auto [s, t] : links) {
          if (t >= j1 && t <= j2 && (s < i1 || s > i2)) {
            consistent = false;
            break;
          }
        }
        if (!consistent) continue;
        Key key{{ex.src_tokens.begin() + i1, ex.src_tokens.begin() + i2 + 1},
                {ex.tgt_tokens.begin() + j1, ex.tgt_tokens.begin() + j2 + 1}};
        auto [it, inserted] = counts.try_emplace(key);
        if (inserted) {
          it->second.src_phrase = key.first;
          it->second.tgt_phrase = key.second;
          it->second.exemplar_pair = static_cast<int>(p);
          it->second.exemplar_src_begin = i1;
          it->second.exemplar_tgt_begin = j1;
        }
        ++it->second.pair_count;
      }
    }
  }

  std::vector<PhraseCandidate> table;
  for (auto& [key, cand] : counts) {
    if (cand.pair_count >= min_pair_count) table.push_back(std::move(cand));
  }
  // train_freq: pairs of the corpus where both sides occur as token substrings.
  for (auto& cand : table) {
    for (const auto& ex : corpus) {
      if (contains_phrase(ex.src_tokens, cand.src_phrase) &&
          contains_phrase(ex.tgt_tokens, cand.tgt_phrase))
        ++cand.train_freq;
    }
  }
  return table;
}

bool PosRules::is_noun(const std::string& tag) const {
  return std::find(noun_tags.begin(), noun_tags.end(), tag) != noun_tags.end();
}
bool PosRules::is_nominal_verb(const std::string& tag) const {
  return std::find(nominal_verb_tags.begin(), nominal_verb_tags.end(), tag) !=
         nominal_verb_tags.end();
}
bool PosRules::is_verb(const std::string& tag) const {
  return std::find(verb_tags.begin(), verb_tags.end(), tag) != verb_tags.end();
}

ClassifiedDicts classify_entries(const std::vector<PhraseCandidate>& table,
                                 const std::vector<ParallelExample>& corpus,
                                 const PosRules& rules) {
  ClassifiedDicts dicts;
  for (const auto& cand : table) {
    check(cand.exemplar_pair >= 0 && cand.exemplar_pair < static_cast<int>(corpus.size()),
          "classify_entries: exemplar pair ", cand.exemplar_pair, " out of range");
    const auto& ex = corpus[cand.exemplar_pair];
    check(ex.has_src_pos() && ex.has_tgt_pos() && ex.has_tgt_lemmas(),
          "classify_entries: pair ", ex.id,
          " lacks POS/lemma annotations; supply an annotated corpus (columns "
          "src_pos, tgt_pos, tgt_lemmas)");

    const int sb = cand.exemplar_src_begin;
    const int tb = cand.exemplar_tgt_begin;
    const int sn = static_cast<int>(cand.src_phrase.size());
    const int tn = static_cast<int>(cand.tgt_phrase.size());

    bool src_all_noun = true, src_all_nominal_verb = true, tgt_all_noun = true;
    for (int k = 0; k < sn; ++k) {
      const auto& tag = ex.src_pos[sb + k];
      src_all_noun = src_all_noun && rules.is_noun(tag);
      src_all_nominal_verb = src_all_nominal_verb && rules.is_nominal_verb(tag);
    }
    for (int k = 0; k < tn; ++k) tgt_all_noun = tgt_all_noun && rules.is_noun(ex.tgt_pos[tb + k]);
    const bool tgt_head_verb = rules.is_verb(ex.tgt_pos[tb + tn - 1]);

    DictEntry entry;
    entry.src_phrase = cand.src_phrase;
    entry.tgt_phrase = cand.tgt_phrase;
    entry.pair_count = cand.pair_count;
    entry.train_freq = cand.train_freq;
    entry.tgt_lemma.assign(ex.tgt_lemmas.begin() + tb, ex.tgt_lemmas.begin() + tb + tn);

    if (src_all_noun && tgt_all_noun) {
      entry.pos_class = PosClass::Noun;
      dicts.noun_dict.push_back(std::move(entry));
    } else if (src_all_nominal_verb && tgt_head_verb) {
      entry.pos_class = PosClass::Verb;
      dicts.verb_dict.push_back(std::move(entry));
    }
    // mixed tags: dropped
  }
  return dicts;
}

DictSplit split_seen_unseen(const std::vector<DictEntry>& eval_dict, std::uint64_t seed) {
  check(eval_dict.size() >= 2, "split_seen_unseen: need at least 2 entries, got ",
        eval_dict.size());
  DictSplit split;
  split.seed = seed;
  auto order = shuffled_indices(eval_dict.size(), seed);
  const std::size_t half = eval_dict.size() / 2;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < half ? split.seen : split.unseen).push_back(eval_dict[order[k]]);
  }
  return split;
}

std::vector<DictEntry> prune_training_dict(const std::vector<DictEntry>& train_dict,
                                           const std::vector<DictEntry>& unseen) {
  std::set<std::tuple<std::string, std::string, std::string>> banned;
  for (const auto& e : unseen)
    banned.insert({to_string(e.pos_class), join(e.src_phrase), join(e.tgt_lemma)});
  std::vector<DictEntry> pruned;
  for (const auto& e : train_dict) {
    if (!banned.count({to_string(e.pos_class), join(e.src_phrase), join(e.tgt_lemma)}))
      pruned.push_back(e);
  }
  return pruned;
}

void save_dict(const std::vector<DictEntry>& dict, const std::string& path) {
  std::ofstream out(path);
  check(out.good(), "cannot write dictionary file: ", path);
  for (const auto& e : dict) {
    out << join(e.src_phrase) << '\t' << join(e.tgt_phrase) << '\t' << join(e.tgt_lemma) << '\t'
        << to_string(e.pos_class) << '\t' << e.pair_count << '\t' << e.train_freq << '\n';
  }
  check(out.good(), "failed while writing dictionary file: ", path);
}

std::vector<DictEntry> load_dict(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open dictionary file: ", path);
  std::vector<DictEntry> dict;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = split_on(line, '\t');
    check(cols.size() == 6, path, " line ", lineno,
          ": expected 6 columns (src, tgt, lemma, pos, pair_count, train_freq)");
    DictEntry e;
    e.src_phrase = split_ws(cols[0]);
    e.tgt_phrase = split_ws(cols[1]);
    e.tgt_lemma = split_ws(cols[2]);
    e.pos_class = pos_class_from(cols[3]);
    try {
      e.pair_count = std::stol(cols[4]);
      e.train_freq = std::stol(cols[5]);
    } catch (const std::exception&) {
      fail(path, " line ", lineno, ": counts must be integers");
    }
    check(!e.src_phrase.empty() && !e.tgt_phrase.empty(), path, " line ", lineno,
          ": phrases must be non-empty");
    check(e.pair_count >= 1, path, " line ", lineno, ": pair_count must be >= 1");
    dict.push_back(std::move(e));
  }
  return dict;
}

}  // namespace lcmt
