#include "lcmt/synthbench.hpp"

#include <algorithm>
#include <set>

#include "lcmt/common.hpp"

namespace lcmt {
namespace {

const char* kConsonants = "bdfghjklmnprsvwz";  // 't' reserved for suffixes
const char* kVowels = "aeiou";
const char* kFinalVowels = "eiou";  // no final 'a': past forms end in "a"/"ta"

std::string reversed(const std::string& s) { return std::string(s.rbegin(), s.rend()); }

std::string time_word(Tense t) {
  switch (t) {
    case Tense::Prs: return "today";
    case Tense::Pst: return "yesterday";
    case Tense::Prog: return "now";
  }
  fail("bad tense");
}

std::string marker(Tense t) { return to_string(t); }

struct Pick {
  std::string lemma;
  bool is_verb;
};

DictEntry make_entry(const std::string& lemma, PosClass pos, long freq) {
  DictEntry e;
  e.src_phrase = {reversed(lemma)};
  e.tgt_phrase = {lemma};
  e.tgt_lemma = {lemma};
  e.pos_class = pos;
  e.pair_count = std::max(1L, freq);
  e.train_freq = freq;
  return e;
}

}  // namespace

Tense tense_from(const std::string& s) {
  if (s == "prs") return Tense::Prs;
  if (s == "pst") return Tense::Pst;
  if (s == "prog") return Tense::Prog;
  fail("unknown tense '", s, "' (expected prs, pst, or prog)");
}

std::string to_string(Tense t) {
  switch (t) {
    case Tense::Prs: return "prs";
    case Tense::Pst: return "pst";
    case Tense::Prog: return "prog";
  }
  fail("bad tense value");
}

SynthGrammar SynthGrammar::standard(std::uint64_t seed) {
  // Unique stems across all verbs and nouns keep every surface form distinct
  // (the past of "patu" could otherwise collide with a lemma "pata").
  std::vector<std::string> stems;
  for (const char* c1 = kConsonants; *c1; ++c1)
    for (const char* v = kVowels; *v; ++v)
      for (const char* c2 = kConsonants; *c2; ++c2)
        stems.push_back({*c1, *v, *c2});
  std::set<std::string> reserved = {"pat", "mik", "kem"};
  stems.erase(std::remove_if(stems.begin(), stems.end(),
                             [&reserved](const std::string& s) { return reserved.count(s); }),
              stems.end());

  Rng rng(seed);
  auto order = shuffled_indices(stems.size(), rng.next_u64());
  std::size_t cursor = 0;
  auto take = [&](std::size_t k) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k; ++i) {
      const auto& stem = stems[order[cursor++]];
      out.push_back(stem + kFinalVowels[rng.next_below(4)]);
    }
    return out;
  };

  SynthGrammar g;
  g.train_verbs = take(159);
  g.train_verbs.push_back("kemo");
  g.seen_verbs = take(18);
  g.seen_verbs.push_back("patu");
  g.seen_verbs.push_back("miko");
  g.unseen_verbs = take(20);
  g.train_nouns = take(15);
  g.seen_nouns = take(15);
  g.unseen_nouns = take(5);
  g.irregulars[{"kemo", Tense::Pst}] = "keta";
  g.validate();
  return g;
}

void SynthGrammar::validate() const {
  check(!train_verbs.empty() && !seen_verbs.empty() && !unseen_verbs.empty() &&
            !train_nouns.empty() && !seen_nouns.empty() && !unseen_nouns.empty(),
        "synth grammar: every partition must be non-empty");
  std::set<std::string> all;
  for (const auto* part : {&train_verbs, &seen_verbs, &unseen_verbs, &train_nouns, &seen_nouns,
                           &unseen_nouns}) {
    for (const auto& lemma : *part) {
      check(lemma.size() >= 2, "synth grammar: lemma '", lemma, "' too short");
      check(all.insert(lemma).second, "synth grammar: duplicate lemma '", lemma, "'");
    }
  }
}

std::string oracle_inflect(const SynthGrammar& grammar, const std::string& lemma, Tense tense) {
  check(lemma.size() >= 2, "oracle_inflect: lemma '", lemma, "' too short");
  auto it = grammar.irregulars.find({lemma, tense});
  if (it != grammar.irregulars.end()) return it->second;
  switch (tense) {
    case Tense::Prs: return lemma;
    case Tense::Prog: return lemma + "na";
    case Tense::Pst: {
      std::string stem = lemma.substr(0, lemma.size() - 1);
      // t + ta collapses to ta: "patu" -> "pata", not "patta".
      if (!stem.empty() && stem.back() == 't') return stem + "a";
      return stem + "ta";
    }
  }
  fail("bad tense value");
}

SynthData gen_corpus(const SynthGrammar& grammar, int n, std::uint64_t seed, int n_val,
                     int n_test) {
  check(n >= 1, "gen_corpus: n must be >= 1");
  grammar.validate();
  if (n_val <= 0) n_val = std::max(20, n / 20);
  if (n_test <= 0) n_test = std::max(40, n / 20);

  std::vector<std::string> train_pool_verbs = grammar.train_verbs;
  train_pool_verbs.insert(train_pool_verbs.end(), grammar.seen_verbs.begin(),
                          grammar.seen_verbs.end());
  std::vector<std::string> eval_verbs = grammar.seen_verbs;
  eval_verbs.insert(eval_verbs.end(), grammar.unseen_verbs.begin(), grammar.unseen_verbs.end());
  std::vector<std::string> eval_nouns = grammar.seen_nouns;
  eval_nouns.insert(eval_nouns.end(), grammar.unseen_nouns.begin(), grammar.unseen_nouns.end());

  const std::vector<std::string> adjectives = {"big", "small"};
  Rng rng(seed);
  std::map<std::string, long> verb_freq, noun_freq;

  // Sentences follow one of four templates; the tense marker sits on the
  // source and the matching time word on the target.
  auto make_pair = [&](int id, const std::string& verb, const std::string& noun, Tense tense,
                       int variant, bool with_adj, const std::string& adj) {
    std::string form = oracle_inflect(grammar, verb, tense);
    std::string vsrc = reversed(verb), nsrc = reversed(noun), asrc = reversed(adj);
    std::string tw = time_word(tense), mk = marker(tense);
    ParallelExample ex;
    ex.id = id;
    auto push = [&ex](const std::string& s, const std::string& t, const std::string& sp,
                      const std::string& tp, const std::string& lemma) {
      if (!s.empty()) {
        ex.src_tokens.push_back(s);
        ex.src_pos.push_back(sp);
      }
      if (!t.empty()) {
        ex.tgt_tokens.push_back(t);
        ex.tgt_pos.push_back(tp);
        ex.tgt_lemmas.push_back(lemma.empty() ? t : lemma);
      }
    };
    auto push_noun = [&] {
      if (with_adj) push(asrc, adj, "ADJ", "ADJ", "");
      push(nsrc, noun, "NOUN", "NOUN", "");
    };
    switch (variant) {
      case 0:  // marker noun verb / time the noun verb
        push(mk, tw, "PRT", "ADV", "");
        push("", "the", "", "DET", "");
        push_noun();
        push(vsrc, form, "VS", "VERB", verb);
        break;
      case 1:  // noun verb marker / the noun verb time
        push("", "the", "", "DET", "");
        push_noun();
        push(vsrc, form, "VS", "VERB", verb);
        push(mk, tw, "PRT", "ADV", "");
        break;
      case 2:  // marker verb noun / time verb the noun
        push(mk, tw, "PRT", "ADV", "");
        push(vsrc, form, "VS", "VERB", verb);
        push("", "the", "", "DET", "");
        push_noun();
        break;
      default:  // verb noun marker / verb the noun time
        push(vsrc, form, "VS", "VERB", verb);
        push("", "the", "", "DET", "");
        push_noun();
        push(mk, tw, "PRT", "ADV", "");
        break;
    }
    return ex;
  };

  auto draw = [&rng](const std::vector<std::string>& pool) {
    return pool[rng.next_below(pool.size())];
  };

  SynthData data;
  for (int i = 0; i < n; ++i) {
    std::string verb = draw(train_pool_verbs);
    // Seen nouns stay rare so their entries pass the noun frequency cap.
    std::string noun =
        rng.next_real() < 0.03 ? draw(grammar.seen_nouns) : draw(grammar.train_nouns);
    Tense tense = (Tense)rng.next_below(3);
    bool with_adj = rng.next_real() < 0.3;
    data.train.push_back(make_pair(i, verb, noun, tense, (int)rng.next_below(4), with_adj,
                                   draw(adjectives)));
    ++verb_freq[verb];
    ++noun_freq[noun];
  }
  for (int i = 0; i < n_val; ++i) {
    std::string verb = draw(train_pool_verbs);
    std::string noun =
        rng.next_real() < 0.03 ? draw(grammar.seen_nouns) : draw(grammar.train_nouns);
    Tense tense = (Tense)rng.next_below(3);
    bool with_adj = rng.next_real() < 0.3;
    data.val.push_back(make_pair(i, verb, noun, tense, (int)rng.next_below(4), with_adj,
                                 draw(adjectives)));
  }
  for (int i = 0; i < n_test; ++i) {
    std::string verb = draw(eval_verbs);
    std::string noun = draw(eval_nouns);
    Tense tense = (Tense)rng.next_below(3);
    bool with_adj = rng.next_real() < 0.3;
    data.test.push_back(make_pair(i, verb, noun, tense, (int)rng.next_below(4), with_adj,
                                  draw(adjectives)));
  }

  for (const auto& lemma : train_pool_verbs)
    data.train_dict.push_back(make_entry(lemma, PosClass::Verb, verb_freq[lemma]));
  for (const auto& lemma : grammar.train_nouns)
    data.train_dict.push_back(make_entry(lemma, PosClass::Noun, noun_freq[lemma]));
  for (const auto& lemma : grammar.seen_nouns)
    data.train_dict.push_back(make_entry(lemma, PosClass::Noun, noun_freq[lemma]));
  for (const auto& lemma : grammar.seen_verbs)
    data.seen_dict.push_back(make_entry(lemma, PosClass::Verb, verb_freq[lemma]));
  for (const auto& lemma : grammar.seen_nouns)
    data.seen_dict.push_back(make_entry(lemma, PosClass::Noun, noun_freq[lemma]));
  for (const auto& lemma : grammar.unseen_verbs)
    data.unseen_dict.push_back(make_entry(lemma, PosClass::Verb, 0));
  for (const auto& lemma : grammar.unseen_nouns)
    data.unseen_dict.push_back(make_entry(lemma, PosClass::Noun, 0));

  auto add_verb_forms = [&](const std::vector<std::string>& lemmas) {
    for (const auto& lemma : lemmas) {
      data.lexicon.add({lemma, PosClass::Verb, "<VB>", oracle_inflect(grammar, lemma, Tense::Prs)});
      data.lexicon.add({lemma, PosClass::Verb, "<VBD>", oracle_inflect(grammar, lemma, Tense::Pst)});
      data.lexicon.add(
          {lemma, PosClass::Verb, "<VBG>", oracle_inflect(grammar, lemma, Tense::Prog)});
    }
  };
  add_verb_forms(grammar.train_verbs);
  add_verb_forms(grammar.seen_verbs);
  add_verb_forms(grammar.unseen_verbs);
  for (const auto* nouns : {&grammar.train_nouns, &grammar.seen_nouns, &grammar.unseen_nouns})
    for (const auto& lemma : *nouns) data.lexicon.add({lemma, PosClass::Noun, "<NN>", lemma});

  return data;
}

}  // namespace lcmt
