#include "lcmt/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "lcmt/common.hpp"
#include "lcmt/subword.hpp"

namespace lcmt {
namespace {

using json = nlohmann::json;

std::string pos_key(PosClass pos) { return to_string(pos); }

/// Leftmost occurrence of needle in haystack, or -1.
int find_span(const std::vector<std::string>& haystack, const std::vector<std::string>& needle,
              int from = 0) {
  if (needle.empty() || haystack.size() < needle.size()) return -1;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + i)) return (int)i;
  }
  return -1;
}

std::vector<std::string> spliced(const std::vector<std::string>& tokens, int begin, int end,
                                 const std::vector<std::string>& repl) {
  std::vector<std::string> out(tokens.begin(), tokens.begin() + begin);
  out.insert(out.end(), repl.begin(), repl.end());
  out.insert(out.end(), tokens.begin() + end, tokens.end());
  return out;
}

void check_constraint(const ParallelExample& pair, const ConstraintAnnotation& c) {
  check(c.src_begin >= 0 && c.src_begin < c.src_end &&
            c.src_end <= (int)pair.src_tokens.size() && c.tgt_begin >= 0 &&
            c.tgt_begin < c.tgt_end && c.tgt_end <= (int)pair.tgt_tokens.size(),
        "constraint spans out of range for pair ", pair.id);
  check(std::equal(c.entry.src_phrase.begin(), c.entry.src_phrase.end(),
                   pair.src_tokens.begin() + c.src_begin) &&
            c.src_end - c.src_begin == (int)c.entry.src_phrase.size(),
        "source span does not match dictionary entry in pair ", pair.id);
  check(std::equal(c.reference_surface.begin(), c.reference_surface.end(),
                   pair.tgt_tokens.begin() + c.tgt_begin) &&
            c.tgt_end - c.tgt_begin == (int)c.reference_surface.size(),
        "target span does not match recorded surface in pair ", pair.id);
}

ParallelExample rewrite(const ParallelExample& pair, const ConstraintAnnotation& c,
                        const std::vector<std::string>& src_repl,
                        const std::vector<std::string>& tgt_repl,
                        const std::string& src_repl_pos, const std::string& tgt_repl_pos) {
  ParallelExample out;
  out.id = pair.id;
  out.src_tokens = spliced(pair.src_tokens, c.src_begin, c.src_end, src_repl);
  out.tgt_tokens = spliced(pair.tgt_tokens, c.tgt_begin, c.tgt_end, tgt_repl);
  if (!pair.src_pos.empty()) {
    out.src_pos = spliced(pair.src_pos, c.src_begin, c.src_end,
                          std::vector<std::string>(src_repl.size(), src_repl_pos));
  }
  if (!pair.tgt_pos.empty()) {
    out.tgt_pos = spliced(pair.tgt_pos, c.tgt_begin, c.tgt_end,
                          std::vector<std::string>(tgt_repl.size(), tgt_repl_pos));
  }
  if (!pair.tgt_lemmas.empty()) {
    std::vector<std::string> lemmas(tgt_repl.size(), c.entry.tgt_lemma.back());
    out.tgt_lemmas = spliced(pair.tgt_lemmas, c.tgt_begin, c.tgt_end, lemmas);
  }
  return out;
}

json phrase_json(const std::vector<std::string>& phrase) { return json(phrase); }

std::vector<std::string> phrase_from(const json& j, const char* field) {
  check(j.is_array(), "manifest field '", field, "' must be an array");
  std::vector<std::string> out;
  for (const auto& item : j) {
    check(item.is_string(), "manifest field '", field, "' must hold strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

void InflectionLexicon::add(Form form) {
  auto key = std::make_tuple(form.lemma, pos_key(form.pos), form.tag);
  if (by_key_.count(key)) return;
  by_key_[key] = forms_.size();
  by_surface_.emplace(form.surface, forms_.size());
  forms_.push_back(std::move(form));
}

std::optional<std::string> InflectionLexicon::lookup(const std::string& lemma, PosClass pos,
                                                     const std::string& tag) const {
  auto it = by_key_.find(std::make_tuple(lemma, pos_key(pos), tag));
  if (it == by_key_.end()) return std::nullopt;
  return forms_[it->second].surface;
}

std::optional<std::pair<std::string, std::string>> InflectionLexicon::reverse(
    const std::string& surface) const {
  auto it = by_surface_.find(surface);
  if (it == by_surface_.end()) return std::nullopt;
  return std::make_pair(forms_[it->second].lemma, forms_[it->second].tag);
}

std::vector<std::string> InflectionLexicon::surfaces_of(const std::string& lemma,
                                                        PosClass pos) const {
  std::vector<std::string> out;
  for (const auto& form : forms_) {
    if (form.lemma != lemma || form.pos != pos) continue;
    if (std::find(out.begin(), out.end(), form.surface) == out.end()) out.push_back(form.surface);
  }
  return out;
}

void InflectionLexicon::save(const std::string& path) const {
  std::ofstream out(path);
  check(out.good(), "cannot write lexicon file ", path);
  for (const auto& form : forms_) {
    out << form.lemma << '\t' << pos_key(form.pos) << '\t' << form.tag << '\t' << form.surface
        << '\n';
  }
}

InflectionLexicon InflectionLexicon::load(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open lexicon file ", path);
  InflectionLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = split_on(line, '\t');
    check(cols.size() == 4, "lexicon line ", lineno, ": expected 4 columns, got ", cols.size());
    lex.add({cols[0], pos_class_from(cols[1]), cols[2], cols[3]});
  }
  return lex;
}

std::string ConstraintAnnotation::to_jsonl() const {
  json j;
  j["pair_id"] = pair_id;
  j["entry"] = {{"src", phrase_json(entry.src_phrase)},
                {"tgt", phrase_json(entry.tgt_phrase)},
                {"lemma", phrase_json(entry.tgt_lemma)},
                {"pos", to_string(entry.pos_class)},
                {"pair_count", entry.pair_count},
                {"train_freq", entry.train_freq}};
  j["src_span"] = {src_begin, src_end};
  j["tgt_span"] = {tgt_begin, tgt_end};
  j["reference_surface"] = phrase_json(reference_surface);
  return j.dump();
}

ConstraintAnnotation ConstraintAnnotation::from_jsonl(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    fail("bad manifest line: ", e.what());
  }
  ConstraintAnnotation c;
  check(j.contains("pair_id") && j.contains("entry") && j.contains("src_span") &&
            j.contains("tgt_span") && j.contains("reference_surface"),
        "manifest line missing required fields");
  c.pair_id = j["pair_id"].get<int>();
  const auto& e = j["entry"];
  c.entry.src_phrase = phrase_from(e.at("src"), "entry.src");
  c.entry.tgt_phrase = phrase_from(e.at("tgt"), "entry.tgt");
  c.entry.tgt_lemma = phrase_from(e.at("lemma"), "entry.lemma");
  c.entry.pos_class = pos_class_from(e.at("pos").get<std::string>());
  c.entry.pair_count = e.at("pair_count").get<long>();
  c.entry.train_freq = e.at("train_freq").get<long>();
  c.src_begin = j["src_span"].at(0).get<int>();
  c.src_end = j["src_span"].at(1).get<int>();
  c.tgt_begin = j["tgt_span"].at(0).get<int>();
  c.tgt_end = j["tgt_span"].at(1).get<int>();
  c.reference_surface = phrase_from(j["reference_surface"], "reference_surface");
  return c;
}

AugmentMode augment_mode_from(const std::string& s) {
  if (s == "placeholder") return AugmentMode::Placeholder;
  if (s == "codeswitch-oracle") return AugmentMode::CodeswitchOracle;
  if (s == "codeswitch-lemma") return AugmentMode::CodeswitchLemma;
  if (s == "morphtag") return AugmentMode::Morphtag;
  fail("unknown augmentation mode '", s,
       "' (expected placeholder, codeswitch-oracle, codeswitch-lemma, or morphtag)");
}

std::string to_string(AugmentMode mode) {
  switch (mode) {
    case AugmentMode::Placeholder: return "placeholder";
    case AugmentMode::CodeswitchOracle: return "codeswitch-oracle";
    case AugmentMode::CodeswitchLemma: return "codeswitch-lemma";
    case AugmentMode::Morphtag: return "morphtag";
  }
  fail("bad augmentation mode value");
}

std::optional<ConstraintAnnotation> select_constraint(const ParallelExample& pair,
                                                      const std::vector<DictEntry>& dicts,
                                                      const InflectionLexicon& lexicon,
                                                      const AugmentThresholds& thresholds) {
  std::optional<ConstraintAnnotation> best;
  // Smaller key wins: leftmost source match, then longest source phrase.
  auto key_of = [](const ConstraintAnnotation& c) {
    return std::make_tuple(c.src_begin, -(int)c.entry.src_phrase.size(), c.tgt_begin,
                           join(c.entry.src_phrase), join(c.entry.tgt_lemma));
  };
  for (const auto& entry : dicts) {
    long cap = entry.pos_class == PosClass::Noun ? thresholds.noun_max_freq
                                                 : thresholds.verb_max_freq;
    if (entry.train_freq > cap) continue;
    int s = find_span(pair.src_tokens, entry.src_phrase);
    if (s < 0) continue;
    auto surfaces = lexicon.surfaces_of(entry.tgt_lemma.back(), entry.pos_class);
    if (surfaces.empty()) continue;
    int t = -1;
    std::vector<std::string> variant = entry.tgt_lemma;
    std::vector<std::string> matched;
    for (std::size_t i = 0; t < 0 && i + variant.size() <= pair.tgt_tokens.size(); ++i) {
      for (const auto& surface : surfaces) {
        variant.back() = surface;
        if (std::equal(variant.begin(), variant.end(), pair.tgt_tokens.begin() + i)) {
          t = (int)i;
          matched = variant;
          break;
        }
      }
    }
    if (t < 0) continue;
    ConstraintAnnotation c;
    c.pair_id = pair.id;
    c.entry = entry;
    c.src_begin = s;
    c.src_end = s + (int)entry.src_phrase.size();
    c.tgt_begin = t;
    c.tgt_end = t + (int)matched.size();
    c.reference_surface = matched;
    if (!best || key_of(c) < key_of(*best)) best = std::move(c);
  }
  return best;
}

ParallelExample render_placeholder(const ParallelExample& pair, const ConstraintAnnotation& c) {
  check_constraint(pair, c);
  std::string ph = c.entry.pos_class == PosClass::Noun ? Specials::kNoun : Specials::kVerb;
  std::string tag = c.entry.pos_class == PosClass::Noun ? "NOUN" : "VERB";
  return rewrite(pair, c, {ph}, {ph}, tag, tag);
}

ParallelExample render_codeswitch(const ParallelExample& pair, const ConstraintAnnotation& c,
                                  bool oracle_form) {
  check_constraint(pair, c);
  const auto& repl = oracle_form ? c.reference_surface : c.entry.tgt_lemma;
  std::string tag = c.entry.pos_class == PosClass::Noun ? "NOUN" : "VERB";
  ParallelExample out;
  out.id = pair.id;
  out.src_tokens = spliced(pair.src_tokens, c.src_begin, c.src_end, repl);
  out.tgt_tokens = pair.tgt_tokens;
  if (!pair.src_pos.empty()) {
    out.src_pos = spliced(pair.src_pos, c.src_begin, c.src_end,
                          std::vector<std::string>(repl.size(), tag));
  }
  out.tgt_pos = pair.tgt_pos;
  out.tgt_lemmas = pair.tgt_lemmas;
  return out;
}

ParallelExample render_morphtag(const ParallelExample& pair, const ConstraintAnnotation& c,
                                const InflectionLexicon& lexicon) {
  check_constraint(pair, c);
  auto rev = lexicon.reverse(c.reference_surface.back());
  if (!rev) fail("surface '", c.reference_surface.back(), "' not in lexicon (pair ", pair.id, ")");
  std::vector<std::string> tgt_repl = c.entry.tgt_lemma;
  tgt_repl.push_back(rev->second);
  std::string tag = c.entry.pos_class == PosClass::Noun ? "NOUN" : "VERB";
  return rewrite(pair, c, c.entry.tgt_lemma, tgt_repl, tag, tag);
}

std::vector<std::string> apply_morph_postprocess(const std::vector<std::string>& tokens,
                                                 const InflectionLexicon& lexicon) {
  std::set<std::string> tags;
  for (const auto& t : default_tag_tokens()) tags.insert(t);
  std::vector<std::string> out;
  for (const auto& token : tokens) {
    if (!tags.count(token)) {
      out.push_back(token);
      continue;
    }
    if (out.empty()) continue;  // dangling tag
    bool noun_tag = token.rfind("<N", 0) == 0;
    auto surface = lexicon.lookup(out.back(), noun_tag ? PosClass::Noun : PosClass::Verb, token);
    if (surface) out.back() = *surface;
  }
  return out;
}

AugmentResult augment_corpus(const std::vector<ParallelExample>& corpus,
                             const std::vector<DictEntry>& dicts,
                             const InflectionLexicon& lexicon, AugmentMode mode,
                             const AugmentThresholds& thresholds, double target_ratio,
                             std::uint64_t seed) {
  check(target_ratio >= 0.0, "target_ratio must be non-negative, got ", target_ratio);
  AugmentResult result;
  result.original_size = corpus.size();
  result.corpus = corpus;

  std::vector<std::pair<std::size_t, ConstraintAnnotation>> candidates;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto c = select_constraint(corpus[i], dicts, lexicon, thresholds);
    if (c) candidates.emplace_back(i, std::move(*c));
  }

  std::vector<std::size_t> chosen;
  if (target_ratio > 0.0) {
    std::size_t cap = (std::size_t)std::llround(target_ratio * (double)corpus.size());
    if (cap >= candidates.size()) {
      chosen.resize(candidates.size());
      for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] = i;
    } else {
      chosen = sample_indices(candidates.size(), cap, seed);
    }
  } else {
    chosen.resize(candidates.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] = i;
  }

  for (std::size_t idx : chosen) {
    const auto& [pair_idx, constraint] = candidates[idx];
    const auto& pair = corpus[pair_idx];
    ParallelExample rendered;
    switch (mode) {
      case AugmentMode::Placeholder: rendered = render_placeholder(pair, constraint); break;
      case AugmentMode::CodeswitchOracle: rendered = render_codeswitch(pair, constraint, true); break;
      case AugmentMode::CodeswitchLemma: rendered = render_codeswitch(pair, constraint, false); break;
      case AugmentMode::Morphtag:
        try {
          rendered = render_morphtag(pair, constraint, lexicon);
        } catch (const Error&) {
          ++result.skipped_lexicon_misses;
          continue;
        }
        break;
    }
    rendered.id = (int)result.corpus.size();
    result.corpus.push_back(std::move(rendered));
    result.manifest.push_back(constraint);
  }
  return result;
}

void save_manifest(const std::vector<ConstraintAnnotation>& manifest, const std::string& path) {
  std::ofstream out(path);
  check(out.good(), "cannot write manifest file ", path);
  for (const auto& c : manifest) out << c.to_jsonl() << '\n';
}

std::vector<ConstraintAnnotation> load_manifest(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open manifest file ", path);
  std::vector<ConstraintAnnotation> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(ConstraintAnnotation::from_jsonl(line));
  }
  return out;
}

}  // namespace lcmt
