#include "lcmt/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <regex>

namespace lcmt {
namespace {

void replace_all(std::string* s, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s->find(from, pos)) != std::string::npos) {
    s->replace(pos, from.size(), to);
    pos += to.size();
  }
}

/// Counts clipped n-gram matches and totals of one sentence pair.
void accumulate_ngrams(const std::vector<std::string>& hyp, const std::vector<std::string>& ref,
                       std::array<long, 4>* correct, std::array<long, 4>* total) {
  for (int n = 1; n <= 4; ++n) {
    long hyp_ngrams = (long)hyp.size() - n + 1;
    if (hyp_ngrams <= 0) continue;
    (*total)[n - 1] += hyp_ngrams;
    std::map<std::vector<std::string>, long> ref_counts;
    for (std::size_t i = 0; i + n <= ref.size(); ++i)
      ++ref_counts[std::vector<std::string>(ref.begin() + i, ref.begin() + i + n)];
    std::map<std::vector<std::string>, long> hyp_counts;
    for (std::size_t i = 0; i + n <= hyp.size(); ++i)
      ++hyp_counts[std::vector<std::string>(hyp.begin() + i, hyp.begin() + i + n)];
    for (const auto& [ngram, count] : hyp_counts) {
      auto it = ref_counts.find(ngram);
      if (it != ref_counts.end()) (*correct)[n - 1] += std::min(count, it->second);
    }
  }
}

bool contains_subsequence(const std::vector<std::string>& haystack,
                          const std::vector<std::string>& needle) {
  if (needle.empty() || haystack.size() < needle.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i)
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + i)) return true;
  return false;
}

std::string cell_key(PosClass pos, bool seen) {
  return to_string(pos) + (seen ? "-seen" : "-unseen");
}

}  // namespace

std::vector<std::string> tokenize_13a(const std::string& text) {
  std::string norm = text;
  replace_all(&norm, "<skipped>", "");
  replace_all(&norm, "-\n", "");
  replace_all(&norm, "\n", " ");
  replace_all(&norm, "&quot;", "\"");
  replace_all(&norm, "&amp;", "&");
  replace_all(&norm, "&lt;", "<");
  replace_all(&norm, "&gt;", ">");

  static const std::regex punct(R"(([{-~[-` -&(-+:-@/]))");
  static const std::regex period_before(R"(([^0-9])([\.,]))");
  static const std::regex period_after(R"(([\.,])([^0-9]))");
  static const std::regex digit_dash(R"(([0-9])(-))");
  norm = " " + norm + " ";
  norm = std::regex_replace(norm, punct, " $1 ");
  norm = std::regex_replace(norm, period_before, "$1 $2 ");
  norm = std::regex_replace(norm, period_after, " $1 $2");
  norm = std::regex_replace(norm, digit_dash, "$1 $2 ");
  return split_ws(norm);
}

BleuResult corpus_bleu(const std::vector<std::string>& hypotheses,
                       const std::vector<std::string>& references) {
  check(!hypotheses.empty(), "bleu: empty hypothesis list");
  check(hypotheses.size() == references.size(), "bleu: ", hypotheses.size(), " hypotheses vs ",
        references.size(), " references");
  std::array<long, 4> correct{}, total{};
  BleuResult res;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    auto hyp = tokenize_13a(hypotheses[i]);
    auto ref = tokenize_13a(references[i]);
    res.hyp_len += (long)hyp.size();
    res.ref_len += (long)ref.size();
    accumulate_ngrams(hyp, ref, &correct, &total);
  }
  double smooth = 1.0;
  bool degenerate = false;
  for (int n = 0; n < 4; ++n) {
    if (total[n] == 0) {
      degenerate = true;  // corpus shorter than n+1 everywhere
      res.precisions[n] = 0.0;
    } else if (correct[n] == 0) {
      smooth *= 2.0;
      res.precisions[n] = 1.0 / (smooth * (double)total[n]);
    } else {
      res.precisions[n] = (double)correct[n] / (double)total[n];
    }
  }
  res.brevity_penalty =
      res.hyp_len >= res.ref_len
          ? 1.0
          : (res.hyp_len == 0 ? 0.0 : std::exp(1.0 - (double)res.ref_len / (double)res.hyp_len));
  if (degenerate || res.hyp_len == 0) {
    res.score = 0.0;
    return res;
  }
  double log_sum = 0.0;
  for (int n = 0; n < 4; ++n) log_sum += std::log(res.precisions[n]);
  res.score = res.brevity_penalty * std::exp(log_sum / 4.0) * 100.0;
  return res;
}

bool term_match(const std::string& hypothesis, const std::vector<std::string>& surface) {
  auto hay = tokenize_13a(lowercase_ascii(hypothesis));
  auto needle = tokenize_13a(lowercase_ascii(join(surface)));
  return contains_subsequence(hay, needle);
}

double term_use_rate(const std::vector<ConstrainedOutput>& outputs) {
  check(!outputs.empty(), "term_use_rate: no outputs");
  long matched = 0;
  for (const auto& out : outputs)
    if (term_match(out.hypothesis, out.constraint.reference_surface)) ++matched;
  return (double)matched / (double)outputs.size();
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["strategy"] = strategy;
  j["seeds"] = seeds;
  auto& cells_json = j["cells"] = nlohmann::json::object();
  for (const auto& [key, cell] : cells) {
    if (!cell.present) {
      cells_json[key] = nullptr;  // absent, not zero
      continue;
    }
    cells_json[key] = {{"bleu", cell.bleu},
                       {"term_use_rate", cell.term_use_rate},
                       {"n_constrained", cell.n_constrained},
                       {"n_matched", cell.n_matched},
                       {"n_placeholder_emitted", cell.n_placeholder_emitted}};
  }
  return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  EvalReport r;
  r.strategy = j.at("strategy").get<std::string>();
  r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  for (const auto& [key, value] : j.at("cells").items()) {
    EvalCell cell;
    if (!value.is_null()) {
      cell.present = true;
      cell.bleu = value.at("bleu").get<double>();
      cell.term_use_rate = value.at("term_use_rate").get<double>();
      cell.n_constrained = value.at("n_constrained").get<double>();
      cell.n_matched = value.at("n_matched").get<double>();
      cell.n_placeholder_emitted = value.at("n_placeholder_emitted").get<double>();
    }
    r.cells[key] = cell;
  }
  return r;
}

std::string EvalReport::render_table() const {
  std::ostringstream os;
  os << "strategy: " << strategy << "\n";
  os << "cell         bleu    use_rate  constrained  matched  ph_emitted\n";
  for (const auto& [key, cell] : cells) {
    os << key;
    for (std::size_t i = key.size(); i < 13; ++i) os << ' ';
    if (!cell.present) {
      os << "(absent)\n";
      continue;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-7.2f %-9.4f %-12.1f %-8.1f %.1f", cell.bleu,
                  cell.term_use_rate, cell.n_constrained, cell.n_matched,
                  cell.n_placeholder_emitted);
    os << buf << "\n";
  }
  return os.str();
}

CellResult run_cell(const ModelBundle& model, Strategy strategy,
                    const std::vector<DictEntry>& dict, const std::vector<ParallelExample>& test,
                    const SubwordVocab& vocab, const CharVocab& chars,
                    const InflectionLexicon& lexicon, PosClass pos, int beam_size) {
  check(model.word, "run_cell: missing word model");
  std::vector<DictEntry> class_dict;
  for (const auto& entry : dict)
    if (entry.pos_class == pos) class_dict.push_back(entry);

  AugmentThresholds no_limit{std::numeric_limits<long>::max(),
                             std::numeric_limits<long>::max()};
  CellResult res;
  std::vector<std::string> hyps, refs;
  for (const auto& pair : test) {
    auto constraint = select_constraint(pair, class_dict, lexicon, no_limit);
    if (!constraint) continue;

    std::vector<std::string> src;
    switch (strategy) {
      case Strategy::None:
        src = pair.src_tokens;
        break;
      case Strategy::Cs:
        // Test-time code-switching inserts the dictionary (lemma) form: the
        // inflected reference is unknown at inference.
        src = render_codeswitch(pair, *constraint, false).src_tokens;
        break;
      case Strategy::PhMorph:
        src = render_morphtag(pair, *constraint, lexicon).src_tokens;
        break;
      default:
        src = render_placeholder(pair, *constraint).src_tokens;
        break;
    }

    TranslateOptions opt;
    opt.strategy = strategy;
    opt.beam_size = beam_size;
    auto translated = translate(*model.word, model.addon, vocab, chars, src, &*constraint,
                                &lexicon, opt);
    ConstrainedOutput out;
    out.source = join(pair.src_tokens);
    out.reference = join(pair.tgt_tokens);
    out.hypothesis = join(translated.tokens);
    out.constraint = *constraint;
    out.placeholder_count = translated.placeholder_count;
    hyps.push_back(out.hypothesis);
    refs.push_back(out.reference);
    res.outputs.push_back(std::move(out));
  }
  if (res.outputs.empty()) return res;

  res.cell.present = true;
  res.cell.bleu = corpus_bleu(hyps, refs).score;
  res.cell.n_constrained = (double)res.outputs.size();
  long matched = 0, emitted = 0;
  for (const auto& out : res.outputs) {
    if (term_match(out.hypothesis, out.constraint.reference_surface)) ++matched;
    if (out.placeholder_count > 0) ++emitted;
  }
  res.cell.n_matched = (double)matched;
  res.cell.n_placeholder_emitted = (double)emitted;
  res.cell.term_use_rate = (double)matched / (double)res.outputs.size();
  return res;
}

EvalReport run_grid(const std::vector<ModelBundle>& models, Strategy strategy,
                    const std::vector<DictEntry>& seen_dict,
                    const std::vector<DictEntry>& unseen_dict,
                    const std::vector<ParallelExample>& test, const SubwordVocab& vocab,
                    const CharVocab& chars, const InflectionLexicon& lexicon, int beam_size) {
  check(!models.empty(), "run_grid: no models");
  EvalReport report;
  report.strategy = to_string(strategy);
  for (const auto& model : models) report.seeds.push_back(model.seed);

  for (PosClass pos : {PosClass::Noun, PosClass::Verb}) {
    for (bool seen : {true, false}) {
      const auto& dict = seen ? seen_dict : unseen_dict;
      EvalCell acc;
      int present_runs = 0;
      for (const auto& model : models) {
        auto cell = run_cell(model, strategy, dict, test, vocab, chars, lexicon, pos, beam_size)
                        .cell;
        if (!cell.present) continue;
        ++present_runs;
        acc.bleu += cell.bleu;
        acc.term_use_rate += cell.term_use_rate;
        acc.n_constrained += cell.n_constrained;
        acc.n_matched += cell.n_matched;
        acc.n_placeholder_emitted += cell.n_placeholder_emitted;
      }
      if (present_runs > 0) {
        acc.present = true;
        acc.bleu /= present_runs;
        acc.term_use_rate /= present_runs;
        acc.n_constrained /= present_runs;
        acc.n_matched /= present_runs;
        acc.n_placeholder_emitted /= present_runs;
      }
      report.cells[cell_key(pos, seen)] = acc;
    }
  }
  return report;
}

void sample_for_annotation(const std::vector<ConstrainedOutput>& outputs, std::size_t n,
                           std::uint64_t seed, const std::string& path) {
  check(n <= outputs.size(), "annotation sample of ", n, " exceeds ", outputs.size(),
        " constrained outputs");
  std::ofstream out(path);
  check(out.good(), "cannot write annotation sheet ", path);
  out << "source\treference\thypothesis\tconstraint\ttag\n";
  for (std::size_t idx : sample_indices(outputs.size(), n, seed)) {
    const auto& o = outputs[idx];
    out << o.source << '\t' << o.reference << '\t' << o.hypothesis << '\t'
        << join(o.constraint.entry.src_phrase) << " -> " << join(o.constraint.reference_surface)
        << "\t\n";
  }
  check(out.good(), "failed while writing annotation sheet ", path);
}

}  // namespace lcmt
