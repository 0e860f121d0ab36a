#include "lcmt/corpus.hpp"

#include <fstream>

#include <nlohmann/json.hpp>
#include "lcmt/common.hpp"

namespace lcmt {

namespace {

std::vector<std::string> field_tokens(const nlohmann::json& v, const char* name, int line) {
  if (v.is_string()) return split_ws(v.get<std::string>());
  if (v.is_array()) {
    std::vector<std::string> out;
    for (const auto& e : v) {
      check(e.is_string(), "line ", line, ": field '", name, "' must contain strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }
  fail("line ", line, ": field '", name, "' must be a string or array of strings");
}

void validate_example(ParallelExample& ex, int line) {
  check(!ex.src_tokens.empty(), "line ", line, ": empty source sentence");
  check(!ex.tgt_tokens.empty(), "line ", line, ": empty target sentence");
  auto check_len = [&](const std::vector<std::string>& ann, std::size_t want, const char* name) {
    if (!ann.empty() && ann.size() != want)
      fail("line ", line, ": ", name, " has ", ann.size(), " entries, expected ", want);
  };
  check_len(ex.src_pos, ex.src_tokens.size(), "src_pos");
  check_len(ex.tgt_pos, ex.tgt_tokens.size(), "tgt_pos");
  check_len(ex.tgt_lemmas, ex.tgt_tokens.size(), "tgt_lemmas");
}

}  // namespace

CorpusFormat corpus_format_for(const std::string& path) {
  if (path.ends_with(".jsonl") || path.ends_with(".json")) return CorpusFormat::Jsonl;
  return CorpusFormat::Tsv;
}

std::vector<ParallelExample> load_corpus(const std::string& path, CorpusFormat format) {
  std::ifstream in(path);
  check(in.good(), "cannot open corpus file: ", path);
  std::vector<ParallelExample> corpus;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ParallelExample ex;
    ex.id = static_cast<int>(corpus.size());
    if (format == CorpusFormat::Tsv) {
      auto cols = split_on(line, '\t');
      check(cols.size() == 2 || cols.size() == 5,
            path, " line ", lineno, ": expected 2 or 5 tab-separated columns, got ", cols.size());
      ex.src_tokens = split_ws(cols[0]);
      ex.tgt_tokens = split_ws(cols[1]);
      if (cols.size() == 5) {
        ex.src_pos = split_ws(cols[2]);
        ex.tgt_pos = split_ws(cols[3]);
        ex.tgt_lemmas = split_ws(cols[4]);
      }
    } else {
      nlohmann::json rec;
      try {
        rec = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        fail(path, " line ", lineno, ": invalid JSON: ", e.what());
      }
      check(rec.contains("src") && rec.contains("tgt"),
            path, " line ", lineno, ": record must have 'src' and 'tgt' fields");
      ex.src_tokens = field_tokens(rec["src"], "src", lineno);
      ex.tgt_tokens = field_tokens(rec["tgt"], "tgt", lineno);
      if (rec.contains("src_pos")) ex.src_pos = field_tokens(rec["src_pos"], "src_pos", lineno);
      if (rec.contains("tgt_pos")) ex.tgt_pos = field_tokens(rec["tgt_pos"], "tgt_pos", lineno);
      if (rec.contains("tgt_lemmas"))
        ex.tgt_lemmas = field_tokens(rec["tgt_lemmas"], "tgt_lemmas", lineno);
    }
    try {
      validate_example(ex, lineno);
    } catch (const Error& e) {
      fail(path, " ", e.what());
    }
    corpus.push_back(std::move(ex));
  }
  check(!corpus.empty(), "corpus file is empty: ", path);
  return corpus;
}

void save_corpus_tsv(const std::vector<ParallelExample>& corpus, const std::string& path) {
  std::ofstream out(path);
  check(out.good(), "cannot write corpus file: ", path);
  for (const auto& ex : corpus) {
    out << join(ex.src_tokens) << '\t' << join(ex.tgt_tokens);
    if (ex.has_src_pos() || ex.has_tgt_pos() || ex.has_tgt_lemmas()) {
      out << '\t' << join(ex.src_pos) << '\t' << join(ex.tgt_pos) << '\t' << join(ex.tgt_lemmas);
    }
    out << '\n';
  }
  check(out.good(), "failed while writing corpus file: ", path);
}

}  // namespace lcmt
