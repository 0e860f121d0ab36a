#include "lcmt/align.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "lcmt/common.hpp"

namespace lcmt {

bool AlignmentMatrix::has_link(int s, int t) const {
  return std::binary_search(links.begin(), links.end(), std::make_pair(s, t));
}

double Ibm1Result::translation_prob(const std::string& src, const std::string& tgt) const {
  auto find = [](const std::vector<std::string>& v, const std::string& w) {
    auto it = std::lower_bound(v.begin(), v.end(), w);
    return (it != v.end() && *it == w) ? static_cast<int>(it - v.begin()) : -1;
  };
  int s = find(src_words, src), t = find(tgt_words, tgt);
  if (s < 0 || t < 0) return 0.0;
  return table[s][t];
}

Ibm1Result align_ibm1(const std::vector<ParallelExample>& corpus, int iterations) {
  check(!corpus.empty(), "align_ibm1: empty corpus");
  check(iterations >= 1, "align_ibm1: iterations must be >= 1, got ", iterations);

  // Integer-coded corpus with sorted vocabularies for deterministic sums.
  Ibm1Result res;
  {
    std::unordered_map<std::string, int> seen_s, seen_t;
    for (const auto& ex : corpus) {
      for (const auto& w : ex.src_tokens) seen_s.emplace(w, 0);
      for (const auto& w : ex.tgt_tokens) seen_t.emplace(w, 0);
    }
    for (auto& [w, _] : seen_s) res.src_words.push_back(w);
    for (auto& [w, _] : seen_t) res.tgt_words.push_back(w);
    std::sort(res.src_words.begin(), res.src_words.end());
    std::sort(res.tgt_words.begin(), res.tgt_words.end());
  }
  auto sid = [&](const std::string& w) {
    return static_cast<int>(std::lower_bound(res.src_words.begin(), res.src_words.end(), w) -
                            res.src_words.begin());
  };
  auto tid = [&](const std::string& w) {
    return static_cast<int>(std::lower_bound(res.tgt_words.begin(), res.tgt_words.end(), w) -
                            res.tgt_words.begin());
  };
  std::vector<std::vector<int>> src(corpus.size()), tgt(corpus.size());
  for (std::size_t p = 0; p < corpus.size(); ++p) {
    for (const auto& w : corpus[p].src_tokens) src[p].push_back(sid(w));
    for (const auto& w : corpus[p].tgt_tokens) tgt[p].push_back(tid(w));
  }

  const std::size_t ns = res.src_words.size(), nt = res.tgt_words.size();
  check(ns * nt <= 100'000'000,
        "align_ibm1: vocabulary product ", ns, "x", nt,
        " too large for the dense toy aligner; supply external alignments instead");
  res.table.assign(ns, std::vector<double>(nt, 1.0 / static_cast<double>(nt)));

  auto log_likelihood = [&] {
    double ll = 0.0;
    for (std::size_t p = 0; p < corpus.size(); ++p) {
      for (int f : tgt[p]) {
        double z = 0.0;
        for (int e : src[p]) z += res.table[e][f];
        ll += std::log(z) - std::log(static_cast<double>(src[p].size()));
      }
    }
    return ll;
  };

  std::vector<std::vector<double>> count(ns, std::vector<double>(nt, 0.0));
  std::vector<double> total(ns, 0.0);
  for (int it = 0; it < iterations; ++it) {
    for (auto& row : count) std::fill(row.begin(), row.end(), 0.0);
    std::fill(total.begin(), total.end(), 0.0);
    for (std::size_t p = 0; p < corpus.size(); ++p) {
      for (int f : tgt[p]) {
        double z = 0.0;
        for (int e : src[p]) z += res.table[e][f];
        for (int e : src[p]) {
          double post = res.table[e][f] / z;
          count[e][f] += post;
          total[e] += post;
        }
      }
    }
    for (std::size_t e = 0; e < ns; ++e) {
      if (total[e] <= 0.0) continue;
      for (std::size_t f = 0; f < nt; ++f) res.table[e][f] = count[e][f] / total[e];
    }
    res.log_likelihood.push_back(log_likelihood());
  }

  // Viterbi-style link per target token: argmax source, ties to lowest index.
  res.alignments.resize(corpus.size());
  for (std::size_t p = 0; p < corpus.size(); ++p) {
    res.alignments[p].pair_id = corpus[p].id;
    for (std::size_t j = 0; j < tgt[p].size(); ++j) {
      int best = 0;
      double best_prob = -1.0;
      for (std::size_t i = 0; i < src[p].size(); ++i) {
        double prob = res.table[src[p][i]][tgt[p][j]];
        if (prob > best_prob) {
          best_prob = prob;
          best = static_cast<int>(i);
        }
      }
      res.alignments[p].links.emplace_back(best, static_cast<int>(j));
    }
    std::sort(res.alignments[p].links.begin(), res.alignments[p].links.end());
    res.alignments[p].links.erase(
        std::unique(res.alignments[p].links.begin(), res.alignments[p].links.end()),
        res.alignments[p].links.end());
  }
  return res;
}

std::vector<AlignmentMatrix> ingest_alignments(const std::string& path,
                                               const std::vector<ParallelExample>& corpus) {
  std::ifstream in(path);
  check(in.good(), "cannot open alignment file: ", path);
  std::vector<AlignmentMatrix> out;
  std::string line;
  while (std::getline(in, line)) {
    if (out.size() >= corpus.size())
      fail(path, ": more alignment lines than corpus pairs (", corpus.size(), ")");
    const auto& ex = corpus[out.size()];
    AlignmentMatrix am;
    am.pair_id = ex.id;
    for (const auto& tok : split_ws(line)) {
      auto dash = tok.find('-');
      check(dash != std::string::npos && dash > 0 && dash + 1 < tok.size(),
            path, " pair ", am.pair_id, ": malformed link '", tok, "', expected 'i-j'");
      int s = -1, t = -1;
      try {
        s = std::stoi(tok.substr(0, dash));
        t = std::stoi(tok.substr(dash + 1));
      } catch (const std::exception&) {
        fail(path, " pair ", am.pair_id, ": malformed link '", tok, "'");
      }
      check(s >= 0 && s < static_cast<int>(ex.src_tokens.size()),
            path, " pair ", am.pair_id, ": source index ", s, " out of bounds (",
            ex.src_tokens.size(), " tokens)");
      check(t >= 0 && t < static_cast<int>(ex.tgt_tokens.size()),
            path, " pair ", am.pair_id, ": target index ", t, " out of bounds (",
            ex.tgt_tokens.size(), " tokens)");
      am.links.emplace_back(s, t);
    }
    std::sort(am.links.begin(), am.links.end());
    am.links.erase(std::unique(am.links.begin(), am.links.end()), am.links.end());
    out.push_back(std::move(am));
  }
  check(out.size() == corpus.size(), path, ": ", out.size(), " alignment lines for ",
        corpus.size(), " corpus pairs");
  return out;
}

void save_alignments(const std::vector<AlignmentMatrix>& alignments, const std::string& path) {
  std::ofstream out(path);
  check(out.good(), "cannot write alignment file: ", path);
  for (const auto& am : alignments) {
    for (std::size_t i = 0; i < am.links.size(); ++i) {
      if (i) out << ' ';
      out << am.links[i].first << '-' << am.links[i].second;
    }
    out << '\n';
  }
  check(out.good(), "failed while writing alignment file: ", path);
}

}  // namespace lcmt
