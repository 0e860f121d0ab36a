#include "lcmt/subword.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "lcmt/common.hpp"

namespace lcmt {

namespace {

constexpr const char* kWordMarker = "\xE2\x96\x81";  // ▁ U+2581

std::vector<std::string> structural_specials() {
  return {Specials::kPadSurface, Specials::kBosSurface, Specials::kEosSurface,
          Specials::kUnkSurface, Specials::kNoun, Specials::kVerb};
}

}  // namespace

std::vector<std::string> default_tag_tokens() {
  return {"<NN>", "<NNS>", "<VB>", "<VBD>", "<VBG>", "<VBN>", "<VBZ>"};
}

void SubwordVocab::index_pieces() {
  ids_.clear();
  max_piece_chars_ = 1;
  for (int i = 0; i < static_cast<int>(pieces_.size()); ++i) {
    ids_[pieces_[i]] = i;
    if (i >= num_specials_) max_piece_chars_ = std::max(max_piece_chars_, utf8_chars(pieces_[i]).size());
  }
}

SubwordVocab SubwordVocab::train(const std::vector<ParallelExample>& corpus, int target_size,
                                 const std::vector<std::string>& tag_tokens) {
  check(!corpus.empty(), "train_subwords: empty corpus");
  SubwordVocab vocab;
  auto specials = structural_specials();
  specials.insert(specials.end(), tag_tokens.begin(), tag_tokens.end());
  vocab.num_specials_ = static_cast<int>(specials.size());
  vocab.pieces_ = std::move(specials);
  std::set<std::string> special_set(vocab.pieces_.begin(), vocab.pieces_.end());

  // Word frequency table over both sides; specials are protected whole tokens
  // and never enter merge training.
  std::map<std::string, long> word_freq;
  auto add_side = [&](const std::vector<std::string>& tokens) {
    for (const auto& tok : tokens)
      if (!special_set.count(tok)) ++word_freq[std::string(kWordMarker) + tok];
  };
  for (const auto& ex : corpus) {
    add_side(ex.src_tokens);
    add_side(ex.tgt_tokens);
  }

  // Seed with single characters, sorted for a deterministic id layout.
  std::set<std::string> charset;
  std::vector<std::pair<std::vector<std::string>, long>> words;
  words.reserve(word_freq.size());
  for (const auto& [word, freq] : word_freq) {
    auto chars = utf8_chars(word);
    for (const auto& c : chars) charset.insert(c);
    words.emplace_back(std::move(chars), freq);
  }
  for (const auto& c : charset) vocab.pieces_.push_back(c);

  check(target_size > static_cast<int>(vocab.pieces_.size()),
        "train_subwords: target_size ", target_size, " must exceed specials + base characters (",
        vocab.pieces_.size(), ")");

  while (static_cast<int>(vocab.pieces_.size()) < target_size) {
    // Count adjacent pairs; ordered map gives the lexicographic tie-break.
    std::map<std::pair<std::string, std::string>, long> pair_freq;
    for (const auto& [chars, freq] : words)
      for (std::size_t i = 0; i + 1 < chars.size(); ++i)
        pair_freq[{chars[i], chars[i + 1]}] += freq;

    std::pair<std::string, std::string> best;
    long best_freq = 0;
    for (const auto& [pair, freq] : pair_freq) {
      if (freq > best_freq) {
        best = pair;
        best_freq = freq;
      }
    }
    if (best_freq < 2) {
      vocab.undersized_ = true;
      break;
    }

    vocab.pieces_.push_back(best.first + best.second);
    for (auto& [chars, freq] : words) {
      for (std::size_t i = 0; i + 1 < chars.size();) {
        if (chars[i] == best.first && chars[i + 1] == best.second) {
          chars[i] = best.first + best.second;
          chars.erase(chars.begin() + i + 1);
        } else {
          ++i;
        }
      }
    }
  }

  vocab.index_pieces();
  return vocab;
}

void SubwordVocab::encode_word(const std::string& word, std::vector<int>* out) const {
  auto chars = utf8_chars(std::string(kWordMarker) + word);
  std::size_t i = 0;
  while (i < chars.size()) {
    // Longest-match segmentation over the learned inventory.
    std::size_t best_len = 0;
    int best_id = Specials::kUnk;
    std::string candidate;
    for (std::size_t len = 1; len <= std::min(max_piece_chars_, chars.size() - i); ++len) {
      candidate += chars[i + len - 1];
      auto it = ids_.find(candidate);
      if (it != ids_.end() && !is_special(it->second)) {
        best_len = len;
        best_id = it->second;
      }
    }
    out->push_back(best_id);
    i += best_len == 0 ? 1 : best_len;
  }
}

std::vector<int> SubwordVocab::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  for (const auto& tok : tokens) {
    auto it = ids_.find(tok);
    if (it != ids_.end() && is_special(it->second)) {
      out.push_back(it->second);  // protected literal match
    } else {
      encode_word(tok, &out);
    }
  }
  return out;
}

std::vector<std::string> SubwordVocab::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  std::string pending;
  auto flush = [&] {
    if (pending.empty()) return;
    // Words are delimited by the ▁ marker inside the concatenated pieces.
    std::size_t pos = 0;
    const std::string marker = kWordMarker;
    while (pos < pending.size()) {
      std::size_t next = pending.find(marker, pos + 1);
      std::string chunk = pending.substr(pos, next == std::string::npos ? next : next - pos);
      if (chunk.rfind(marker, 0) == 0) chunk = chunk.substr(marker.size());
      if (!chunk.empty()) out.push_back(chunk);
      if (next == std::string::npos) break;
      pos = next;
    }
    pending.clear();
  };
  for (int id : ids) {
    check(id >= 0 && id < size(), "decode: id ", id, " out of range [0,", size(), ")");
    if (id == Specials::kPad || id == Specials::kBos || id == Specials::kEos) continue;
    if (id == Specials::kUnk) {
      pending += std::string(kWordMarker) + Specials::kUnkSurface;
      continue;
    }
    if (is_special(id)) {
      flush();
      out.push_back(pieces_[id]);
      continue;
    }
    pending += pieces_[id];
  }
  flush();
  return out;
}

const std::string& SubwordVocab::piece(int id) const {
  check(id >= 0 && id < size(), "piece: id ", id, " out of range [0,", size(), ")");
  return pieces_[id];
}

int SubwordVocab::id_of(const std::string& piece) const {
  auto it = ids_.find(piece);
  return it == ids_.end() ? -1 : it->second;
}

void SubwordVocab::save(const std::string& path) const {
  std::ofstream out(path);
  check(out.good(), "cannot write vocab file: ", path);
  for (int i = 0; i < size(); ++i)
    out << i << '\t' << (is_special(i) ? 'S' : 'P') << '\t' << pieces_[i] << '\n';
  if (undersized_) out << "# undersized\n";
  check(out.good(), "failed while writing vocab file: ", path);
}

SubwordVocab SubwordVocab::load(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open vocab file: ", path);
  SubwordVocab vocab;
  std::string line;
  int lineno = 0;
  bool past_specials = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("undersized") != std::string::npos) vocab.undersized_ = true;
      continue;
    }
    auto cols = split_on(line, '\t');
    check(cols.size() == 3, path, " line ", lineno, ": expected 'id<TAB>kind<TAB>piece'");
    check(std::stoi(cols[0]) == static_cast<int>(vocab.pieces_.size()),
          path, " line ", lineno, ": ids must be consecutive from 0");
    if (cols[1] == "S") {
      check(!past_specials, path, " line ", lineno, ": specials must be listed first");
      ++vocab.num_specials_;
    } else {
      past_specials = true;
    }
    vocab.pieces_.push_back(cols[2]);
  }
  check(!vocab.pieces_.empty(), "vocab file is empty: ", path);
  vocab.index_pieces();
  return vocab;
}

CharVocab CharVocab::build(const std::vector<ParallelExample>& corpus,
                           const std::vector<std::string>& extra_strings) {
  std::set<std::string> charset;
  for (const auto& ex : corpus)
    for (const auto& tok : ex.tgt_tokens)
      for (auto& c : utf8_chars(tok)) charset.insert(c);
  for (const auto& s : extra_strings)
    for (auto& c : utf8_chars(s)) charset.insert(c);
  charset.insert(" ");  // multi-token lemmas are joined with a space
  CharVocab vocab;
  vocab.chars_ = {Specials::kPadSurface, Specials::kBosSurface, Specials::kEosSurface,
                  Specials::kUnkSurface};
  vocab.chars_.insert(vocab.chars_.end(), charset.begin(), charset.end());
  for (int i = 0; i < vocab.size(); ++i) vocab.ids_[vocab.chars_[i]] = i;
  return vocab;
}

std::vector<int> CharVocab::encode(const std::string& text) const {
  std::vector<int> out;
  for (auto& c : utf8_chars(text)) {
    auto it = ids_.find(c);
    out.push_back(it == ids_.end() ? Specials::kUnk : it->second);
  }
  return out;
}

std::string CharVocab::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    check(id >= 0 && id < size(), "char decode: id ", id, " out of range [0,", size(), ")");
    if (id <= Specials::kEos) continue;
    out += chars_[id];
  }
  return out;
}

bool CharVocab::covers(const std::string& text) const {
  for (auto& c : utf8_chars(text))
    if (!ids_.count(c)) return false;
  return true;
}

void CharVocab::save(const std::string& path) const {
  std::ofstream out(path);
  check(out.good(), "cannot write char vocab file: ", path);
  for (int i = 0; i < size(); ++i) out << i << '\t' << chars_[i] << '\n';
  check(out.good(), "failed while writing char vocab file: ", path);
}

CharVocab CharVocab::load(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open char vocab file: ", path);
  CharVocab vocab;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = split_on(line, '\t');
    check(cols.size() == 2, path, " line ", lineno, ": expected 'id<TAB>char'");
    check(std::stoi(cols[0]) == vocab.size(), path, " line ", lineno,
          ": ids must be consecutive from 0");
    vocab.chars_.push_back(cols[1]);
  }
  check(vocab.size() > 4, "char vocab file has no characters: ", path);
  for (int i = 0; i < vocab.size(); ++i) vocab.ids_[vocab.chars_[i]] = i;
  return vocab;
}

}  // namespace lcmt
