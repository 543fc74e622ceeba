#include "affect/textenc/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "affect/common.hpp"
#include "affect/labels.hpp"

namespace affect::text {

Vocab::Vocab() {
  for (const char* s : {"<pad>", "<unk>", "<cls>", "<eos>"}) {
    append(s);
  }
  for (auto label : kEmotionLabels) {
    append(std::string(label));
  }
}

void Vocab::append(std::string token) {
  token_to_id_.emplace(token, static_cast<int>(id_to_token_.size()));
  id_to_token_.push_back(std::move(token));
}

int Vocab::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) {
    throw ArgumentError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

bool Vocab::is_label_id(int id) {
  return id >= kFirstLabelId && id < kFirstLabelId + static_cast<int>(kNumEmotions);
}

std::span<const std::string> Vocab::words() const {
  return std::span<const std::string>(id_to_token_).subspan(kFirstWordId);
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  for (const auto& w : words()) {
    out << w << '\n';
  }
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot read " + path.string());
  }
  Vocab v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || v.contains(line)) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": empty or duplicate vocabulary entry");
    }
    v.append(line);
  }
  return v;
}

namespace {

// Length of the UTF-8 whitespace sequence starting at s[i], or 0.
std::size_t whitespace_len(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c == ' ' || (c >= 0x09 && c <= 0x0d)) {
    return 1;
  }
  auto byte = [&](std::size_t k) -> unsigned {
    return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) : 0u;
  };
  if (c == 0xc2 && (byte(1) == 0x85 || byte(1) == 0xa0)) {
    return 2;  // U+0085, U+00A0
  }
  if (c == 0xe1 && byte(1) == 0x9a && byte(2) == 0x80) {
    return 3;  // U+1680
  }
  if (c == 0xe2 && byte(1) == 0x80) {
    const unsigned b = byte(2);
    if ((b >= 0x80 && b <= 0x8a) || b == 0xa8 || b == 0xa9 || b == 0xaf) {
      return 3;  // U+2000..U+200A, U+2028, U+2029, U+202F
    }
  }
  if (c == 0xe2 && byte(1) == 0x81 && byte(2) == 0x9f) {
    return 3;  // U+205F
  }
  if (c == 0xe3 && byte(1) == 0x80 && byte(2) == 0x80) {
    return 3;  // U+3000
  }
  return 0;
}

bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    std::size_t b = 0;
    std::size_t e = current.size();
    while (b < e && is_ascii_punct(current[b])) {
      ++b;
    }
    while (e > b && is_ascii_punct(current[e - 1])) {
      --e;
    }
    if (e > b) {
      out.push_back(to_lower(std::string_view(current).substr(b, e - b)));
    }
    current.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::size_t ws = whitespace_len(text, i); ws > 0) {
      flush();
      i += ws;
    } else {
      current.push_back(text[i]);
      ++i;
    }
  }
  flush();
  return out;
}

Vocab build_vocab(std::span<const std::string> texts, int min_freq, int max_size) {
  if (texts.empty()) {
    throw ArgumentError("build_vocab: no texts");
  }
  if (max_size < kFirstWordId) {
    throw ConfigError("build_vocab: max_size " + std::to_string(max_size) +
                      " is smaller than the special/label block (" + std::to_string(kFirstWordId) +
                      ")");
  }
  Vocab vocab;
  std::map<std::string, long> freq;
  for (const auto& t : texts) {
    for (auto& w : split_words(t)) {
      if (!vocab.contains(w)) {
        ++freq[w];
      }
    }
  }
  std::vector<std::pair<std::string, long>> items;
  for (auto& [w, f] : freq) {
    if (f >= min_freq) {
      items.emplace_back(w, f);
    }
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t room = static_cast<std::size_t>(max_size - kFirstWordId);
  if (items.size() > room) {
    items.resize(room);
  }
  for (auto& [w, f] : items) {
    vocab.append(w);
  }
  return vocab;
}

TokenSeq tokenize(std::string_view text, const Vocab& vocab, int max_len) {
  if (max_len < 2) {
    throw ArgumentError("tokenize: max_len must be >= 2");
  }
  TokenSeq seq;
  seq.ids.assign(static_cast<std::size_t>(max_len), kPadId);
  seq.attention_mask.assign(static_cast<std::size_t>(max_len), false);
  seq.ids[0] = kClsId;
  int n = 1;
  for (const auto& w : split_words(text)) {
    if (n >= max_len) {
      break;
    }
    seq.ids[static_cast<std::size_t>(n++)] = vocab.id(w);
  }
  seq.true_length = n;
  std::fill(seq.attention_mask.begin(), seq.attention_mask.begin() + n, true);
  return seq;
}

}  // namespace affect::text
