#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace affect::text {

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;
inline constexpr int kEosId = 3;
/// Emotion label tokens occupy [kFirstLabelId, kFirstLabelId + 7), in
/// kEmotionLabels order; ordinary words start right after.
inline constexpr int kFirstLabelId = 4;
inline constexpr int kFirstWordId = kFirstLabelId + 7;

/// Word-level vocabulary. Ids below kFirstWordId are the fixed special and
/// label block; the rest come from training text.
class Vocab {
 public:
  /// Specials and labels only.
  Vocab();

  int id(std::string_view token) const;
  const std::string& token(int id) const;
  bool contains(std::string_view token) const { return token_to_id_.count(std::string(token)) != 0; }
  int size() const { return static_cast<int>(id_to_token_.size()); }

  int label_id(std::size_t label_index) const { return kFirstLabelId + static_cast<int>(label_index); }
  static bool is_label_id(int id);

  /// Words after the special/label block, in id order.
  std::span<const std::string> words() const;

  /// One word per line, in id order starting at kFirstWordId.
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  bool operator==(const Vocab& other) const { return id_to_token_ == other.id_to_token_; }

 private:
  friend Vocab build_vocab(std::span<const std::string>, int, int);
  void append(std::string token);

  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

/// Lowercases (ASCII), splits on Unicode whitespace and strips leading and
/// trailing ASCII punctuation; empty pieces are dropped.
std::vector<std::string> split_words(std::string_view text);

/// Keeps words with frequency >= min_freq, ordered by (frequency desc, word
/// asc), truncated so the whole vocabulary has at most max_size entries.
Vocab build_vocab(std::span<const std::string> texts, int min_freq, int max_size);

struct TokenSeq {
  std::vector<int> ids;
  int true_length = 0;
  std::vector<bool> attention_mask;

  std::span<const int> real_ids() const {
    return std::span<const int>(ids).first(static_cast<std::size_t>(true_length));
  }
};

/// [cls] followed by word ids (unk for out-of-vocabulary), truncated to
/// max_len and padded with pad ids up to max_len.
TokenSeq tokenize(std::string_view text, const Vocab& vocab, int max_len);

}  // namespace affect::text
