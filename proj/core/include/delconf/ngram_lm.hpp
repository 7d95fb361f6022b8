#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace delconf::features {

// Sentence-start context token. It conditions the first word of a sentence
// but is never predicted.
inline constexpr const char* kSentenceStart = "<s>";

// Backoff n-gram model with absolute discounting. Probabilities of stored
// n-grams are (count - D) / count(context); the freed mass D * N1+(context) /
// count(context) is handed to the lower order through a per-context backoff
// weight chosen so every context's distribution sums to one. At the unigram
// level the freed mass goes to the unknown token.
class NgramLm {
 public:
  struct Score {
    double logp;             // natural log
    std::size_t order_used;  // longest stored n-gram ending in the word; 0 for OOV
  };

  std::size_t order() const { return order_; }
  double discount() const { return discount_; }

  // Predictable words (training vocabulary plus the unknown token), sorted.
  std::vector<std::string> vocabulary() const;
  bool in_vocabulary(const std::string& word) const;

  // Number of stored n-grams of order n (1-based).
  std::size_t count(std::size_t n) const;
  bool contains(std::span<const std::string> ngram) const;
  // Natural-log backoff weight of a context; 0 for contexts that are not stored.
  double log_backoff(std::span<const std::string> context) const;

  // `history` is the preceding words, oldest first; only the last order-1
  // are used. Out-of-vocabulary words score as the unknown token.
  Score score(const std::string& word, std::span<const std::string> history) const;
  double prob(const std::string& word, std::span<const std::string> history) const;

  // ARPA text: \data\ header with counts, then one line per n-gram
  // "log10(p)<TAB>w1 .. wn[<TAB>log10(backoff)]".
  std::string to_arpa() const;
  static NgramLm from_arpa(std::string_view text);

  friend NgramLm train_ngram_lm(const std::vector<std::vector<std::string>>& text, std::size_t order,
                                double discount);

 private:
  struct Entry {
    double log10_prob = 0.0;
    double log10_backoff = 0.0;
  };
  const Entry* find(std::span<const std::string> ngram) const;
  static NgramLm parse_arpa(std::string_view text);

  std::size_t order_ = 0;
  double discount_ = 0.0;
  // grams_[n - 1] holds the n-grams, keyed by space-joined tokens.
  std::vector<std::unordered_map<std::string, Entry>> grams_;
};

// Throws ValidationError on empty text, order 0, a discount outside (0, 1) or
// tokens that are empty, contain whitespace or collide with reserved tokens.
NgramLm train_ngram_lm(const std::vector<std::vector<std::string>>& text, std::size_t order, double discount);

inline NgramLm::Score lm_score(const NgramLm& lm, const std::string& word, std::span<const std::string> history) {
  return lm.score(word, history);
}

}  // namespace delconf::features
