#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace delconf::features {

// Token shared by the language model and the embedding table for
// out-of-vocabulary words.
inline constexpr const char* kUnknownToken = "<unk>";

// Deterministic word vectors standing in for trained embeddings. Component k
// of token w is a uniform(-1, 1) draw keyed by (hash(w), seed, k), so vectors
// do not depend on vocabulary order or platform.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  std::size_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t vocab_size() const { return table_.size(); }
  bool contains(const std::string& token) const { return table_.count(token) != 0; }
  // Sorted, including the unknown token.
  std::vector<std::string> tokens() const;

  // The unknown-token vector for tokens outside the vocabulary.
  std::span<const double> lookup(const std::string& token) const;

  friend EmbeddingTable build_embeddings(const std::vector<std::string>& vocab, std::size_t dim,
                                         std::uint64_t seed);

 private:
  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  std::unordered_map<std::string, std::vector<double>> table_;
};

// The unknown token is always added. Throws ValidationError when dim == 0.
EmbeddingTable build_embeddings(const std::vector<std::string>& vocab, std::size_t dim, std::uint64_t seed);

// The vector build_embeddings assigns to `token`.
std::vector<double> embedding_vector(const std::string& token, std::size_t dim, std::uint64_t seed);

}  // namespace delconf::features
