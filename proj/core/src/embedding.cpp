#include "delconf/embedding.hpp"

#include <algorithm>

#include "delconf/error.hpp"
#include "delconf/random.hpp"

namespace delconf::features {

std::vector<double> embedding_vector(const std::string& token, std::size_t dim, std::uint64_t seed) {
  const std::uint64_t key = mix64(stable_hash(token) ^ mix64(seed));
  std::vector<double> v(dim);
  for (std::size_t k = 0; k < dim; ++k) v[k] = 2.0 * bits_to_unit(mix64(key + k)) - 1.0;
  return v;
}

EmbeddingTable build_embeddings(const std::vector<std::string>& vocab, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ValidationError("embedding dimension must be positive");
  EmbeddingTable table;
  table.dim_ = dim;
  table.seed_ = seed;
  table.table_.emplace(kUnknownToken, embedding_vector(kUnknownToken, dim, seed));
  for (const auto& token : vocab)
    if (!table.table_.count(token)) table.table_.emplace(token, embedding_vector(token, dim, seed));
  return table;
}

std::span<const double> EmbeddingTable::lookup(const std::string& token) const {
  auto it = table_.find(token);
  if (it == table_.end()) it = table_.find(kUnknownToken);
  return it->second;
}

std::vector<std::string> EmbeddingTable::tokens() const {
  std::vector<std::string> out;
  out.reserve(table_.size());
  for (const auto& entry : table_) out.push_back(entry.first);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace delconf::features
