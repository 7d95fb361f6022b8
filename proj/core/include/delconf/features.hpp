#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "delconf/corpus.hpp"
#include "delconf/embedding.hpp"
#include "delconf/ngram_lm.hpp"

namespace delconf::features {

using FeatureVector = std::vector<double>;

// Position of each component in a FeatureVector:
//   [frames, confidence, embedding..., lm order, lm logp, char length,
//    gap before, gap after]
struct FeatureLayout {
  std::size_t emb_dim = 0;

  static constexpr std::size_t kFrames = 0;
  static constexpr std::size_t kConfidence = 1;
  static constexpr std::size_t kEmbedding = 2;
  std::size_t lm_order() const { return kEmbedding + emb_dim; }
  std::size_t lm_logp() const { return lm_order() + 1; }
  std::size_t char_length() const { return lm_order() + 2; }
  std::size_t gap_before() const { return lm_order() + 3; }
  std::size_t gap_after() const { return lm_order() + 4; }
  std::size_t size() const { return emb_dim + 7; }

  // Components that get z-standardised (everything but the confidence and
  // the embedding).
  std::vector<std::size_t> scalar_indices() const;
};

// Silence between word t and its neighbours, 0 at utterance boundaries.
double gap_before(const corpus::Utterance& utt, std::size_t t);
double gap_after(const corpus::Utterance& utt, std::size_t t);

// One feature vector per word. The LM history of word t is the sentence
// start followed by the preceding hypothesis words. Throws ValidationError
// when baseline_conf does not have one value per word.
std::vector<FeatureVector> featurize(const corpus::Utterance& utt, std::span<const double> baseline_conf,
                                     const NgramLm& lm, const EmbeddingTable& emb);

// Per-component affine standardisation x' = (x - mean) / scale. Identity on
// components that are not standardised.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> scale;

  static FeatureScaler identity(std::size_t dim);
  std::size_t dim() const { return mean.size(); }
  void apply(std::span<double> x) const;
  FeatureVector transform(const FeatureVector& x) const;
  bool operator==(const FeatureScaler&) const = default;
};

// Mean and population standard deviation of the scalar components over all
// words in `data`; constant components keep scale 1.
FeatureScaler fit_scaler(std::span<const std::vector<FeatureVector>> data, const FeatureLayout& layout);

}  // namespace delconf::features
