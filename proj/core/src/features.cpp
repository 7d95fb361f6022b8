#include "delconf/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "delconf/error.hpp"

namespace delconf::features {

std::vector<std::size_t> FeatureLayout::scalar_indices() const {
  return {kFrames, lm_order(), lm_logp(), char_length(), gap_before(), gap_after()};
}

double gap_before(const corpus::Utterance& utt, std::size_t t) {
  if (t == 0) return 0.0;
  const auto& prev = utt.words[t - 1];
  return std::max(0.0, utt.words[t].start - (prev.start + prev.duration));
}

double gap_after(const corpus::Utterance& utt, std::size_t t) {
  if (t + 1 >= utt.words.size()) return 0.0;
  return gap_before(utt, t + 1);
}

std::vector<FeatureVector> featurize(const corpus::Utterance& utt, std::span<const double> baseline_conf,
                                     const NgramLm& lm, const EmbeddingTable& emb) {
  if (baseline_conf.size() != utt.words.size())
    throw ValidationError("utterance '" + utt.id + "': " + std::to_string(baseline_conf.size()) +
                          " confidences for " + std::to_string(utt.words.size()) + " words");
  const FeatureLayout layout{emb.dim()};
  std::vector<FeatureVector> out;
  out.reserve(utt.words.size());
  std::vector<std::string> history{kSentenceStart};
  for (std::size_t t = 0; t < utt.words.size(); ++t) {
    const auto& word = utt.words[t];
    FeatureVector x(layout.size());
    x[FeatureLayout::kFrames] = static_cast<double>(word.frames);
    x[FeatureLayout::kConfidence] = baseline_conf[t];
    const auto e = emb.lookup(word.text);
    std::copy(e.begin(), e.end(), x.begin() + FeatureLayout::kEmbedding);
    const auto lm_score = lm.score(word.text, history);
    x[layout.lm_order()] = static_cast<double>(lm_score.order_used);
    x[layout.lm_logp()] = lm_score.logp;
    x[layout.char_length()] = static_cast<double>(word.text.size());
    x[layout.gap_before()] = gap_before(utt, t);
    x[layout.gap_after()] = gap_after(utt, t);
    out.push_back(std::move(x));
    history.push_back(word.text);
  }
  return out;
}

FeatureScaler FeatureScaler::identity(std::size_t dim) {
  return FeatureScaler{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

void FeatureScaler::apply(std::span<double> x) const {
  if (x.size() != mean.size()) throw ValidationError("feature vector length does not match the scaler");
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = (x[k] - mean[k]) / scale[k];
}

FeatureVector FeatureScaler::transform(const FeatureVector& x) const {
  FeatureVector out = x;
  apply(out);
  return out;
}

FeatureScaler fit_scaler(std::span<const std::vector<FeatureVector>> data, const FeatureLayout& layout) {
  FeatureScaler scaler = FeatureScaler::identity(layout.size());
  const auto indices = layout.scalar_indices();
  std::vector<double> sum(layout.size(), 0.0);
  std::size_t n = 0;
  for (const auto& seq : data)
    for (const auto& x : seq) {
      if (x.size() != layout.size()) throw ValidationError("feature vector length does not match the layout");
      for (auto k : indices) sum[k] += x[k];
      ++n;
    }
  if (n == 0) throw ValidationError("cannot fit feature statistics on empty data");
  std::vector<double> sq(layout.size(), 0.0);
  for (auto k : indices) scaler.mean[k] = sum[k] / static_cast<double>(n);
  for (const auto& seq : data)
    for (const auto& x : seq)
      for (auto k : indices) {
        const double dev = x[k] - scaler.mean[k];
        sq[k] += dev * dev;
      }
  for (auto k : indices) {
    const double sd = std::sqrt(sq[k] / static_cast<double>(n));
    scaler.scale[k] = sd > 1e-12 ? sd : 1.0;
  }
  return scaler;
}

}  // namespace delconf::features
