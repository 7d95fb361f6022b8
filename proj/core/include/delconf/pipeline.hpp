#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "delconf/birnn.hpp"
#include "delconf/calibrate.hpp"
#include "delconf/corpus.hpp"
#include "delconf/embedding.hpp"
#include "delconf/features.hpp"
#include "delconf/metrics.hpp"
#include "delconf/ngram_lm.hpp"

// Glue that turns a labelled corpus into trained confidence models and
// corpora with predictions.
namespace delconf::pipeline {

struct FeaturizerConfig {
  std::size_t emb_dim = 50;
  std::uint64_t emb_seed = 7;
  std::size_t lm_order = 3;
  double lm_discount = 0.7;
  // Feed the calibrated rather than the raw posterior as the confidence
  // feature.
  bool use_calibrated = true;
  std::size_t calib_bins = calibrate::kDefaultBins;

  bool operator==(const FeaturizerConfig&) const = default;
};

struct Featurizer {
  FeaturizerConfig config;
  std::optional<calibrate::PiecewiseMap> calibration;
  features::NgramLm lm;
  features::EmbeddingTable emb;

  std::size_t dim() const { return features::FeatureLayout{config.emb_dim}.size(); }
  std::vector<features::FeatureVector> features(const corpus::Utterance& utt) const;
};

// Raw posteriors paired with the c* targets of every word. Throws
// ValidationError when an utterance lacks targets.
metrics::ScoredSet raw_confidence_set(std::span<const corpus::LabeledUtterance> corpus);
// Predicted c paired with c*.
metrics::ScoredSet predicted_confidence_set(std::span<const corpus::LabeledUtterance> corpus);
// Predicted d paired with d* over all words (next-word deletions).
metrics::ScoredSet predicted_deletion_set(std::span<const corpus::LabeledUtterance> corpus);
// Predicted s paired with s* (one pair per utterance).
metrics::ScoredSet predicted_start_set(std::span<const corpus::LabeledUtterance> corpus);

// Calibration map on the raw posteriors of `train` (needs targets), LM on the
// references of `lm_text` (the training references when empty) and
// embeddings over every token of both.
Featurizer build_featurizer(std::span<const corpus::LabeledUtterance> train, const FeaturizerConfig& config,
                            std::span<const corpus::LabeledUtterance> lm_text = {});

std::vector<birnn::Example> make_examples(const Featurizer& featurizer,
                                          std::span<const corpus::LabeledUtterance> corpus);

struct ConfidenceModel {
  Featurizer featurizer;
  birnn::BiRnnModel net;
};

struct TrainOptions {
  FeaturizerConfig featurizer;
  birnn::TrainConfig train;
  bool predict_deletions = false;
  birnn::CellType cell = birnn::CellType::Lstm;
};

struct TrainOutcome {
  ConfidenceModel model;
  std::vector<double> history;
};

// Builds the featurizer, fits the input scaler, initialises the network from
// train.seed and runs SGD.
TrainOutcome train_confidence_model(std::span<const corpus::LabeledUtterance> train, const TrainOptions& options,
                                    std::span<const corpus::LabeledUtterance> lm_text = {});

corpus::Predictions predict(const ConfidenceModel& model, const corpus::Utterance& utt);

// Copies of the corpus with predictions filled in.
std::vector<corpus::LabeledUtterance> with_predictions(const ConfidenceModel& model,
                                                       std::span<const corpus::LabeledUtterance> corpus);
std::vector<corpus::LabeledUtterance> with_map_predictions(const calibrate::PiecewiseMap& map,
                                                           std::span<const corpus::LabeledUtterance> corpus);
// Predictions equal to the raw posteriors.
std::vector<corpus::LabeledUtterance> with_raw_predictions(std::span<const corpus::LabeledUtterance> corpus);

std::string model_to_json(const ConfidenceModel& model);
ConfidenceModel model_from_json(std::string_view text);

}  // namespace delconf::pipeline
