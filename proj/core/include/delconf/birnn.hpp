#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "delconf/corpus.hpp"
#include "delconf/features.hpp"

namespace delconf::birnn {

enum class CellType { Lstm, Vanilla };

// Gate order inside an LSTM cell. A vanilla cell has a single block (0).
enum class Gate : std::size_t { Input = 0, Forget = 1, Output = 2, Candidate = 3 };

enum class Direction : std::size_t { Forward = 0, Backward = 1 };

// Output heads on the concatenated context [h_fwd; h_bwd]: per-word
// confidence, per-gap deletion, and deletion before the first word (which
// reads the context of word 1).
enum class Head : std::size_t { Confidence = 0, Deletion = 1, Start = 2 };

struct ModelConfig {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 64;
  bool predict_deletions = false;
  CellType cell = CellType::Lstm;

  std::size_t gates() const { return cell == CellType::Lstm ? 4 : 1; }
  std::size_t context_dim() const { return 2 * hidden_dim; }
  bool operator==(const ModelConfig&) const = default;
};

// All trainable values in one flat buffer with named views. Gradients share
// the same type, so a gradient is literally parameter-shaped.
class Parameters {
 public:
  Parameters() = default;
  // Zero-filled.
  explicit Parameters(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  std::size_t size() const { return data_.size(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  // hidden_dim x (input_dim + hidden_dim), row-major; columns are the input
  // features followed by the previous hidden state.
  std::span<double> gate_weights(Direction dir, std::size_t gate);
  std::span<const double> gate_weights(Direction dir, std::size_t gate) const;
  std::span<double> gate_bias(Direction dir, std::size_t gate);
  std::span<const double> gate_bias(Direction dir, std::size_t gate) const;

  bool has_head(Head head) const;
  // Length 2 * hidden_dim. Throws ValidationError for an absent head.
  std::span<double> head_weights(Head head);
  std::span<const double> head_weights(Head head) const;
  double& head_bias(Head head);
  double head_bias(Head head) const;

  double squared_norm() const;
  bool operator==(const Parameters&) const = default;

 private:
  std::size_t cell_size() const;
  std::size_t cell_offset(Direction dir) const;
  std::size_t head_offset(Head head) const;

  ModelConfig config_;
  std::vector<double> data_;
};

struct BiRnnModel {
  ModelConfig config;
  Parameters params;
  // Applied to every input vector before the recurrence.
  features::FeatureScaler scaler;

  bool operator==(const BiRnnModel&) const = default;
};

// Weights uniform(-r, r) with r = 1 / sqrt(input_dim + hidden_dim), biases 0
// except the LSTM forget gate at 1. Throws ValidationError on zero dims.
BiRnnModel init_model(std::size_t input_dim, std::size_t hidden_dim, bool predict_deletions, std::uint64_t seed,
                      CellType cell = CellType::Lstm);

// Activations kept by forward() for backpropagation. Per direction, rows are
// in processing order (reversed time for the backward cell).
struct DirectionCache {
  std::vector<double> z;       // steps x (input_dim + hidden_dim)
  std::vector<double> gates;   // steps x gates * hidden_dim, post-activation
  std::vector<double> cell;    // steps x hidden_dim (LSTM memory)
  std::vector<double> cell_tanh;
  std::vector<double> hidden;  // steps x hidden_dim
};

struct ForwardCache {
  std::size_t steps = 0;
  DirectionCache fwd;
  DirectionCache bwd;
};

// Throws ValidationError on an empty sequence or a feature-length mismatch.
corpus::Predictions forward(const BiRnnModel& model, std::span<const features::FeatureVector> xs,
                            ForwardCache* cache = nullptr);

inline corpus::Predictions predict(const BiRnnModel& model, std::span<const features::FeatureVector> xs) {
  return forward(model, xs);
}

// Summed binary cross-entropy of c (and of d and s when the model predicts
// deletions), with predictions clamped to [1e-12, 1 - 1e-12].
double cross_entropy(const corpus::Predictions& pred, const corpus::Targets& targets, bool with_deletions);

// cross_entropy + l2 * ||theta||^2.
double loss(const corpus::Predictions& pred, const corpus::Targets& targets, const BiRnnModel& model, double l2);

struct Example {
  std::vector<features::FeatureVector> xs;
  corpus::Targets targets;
};

struct GradientResult {
  Parameters grad;
  double loss = 0.0;
};

// Exact gradient of sum_r cross_entropy_r + l2 * ||theta||^2 over the batch by
// backpropagation through time in both directions.
GradientResult gradients(const BiRnnModel& model, std::span<const Example> batch, double l2);

// Objective value of the same quantity, forward only.
double batch_loss(const BiRnnModel& model, std::span<const Example> batch, double l2);

struct TrainConfig {
  double learning_rate = 0.01;
  double l2 = 1e-4;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  double gradient_clip = 5.0;
  std::size_t hidden_dim = 64;

  void validate() const;
};

struct TrainResult {
  BiRnnModel model;
  // Mean per-utterance objective of each epoch, measured during the pass.
  std::vector<double> history;
};

// Plain SGD, one update per utterance in a seeded shuffled order, with
// gradient-norm clipping. Each update uses l2 / n_utterances so one epoch
// applies the full regulariser once.
TrainResult train(BiRnnModel model, std::span<const Example> data, const TrainConfig& config);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t n_params = 0;
};

// Compares gradients() with central finite differences of the objective for
// every parameter: max |g_a - g_n| / max(1e-8, |g_a| + |g_n|). The
// differenced objective is a separate forward pass in long double, and the
// divisor is the actual distance between the two perturbed values.
GradCheckResult gradient_check(const BiRnnModel& model, std::span<const Example> batch, double l2,
                               double step = 1e-5);

// Checkpoint JSON (version tag, config, scaler, weights in row-major order).
std::string model_to_json(const BiRnnModel& model);
BiRnnModel model_from_json(std::string_view text);

}  // namespace delconf::birnn
