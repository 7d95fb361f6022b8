#include "delconf/birnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <json.hpp>

#include "delconf/error.hpp"
#include "delconf/metrics.hpp"
#include "delconf/random.hpp"

namespace delconf::birnn {

using nlohmann::json;

namespace {

double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    s0 += a[k] * b[k];
    s1 += a[k + 1] * b[k + 1];
    s2 += a[k + 2] * b[k + 2];
    s3 += a[k + 3] * b[k + 3];
  }
  for (; k < n; ++k) s0 += a[k] * b[k];
  return (s0 + s1) + (s2 + s3);
}

// y += alpha * x
void axpy(double* y, double alpha, const double* x, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

double bce(double p, std::uint8_t target) {
  const double q = std::clamp(p, metrics::kProbEpsilon, 1.0 - metrics::kProbEpsilon);
  return target ? -std::log(q) : -std::log1p(-q);
}

constexpr std::size_t idx(Gate g) { return static_cast<std::size_t>(g); }

void run_direction(const Parameters& p, Direction dir, const std::vector<double>& inputs, std::size_t steps,
                   DirectionCache& out) {
  const auto& cfg = p.config();
  const std::size_t in = cfg.input_dim;
  const std::size_t hid = cfg.hidden_dim;
  const std::size_t zdim = in + hid;
  const std::size_t ng = cfg.gates();
  const bool lstm = cfg.cell == CellType::Lstm;
  out.z.assign(steps * zdim, 0.0);
  out.gates.assign(steps * ng * hid, 0.0);
  out.cell.assign(lstm ? steps * hid : 0, 0.0);
  out.cell_tanh.assign(lstm ? steps * hid : 0, 0.0);
  out.hidden.assign(steps * hid, 0.0);

  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = dir == Direction::Forward ? s : steps - 1 - s;
    double* z = &out.z[s * zdim];
    std::copy_n(&inputs[t * in], in, z);
    if (s > 0) std::copy_n(&out.hidden[(s - 1) * hid], hid, z + in);
    double* act = &out.gates[s * ng * hid];
    for (std::size_t k = 0; k < ng; ++k) {
      const auto w = p.gate_weights(dir, k);
      const auto b = p.gate_bias(dir, k);
      for (std::size_t r = 0; r < hid; ++r) act[k * hid + r] = b[r] + dot(&w[r * zdim], z, zdim);
    }
    double* h = &out.hidden[s * hid];
    if (!lstm) {
      for (std::size_t r = 0; r < hid; ++r) h[r] = act[r] = std::tanh(act[r]);
      continue;
    }
    double* ig = act + idx(Gate::Input) * hid;
    double* fg = act + idx(Gate::Forget) * hid;
    double* og = act + idx(Gate::Output) * hid;
    double* gg = act + idx(Gate::Candidate) * hid;
    double* c = &out.cell[s * hid];
    double* tc = &out.cell_tanh[s * hid];
    const double* c_prev = s > 0 ? &out.cell[(s - 1) * hid] : nullptr;
    for (std::size_t r = 0; r < hid; ++r) {
      ig[r] = sigmoid(ig[r]);
      fg[r] = sigmoid(fg[r]);
      og[r] = sigmoid(og[r]);
      gg[r] = std::tanh(gg[r]);
      c[r] = ig[r] * gg[r] + (c_prev ? fg[r] * c_prev[r] : 0.0);
      tc[r] = std::tanh(c[r]);
      h[r] = og[r] * tc[r];
    }
  }
}

// Accumulates parameter gradients of one direction given dL/dh for each step
// (processing order) coming from the heads.
void backprop_direction(const Parameters& p, Parameters& grad, Direction dir, const DirectionCache& cache,
                        const std::vector<double>& dh_heads, std::size_t steps) {
  const auto& cfg = p.config();
  const std::size_t in = cfg.input_dim;
  const std::size_t hid = cfg.hidden_dim;
  const std::size_t zdim = in + hid;
  const std::size_t ng = cfg.gates();
  const bool lstm = cfg.cell == CellType::Lstm;

  std::vector<double> dh_next(hid, 0.0);
  std::vector<double> dc_next(hid, 0.0);
  std::vector<double> da(ng * hid, 0.0);
  std::vector<double> dz(zdim, 0.0);

  for (std::size_t s = steps; s-- > 0;) {
    const double* act = &cache.gates[s * ng * hid];
    if (lstm) {
      const double* ig = act + idx(Gate::Input) * hid;
      const double* fg = act + idx(Gate::Forget) * hid;
      const double* og = act + idx(Gate::Output) * hid;
      const double* gg = act + idx(Gate::Candidate) * hid;
      const double* tc = &cache.cell_tanh[s * hid];
      const double* c_prev = s > 0 ? &cache.cell[(s - 1) * hid] : nullptr;
      for (std::size_t r = 0; r < hid; ++r) {
        const double dh = dh_heads[s * hid + r] + dh_next[r];
        const double d_out = dh * tc[r];
        const double dc = dh * og[r] * (1.0 - tc[r] * tc[r]) + dc_next[r];
        const double prev = c_prev ? c_prev[r] : 0.0;
        da[idx(Gate::Input) * hid + r] = dc * gg[r] * ig[r] * (1.0 - ig[r]);
        da[idx(Gate::Forget) * hid + r] = dc * prev * fg[r] * (1.0 - fg[r]);
        da[idx(Gate::Output) * hid + r] = d_out * og[r] * (1.0 - og[r]);
        da[idx(Gate::Candidate) * hid + r] = dc * ig[r] * (1.0 - gg[r] * gg[r]);
        dc_next[r] = dc * fg[r];
      }
    } else {
      const double* h = &cache.hidden[s * hid];
      for (std::size_t r = 0; r < hid; ++r) da[r] = (dh_heads[s * hid + r] + dh_next[r]) * (1.0 - h[r] * h[r]);
    }

    const double* z = &cache.z[s * zdim];
    std::fill(dz.begin(), dz.end(), 0.0);
    for (std::size_t k = 0; k < ng; ++k) {
      const auto w = p.gate_weights(dir, k);
      auto gw = grad.gate_weights(dir, k);
      auto gb = grad.gate_bias(dir, k);
      for (std::size_t r = 0; r < hid; ++r) {
        const double a = da[k * hid + r];
        if (a == 0.0) continue;
        axpy(&gw[r * zdim], a, z, zdim);
        gb[r] += a;
        axpy(dz.data(), a, &w[r * zdim], zdim);
      }
    }
    std::copy_n(dz.begin() + static_cast<long>(in), hid, dh_next.begin());
  }
}

struct Context {
  const double* fwd;
  const double* bwd;
};

Context context_at(const ForwardCache& cache, std::size_t t, std::size_t hid) {
  return {&cache.fwd.hidden[t * hid], &cache.bwd.hidden[(cache.steps - 1 - t) * hid]};
}

double head_logit(const Parameters& p, Head head, const Context& ctx) {
  const std::size_t hid = p.config().hidden_dim;
  const auto w = p.head_weights(head);
  return p.head_bias(head) + dot(w.data(), ctx.fwd, hid) + dot(w.data() + hid, ctx.bwd, hid);
}

void check_targets(const corpus::Targets& targets, std::size_t steps) {
  if (targets.c.size() != steps || targets.d.size() != steps)
    throw ValidationError("targets length does not match the number of feature vectors");
}

// Adds the gradient of one utterance's cross-entropy into `grad`; returns
// the cross-entropy.
double accumulate(const BiRnnModel& model, const Example& ex, Parameters& grad, ForwardCache& cache) {
  const auto pred = forward(model, ex.xs, &cache);
  check_targets(ex.targets, cache.steps);
  const auto& p = model.params;
  const std::size_t hid = model.config.hidden_dim;
  const std::size_t steps = cache.steps;
  const bool del = model.config.predict_deletions;

  std::vector<double> dh_fwd(steps * hid, 0.0);
  std::vector<double> dh_bwd(steps * hid, 0.0);
  const auto backprop_head = [&](Head head, double dlogit, std::size_t t) {
    const auto ctx = context_at(cache, t, hid);
    const auto w = p.head_weights(head);
    auto gw = grad.head_weights(head);
    axpy(gw.data(), dlogit, ctx.fwd, hid);
    axpy(gw.data() + hid, dlogit, ctx.bwd, hid);
    grad.head_bias(head) += dlogit;
    axpy(&dh_fwd[t * hid], dlogit, w.data(), hid);
    axpy(&dh_bwd[(steps - 1 - t) * hid], dlogit, w.data() + hid, hid);
  };
  for (std::size_t t = 0; t < steps; ++t) {
    backprop_head(Head::Confidence, pred.c[t] - ex.targets.c[t], t);
    if (del) backprop_head(Head::Deletion, pred.d[t] - ex.targets.d[t], t);
  }
  if (del) backprop_head(Head::Start, *pred.s - ex.targets.s, 0);

  backprop_direction(p, grad, Direction::Forward, cache.fwd, dh_fwd, steps);
  backprop_direction(p, grad, Direction::Backward, cache.bwd, dh_bwd, steps);
  return cross_entropy(pred, ex.targets, del);
}

void add_l2(const Parameters& p, Parameters& grad, double l2) {
  if (l2 == 0.0) return;
  const auto v = p.values();
  auto g = grad.values();
  for (std::size_t k = 0; k < v.size(); ++k) g[k] += 2.0 * l2 * v[k];
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameters

Parameters::Parameters(const ModelConfig& config) : config_(config) {
  const std::size_t heads = config.predict_deletions ? 3 : 1;
  data_.assign(2 * cell_size() + heads * (config.context_dim() + 1), 0.0);
}

std::size_t Parameters::cell_size() const {
  const std::size_t hid = config_.hidden_dim;
  return config_.gates() * (hid * (config_.input_dim + hid) + hid);
}

std::size_t Parameters::cell_offset(Direction dir) const { return static_cast<std::size_t>(dir) * cell_size(); }

std::size_t Parameters::head_offset(Head head) const {
  if (!has_head(head)) throw ValidationError("model has no deletion heads");
  return 2 * cell_size() + static_cast<std::size_t>(head) * (config_.context_dim() + 1);
}

std::span<double> Parameters::gate_weights(Direction dir, std::size_t gate) {
  const auto c = std::as_const(*this).gate_weights(dir, gate);
  return {const_cast<double*>(c.data()), c.size()};
}

std::span<const double> Parameters::gate_weights(Direction dir, std::size_t gate) const {
  if (gate >= config_.gates()) throw ValidationError("gate index out of range for this cell type");
  const std::size_t hid = config_.hidden_dim;
  const std::size_t block = hid * (config_.input_dim + hid) + hid;
  return std::span<const double>(data_).subspan(cell_offset(dir) + gate * block, hid * (config_.input_dim + hid));
}

std::span<double> Parameters::gate_bias(Direction dir, std::size_t gate) {
  const auto c = std::as_const(*this).gate_bias(dir, gate);
  return {const_cast<double*>(c.data()), c.size()};
}

std::span<const double> Parameters::gate_bias(Direction dir, std::size_t gate) const {
  const auto w = gate_weights(dir, gate);
  return {w.data() + w.size(), config_.hidden_dim};
}

bool Parameters::has_head(Head head) const { return head == Head::Confidence || config_.predict_deletions; }

std::span<double> Parameters::head_weights(Head head) {
  return std::span<double>(data_).subspan(head_offset(head), config_.context_dim());
}

std::span<const double> Parameters::head_weights(Head head) const {
  return std::span<const double>(data_).subspan(head_offset(head), config_.context_dim());
}

double& Parameters::head_bias(Head head) { return data_[head_offset(head) + config_.context_dim()]; }

double Parameters::head_bias(Head head) const { return data_[head_offset(head) + config_.context_dim()]; }

double Parameters::squared_norm() const { return dot(data_.data(), data_.data(), data_.size()); }

// ---------------------------------------------------------------------------
// Model

BiRnnModel init_model(std::size_t input_dim, std::size_t hidden_dim, bool predict_deletions, std::uint64_t seed,
                      CellType cell) {
  if (input_dim == 0 || hidden_dim == 0) throw ValidationError("model dimensions must be positive");
  BiRnnModel model;
  model.config = ModelConfig{input_dim, hidden_dim, predict_deletions, cell};
  model.params = Parameters(model.config);
  model.scaler = features::FeatureScaler::identity(input_dim);

  Rng rng(seed);
  const double r = 1.0 / std::sqrt(static_cast<double>(input_dim + hidden_dim));
  for (const auto dir : {Direction::Forward, Direction::Backward}) {
    for (std::size_t k = 0; k < model.config.gates(); ++k) {
      for (double& w : model.params.gate_weights(dir, k)) w = rng.uniform(-r, r);
      if (cell == CellType::Lstm && k == idx(Gate::Forget))
        std::fill_n(model.params.gate_bias(dir, k).begin(), hidden_dim, 1.0);
    }
  }
  for (const auto head : {Head::Confidence, Head::Deletion, Head::Start})
    if (model.params.has_head(head))
      for (double& w : model.params.head_weights(head)) w = rng.uniform(-r, r);
  return model;
}

corpus::Predictions forward(const BiRnnModel& model, std::span<const features::FeatureVector> xs,
                            ForwardCache* cache) {
  const auto& cfg = model.config;
  if (xs.empty()) throw ValidationError("cannot run the network on an empty sequence");
  if (model.scaler.dim() != cfg.input_dim) throw ValidationError("feature scaler does not match input_dim");
  std::vector<double> inputs(xs.size() * cfg.input_dim);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    if (xs[t].size() != cfg.input_dim)
      throw ValidationError("feature vector " + std::to_string(t) + " has length " + std::to_string(xs[t].size()) +
                            ", model expects " + std::to_string(cfg.input_dim));
    std::span<double> row(&inputs[t * cfg.input_dim], cfg.input_dim);
    std::copy(xs[t].begin(), xs[t].end(), row.begin());
    model.scaler.apply(row);
  }

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.steps = xs.size();
  run_direction(model.params, Direction::Forward, inputs, c.steps, c.fwd);
  run_direction(model.params, Direction::Backward, inputs, c.steps, c.bwd);

  corpus::Predictions pred;
  pred.c.resize(c.steps);
  if (cfg.predict_deletions) pred.d.resize(c.steps);
  for (std::size_t t = 0; t < c.steps; ++t) {
    const auto ctx = context_at(c, t, cfg.hidden_dim);
    pred.c[t] = sigmoid(head_logit(model.params, Head::Confidence, ctx));
    if (cfg.predict_deletions) pred.d[t] = sigmoid(head_logit(model.params, Head::Deletion, ctx));
  }
  if (cfg.predict_deletions) pred.s = sigmoid(head_logit(model.params, Head::Start, context_at(c, 0, cfg.hidden_dim)));
  return pred;
}

double cross_entropy(const corpus::Predictions& pred, const corpus::Targets& targets, bool with_deletions) {
  const std::size_t n = pred.c.size();
  if (targets.c.size() != n || targets.d.size() != n)
    throw ValidationError("predictions and targets differ in length");
  if (with_deletions && (pred.d.size() != n || !pred.s))
    throw ValidationError("deletion predictions missing");
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    total += bce(pred.c[t], targets.c[t]);
    if (with_deletions) total += bce(pred.d[t], targets.d[t]);
  }
  if (with_deletions) total += bce(*pred.s, targets.s);
  return total;
}

double loss(const corpus::Predictions& pred, const corpus::Targets& targets, const BiRnnModel& model, double l2) {
  return cross_entropy(pred, targets, model.config.predict_deletions) + l2 * model.params.squared_norm();
}

GradientResult gradients(const BiRnnModel& model, std::span<const Example> batch, double l2) {
  GradientResult out{Parameters(model.config), 0.0};
  ForwardCache cache;
  for (const auto& ex : batch) out.loss += accumulate(model, ex, out.grad, cache);
  add_l2(model.params, out.grad, l2);
  out.loss += l2 * model.params.squared_norm();
  return out;
}

double batch_loss(const BiRnnModel& model, std::span<const Example> batch, double l2) {
  double total = 0.0;
  for (const auto& ex : batch) {
    const auto pred = forward(model, ex.xs);
    check_targets(ex.targets, ex.xs.size());
    total += cross_entropy(pred, ex.targets, model.config.predict_deletions);
  }
  return total + l2 * model.params.squared_norm();
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ValidationError("learning_rate must be non-negative");
  if (!(l2 >= 0.0)) throw ValidationError("l2 must be non-negative");
  if (!(gradient_clip > 0.0)) throw ValidationError("gradient_clip must be positive");
  if (hidden_dim == 0) throw ValidationError("hidden_dim must be positive");
}

TrainResult train(BiRnnModel model, std::span<const Example> data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw ValidationError("cannot train on an empty corpus");
  const double l2_share = config.l2 / static_cast<double>(data.size());

  Rng rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> losses(data.size(), 0.0);
  Parameters grad(model.config);
  ForwardCache cache;
  TrainResult result;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (const std::size_t i : order) {
      std::fill(grad.values().begin(), grad.values().end(), 0.0);
      const double ce = accumulate(model, data[i], grad, cache);
      add_l2(model.params, grad, l2_share);
      losses[i] = ce + l2_share * model.params.squared_norm();

      const double norm = std::sqrt(grad.squared_norm());
      const double scale = norm > config.gradient_clip ? config.gradient_clip / norm : 1.0;
      auto theta = model.params.values();
      const auto g = grad.values();
      const double step = config.learning_rate * scale;
      for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= step * g[k];
    }
    // Summed in corpus order so the value does not depend on the shuffle.
    result.history.push_back(std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(data.size()));
  }
  result.model = std::move(model);
  return result;
}

namespace {

// Objective of the batch evaluated in extended precision with a plain
// forward pass, so finite differences are not swamped by rounding noise.
using Wide = long double;

Wide wide_sigmoid(Wide a) { return 1.0L / (1.0L + std::exp(-a)); }

Wide wide_bce(Wide p, std::uint8_t target) {
  const Wide eps = metrics::kProbEpsilon;
  const Wide q = std::clamp(p, eps, 1.0L - eps);
  return target ? -std::log(q) : -std::log(1.0L - q);
}

std::vector<Wide> wide_direction(const BiRnnModel& model, Direction dir, const std::vector<Wide>& inputs,
                                 std::size_t steps) {
  const auto& cfg = model.config;
  const std::size_t in = cfg.input_dim, hid = cfg.hidden_dim, zdim = in + hid;
  std::vector<Wide> hidden(steps * hid, 0.0L), h(hid, 0.0L), c(hid, 0.0L), z(zdim), act(cfg.gates() * hid);
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = dir == Direction::Forward ? s : steps - 1 - s;
    for (std::size_t k = 0; k < in; ++k) z[k] = inputs[t * in + k];
    for (std::size_t k = 0; k < hid; ++k) z[in + k] = h[k];
    for (std::size_t g = 0; g < cfg.gates(); ++g) {
      const auto w = model.params.gate_weights(dir, g);
      const auto b = model.params.gate_bias(dir, g);
      for (std::size_t r = 0; r < hid; ++r) {
        Wide a = b[r];
        for (std::size_t k = 0; k < zdim; ++k) a += static_cast<Wide>(w[r * zdim + k]) * z[k];
        act[g * hid + r] = a;
      }
    }
    for (std::size_t r = 0; r < hid; ++r) {
      if (cfg.cell == CellType::Vanilla) {
        h[r] = std::tanh(act[r]);
        continue;
      }
      const Wide i = wide_sigmoid(act[idx(Gate::Input) * hid + r]);
      const Wide f = wide_sigmoid(act[idx(Gate::Forget) * hid + r]);
      const Wide o = wide_sigmoid(act[idx(Gate::Output) * hid + r]);
      const Wide g = std::tanh(act[idx(Gate::Candidate) * hid + r]);
      c[r] = f * c[r] + i * g;
      h[r] = o * std::tanh(c[r]);
    }
    std::copy(h.begin(), h.end(), hidden.begin() + static_cast<long>(s * hid));
  }
  return hidden;
}

Wide wide_objective(const BiRnnModel& model, std::span<const Example> batch, double l2) {
  const auto& cfg = model.config;
  const std::size_t hid = cfg.hidden_dim;
  Wide total = 0.0L;
  for (const auto& ex : batch) {
    const std::size_t steps = ex.xs.size();
    if (steps == 0) throw ValidationError("cannot run the network on an empty sequence");
    check_targets(ex.targets, steps);
    std::vector<Wide> inputs;
    for (const auto& x : ex.xs) {
      if (x.size() != cfg.input_dim) throw ValidationError("feature vector length does not match input_dim");
      for (std::size_t k = 0; k < x.size(); ++k)
        inputs.push_back((static_cast<Wide>(x[k]) - model.scaler.mean[k]) / model.scaler.scale[k]);
    }
    const auto fwd = wide_direction(model, Direction::Forward, inputs, steps);
    const auto bwd = wide_direction(model, Direction::Backward, inputs, steps);
    const auto head = [&](Head h, std::size_t t) {
      const auto w = model.params.head_weights(h);
      Wide a = model.params.head_bias(h);
      for (std::size_t k = 0; k < hid; ++k)
        a += static_cast<Wide>(w[k]) * fwd[t * hid + k] + static_cast<Wide>(w[hid + k]) * bwd[(steps - 1 - t) * hid + k];
      return wide_sigmoid(a);
    };
    for (std::size_t t = 0; t < steps; ++t) {
      total += wide_bce(head(Head::Confidence, t), ex.targets.c[t]);
      if (cfg.predict_deletions) total += wide_bce(head(Head::Deletion, t), ex.targets.d[t]);
    }
    if (cfg.predict_deletions) total += wide_bce(head(Head::Start, 0), ex.targets.s);
  }
  Wide sq = 0.0L;
  for (const double v : model.params.values()) sq += static_cast<Wide>(v) * v;
  return total + static_cast<Wide>(l2) * sq;
}

}  // namespace

GradCheckResult gradient_check(const BiRnnModel& model, std::span<const Example> batch, double l2, double step) {
  if (!(step > 0.0)) throw ValidationError("finite-difference step must be positive");
  const auto analytic = gradients(model, batch, l2).grad;
  BiRnnModel probe = model;
  auto theta = probe.params.values();
  GradCheckResult out;
  out.n_params = theta.size();
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double saved = theta[k];
    theta[k] = saved + step;
    const Wide up = wide_objective(probe, batch, l2);
    const Wide h_up = static_cast<Wide>(theta[k]) - saved;
    theta[k] = saved - step;
    const Wide down = wide_objective(probe, batch, l2);
    const Wide h_down = saved - static_cast<Wide>(theta[k]);
    theta[k] = saved;
    const double numeric = static_cast<double>((up - down) / (h_up + h_down));
    const double a = analytic.values()[k];
    const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
    if (rel > out.max_rel_error) {
      out.max_rel_error = rel;
      out.worst_index = k;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr int kCheckpointVersion = 1;
constexpr const char* kGateNames[] = {"input", "forget", "output", "candidate"};

const char* gate_name(const ModelConfig& cfg, std::size_t k) { return cfg.cell == CellType::Lstm ? kGateNames[k] : "hidden"; }

const char* head_name(Head h) {
  switch (h) {
    case Head::Confidence: return "head_c";
    case Head::Deletion: return "head_d";
    case Head::Start: return "head_s";
  }
  return "";
}

template <typename Span>
std::vector<double> to_vec(Span s) {
  return {s.begin(), s.end()};
}

void read_into(const json& j, std::span<double> dst, const std::string& what) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != dst.size())
    throw ValidationError("checkpoint array '" + what + "' has " + std::to_string(v.size()) + " values, expected " +
                          std::to_string(dst.size()));
  std::copy(v.begin(), v.end(), dst.begin());
}

}  // namespace

std::string model_to_json(const BiRnnModel& model) {
  const auto& cfg = model.config;
  json j;
  j["version"] = kCheckpointVersion;
  j["kind"] = "birnn";
  j["config"] = {{"input_dim", cfg.input_dim},
                 {"hidden_dim", cfg.hidden_dim},
                 {"predict_deletions", cfg.predict_deletions},
                 {"cell", cfg.cell == CellType::Lstm ? "lstm" : "vanilla"}};
  j["scaler"] = {{"mean", model.scaler.mean}, {"scale", model.scaler.scale}};
  for (const auto dir : {Direction::Forward, Direction::Backward}) {
    json cell;
    for (std::size_t k = 0; k < cfg.gates(); ++k) {
      cell[std::string("w_") + gate_name(cfg, k)] = to_vec(model.params.gate_weights(dir, k));
      cell[std::string("b_") + gate_name(cfg, k)] = to_vec(model.params.gate_bias(dir, k));
    }
    j[dir == Direction::Forward ? "forward" : "backward"] = std::move(cell);
  }
  for (const auto head : {Head::Confidence, Head::Deletion, Head::Start})
    if (model.params.has_head(head))
      j[head_name(head)] = {{"w", to_vec(model.params.head_weights(head))}, {"b", model.params.head_bias(head)}};
  return j.dump();
}

BiRnnModel model_from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    if (j.at("version").get<int>() != kCheckpointVersion) throw ValidationError("unsupported checkpoint version");
    if (j.at("kind").get<std::string>() != "birnn") throw ValidationError("checkpoint is not a BiRNN model");
    const auto& c = j.at("config");
    ModelConfig cfg;
    cfg.input_dim = c.at("input_dim").get<std::size_t>();
    cfg.hidden_dim = c.at("hidden_dim").get<std::size_t>();
    cfg.predict_deletions = c.at("predict_deletions").get<bool>();
    const auto cell = c.at("cell").get<std::string>();
    if (cell != "lstm" && cell != "vanilla") throw ValidationError("unknown cell type '" + cell + "'");
    cfg.cell = cell == "lstm" ? CellType::Lstm : CellType::Vanilla;
    if (cfg.input_dim == 0 || cfg.hidden_dim == 0) throw ValidationError("checkpoint has zero dimensions");

    BiRnnModel model{cfg, Parameters(cfg), features::FeatureScaler::identity(cfg.input_dim)};
    read_into(j.at("scaler").at("mean"), model.scaler.mean, "scaler.mean");
    read_into(j.at("scaler").at("scale"), model.scaler.scale, "scaler.scale");
    for (const auto dir : {Direction::Forward, Direction::Backward}) {
      const auto& cell_json = j.at(dir == Direction::Forward ? "forward" : "backward");
      for (std::size_t k = 0; k < cfg.gates(); ++k) {
        const std::string name = gate_name(cfg, k);
        read_into(cell_json.at("w_" + name), model.params.gate_weights(dir, k), "w_" + name);
        read_into(cell_json.at("b_" + name), model.params.gate_bias(dir, k), "b_" + name);
      }
    }
    for (const auto head : {Head::Confidence, Head::Deletion, Head::Start}) {
      if (!model.params.has_head(head)) continue;
      const auto& h = j.at(head_name(head));
      read_into(h.at("w"), model.params.head_weights(head), std::string(head_name(head)) + ".w");
      model.params.head_bias(head) = h.at("b").get<double>();
    }
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("BiRNN checkpoint: ") + e.what());
  }
}

}  // namespace delconf::birnn
