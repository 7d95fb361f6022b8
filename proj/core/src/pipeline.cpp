#include "delconf/pipeline.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "delconf/error.hpp"

namespace delconf::pipeline {

using nlohmann::json;

namespace {

const corpus::Targets& targets_of(const corpus::LabeledUtterance& utt) {
  if (!utt.targets) throw ValidationError("utterance '" + utt.id() + "' has no targets (run align first)");
  return *utt.targets;
}

const corpus::Predictions& predictions_of(const corpus::LabeledUtterance& utt) {
  if (!utt.predictions) throw ValidationError("utterance '" + utt.id() + "' has no predictions");
  return *utt.predictions;
}

const corpus::Predictions& deletion_predictions_of(const corpus::LabeledUtterance& utt) {
  const auto& p = predictions_of(utt);
  if (!p.has_deletions()) throw ValidationError("utterance '" + utt.id() + "' has no deletion predictions");
  return p;
}

std::vector<double> raw_posteriors(const corpus::Utterance& utt) {
  std::vector<double> out;
  out.reserve(utt.words.size());
  for (const auto& w : utt.words) out.push_back(w.raw_posterior);
  return out;
}

}  // namespace

std::vector<features::FeatureVector> Featurizer::features(const corpus::Utterance& utt) const {
  auto conf = raw_posteriors(utt);
  if (config.use_calibrated) {
    if (!calibration) throw ValidationError("featurizer expects a calibration map");
    conf = calibrate::apply_map(*calibration, conf);
  }
  return features::featurize(utt, conf, lm, emb);
}

metrics::ScoredSet raw_confidence_set(std::span<const corpus::LabeledUtterance> corpus) {
  metrics::ScoredSet set;
  for (const auto& utt : corpus) {
    const auto& t = targets_of(utt);
    for (std::size_t k = 0; k < utt.size(); ++k) {
      set.scores.push_back(utt.utterance.words[k].raw_posterior);
      set.labels.push_back(t.c[k]);
    }
  }
  return set;
}

metrics::ScoredSet predicted_confidence_set(std::span<const corpus::LabeledUtterance> corpus) {
  metrics::ScoredSet set;
  for (const auto& utt : corpus) {
    const auto& t = targets_of(utt);
    const auto& p = predictions_of(utt);
    set.scores.insert(set.scores.end(), p.c.begin(), p.c.end());
    set.labels.insert(set.labels.end(), t.c.begin(), t.c.end());
  }
  return set;
}

metrics::ScoredSet predicted_deletion_set(std::span<const corpus::LabeledUtterance> corpus) {
  metrics::ScoredSet set;
  for (const auto& utt : corpus) {
    const auto& t = targets_of(utt);
    const auto& p = deletion_predictions_of(utt);
    set.scores.insert(set.scores.end(), p.d.begin(), p.d.end());
    set.labels.insert(set.labels.end(), t.d.begin(), t.d.end());
  }
  return set;
}

metrics::ScoredSet predicted_start_set(std::span<const corpus::LabeledUtterance> corpus) {
  metrics::ScoredSet set;
  for (const auto& utt : corpus) {
    set.scores.push_back(*deletion_predictions_of(utt).s);
    set.labels.push_back(targets_of(utt).s);
  }
  return set;
}

Featurizer build_featurizer(std::span<const corpus::LabeledUtterance> train, const FeaturizerConfig& config,
                            std::span<const corpus::LabeledUtterance> lm_text) {
  if (train.empty()) throw ValidationError("cannot build features from an empty corpus");
  Featurizer f;
  f.config = config;
  if (config.use_calibrated) f.calibration = calibrate::fit_monotone_map(raw_confidence_set(train), config.calib_bins);

  std::vector<std::vector<std::string>> text;
  std::set<std::string> vocab;
  for (const auto& utt : lm_text.empty() ? train : lm_text) {
    if (!utt.reference) throw ValidationError("utterance '" + utt.id() + "' has no reference");
    if (!utt.reference->empty()) text.push_back(*utt.reference);
    vocab.insert(utt.reference->begin(), utt.reference->end());
  }
  for (const auto& utt : train) {
    if (utt.reference) vocab.insert(utt.reference->begin(), utt.reference->end());
    for (const auto& w : utt.utterance.words) vocab.insert(w.text);
  }
  f.lm = features::train_ngram_lm(text, config.lm_order, config.lm_discount);
  f.emb = features::build_embeddings({vocab.begin(), vocab.end()}, config.emb_dim, config.emb_seed);
  return f;
}

std::vector<birnn::Example> make_examples(const Featurizer& featurizer,
                                          std::span<const corpus::LabeledUtterance> corpus) {
  std::vector<birnn::Example> out;
  out.reserve(corpus.size());
  for (const auto& utt : corpus) out.push_back({featurizer.features(utt.utterance), targets_of(utt)});
  return out;
}

TrainOutcome train_confidence_model(std::span<const corpus::LabeledUtterance> train, const TrainOptions& options,
                                    std::span<const corpus::LabeledUtterance> lm_text) {
  options.train.validate();
  auto featurizer = build_featurizer(train, options.featurizer, lm_text);
  const auto examples = make_examples(featurizer, train);
  std::vector<std::vector<features::FeatureVector>> xs;
  xs.reserve(examples.size());
  for (const auto& ex : examples) xs.push_back(ex.xs);

  auto net = birnn::init_model(featurizer.dim(), options.train.hidden_dim, options.predict_deletions,
                               options.train.seed, options.cell);
  net.scaler = features::fit_scaler(xs, features::FeatureLayout{options.featurizer.emb_dim});
  auto trained = birnn::train(std::move(net), examples, options.train);
  return {ConfidenceModel{std::move(featurizer), std::move(trained.model)}, std::move(trained.history)};
}

corpus::Predictions predict(const ConfidenceModel& model, const corpus::Utterance& utt) {
  return birnn::predict(model.net, model.featurizer.features(utt));
}

std::vector<corpus::LabeledUtterance> with_predictions(const ConfidenceModel& model,
                                                       std::span<const corpus::LabeledUtterance> corpus) {
  std::vector<corpus::LabeledUtterance> out(corpus.begin(), corpus.end());
  for (auto& utt : out) utt.predictions = predict(model, utt.utterance);
  return out;
}

std::vector<corpus::LabeledUtterance> with_map_predictions(const calibrate::PiecewiseMap& map,
                                                           std::span<const corpus::LabeledUtterance> corpus) {
  std::vector<corpus::LabeledUtterance> out(corpus.begin(), corpus.end());
  for (auto& utt : out) utt.predictions = corpus::Predictions{calibrate::apply_map(map, raw_posteriors(utt.utterance)), {}, {}};
  return out;
}

std::vector<corpus::LabeledUtterance> with_raw_predictions(std::span<const corpus::LabeledUtterance> corpus) {
  std::vector<corpus::LabeledUtterance> out(corpus.begin(), corpus.end());
  for (auto& utt : out) utt.predictions = corpus::Predictions{raw_posteriors(utt.utterance), {}, {}};
  return out;
}

std::string model_to_json(const ConfidenceModel& model) {
  const auto& f = model.featurizer;
  json j;
  j["version"] = 1;
  j["kind"] = "confidence_model";
  j["featurizer"] = {{"emb_dim", f.config.emb_dim},
                     {"emb_seed", f.config.emb_seed},
                     {"lm_order", f.config.lm_order},
                     {"lm_discount", f.config.lm_discount},
                     {"use_calibrated", f.config.use_calibrated},
                     {"calib_bins", f.config.calib_bins},
                     {"lm_arpa", f.lm.to_arpa()}};
  j["featurizer"]["calibration"] = f.calibration ? json::parse(calibrate::map_to_json(*f.calibration)) : json();
  j["featurizer"]["emb_vocab"] = f.emb.tokens();
  j["birnn"] = json::parse(birnn::model_to_json(model.net));
  return j.dump();
}

ConfidenceModel model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  try {
    if (j.at("kind").get<std::string>() != "confidence_model")
      throw ValidationError("model file is not a confidence model checkpoint");
    const auto& fj = j.at("featurizer");
    ConfidenceModel m;
    auto& cfg = m.featurizer.config;
    cfg.emb_dim = fj.at("emb_dim").get<std::size_t>();
    cfg.emb_seed = fj.at("emb_seed").get<std::uint64_t>();
    cfg.lm_order = fj.at("lm_order").get<std::size_t>();
    cfg.lm_discount = fj.at("lm_discount").get<double>();
    cfg.use_calibrated = fj.at("use_calibrated").get<bool>();
    cfg.calib_bins = fj.at("calib_bins").get<std::size_t>();
    if (!fj.at("calibration").is_null()) m.featurizer.calibration = calibrate::map_from_json(fj.at("calibration").dump());
    m.featurizer.lm = features::NgramLm::from_arpa(fj.at("lm_arpa").get<std::string>());
    m.featurizer.emb = features::build_embeddings(fj.at("emb_vocab").get<std::vector<std::string>>(), cfg.emb_dim,
                                                  cfg.emb_seed);
    m.net = birnn::model_from_json(j.at("birnn").dump());
    if (m.net.config.input_dim != m.featurizer.dim())
      throw ValidationError("network input size does not match the feature layout");
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

}  // namespace delconf::pipeline
