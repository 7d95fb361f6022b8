#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "delconf/align.hpp"
#include "delconf/birnn.hpp"
#include "delconf/calibrate.hpp"
#include "delconf/corpus.hpp"
#include "delconf/error.hpp"
#include "delconf/io.hpp"
#include "delconf/metrics.hpp"
#include "delconf/pipeline.hpp"
#include "delconf/random.hpp"
#include "delconf/select.hpp"
#include "delconf/simgen.hpp"

namespace delconf::cli {

using nlohmann::json;
using Corpus = std::vector<corpus::LabeledUtterance>;

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return corpus::format_number(v);
}

// Destination of a machine-readable result: a file when a path was given,
// otherwise the output stream.
void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty())
    out << content;
  else
    io::write_text_file_atomic(path, content);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ValidationError(std::string("bad number '") + item + "' in " + what);
    }
  }
  if (out.empty()) throw ValidationError(std::string(what) + " is empty");
  return out;
}

// Replaces predicted confidences with the raw posteriors, keeping any
// deletion outputs.
Corpus with_raw_confidence(Corpus data) {
  for (auto& utt : data) {
    corpus::Predictions p = utt.predictions.value_or(corpus::Predictions{});
    p.c.clear();
    for (const auto& w : utt.utterance.words) p.c.push_back(w.raw_posterior);
    utt.predictions = std::move(p);
  }
  return data;
}

// Optional metric: null when undefined for the data.
template <typename F>
json maybe(F&& f) {
  try {
    return f();
  } catch (const DegenerateError&) {
    return nullptr;
  }
}

// ---------------------------------------------------------------------------
// Subcommands. Each registers its options and returns the action to run.

using Action = std::function<void(std::ostream& out, std::ostream& err)>;

struct SimulateArgs {
  std::string config, preset = "matched", out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_utts;
};

Action add_simulate(CLI::App& app) {
  auto a = std::make_shared<SimulateArgs>();
  auto* sub = app.add_subcommand("simulate", "Generate a synthetic recogniser corpus");
  sub->add_option("--config", a->config, "Simulation config JSON");
  sub->add_option("--preset", a->preset, "Preset used without --config (matched, mismatched)");
  sub->add_option("--n-utts", a->n_utts, "Number of utterances (single config only)");
  sub->add_option("--seed", a->seed, "Random seed");
  sub->add_option("--out", a->out, "Output corpus JSONL")->required();
  return [a](std::ostream&, std::ostream& err) {
    std::vector<simgen::SimConfig> configs;
    if (!a->config.empty()) {
      configs = simgen::configs_from_json(io::read_text_file(a->config), a->seed ? &*a->seed : nullptr);
    } else {
      configs.push_back(simgen::preset(a->preset));
      if (a->seed) configs.back().seed = *a->seed;
    }
    if (a->n_utts) {
      if (configs.size() != 1) throw ValidationError("--n-utts needs a single-component config");
      configs.front().n_utts = *a->n_utts;
    }
    const auto data = simgen::generate_mix(configs);
    corpus::write_corpus(data, a->out);
    err << "simulate: wrote " << data.size() << " utterances to " << a->out << '\n';
  };
}

struct AlignArgs {
  std::string in, out, summary;
  align::EditWeights weights;
};

Action add_align(CLI::App& app) {
  auto a = std::make_shared<AlignArgs>();
  auto* sub = app.add_subcommand("align", "Align hypotheses with references and derive targets");
  sub->add_option("--in", a->in, "Input corpus")->required();
  sub->add_option("--out", a->out, "Corpus with targets")->required();
  sub->add_option("--summary", a->summary, "Per-utterance error counts CSV");
  sub->add_option("--sub", a->weights.sub, "Substitution cost");
  sub->add_option("--del", a->weights.del, "Deletion cost");
  sub->add_option("--ins", a->weights.ins, "Insertion cost");
  return [a](std::ostream&, std::ostream& err) {
    a->weights.validate();
    auto data = corpus::read_corpus(a->in);
    std::string csv = "id,cor,sub,del,ins,wer\n";
    align::ErrorCounts total;
    for (auto& utt : data) {
      if (!utt.reference) throw ValidationError("utterance '" + utt.id() + "' has no reference");
      const auto alignment = align::levenshtein_align(utt.utterance.tokens(), *utt.reference, a->weights);
      const auto counts = align::error_counts(alignment);
      utt.targets = align::derive_targets(alignment, utt.size());
      total += counts;
      csv += utt.id() + ',' + std::to_string(counts.cor) + ',' + std::to_string(counts.sub) + ',' +
             std::to_string(counts.del) + ',' + std::to_string(counts.ins) + ',' +
             (counts.ref_words() > 0 ? num(counts.wer()) : std::string()) + '\n';
    }
    corpus::write_corpus(data, a->out);
    if (!a->summary.empty()) io::write_text_file_atomic(a->summary, csv);
    const double r = static_cast<double>(std::max(1LL, total.ref_words()));
    err << "align: " << data.size() << " utterances, " << total.ref_words() << " reference words, sub "
        << total.sub / r << " del " << total.del / r << " ins " << total.ins / r << '\n';
  };
}

struct TrainCalibArgs {
  std::string in, out;
  std::size_t bins = calibrate::kDefaultBins;
  double tie_break = calibrate::kDefaultTieBreak;
};

Action add_train_calib(CLI::App& app) {
  auto a = std::make_shared<TrainCalibArgs>();
  auto* sub = app.add_subcommand("train-calib", "Fit a monotone calibration map to raw posteriors");
  sub->add_option("--in", a->in, "Aligned corpus")->required();
  sub->add_option("--out", a->out, "Calibration map JSON")->required();
  sub->add_option("--bins", a->bins, "Number of equal-occupancy bins");
  sub->add_option("--tie-break", a->tie_break, "Weight of the raw score in the mapped value");
  return [a](std::ostream&, std::ostream& err) {
    const auto data = corpus::read_corpus(a->in);
    const auto map = calibrate::fit_monotone_map(pipeline::raw_confidence_set(data), a->bins, a->tie_break);
    io::write_text_file_atomic(a->out, calibrate::map_to_json(map));
    err << "train-calib: " << map.values.size() << " cells\n";
  };
}

struct TrainBirnnArgs {
  std::string in, out, lm_text, history;
  pipeline::TrainOptions opt;
  std::string cell = "lstm";
  bool raw_conf = false;
};

Action add_train_birnn(CLI::App& app) {
  auto a = std::make_shared<TrainBirnnArgs>();
  auto& t = a->opt.train;
  auto& f = a->opt.featurizer;
  auto* sub = app.add_subcommand("train-birnn", "Train a bidirectional recurrent confidence model");
  sub->add_option("--in", a->in, "Aligned training corpus")->required();
  sub->add_option("--out", a->out, "Model checkpoint JSON")->required();
  sub->add_option("--lm-text", a->lm_text, "Corpus whose references train the language model");
  sub->add_option("--history", a->history, "Loss history CSV");
  sub->add_option("--seed", t.seed, "Initialisation and shuffling seed");
  sub->add_option("--hidden", t.hidden_dim, "Hidden units per direction");
  sub->add_option("--epochs", t.epochs, "Training epochs");
  sub->add_option("--lr", t.learning_rate, "SGD learning rate");
  sub->add_option("--l2", t.l2, "L2 penalty per epoch");
  sub->add_option("--clip", t.gradient_clip, "Gradient norm clip");
  sub->add_flag("--deletions", a->opt.predict_deletions, "Add deletion heads");
  sub->add_option("--cell", a->cell, "lstm or vanilla");
  sub->add_option("--emb-dim", f.emb_dim, "Word embedding size");
  sub->add_option("--lm-order", f.lm_order, "Language model order");
  sub->add_option("--lm-discount", f.lm_discount, "Language model absolute discount");
  sub->add_option("--bins", f.calib_bins, "Calibration bins for the confidence feature");
  sub->add_flag("--raw-conf", a->raw_conf, "Use the raw posterior as the confidence feature");
  return [a](std::ostream&, std::ostream& err) {
    if (a->cell != "lstm" && a->cell != "vanilla") throw ValidationError("--cell must be lstm or vanilla");
    a->opt.cell = a->cell == "lstm" ? birnn::CellType::Lstm : birnn::CellType::Vanilla;
    a->opt.featurizer.use_calibrated = !a->raw_conf;
    const auto data = corpus::read_corpus(a->in);
    const auto lm_text = a->lm_text.empty() ? Corpus{} : corpus::read_corpus(a->lm_text);
    const auto outcome = pipeline::train_confidence_model(data, a->opt, lm_text);
    io::write_text_file_atomic(a->out, pipeline::model_to_json(outcome.model));
    if (!a->history.empty()) {
      std::string csv = "epoch,mean_loss\n";
      for (std::size_t e = 0; e < outcome.history.size(); ++e)
        csv += std::to_string(e + 1) + ',' + num(outcome.history[e]) + '\n';
      io::write_text_file_atomic(a->history, csv);
    }
    err << "train-birnn: " << outcome.model.net.params.size() << " parameters, " << outcome.history.size()
        << " epochs";
    if (!outcome.history.empty()) err << ", final mean loss " << outcome.history.back();
    err << '\n';
  };
}

struct PredictArgs {
  std::string in, model, out;
};

Action add_predict(CLI::App& app) {
  auto a = std::make_shared<PredictArgs>();
  auto* sub = app.add_subcommand("predict", "Attach model predictions to a corpus");
  sub->add_option("--in", a->in, "Input corpus")->required();
  sub->add_option("--model", a->model, "Calibration map or model checkpoint")->required();
  sub->add_option("--out", a->out, "Corpus with predictions")->required();
  return [a](std::ostream&, std::ostream& err) {
    const auto data = corpus::read_corpus(a->in);
    const auto text = io::read_text_file(a->model);
    json head;
    try {
      head = json::parse(text);
    } catch (const json::exception& e) {
      throw ParseError(std::string("model file: ") + e.what());
    }
    Corpus out;
    if (head.is_object() && head.contains("kind")) {
      out = pipeline::with_predictions(pipeline::model_from_json(text), data);
    } else {
      out = pipeline::with_map_predictions(calibrate::map_from_json(text), data);
    }
    corpus::validate(out);
    corpus::write_corpus(out, a->out);
    err << "predict: " << out.size() << " utterances\n";
  };
}

struct EvaluateArgs {
  std::string in, out, roc_csv, pr_csv, scores = "pred";
};

Action add_evaluate(CLI::App& app) {
  auto a = std::make_shared<EvaluateArgs>();
  auto* sub = app.add_subcommand("evaluate", "Confidence and deletion metrics");
  sub->add_option("--in", a->in, "Corpus with targets and predictions")->required();
  sub->add_option("--out", a->out, "Metrics JSON (standard output when omitted)");
  sub->add_option("--scores", a->scores, "pred or raw");
  sub->add_option("--roc-csv", a->roc_csv, "ROC curve of the confidences");
  sub->add_option("--pr-csv", a->pr_csv, "Precision-recall curve of the confidences");
  return [a](std::ostream& out, std::ostream& err) {
    if (a->scores != "pred" && a->scores != "raw") throw ValidationError("--scores must be pred or raw");
    const auto data = corpus::read_corpus(a->in);
    const bool raw = a->scores == "raw";
    const auto set = raw ? pipeline::raw_confidence_set(data) : pipeline::predicted_confidence_set(data);
    set.validate();
    json report;
    report["n_words"] = set.scores.size();
    report["nce"] = maybe([&] { return json(metrics::nce(set)); });
    report["roc_auc"] = maybe([&] { return json(metrics::roc_auc(set)); });
    report["pr_auc"] = maybe([&] { return json(metrics::pr_auc(set)); });
    const bool deletions = !raw && !data.empty() && std::all_of(data.begin(), data.end(), [](const auto& u) {
      return u.predictions && u.predictions->has_deletions();
    });
    if (deletions) {
      report["deletion"] = {
          {"roc_auc_next", maybe([&] { return json(metrics::roc_auc(pipeline::predicted_deletion_set(data))); })},
          {"roc_auc_start", maybe([&] { return json(metrics::roc_auc(pipeline::predicted_start_set(data))); })}};
    } else {
      report["deletion"] = nullptr;
    }
    const std::string roc = a->roc_csv.empty() ? "" : metrics::curve_csv(metrics::roc_points(set));
    const std::string pr = a->pr_csv.empty() ? "" : metrics::curve_csv(metrics::pr_points(set));
    if (!roc.empty()) io::write_text_file_atomic(a->roc_csv, roc);
    if (!pr.empty()) io::write_text_file_atomic(a->pr_csv, pr);
    emit(a->out, report.dump(2) + '\n', out);
    err << "evaluate: " << set.scores.size() << " words\n";
  };
}

struct SelectArgs {
  std::string in, out, curve, params, scheme = "confidence", scores = "pred";
  std::optional<double> theta_c, theta_d, theta_s, theta_p;
  bool omit_inc = false;
};

selection::SchemeSpec scheme_from(const SelectArgs& a) {
  if (a.scheme == "confidence") return selection::SchemeSpec::confidence();
  if (a.scheme == "discount") {
    selection::DiscountParams p;
    if (!a.params.empty()) p = selection::discount_from_json(io::read_text_file(a.params));
    if (a.theta_d) p.theta_d = *a.theta_d;
    if (a.theta_s) p.theta_s = *a.theta_s;
    if (a.params.empty() && !a.theta_d && !a.theta_s)
      throw ValidationError("discount scheme needs --params or --theta-d/--theta-s");
    return selection::SchemeSpec::with_discount(p);
  }
  if (a.scheme == "threshold") {
    selection::Thresholds th;
    if (!a.params.empty()) {
      th = selection::thresholds_from_json(io::read_text_file(a.params));
    } else if (!(a.theta_c && a.theta_d && a.theta_s && a.theta_p)) {
      throw ValidationError("threshold scheme needs --params or all of --theta-c/d/s/p");
    }
    if (a.theta_c) th.theta_c = *a.theta_c;
    if (a.theta_d) th.theta_d = *a.theta_d;
    if (a.theta_s) th.theta_s = *a.theta_s;
    if (a.theta_p) th.theta_p = *a.theta_p;
    return selection::SchemeSpec::with_thresholds(th, a.omit_inc);
  }
  throw ValidationError("--scheme must be confidence, discount or threshold");
}

Action add_select(CLI::App& app) {
  auto a = std::make_shared<SelectArgs>();
  auto* sub = app.add_subcommand("select", "Rank utterances for selection and write the selection curve");
  sub->add_option("--in", a->in, "Corpus with predictions")->required();
  sub->add_option("--out", a->out, "Ranking CSV (standard output when omitted)");
  sub->add_option("--curve", a->curve, "Selection curve CSV");
  sub->add_option("--scheme", a->scheme, "confidence, discount or threshold");
  sub->add_option("--params", a->params, "Discount or threshold parameter JSON");
  sub->add_option("--theta-c", a->theta_c, "Correct/incorrect threshold");
  sub->add_option("--theta-d", a->theta_d, "Next-word deletion threshold or discount");
  sub->add_option("--theta-s", a->theta_s, "Start deletion threshold or discount");
  sub->add_option("--theta-p", a->theta_p, "Denominator penalty on incorrect words");
  sub->add_flag("--omit-inc", a->omit_inc, "Rank by estimated deletions only");
  sub->add_option("--scores", a->scores, "pred or raw confidences");
  return [a](std::ostream& out, std::ostream& err) {
    if (a->scores != "pred" && a->scores != "raw") throw ValidationError("--scores must be pred or raw");
    const auto spec = scheme_from(*a);
    auto data = corpus::read_corpus(a->in);
    if (a->scores == "raw") data = with_raw_confidence(std::move(data));
    const auto result = selection::rank_and_curve(data, spec);
    std::string ranking = "rank,id,score,duration\n";
    for (std::size_t k = 0; k < result.ids.size(); ++k)
      ranking += std::to_string(k + 1) + ',' + result.ids[k] + ',' + num(result.scores[k]) + ',' +
                 num(result.durations[k]) + '\n';
    if (!a->curve.empty()) io::write_text_file_atomic(a->curve, result.curve_csv());
    emit(a->out, ranking, out);
    err << "select: ranked " << result.ids.size() << " utterances\n";
  };
}

struct FitThresholdsArgs {
  std::string in, out, theta_p = "0.25,0.5,0.75,1";
  double step = 0.025;
  bool omit_inc = false;
};

Action add_fit_thresholds(CLI::App& app) {
  auto a = std::make_shared<FitThresholdsArgs>();
  auto* sub = app.add_subcommand("fit-thresholds", "Grid search for WER-estimate thresholds");
  sub->add_option("--in", a->in, "Dev corpus with references and joint predictions")->required();
  sub->add_option("--out", a->out, "Threshold JSON (standard output when omitted)");
  sub->add_option("--step", a->step, "Grid step for theta_c, theta_d and theta_s on [0, 1]");
  sub->add_option("--theta-p", a->theta_p, "Comma-separated theta_p values");
  sub->add_flag("--omit-inc", a->omit_inc, "Fit the deletion-only estimate");
  return [a](std::ostream& out, std::ostream& err) {
    if (!(a->step > 0.0 && a->step <= 1.0)) throw ValidationError("--step must lie in (0, 1]");
    selection::ThresholdGrid grid;
    const auto n = static_cast<long>(std::floor(1.0 / a->step + 1e-9));
    for (long k = 0; k <= n; ++k) grid.theta_c.push_back(std::min(1.0, static_cast<double>(k) * a->step));
    grid.theta_d = grid.theta_s = grid.theta_c;
    grid.theta_p = parse_list(a->theta_p, "--theta-p");
    const auto data = corpus::read_corpus(a->in);
    const auto fit = selection::fit_thresholds(data, grid, a->omit_inc);
    emit(a->out, selection::thresholds_to_json(fit.thresholds) + '\n', out);
    err << "fit-thresholds: mse " << fit.mse << '\n';
  };
}

struct FitDiscountArgs {
  std::string in, out, grid = "0,0.5,1,2,3,5,7.5,10";
  bool tied = false;
  double fraction = 0.25;
  double wer_slack = 0.02;
};

Action add_fit_discount(CLI::App& app) {
  auto a = std::make_shared<FitDiscountArgs>();
  auto* sub = app.add_subcommand("fit-discount", "Grid search for deletion discount coefficients");
  sub->add_option("--in", a->in, "Dev corpus with references and joint predictions")->required();
  sub->add_option("--out", a->out, "Discount JSON (standard output when omitted)");
  sub->add_option("--grid", a->grid, "Comma-separated coefficient values for both axes");
  sub->add_flag("--tied", a->tied, "Search theta_d == theta_s only");
  sub->add_option("--fraction", a->fraction, "Selected fraction of the data by duration");
  sub->add_option("--wer-slack", a->wer_slack, "Allowed subset WER increase over confidence-only");
  return [a](std::ostream& out, std::ostream& err) {
    selection::DiscountGrid grid;
    grid.theta_d = grid.theta_s = parse_list(a->grid, "--grid");
    grid.tied = a->tied;
    const auto data = corpus::read_corpus(a->in);
    const auto fit = selection::fit_discount(data, grid, a->fraction, a->wer_slack);
    emit(a->out, selection::discount_to_json(fit.params) + '\n', out);
    err << "fit-discount: " << fit.deletions << " deletions (confidence-only " << fit.baseline_deletions
        << "), subset WER " << fit.subset_wer << " (confidence-only " << fit.baseline_wer << ")\n";
  };
}

struct GradCheckArgs {
  std::string out, cell = "lstm";
  std::uint64_t seed = 1;
  std::size_t hidden = 4, input = 5, n_seqs = 3, max_len = 6;
  double l2 = 1e-3, step = 1e-5, tol = 1e-4;
  bool deletions = true;
};

Action add_grad_check(CLI::App& app) {
  auto a = std::make_shared<GradCheckArgs>();
  auto* sub = app.add_subcommand("grad-check", "Compare BPTT gradients with finite differences");
  sub->add_option("--out", a->out, "Result JSON (standard output when omitted)");
  sub->add_option("--seed", a->seed, "Seed for the model and the random sequences");
  sub->add_option("--hidden", a->hidden, "Hidden units per direction");
  sub->add_option("--input-dim", a->input, "Input size");
  sub->add_option("--n-seqs", a->n_seqs, "Number of random sequences");
  sub->add_option("--max-len", a->max_len, "Maximum sequence length");
  sub->add_option("--cell", a->cell, "lstm or vanilla");
  sub->add_option("--l2", a->l2, "L2 penalty");
  sub->add_option("--step", a->step, "Finite-difference step");
  sub->add_option("--tol", a->tol, "Maximum accepted relative error");
  sub->add_flag("--deletions,!--no-deletions", a->deletions, "Include deletion heads");
  return [a](std::ostream& out, std::ostream& err) {
    if (a->cell != "lstm" && a->cell != "vanilla") throw ValidationError("--cell must be lstm or vanilla");
    if (a->n_seqs == 0 || a->max_len == 0) throw ValidationError("--n-seqs and --max-len must be positive");
    const auto cell = a->cell == "lstm" ? birnn::CellType::Lstm : birnn::CellType::Vanilla;
    auto model = birnn::init_model(a->input, a->hidden, a->deletions, a->seed, cell);
    Rng rng(mix64(a->seed));
    for (double& v : model.params.values()) v += rng.uniform(-0.3, 0.3);
    std::vector<birnn::Example> batch(a->n_seqs);
    for (auto& ex : batch) {
      const std::size_t len = 1 + rng.below(a->max_len);
      for (std::size_t t = 0; t < len; ++t) {
        features::FeatureVector x(a->input);
        for (double& v : x) v = rng.normal();
        ex.xs.push_back(std::move(x));
        ex.targets.c.push_back(rng.bernoulli(0.7) ? 1 : 0);
        ex.targets.d.push_back(rng.bernoulli(0.2) ? 1 : 0);
      }
      ex.targets.s = rng.bernoulli(0.2) ? 1 : 0;
    }
    const auto res = birnn::gradient_check(model, batch, a->l2, a->step);
    const bool pass = res.max_rel_error < a->tol;
    const json report{{"max_rel_error", res.max_rel_error},
                      {"worst_index", res.worst_index},
                      {"n_params", res.n_params},
                      {"pass", pass}};
    emit(a->out, report.dump(2) + '\n', out);
    err << "grad-check: max relative error " << res.max_rel_error << " over " << res.n_params << " parameters\n";
    if (!pass) throw ValidationError("gradient check exceeded the tolerance");
  };
}

// Turns a JSON object of option values into leading command-line arguments,
// so explicit flags given later take precedence.
std::vector<std::string> config_args(const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_text_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError(path + ": config must be a JSON object");
  std::vector<std::string> out;
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_string()) {
      out.push_back(flag);
      out.push_back(value.get<std::string>());
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
      out.push_back(flag);
      out.push_back(value.dump());
    } else if (value.is_number()) {
      out.push_back(flag);
      out.push_back(num(value.get<double>()));
    } else {
      throw ValidationError(path + ": option '" + key + "' must be a scalar");
    }
  }
  return out;
}

// For every subcommand but simulate, "--config FILE" expands into the
// options stored in FILE.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty() || args.front() == "simulate") return args;
  std::vector<std::string> rest;
  std::vector<std::string> from_file;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) {
      const auto extra = config_args(args[++k]);
      from_file.insert(from_file.end(), extra.begin(), extra.end());
    } else if (args[k].rfind("--config=", 0) == 0) {
      const auto extra = config_args(args[k].substr(9));
      from_file.insert(from_file.end(), extra.begin(), extra.end());
    } else {
      rest.push_back(args[k]);
    }
  }
  if (from_file.empty()) return rest;
  std::vector<std::string> out{rest.front()};
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  try {
    const auto args = expand_config(raw_args);
    CLI::App app{"Word confidence and deletion prediction toolkit", "delconf"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    std::vector<std::pair<CLI::App*, Action>> commands;
    const auto add = [&](Action (*fn)(CLI::App&)) {
      auto action = fn(app);
      commands.emplace_back(app.get_subcommands([](CLI::App*) { return true; }).back(), std::move(action));
    };
    add(add_simulate);
    add(add_align);
    add(add_train_calib);
    add(add_train_birnn);
    add(add_predict);
    add(add_evaluate);
    add(add_select);
    add(add_fit_thresholds);
    add(add_fit_discount);
    add(add_grad_check);

    std::vector<std::string> argv_storage{"delconf"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_storage) argv.push_back(s.data());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kOk : kInvalid;
    }
    for (auto& [sub, action] : commands) {
      if (sub->parsed()) {
        action(out, err);
        return kOk;
      }
    }
    return kInvalid;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace delconf::cli
