// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "delconf/align.hpp"
#include "delconf/birnn.hpp"
#include "delconf/calibrate.hpp"
#include "delconf/error.hpp"
#include "delconf/io.hpp"
#include "delconf/metrics.hpp"
#include "delconf/pipeline.hpp"
#include "delconf/random.hpp"
#include "delconf/select.hpp"
#include "delconf/simgen.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace delconf;
using Corpus = std::vector<corpus::LabeledUtterance>;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto start = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  std::size_t checked = 0;
  const std::array<std::pair<birnn::CellType, bool>, 4> variants{{{birnn::CellType::Lstm, true},
                                                                  {birnn::CellType::Lstm, false},
                                                                  {birnn::CellType::Vanilla, true},
                                                                  {birnn::CellType::Vanilla, false}}};
  for (int rep = 0; rep < 3; ++rep) {
    for (const auto& [cell, deletions] : variants) {
      auto model = birnn::init_model(6, 4, deletions, rng.next_u64(), cell);
      for (auto& v : model.params.values()) v += rng.uniform(-0.3, 0.3);
      std::vector<birnn::Example> batch(2);
      for (auto& ex : batch) {
        const std::size_t len = 1 + rng.below(7);
        for (std::size_t t = 0; t < len; ++t) {
          features::FeatureVector x(6);
          for (auto& v : x) v = rng.normal();
          ex.xs.push_back(x);
          ex.targets.c.push_back(rng.bernoulli(0.7));
          ex.targets.d.push_back(rng.bernoulli(0.2));
        }
        ex.targets.s = rng.bernoulli(0.2);
      }
      const auto res = birnn::gradient_check(model, batch, 1e-3, 1e-5);
      worst = std::max(worst, res.max_rel_error);
      checked += res.n_params;
    }
  }
  const double secs = seconds_since(start);
  return {worst < 1e-4 && secs < 10.0,
          fmt("max rel error %.3g over %zu parameters (12 models, hidden 4); %.2f s", worst, checked, secs)};
}

Outcome metric_oracles() {
  Rng rng(77);
  double worst_nce = 0.0, worst_roc = 0.0, worst_pr = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto set = gen::scored_set(rng, 200, i % 2 == 0);
    worst_nce = std::max(worst_nce, std::abs(metrics::nce(set) - oracle::nce(set.scores, set.labels)));
    worst_roc = std::max(worst_roc, std::abs(metrics::roc_auc(set) - oracle::roc_auc(set.scores, set.labels)));
    worst_pr = std::max(worst_pr, std::abs(metrics::pr_auc(set) - oracle::average_precision(set.scores, set.labels)));
  }
  const bool pass = worst_nce <= 1e-12 && worst_roc <= 1e-12 && worst_pr <= 1e-12;
  return {pass, fmt("max |diff| nce %.2g, roc_auc %.2g, pr_auc %.2g over 100 sets", worst_nce, worst_roc, worst_pr)};
}

// Every alignment corresponds to an order-preserving pairing of hypothesis
// and reference positions (the remaining words are insertions and deletions,
// whose interleaving does not change the cost). The oracle enumerates all
// pairings of each length pair once and, for every string pair, keeps the
// fewest mismatches per pairing size.
Outcome alignment_oracle() {
  const auto start = Clock::now();
  constexpr int kMax = 6;
  using Pairing = std::vector<std::pair<int, int>>;
  std::vector<std::vector<std::vector<Pairing>>> pairings(kMax + 1, std::vector<std::vector<Pairing>>(kMax + 1));
  for (int m = 0; m <= kMax; ++m) {
    for (int n = 0; n <= kMax; ++n) {
      Pairing cur;
      const auto rec = [&](auto&& self, int i, int j) -> void {
        pairings[m][n].push_back(cur);
        for (int a = i; a < m; ++a)
          for (int b = j; b < n; ++b) {
            cur.emplace_back(a, b);
            self(self, a + 1, b + 1);
            cur.pop_back();
          }
      };
      rec(rec, 0, 0);
    }
  }

  std::vector<std::vector<int>> strings;
  for (int len = 0; len <= kMax; ++len) {
    int count = 1;
    for (int k = 0; k < len; ++k) count *= 3;
    for (int code = 0; code < count; ++code) {
      std::vector<int> s(len);
      for (int k = 0, c = code; k < len; ++k, c /= 3) s[k] = c % 3;
      strings.push_back(s);
    }
  }
  const std::array<std::string, 3> alphabet{"a", "b", "c"};
  const std::array<align::EditWeights, 2> weights{align::EditWeights{10, 7, 7}, align::EditWeights{1, 1, 1}};

  std::size_t pairs = 0, mismatches = 0;
  for (const auto& hyp : strings) {
    std::vector<std::string> h;
    for (int v : hyp) h.push_back(alphabet[v]);
    for (const auto& ref : strings) {
      std::vector<std::string> r;
      for (int v : ref) r.push_back(alphabet[v]);
      std::array<int, kMax + 1> fewest;
      fewest.fill(1 << 20);
      for (const auto& p : pairings[hyp.size()][ref.size()]) {
        int mis = 0;
        for (const auto& [a, b] : p) mis += hyp[a] != ref[b];
        fewest[p.size()] = std::min(fewest[p.size()], mis);
      }
      for (const auto& w : weights) {
        long long best = 1LL << 40;
        for (std::size_t k = 0; k <= std::min(hyp.size(), ref.size()); ++k)
          best = std::min(best, static_cast<long long>(w.sub) * fewest[k] +
                                    static_cast<long long>(w.del) * static_cast<long long>(ref.size() - k) +
                                    static_cast<long long>(w.ins) * static_cast<long long>(hyp.size() - k));
        const auto got = align::levenshtein_align(h, r, w);
        if (got.total_cost != best || align::script_cost(got.steps, w) != best) ++mismatches;
        ++pairs;
      }
    }
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs < 60.0,
          fmt("%zu/%zu (pair, weights) cases disagree with enumeration; %.1f s", mismatches, pairs, secs)};
}

// ---------------------------------------------------------------------------
// Shared synthetic data for the model criteria.

Corpus aligned(simgen::SimConfig config) {
  Corpus out;
  for (auto& u : simgen::generate(config)) out.push_back(align::with_targets(std::move(u)));
  return out;
}

// Text for the language model, drawn independently of the data it scores.
Corpus lm_text() {
  auto c = simgen::preset("matched");
  c.n_utts = 5000;
  c.seed = 99;
  c.id_prefix = "lm";
  return simgen::generate(c);
}

struct ModelData {
  Corpus train, test;
  double seconds_conf = 0.0, seconds_joint = 0.0;
  Corpus pred_conf, pred_joint;
  std::size_t test_words = 0, total_words = 0;
};

ModelData& model_data() {
  static ModelData d = [] {
    ModelData m;
    auto c = simgen::preset("matched");
    c.n_utts = 1750;
    c.seed = 11;
    const auto all = aligned(c);
    for (std::size_t i = 0; i < all.size(); ++i) {
      (i % 2 == 0 ? m.train : m.test).push_back(all[i]);
      m.total_words += all[i].reference->size();
    }
    for (const auto& u : m.test) m.test_words += u.size();
    const auto text = lm_text();

    pipeline::TrainOptions opt;
    opt.train.hidden_dim = 64;
    opt.train.epochs = 10;
    auto start = Clock::now();
    const auto conf = pipeline::train_confidence_model(m.train, opt, text);
    m.seconds_conf = seconds_since(start);
    m.pred_conf = pipeline::with_predictions(conf.model, m.test);

    opt.predict_deletions = true;
    start = Clock::now();
    const auto joint = pipeline::train_confidence_model(m.train, opt, text);
    m.seconds_joint = seconds_since(start);
    m.pred_joint = pipeline::with_predictions(joint.model, m.test);
    return m;
  }();
  return d;
}

Outcome calibration_direction() {
  auto& d = model_data();
  const auto raw = pipeline::raw_confidence_set(d.test);
  const auto map = calibrate::fit_monotone_map(pipeline::raw_confidence_set(d.train));
  const metrics::ScoredSet cal{calibrate::apply_map(map, raw.scores), raw.labels};
  const auto birnn = pipeline::predicted_confidence_set(d.pred_conf);

  const double nce_raw = metrics::nce(raw), nce_cal = metrics::nce(cal), nce_rnn = metrics::nce(birnn);
  const double auc_raw = metrics::roc_auc(raw), auc_cal = metrics::roc_auc(cal), auc_rnn = metrics::roc_auc(birnn);
  const bool pass = nce_raw < 0.0 && nce_cal > 0.15 && nce_rnn > nce_cal && std::abs(auc_cal - auc_raw) <= 1e-6 &&
                    auc_rnn >= auc_cal && d.seconds_conf < 600.0;
  return {pass, fmt("%zu ref words, %zu held-out hyp words: NCE raw %.4f, calibrated %.4f, BiRNN %.4f; "
                    "AUC raw %.6f, calibrated %.6f, BiRNN %.4f; training %.1f s",
                    d.total_words, d.test_words, nce_raw, nce_cal, nce_rnn, auc_raw, auc_cal, auc_rnn, d.seconds_conf)};
}

Outcome joint_model_direction() {
  auto& d = model_data();
  const double auc_conf = metrics::roc_auc(pipeline::predicted_confidence_set(d.pred_conf));
  const double auc_joint = metrics::roc_auc(pipeline::predicted_confidence_set(d.pred_joint));
  const double auc_del = metrics::roc_auc(pipeline::predicted_deletion_set(d.pred_joint));
  const double auc_start = metrics::roc_auc(pipeline::predicted_start_set(d.pred_joint));
  const bool pass = std::abs(auc_joint - auc_conf) <= 0.02 && auc_del > 0.5;
  return {pass, fmt("confidence AUC %.4f (joint) vs %.4f (confidence only), |diff| %.4f; next-word deletion AUC "
                    "%.4f; start deletion AUC %.4f; joint training %.1f s",
                    auc_joint, auc_conf, std::abs(auc_joint - auc_conf), auc_del, auc_start, d.seconds_joint)};
}

// ---------------------------------------------------------------------------

// Reference of random length; each word after a kept word is deleted with
// probability 1/4, kept words are substituted with probability 1/4, nothing
// is inserted, and no gap of the alignment holds two deletions. Predictions
// are the 0/1 indicators of the alignment.
corpus::LabeledUtterance constructed(Rng& rng, const std::string& id) {
  std::vector<std::string> ref, hyp;
  const std::size_t n = 1 + rng.below(12);
  bool prev_deleted = true;
  for (std::size_t k = 0; k < n; ++k) {
    ref.push_back("w" + std::to_string(k));
    if (!prev_deleted && rng.bernoulli(0.25)) {
      prev_deleted = true;
      continue;
    }
    prev_deleted = false;
    hyp.push_back(rng.bernoulli(0.25) ? "x" + std::to_string(k) : ref.back());
  }
  const auto alignment = align::levenshtein_align(hyp, ref);
  // The aligner may move a deletion next to another one; draw again.
  for (std::size_t k = 1; k < alignment.steps.size(); ++k)
    if (alignment.steps[k].op == align::EditOp::Del && alignment.steps[k - 1].op == align::EditOp::Del)
      return constructed(rng, id);
  corpus::LabeledUtterance u;
  u.utterance.id = id;
  for (std::size_t k = 0; k < hyp.size(); ++k)
    u.utterance.words.push_back(corpus::make_word(hyp[k], 0.3 * static_cast<double>(k), 0.3, 0.5));
  u.reference = ref;
  u = align::with_targets(u);
  corpus::Predictions p;
  for (auto v : u.targets->c) p.c.push_back(v);
  for (auto v : u.targets->d) p.d.push_back(v);
  p.s = u.targets->s;
  u.predictions = p;
  return u;
}

Outcome threshold_estimate_exactness() {
  Rng rng(606);
  Corpus dev;
  for (int i = 0; i < 500; ++i) dev.push_back(constructed(rng, "c" + std::to_string(i)));
  const selection::Thresholds th{0.5, 0.5, 0.5, 1.0};
  std::size_t exact = 0, with_deletions = 0, identity = 0;
  double worst = 0.0;
  for (const auto& u : dev) {
    const auto k = selection::true_error_counts(u);
    const double est = selection::estimate_wer(*u.predictions, th);
    const double wer = k.wer();
    exact += est == wer;
    with_deletions += k.del > 0;
    worst = std::max(worst, std::abs(est - wer));
    // What the estimate does equal: (S + D) / (N - D).
    identity += est == static_cast<double>(k.sub + k.del) / static_cast<double>(k.ref_words() - k.del);
  }
  selection::ThresholdGrid grid{{0.25, 0.5, 0.75}, {0.25, 0.5, 0.75}, {0.25, 0.5, 0.75}, {0.25, 0.5, 0.75, 1.0}};
  const auto fit = selection::fit_thresholds(dev, grid);
  const double mse_at_point = selection::fit_thresholds(dev, {{0.5}, {0.5}, {0.5}, {1.0}}).mse;
  const bool pass = exact == dev.size() && fit.mse == 0.0 && mse_at_point == 0.0;
  return {pass, fmt("estimate equals true WER on %zu/%zu utterances (%zu contain deletions, max |diff| %.4f); "
                    "estimate equals (S+D)/(N-D) on %zu/%zu; MSE %.3g at (0.5, 0.5, 0.5, 1), grid minimum %.3g at "
                    "(%.2f, %.2f, %.2f, %.2f)",
                    exact, dev.size(), with_deletions, worst, identity, dev.size(), mse_at_point, fit.mse,
                    fit.thresholds.theta_c,
                    fit.thresholds.theta_d, fit.thresholds.theta_s, fit.thresholds.theta_p)};
}

// ---------------------------------------------------------------------------

struct SelectionData {
  Corpus test;
  selection::DiscountParams discount;
  selection::Thresholds thresholds;
};

SelectionData& selection_data() {
  static SelectionData s = [] {
    SelectionData out;
    auto a = simgen::preset("matched");
    a.n_utts = 1200;
    a.seed = 21;
    a.id_prefix = "m";
    auto b = simgen::preset("mismatched");
    b.n_utts = 1200;
    b.seed = 22;
    b.id_prefix = "x";
    const auto A = aligned(a), B = aligned(b);
    Corpus train, dev, test;
    for (std::size_t i = 0; i < A.size(); ++i)
      for (const auto* src : {&A, &B}) (i % 4 < 2 ? train : i % 4 == 2 ? dev : test).push_back((*src)[i]);

    pipeline::TrainOptions opt;
    opt.predict_deletions = true;
    const auto model = pipeline::train_confidence_model(train, opt, lm_text()).model;
    const auto pdev = pipeline::with_predictions(model, dev);
    out.test = pipeline::with_predictions(model, test);
    out.discount = selection::fit_discount(pdev, selection::DiscountGrid::standard()).params;
    out.thresholds = selection::fit_thresholds(pdev, selection::ThresholdGrid::standard()).thresholds;
    return out;
  }();
  return s;
}

Outcome deletion_aware_selection() {
  auto& s = selection_data();
  const auto prefix = [&](const selection::SchemeSpec& spec) {
    return selection::rank_and_curve(s.test, spec).prefix_errors(0.25);
  };
  const auto conf = prefix(selection::SchemeSpec::confidence());
  const auto disc = prefix(selection::SchemeSpec::with_discount(s.discount));
  const auto thr = prefix(selection::SchemeSpec::with_thresholds(s.thresholds));
  const bool pass = disc.del < conf.del && thr.del < conf.del && disc.wer() <= conf.wer() + 0.02 &&
                    thr.wer() <= conf.wer() + 0.02;
  return {pass, fmt("25%% prefix deletions / WER: confidence %lld / %.4f, discount (%.1f, %.1f) %lld / %.4f, "
                    "threshold (%.3f, %.3f, %.3f, %.2f) %lld / %.4f",
                    conf.del, conf.wer(), s.discount.theta_d, s.discount.theta_s, disc.del, disc.wer(),
                    s.thresholds.theta_c, s.thresholds.theta_d, s.thresholds.theta_s, s.thresholds.theta_p, thr.del,
                    thr.wer())};
}

Outcome degeneracy_identities() {
  auto& s = selection_data();
  const auto conf = selection::rank_and_curve(s.test, selection::SchemeSpec::confidence());
  const auto zero = selection::rank_and_curve(s.test, selection::SchemeSpec::with_discount({0.0, 0.0}));
  const bool same = conf.ids == zero.ids && conf.curve_csv() == zero.curve_csv();

  // Per-utterance WER as the ranking key (best first); the pooled WER of the
  // prefix can then only grow.
  Corpus ranked = s.test;
  std::vector<std::pair<double, std::size_t>> keys;
  for (std::size_t i = 0; i < ranked.size(); ++i) keys.emplace_back(selection::true_error_counts(ranked[i]).wer(), i);
  std::stable_sort(keys.begin(), keys.end());
  Corpus ordered;
  for (const auto& [w, i] : keys) ordered.push_back(ranked[i]);
  for (std::size_t i = 0; i < ordered.size(); ++i)
    ordered[i].predictions = corpus::Predictions{std::vector<double>(ordered[i].size(), 1.0), {}, std::nullopt};
  const auto oracle = selection::rank_and_curve(ordered, selection::SchemeSpec::confidence());
  std::size_t drops = 0;
  for (std::size_t k = 1; k < oracle.curve.size(); ++k) drops += *oracle.curve[k].true_tot < *oracle.curve[k - 1].true_tot;
  return {same && drops == 0,
          fmt("zero discount %s confidence-only ranking and curve; oracle WER curve has %zu decreasing steps over %zu rows",
              same ? "reproduces" : "differs from", drops, oracle.curve.size())};
}

// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> run_pipeline(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto p = [&](const char* name) { return (dir / name).string(); };
  const std::vector<std::vector<std::string>> steps{
      {"simulate", "--preset", "mismatched", "--n-utts", "120", "--seed", "5", "--out", p("raw.jsonl")},
      {"align", "--in", p("raw.jsonl"), "--out", p("aligned.jsonl"), "--summary", p("summary.csv")},
      {"train-calib", "--in", p("aligned.jsonl"), "--out", p("map.json")},
      {"predict", "--in", p("aligned.jsonl"), "--model", p("map.json"), "--out", p("calibrated.jsonl")},
      {"train-birnn", "--in", p("aligned.jsonl"), "--out", p("model.json"), "--history", p("history.csv"),
       "--deletions", "--hidden", "8", "--emb-dim", "8", "--epochs", "3", "--seed", "9"},
      {"predict", "--in", p("aligned.jsonl"), "--model", p("model.json"), "--out", p("predicted.jsonl")},
      {"evaluate", "--in", p("predicted.jsonl"), "--out", p("metrics.json"), "--roc-csv", p("roc.csv"), "--pr-csv",
       p("pr.csv")},
      {"fit-thresholds", "--in", p("predicted.jsonl"), "--step", "0.1", "--out", p("thresholds.json")},
      {"fit-discount", "--in", p("predicted.jsonl"), "--out", p("discount.json")},
      {"select", "--in", p("predicted.jsonl"), "--scheme", "threshold", "--params", p("thresholds.json"), "--out",
       p("rank_threshold.csv"), "--curve", p("curve_threshold.csv")},
      {"select", "--in", p("predicted.jsonl"), "--scheme", "discount", "--params", p("discount.json"), "--out",
       p("rank_discount.csv"), "--curve", p("curve_discount.csv")},
      {"grad-check", "--seed", "3", "--out", p("gradcheck.json")},
  };
  for (const auto& args : steps) {
    std::ostringstream out, err;
    if (cli::run(args, out, err) != cli::kOk) throw Error(args.front() + " failed: " + err.str());
  }
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& entry : fs::directory_iterator(dir))
    files.emplace_back(entry.path().filename().string(), io::read_text_file(entry.path()));
  std::sort(files.begin(), files.end());
  return files;
}

Outcome determinism() {
  const auto base = fs::temp_directory_path() / "delconf_acceptance";
  const auto a = run_pipeline(base / "run1");
  const auto b = run_pipeline(base / "run2");
  fs::remove_all(base);
  std::size_t differing = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    differing += a[i].first != b[i].first || a[i].second != b[i].second;
  const bool pass = a.size() == b.size() && a.size() == 18 && differing == 0;
  return {pass, fmt("%zu artefacts from 12 CLI stages, %zu differ between runs", a.size(), differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"metric oracles", metric_oracles},
      {"alignment oracle", alignment_oracle},
      {"calibration and BiRNN direction", calibration_direction},
      {"joint model direction", joint_model_direction},
      {"threshold WER estimate exactness", threshold_estimate_exactness},
      {"deletion-aware selection direction", deletion_aware_selection},
      {"degeneracy identities", degeneracy_identities},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %zu. %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
