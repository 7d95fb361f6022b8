#include "delconf/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "delconf/error.hpp"

namespace delconf::selection {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

void require_deletions(const corpus::Predictions& pred) {
  if (!pred.has_deletions() || pred.d.size() != pred.c.size())
    throw ValidationError("scheme needs deletion predictions (d and s)");
}

const corpus::Predictions& predictions_of(const corpus::LabeledUtterance& utt) {
  if (!utt.predictions) throw ValidationError("utterance '" + utt.id() + "' has no predictions");
  if (utt.predictions->c.size() != utt.size())
    throw ValidationError("utterance '" + utt.id() + "': prediction count does not match the word count");
  return *utt.predictions;
}

std::vector<int> frames_of(const corpus::Utterance& utt) {
  std::vector<int> out;
  out.reserve(utt.words.size());
  for (const auto& w : utt.words) out.push_back(w.frames);
  return out;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

double ratio(double num, double den) { return den > 0.0 ? num / den : kInf; }

// Stable ordering by score; ties keep corpus order.
std::vector<std::size_t> rank(const std::vector<double>& scores, bool descending) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  return order;
}

std::size_t prefix_length_of(const std::vector<double>& durations_in_order, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ValidationError("selection fraction must lie in [0, 1]");
  const double total = std::accumulate(durations_in_order.begin(), durations_in_order.end(), 0.0);
  const double goal = fraction * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < durations_in_order.size(); ++k) {
    acc += durations_in_order[k];
    if (acc >= goal) return k + 1;
  }
  return durations_in_order.size();
}

// Confidence-type utterance score for the discount scheme (theta = 0 gives
// the confidence-only score).
double discount_utterance_score(const corpus::LabeledUtterance& utt, const DiscountParams& p) {
  const auto& pred = predictions_of(utt);
  return frame_weighted_conf(discount_scores(pred, p), frames_of(utt.utterance));
}

struct DevTables {
  std::vector<double> durations;
  std::vector<align::ErrorCounts> counts;
};

DevTables dev_tables(std::span<const corpus::LabeledUtterance> dev) {
  DevTables t;
  for (const auto& utt : dev) {
    t.durations.push_back(utt.utterance.total_duration());
    t.counts.push_back(true_error_counts(utt));
  }
  return t;
}

align::ErrorCounts prefix_counts(const DevTables& t, const std::vector<std::size_t>& order, double fraction) {
  std::vector<double> d;
  d.reserve(order.size());
  for (const auto i : order) d.push_back(t.durations[i]);
  const std::size_t n = prefix_length_of(d, fraction);
  align::ErrorCounts sum;
  for (std::size_t k = 0; k < n; ++k) sum += t.counts[order[k]];
  return sum;
}

double json_number(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
  if (!j.at(key).is_number()) throw ParseError(std::string("key '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

void Thresholds::validate() const {
  if (!in_unit(theta_c) || !in_unit(theta_d) || !in_unit(theta_s))
    throw ValidationError("theta_c, theta_d and theta_s must lie in [0, 1]");
  if (!(theta_p >= 0.0) || !std::isfinite(theta_p)) throw ValidationError("theta_p must be finite and non-negative");
}

void DiscountParams::validate() const {
  if (!(theta_d >= 0.0) || !(theta_s >= 0.0) || !std::isfinite(theta_d) || !std::isfinite(theta_s))
    throw ValidationError("discount coefficients must be finite and non-negative");
}

double frame_weighted_conf(std::span<const double> c, std::span<const int> frames) {
  if (c.empty()) throw ValidationError("frame-weighted confidence of an empty utterance");
  if (c.size() != frames.size()) throw ValidationError("confidence and frame sequences differ in length");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < c.size(); ++t) {
    if (frames[t] < 1) throw ValidationError("frame counts must be at least 1");
    num += frames[t] * c[t];
    den += frames[t];
  }
  return num / den;
}

std::vector<double> discount_scores(const corpus::Predictions& pred, const DiscountParams& params) {
  require_deletions(pred);
  std::vector<double> out(pred.c.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = pred.c[t] - params.theta_d * pred.d[t];
  if (!out.empty()) out[0] -= params.theta_s * *pred.s;
  return out;
}

IndicatorCounts indicator_counts(const corpus::Predictions& pred, const Thresholds& th) {
  if (pred.c.empty()) throw ValidationError("cannot estimate WER from empty predictions");
  require_deletions(pred);
  IndicatorCounts k;
  for (std::size_t t = 0; t < pred.c.size(); ++t) {
    if (pred.c[t] >= th.theta_c)
      ++k.cor;
    else
      ++k.inc;
    if (pred.d[t] >= th.theta_d) ++k.del;
  }
  if (*pred.s >= th.theta_s) ++k.del;
  return k;
}

double estimate_wer(const corpus::Predictions& pred, const Thresholds& th, bool omit_inc) {
  const auto k = indicator_counts(pred, th);
  const double num = static_cast<double>(k.del + (omit_inc ? 0 : k.inc));
  return ratio(num, th.theta_p * static_cast<double>(k.inc) + static_cast<double>(k.cor));
}

align::ErrorCounts true_error_counts(const corpus::LabeledUtterance& utt) {
  if (!utt.reference) throw ValidationError("utterance '" + utt.id() + "' has no reference");
  const auto hyp = utt.utterance.tokens();
  return align::error_counts(align::levenshtein_align(hyp, *utt.reference));
}

// ---------------------------------------------------------------------------
// Threshold fitting

ThresholdGrid ThresholdGrid::standard() {
  ThresholdGrid g;
  for (int k = 0; k <= 40; ++k) g.theta_c.push_back(k / 40.0);
  g.theta_d = g.theta_c;
  g.theta_s = g.theta_c;
  g.theta_p = {0.25, 0.5, 0.75, 1.0};
  return g;
}

void ThresholdGrid::validate() const {
  if (theta_c.empty() || theta_d.empty() || theta_s.empty() || theta_p.empty())
    throw ValidationError("threshold grid has an empty axis");
  for (const double c : theta_c)
    for (const double d : theta_d)
      for (const double s : theta_s)
        for (const double p : theta_p) Thresholds{c, d, s, p}.validate();
}

ThresholdFit fit_thresholds(std::span<const corpus::LabeledUtterance> dev, const ThresholdGrid& grid, bool omit_inc) {
  if (dev.empty()) throw ValidationError("threshold fitting needs a non-empty dev set");
  grid.validate();
  const auto gc = sorted_unique(grid.theta_c);
  const auto gd = sorted_unique(grid.theta_d);
  const auto gs = sorted_unique(grid.theta_s);
  const auto gp = sorted_unique(grid.theta_p);
  const std::size_t n_utt = dev.size();

  std::vector<double> truth(n_utt);
  std::vector<double> words(n_utt);
  // inc[ic * n_utt + u], dd[id * n_utt + u], ds[is * n_utt + u]
  std::vector<double> inc(gc.size() * n_utt), dd(gd.size() * n_utt), ds(gs.size() * n_utt);
  for (std::size_t u = 0; u < n_utt; ++u) {
    const auto& pred = predictions_of(dev[u]);
    require_deletions(pred);
    truth[u] = true_error_counts(dev[u]).wer();
    words[u] = static_cast<double>(pred.c.size());
    for (std::size_t i = 0; i < gc.size(); ++i)
      inc[i * n_utt + u] = static_cast<double>(
          std::count_if(pred.c.begin(), pred.c.end(), [&](double c) { return c < gc[i]; }));
    for (std::size_t i = 0; i < gd.size(); ++i)
      dd[i * n_utt + u] = static_cast<double>(
          std::count_if(pred.d.begin(), pred.d.end(), [&](double d) { return d >= gd[i]; }));
    for (std::size_t i = 0; i < gs.size(); ++i) ds[i * n_utt + u] = *pred.s >= gs[i] ? 1.0 : 0.0;
  }

  ThresholdFit best;
  bool have = false;
  for (std::size_t ic = 0; ic < gc.size(); ++ic) {
    const double* in = &inc[ic * n_utt];
    for (std::size_t id = 0; id < gd.size(); ++id) {
      const double* de = &dd[id * n_utt];
      for (std::size_t is = 0; is < gs.size(); ++is) {
        const double* st = &ds[is * n_utt];
        for (const double p : gp) {
          double sse = 0.0;
          for (std::size_t u = 0; u < n_utt; ++u) {
            const double num = de[u] + st[u] + (omit_inc ? 0.0 : in[u]);
            const double est = ratio(num, p * in[u] + (words[u] - in[u]));
            const double diff = truth[u] - est;
            sse += diff * diff;
          }
          const double mse = sse / static_cast<double>(n_utt);
          if (!have || mse < best.mse) {
            best = {Thresholds{gc[ic], gd[id], gs[is], p}, mse};
            have = true;
          }
        }
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Discount fitting

DiscountGrid DiscountGrid::standard() {
  DiscountGrid g;
  g.theta_d = {0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 7.5, 10.0};
  g.theta_s = g.theta_d;
  return g;
}

void DiscountGrid::validate() const {
  if (theta_d.empty() || (!tied && theta_s.empty())) throw ValidationError("discount grid has an empty axis");
  for (const double d : theta_d) DiscountParams{d, 0.0}.validate();
  for (const double s : theta_s) DiscountParams{0.0, s}.validate();
}

DiscountFit fit_discount(std::span<const corpus::LabeledUtterance> dev, const DiscountGrid& grid, double fraction,
                         double wer_slack) {
  if (dev.empty()) throw ValidationError("discount fitting needs a non-empty dev set");
  grid.validate();
  if (!(wer_slack >= 0.0)) throw ValidationError("wer_slack must be non-negative");
  const auto tables = dev_tables(dev);

  const auto evaluate = [&](const DiscountParams& p) {
    std::vector<double> scores;
    scores.reserve(dev.size());
    for (const auto& utt : dev) scores.push_back(discount_utterance_score(utt, p));
    return prefix_counts(tables, rank(scores, true), fraction);
  };

  const auto baseline = evaluate(DiscountParams{});
  DiscountFit best;
  best.baseline_deletions = baseline.del;
  best.baseline_wer = baseline.wer();
  bool have = false;

  std::vector<DiscountParams> points;
  const auto gd = sorted_unique(grid.theta_d);
  for (const double d : gd) {
    if (grid.tied) {
      points.push_back({d, d});
      continue;
    }
    for (const double s : sorted_unique(grid.theta_s)) points.push_back({d, s});
  }
  for (const auto& p : points) {
    const auto counts = evaluate(p);
    const double wer = counts.wer();
    if (wer > best.baseline_wer + wer_slack) continue;
    if (!have || counts.del < best.deletions) {
      best.params = p;
      best.deletions = counts.del;
      best.subset_wer = wer;
      have = true;
    }
  }
  if (!have) throw DegenerateError("no discount grid point keeps the subset WER within the slack");
  return best;
}

// ---------------------------------------------------------------------------
// Ranking

std::size_t SelectionResult::prefix_length(double fraction) const { return prefix_length_of(durations, fraction); }

align::ErrorCounts SelectionResult::prefix_errors(double fraction) const {
  if (!has_references()) throw ValidationError("selection has no reference error counts");
  align::ErrorCounts sum;
  const std::size_t n = prefix_length(fraction);
  for (std::size_t k = 0; k < n; ++k) sum += true_counts[k];
  return sum;
}

std::string SelectionResult::curve_csv() const {
  const auto num = [](double v) { return std::isinf(v) ? std::string(v > 0 ? "inf" : "-inf") : corpus::format_number(v); };
  const auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  std::string out = "data_pct,est_wer,true_sub,true_del,true_ins,true_tot\n";
  for (const auto& r : curve) {
    out += num(r.data_pct) + ',' + num(r.est_wer) + ',' + opt(r.true_sub) + ',' + opt(r.true_del) + ',' +
           opt(r.true_ins) + ',' + opt(r.true_tot) + '\n';
  }
  return out;
}

SelectionResult rank_and_curve(std::span<const corpus::LabeledUtterance> corpus, const SchemeSpec& spec) {
  if (corpus.empty()) throw ValidationError("cannot rank an empty corpus");
  if (spec.scheme == Scheme::Discount && !spec.discount) throw ValidationError("discount scheme needs parameters");
  if (spec.scheme == Scheme::Threshold && !spec.thresholds) throw ValidationError("threshold scheme needs thresholds");
  if (spec.discount) spec.discount->validate();
  if (spec.thresholds) spec.thresholds->validate();

  const std::size_t n = corpus.size();
  // Per-utterance pieces of the prefix estimate: numerator and denominator.
  std::vector<double> scores(n), num(n), den(n);
  for (std::size_t u = 0; u < n; ++u) {
    const auto& utt = corpus[u];
    const auto& pred = predictions_of(utt);
    if (spec.scheme == Scheme::Threshold) {
      const auto k = indicator_counts(pred, *spec.thresholds);
      num[u] = static_cast<double>(k.del + (spec.omit_inc ? 0 : k.inc));
      den[u] = spec.thresholds->theta_p * static_cast<double>(k.inc) + static_cast<double>(k.cor);
      scores[u] = ratio(num[u], den[u]);
    } else {
      const auto frames = frames_of(utt.utterance);
      const auto c = spec.scheme == Scheme::Discount ? discount_scores(pred, *spec.discount) : pred.c;
      scores[u] = frame_weighted_conf(c, frames);
      den[u] = std::accumulate(frames.begin(), frames.end(), 0.0);
      num[u] = scores[u] * den[u];
    }
  }

  const bool refs = std::all_of(corpus.begin(), corpus.end(), [](const auto& u) { return u.reference.has_value(); });
  SelectionResult res;
  res.order = rank(scores, spec.scheme != Scheme::Threshold);
  double total = 0.0;
  for (const auto& utt : corpus) total += utt.utterance.total_duration();

  double acc_dur = 0.0, acc_num = 0.0, acc_den = 0.0;
  align::ErrorCounts acc;
  for (const std::size_t u : res.order) {
    const auto& utt = corpus[u];
    res.ids.push_back(utt.id());
    res.scores.push_back(scores[u]);
    res.durations.push_back(utt.utterance.total_duration());
    acc_dur += res.durations.back();
    acc_num += num[u];
    acc_den += den[u];

    CurveRow row;
    row.data_pct = 100.0 * acc_dur / total;
    row.est_wer = spec.scheme == Scheme::Threshold ? ratio(acc_num, acc_den) : 1.0 - acc_num / acc_den;
    if (refs) {
      res.true_counts.push_back(true_error_counts(utt));
      acc += res.true_counts.back();
      if (acc.ref_words() > 0) {
        const double r = static_cast<double>(acc.ref_words());
        row.true_sub = static_cast<double>(acc.sub) / r;
        row.true_del = static_cast<double>(acc.del) / r;
        row.true_ins = static_cast<double>(acc.ins) / r;
        row.true_tot = static_cast<double>(acc.errors()) / r;
      }
    }
    res.curve.push_back(row);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Parameter files

std::string thresholds_to_json(const Thresholds& th) {
  return json{{"theta_c", th.theta_c}, {"theta_d", th.theta_d}, {"theta_s", th.theta_s}, {"theta_p", th.theta_p}}
      .dump();
}

Thresholds thresholds_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("thresholds: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("thresholds: expected a JSON object");
  Thresholds th{json_number(j, "theta_c"), json_number(j, "theta_d"), json_number(j, "theta_s"),
                json_number(j, "theta_p")};
  th.validate();
  return th;
}

std::string discount_to_json(const DiscountParams& params) {
  return json{{"theta_d", params.theta_d}, {"theta_s", params.theta_s}}.dump();
}

DiscountParams discount_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("discount parameters: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("discount parameters: expected a JSON object");
  DiscountParams p{json_number(j, "theta_d"), json_number(j, "theta_s")};
  p.validate();
  return p;
}

}  // namespace delconf::selection
