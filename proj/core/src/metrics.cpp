#include "delconf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "delconf/corpus.hpp"
#include "delconf/error.hpp"

namespace delconf::metrics {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon); }

// Confusion counts at each distinct score, scanning from the highest score.
struct Sweep {
  double threshold;
  std::size_t tp;
  std::size_t fp;
};

std::vector<Sweep> sweep(const ScoredSet& set) {
  std::vector<std::size_t> order(set.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return set.scores[a] > set.scores[b]; });
  std::vector<Sweep> out;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = set.scores[order[k]];
    while (k < order.size() && set.scores[order[k]] == s) {
      if (set.labels[order[k]]) ++tp; else ++fp;
      ++k;
    }
    out.push_back({s, tp, fp});
  }
  return out;
}

}  // namespace

void ScoredSet::validate() const {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  for (double s : scores)
    if (!std::isfinite(s)) throw ValidationError("scores must be finite");
  for (auto l : labels)
    if (l > 1) throw ValidationError("labels must be 0 or 1");
}

std::size_t ScoredSet::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

std::size_t ScoredSet::negatives() const { return labels.size() - positives(); }

double nce(const ScoredSet& set) {
  set.validate();
  const std::size_t n = set.labels.size();
  const std::size_t pos = set.positives();
  if (pos == 0 || pos == n) throw DegenerateError("NCE undefined: labels contain a single class");
  const double p_correct = static_cast<double>(pos) / static_cast<double>(n);
  const double base = -(p_correct * std::log(p_correct) + (1.0 - p_correct) * std::log1p(-p_correct));
  double cross = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double c = clamp_prob(set.scores[t]);
    cross -= set.labels[t] ? std::log(c) : std::log1p(-c);
  }
  cross /= static_cast<double>(n);
  return (base - cross) / base;
}

std::vector<CurvePoint> roc_points(const ScoredSet& set) {
  set.validate();
  const auto pos = static_cast<double>(set.positives());
  const auto neg = static_cast<double>(set.negatives());
  if (pos == 0 || neg == 0) throw DegenerateError("ROC undefined: need both positive and negative labels");
  std::vector<CurvePoint> out{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  for (const auto& s : sweep(set))
    out.push_back({s.threshold, static_cast<double>(s.fp) / neg, static_cast<double>(s.tp) / pos});
  return out;
}

double roc_auc(const ScoredSet& set) {
  set.validate();
  const std::size_t pos = set.positives();
  const std::size_t neg = set.negatives();
  if (pos == 0 || neg == 0) throw DegenerateError("ROC AUC undefined: need both positive and negative labels");
  // Walking the distinct scores downwards, every positive at a score beats all
  // negatives seen below it and ties with the negatives at that score.
  // Twice the statistic is kept as an integer so ties stay exact.
  const auto groups = sweep(set);
  unsigned long long twice = 0;
  std::size_t prev_tp = 0;
  std::size_t prev_fp = 0;
  for (const auto& g : groups) {
    const std::size_t p_here = g.tp - prev_tp;
    const std::size_t n_here = g.fp - prev_fp;
    const std::size_t n_below = neg - g.fp;
    twice += 2ULL * p_here * n_below + 1ULL * p_here * n_here;
    prev_tp = g.tp;
    prev_fp = g.fp;
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

std::vector<CurvePoint> pr_points(const ScoredSet& set) {
  set.validate();
  const auto pos = static_cast<double>(set.positives());
  if (pos == 0) throw DegenerateError("PR curve undefined: no positive labels");
  std::vector<CurvePoint> out;
  for (const auto& s : sweep(set)) {
    const double recall = static_cast<double>(s.tp) / pos;
    const double precision = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
    out.push_back({s.threshold, recall, precision});
  }
  return out;
}

double pr_auc(const ScoredSet& set) {
  double area = 0.0;
  double prev_recall = 0.0;
  for (const auto& p : pr_points(set)) {
    area += (p.x - prev_recall) * p.y;
    prev_recall = p.x;
  }
  return area;
}

double trapezoid_area(const std::vector<CurvePoint>& points) {
  double area = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k)
    area += (points[k].x - points[k - 1].x) * 0.5 * (points[k].y + points[k - 1].y);
  return area;
}

std::string curve_csv(const std::vector<CurvePoint>& points) {
  std::string out = "threshold,x,y\n";
  for (const auto& p : points) {
    out += std::isinf(p.threshold) ? std::string(p.threshold > 0 ? "inf" : "-inf")
                                   : corpus::format_number(p.threshold);
    out += ',' + corpus::format_number(p.x) + ',' + corpus::format_number(p.y) + '\n';
  }
  return out;
}

}  // namespace delconf::metrics
