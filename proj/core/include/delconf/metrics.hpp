#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace delconf::metrics {

// Scores paired with binary reference labels (1 = positive class).
struct ScoredSet {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;

  void validate() const;
  std::size_t positives() const;
  std::size_t negatives() const;
};

// Probabilities are clamped to [kProbEpsilon, 1 - kProbEpsilon] before logs.
inline constexpr double kProbEpsilon = 1e-12;

// Normalised cross-entropy: relative reduction in binary cross-entropy of the
// scores against the labels compared with the constant predictor at the
// empirical positive rate. At most 1; negative when the scores are worse than
// the constant predictor. Throws DegenerateError when all labels agree.
double nce(const ScoredSet& set);

// A point on a ROC (x = FPR, y = TPR) or PR (x = recall, y = precision) curve
// for the decision rule score >= threshold.
struct CurvePoint {
  double threshold;
  double x;
  double y;
};

// One point per distinct score, in decreasing threshold order, preceded by the
// +inf sentinel at (0, 0). Throws DegenerateError without both classes.
std::vector<CurvePoint> roc_points(const ScoredSet& set);

// Mann-Whitney statistic with half credit for ties; equals the trapezoidal
// area under roc_points.
double roc_auc(const ScoredSet& set);

// One point per distinct score in decreasing threshold order. Throws
// DegenerateError without positives.
std::vector<CurvePoint> pr_points(const ScoredSet& set);

// Step-wise average precision: sum_k (R_k - R_{k-1}) * P_k over pr_points.
double pr_auc(const ScoredSet& set);

// Trapezoidal area under a polyline given by the points' (x, y) pairs.
double trapezoid_area(const std::vector<CurvePoint>& points);

// CSV with header "threshold,x,y".
std::string curve_csv(const std::vector<CurvePoint>& points);

}  // namespace delconf::metrics
