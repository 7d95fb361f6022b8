#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "delconf/align.hpp"
#include "delconf/corpus.hpp"

namespace delconf::selection {

struct Thresholds {
  double theta_c = 0.5;
  double theta_d = 0.5;
  double theta_s = 0.5;
  double theta_p = 1.0;

  void validate() const;
  bool operator==(const Thresholds&) const = default;
};

struct DiscountParams {
  double theta_d = 0.0;
  double theta_s = 0.0;

  void validate() const;
  bool operator==(const DiscountParams&) const = default;
};

// sum_t frames_t * c_t / sum_t frames_t. Throws ValidationError on empty or
// mismatched input and on frame counts below 1.
double frame_weighted_conf(std::span<const double> c, std::span<const int> frames);

// c_t - theta_d * d_t, with the first word also discounted by theta_s * s.
// Not clamped. Throws ValidationError when the predictions have no deletion
// outputs.
std::vector<double> discount_scores(const corpus::Predictions& pred, const DiscountParams& params);

// Thresholded counts: Cor = #{c_t >= theta_c}, Inc = #{c_t < theta_c},
// Del = [s >= theta_s] + #{d_t >= theta_d}.
struct IndicatorCounts {
  long long cor = 0;
  long long inc = 0;
  long long del = 0;
};

IndicatorCounts indicator_counts(const corpus::Predictions& pred, const Thresholds& th);

// (Inc + Del) / (theta_p * Inc + Cor), or Del / (theta_p * Inc + Cor) with
// `omit_inc`. Returns +inf when the denominator is 0. Throws ValidationError
// on empty predictions or missing deletion outputs.
double estimate_wer(const corpus::Predictions& pred, const Thresholds& th, bool omit_inc = false);

// Reference-based error counts of an utterance (default edit weights).
// Throws ValidationError without a reference.
align::ErrorCounts true_error_counts(const corpus::LabeledUtterance& utt);

struct ThresholdGrid {
  std::vector<double> theta_c;
  std::vector<double> theta_d;
  std::vector<double> theta_s;
  std::vector<double> theta_p;

  // 0, 0.025, ..., 1 for theta_c/d/s and {0.25, 0.5, 0.75, 1} for theta_p.
  static ThresholdGrid standard();
  void validate() const;
};

struct ThresholdFit {
  Thresholds thresholds;
  double mse = 0.0;
};

// Exhaustive search for the mean over utterances of
// (true_wer - estimate_wer)^2. Ties go to the lexicographically smallest
// (theta_c, theta_d, theta_s, theta_p). Every utterance needs a reference and
// joint predictions.
ThresholdFit fit_thresholds(std::span<const corpus::LabeledUtterance> dev, const ThresholdGrid& grid,
                            bool omit_inc = false);

struct DiscountGrid {
  std::vector<double> theta_d;
  std::vector<double> theta_s;
  // Only points with theta_d == theta_s (theta_s list ignored).
  bool tied = false;

  // {0, 0.5, 1, 2, 3, 5, 7.5, 10} on both axes.
  static DiscountGrid standard();
  void validate() const;
};

struct DiscountFit {
  DiscountParams params;
  long long deletions = 0;
  double subset_wer = 0.0;
  long long baseline_deletions = 0;
  double baseline_wer = 0.0;
};

// Minimises the number of true deletions in the top `fraction` (by duration)
// of the discount ranking, over grid points whose subset WER exceeds the
// confidence-only subset WER by at most `wer_slack`. Ties go to the
// lexicographically smallest (theta_d, theta_s). Throws DegenerateError when
// no grid point satisfies the guard.
DiscountFit fit_discount(std::span<const corpus::LabeledUtterance> dev, const DiscountGrid& grid,
                         double fraction = 0.25, double wer_slack = 0.02);

enum class Scheme { Confidence, Discount, Threshold };

struct SchemeSpec {
  Scheme scheme = Scheme::Confidence;
  std::optional<DiscountParams> discount;
  std::optional<Thresholds> thresholds;
  bool omit_inc = false;

  static SchemeSpec confidence() { return {}; }
  static SchemeSpec with_discount(const DiscountParams& p) { return {Scheme::Discount, p, std::nullopt, false}; }
  static SchemeSpec with_thresholds(const Thresholds& t, bool omit_inc = false) {
    return {Scheme::Threshold, std::nullopt, t, omit_inc};
  }
};

// One row per ranked prefix. Error rates are relative to the prefix's
// reference words; the true_* fields are set only when every utterance has a
// reference.
struct CurveRow {
  double data_pct = 0.0;
  double est_wer = 0.0;
  std::optional<double> true_sub;
  std::optional<double> true_del;
  std::optional<double> true_ins;
  std::optional<double> true_tot;
};

struct SelectionResult {
  std::vector<std::string> ids;     // best first
  std::vector<std::size_t> order;   // indices into the input corpus
  std::vector<double> scores;       // utterance score (confidence or WER estimate)
  std::vector<double> durations;
  std::vector<align::ErrorCounts> true_counts;  // empty without references
  std::vector<CurveRow> curve;

  bool has_references() const { return !true_counts.empty(); }
  // Length of the shortest prefix covering at least `fraction` of the total
  // duration.
  std::size_t prefix_length(double fraction) const;
  // Summed true counts of that prefix. Throws ValidationError without
  // references.
  align::ErrorCounts prefix_errors(double fraction) const;
  // "data_pct,est_wer,true_sub,true_del,true_ins,true_tot"
  std::string curve_csv() const;
};

// Ranks utterances best first (confidence and discount schemes: descending
// frame-weighted score; threshold scheme: ascending WER estimate; ties keep
// corpus order) and accumulates the selection curve. For the confidence-type
// schemes the estimated WER of a prefix is one minus its frame-weighted
// score; for the threshold scheme it is the pooled ratio of the summed
// numerators and denominators.
SelectionResult rank_and_curve(std::span<const corpus::LabeledUtterance> corpus, const SchemeSpec& spec);

std::string thresholds_to_json(const Thresholds& th);
Thresholds thresholds_from_json(std::string_view text);
std::string discount_to_json(const DiscountParams& params);
DiscountParams discount_from_json(std::string_view text);

}  // namespace delconf::selection
