#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "delconf/metrics.hpp"

namespace delconf::calibrate {

// Monotone piecewise-constant score map. Cell k covers [boundaries[k-1],
// boundaries[k]) with the first and last cells open towards -inf and +inf,
// so there is one more value than there are boundaries.
//
// apply_map blends the cell value with the raw score:
//   (1 - tie_break) * value + tie_break * score
// A positive tie_break makes the map strictly increasing, so it never merges
// two distinct scores and ranking metrics are unchanged by calibration. With
// tie_break = 0 the map is exactly piecewise constant.
struct PiecewiseMap {
  std::vector<double> boundaries;
  std::vector<double> values;
  double tie_break = 0.0;

  void validate() const;
  std::size_t cell_of(double score) const;
  bool operator==(const PiecewiseMap&) const = default;
};

inline constexpr std::size_t kDefaultBins = 50;
inline constexpr double kDefaultTieBreak = 1e-6;

// Equal-occupancy binning of the scores into at most n_bins cells (ties never
// split across cells), per-cell positive rate, then pool-adjacent-violators so
// cell values are strictly increasing. Throws ValidationError on an empty set
// or n_bins == 0.
PiecewiseMap fit_monotone_map(const metrics::ScoredSet& train, std::size_t n_bins = kDefaultBins,
                              double tie_break = kDefaultTieBreak);

double apply_map(const PiecewiseMap& map, double score);
std::vector<double> apply_map(const PiecewiseMap& map, const std::vector<double>& scores);

// JSON {"boundaries": [...], "values": [...], "tie_break": x}. A missing
// tie_break reads as 0.
std::string map_to_json(const PiecewiseMap& map);
PiecewiseMap map_from_json(std::string_view text);

}  // namespace delconf::calibrate
