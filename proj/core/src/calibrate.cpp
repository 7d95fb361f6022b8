#include "delconf/calibrate.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "delconf/error.hpp"

namespace delconf::calibrate {

using nlohmann::json;

void PiecewiseMap::validate() const {
  if (values.empty()) throw ValidationError("piecewise map has no cells");
  if (boundaries.size() + 1 != values.size())
    throw ValidationError("piecewise map needs exactly one more value than boundaries");
  for (std::size_t k = 0; k < boundaries.size(); ++k) {
    if (!(boundaries[k] >= 0.0 && boundaries[k] <= 1.0))
      throw ValidationError("piecewise map boundaries must lie in [0,1]");
    if (k > 0 && !(boundaries[k] > boundaries[k - 1]))
      throw ValidationError("piecewise map boundaries must be strictly increasing");
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] >= 0.0 && values[k] <= 1.0)) throw ValidationError("piecewise map values must lie in [0,1]");
    if (k > 0 && values[k] < values[k - 1]) throw ValidationError("piecewise map values must be non-decreasing");
  }
  if (!(tie_break >= 0.0 && tie_break < 1.0)) throw ValidationError("tie_break must lie in [0,1)");
}

std::size_t PiecewiseMap::cell_of(double score) const {
  return static_cast<std::size_t>(std::upper_bound(boundaries.begin(), boundaries.end(), score) -
                                  boundaries.begin());
}

PiecewiseMap fit_monotone_map(const metrics::ScoredSet& train, std::size_t n_bins, double tie_break) {
  train.validate();
  if (train.scores.empty()) throw ValidationError("cannot fit a confidence map on an empty set");
  if (n_bins == 0) throw ValidationError("n_bins must be at least 1");

  const std::size_t n = train.scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return train.scores[a] < train.scores[b]; });
  const auto score_at = [&](std::size_t k) { return train.scores[order[k]]; };

  // Cell start offsets into `order`.
  std::vector<std::size_t> starts{0};
  for (std::size_t b = 1; b < n_bins; ++b) {
    std::size_t cut = std::max(starts.back() + 1, (b * n + n_bins / 2) / n_bins);
    while (cut < n && score_at(cut) == score_at(cut - 1)) ++cut;
    if (cut >= n) break;
    if (cut > starts.back()) starts.push_back(cut);
  }

  struct Block {
    std::size_t start;
    std::size_t positives;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const std::size_t end = k + 1 < starts.size() ? starts[k + 1] : n;
    Block cell{starts[k], 0, end - starts[k]};
    for (std::size_t i = starts[k]; i < end; ++i) cell.positives += train.labels[order[i]];
    blocks.push_back(cell);
    // Pool while the previous block's rate is not strictly below this one.
    while (blocks.size() > 1) {
      const Block& hi = blocks.back();
      const Block& lo = blocks[blocks.size() - 2];
      if (lo.positives * hi.count < hi.positives * lo.count) break;
      Block merged{lo.start, lo.positives + hi.positives, lo.count + hi.count};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }

  PiecewiseMap map;
  map.tie_break = tie_break;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (k > 0) map.boundaries.push_back(std::clamp(score_at(blocks[k].start), 0.0, 1.0));
    map.values.push_back(static_cast<double>(blocks[k].positives) / static_cast<double>(blocks[k].count));
  }
  map.validate();
  return map;
}

double apply_map(const PiecewiseMap& map, double score) {
  const double value = map.values[map.cell_of(score)];
  if (map.tie_break == 0.0) return value;
  return (1.0 - map.tie_break) * value + map.tie_break * std::clamp(score, 0.0, 1.0);
}

std::vector<double> apply_map(const PiecewiseMap& map, const std::vector<double>& scores) {
  std::vector<double> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(apply_map(map, s));
  return out;
}

std::string map_to_json(const PiecewiseMap& map) {
  json j;
  j["boundaries"] = map.boundaries;
  j["values"] = map.values;
  j["tie_break"] = map.tie_break;
  return j.dump();
}

PiecewiseMap map_from_json(std::string_view text) {
  PiecewiseMap map;
  try {
    const auto j = json::parse(text);
    map.boundaries = j.at("boundaries").get<std::vector<double>>();
    map.values = j.at("values").get<std::vector<double>>();
    map.tie_break = j.value("tie_break", 0.0);
  } catch (const json::exception& e) {
    throw ParseError(std::string("confidence map: ") + e.what());
  }
  map.validate();
  return map;
}

}  // namespace delconf::calibrate
