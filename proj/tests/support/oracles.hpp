#pragma once

// Independent reference implementations used as test oracles. They follow
// the textbook definitions directly and favour clarity over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline double clamp_prob(double p) { return std::clamp(p, 1e-12, 1.0 - 1e-12); }

// NCE from the averaged cross-entropies, in base-`base` logarithms.
inline double nce(const std::vector<double>& c, const std::vector<std::uint8_t>& y, double base = std::exp(1.0)) {
  const double n = static_cast<double>(c.size());
  double pos = 0.0;
  for (auto v : y) pos += v;
  const double p1 = pos / n;
  const auto lg = [&](double v) { return std::log(v) / std::log(base); };
  double h_bar = 0.0, h = 0.0;
  for (std::size_t t = 0; t < c.size(); ++t) {
    h_bar -= (y[t] * lg(p1) + (1 - y[t]) * lg(1.0 - p1)) / n;
    const double q = clamp_prob(c[t]);
    h -= (y[t] * lg(q) + (1 - y[t]) * lg(1.0 - q)) / n;
  }
  return (h_bar - h) / h_bar;
}

// Pair counting over every positive/negative pair.
inline double roc_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double credit = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1.0;
      if (s[i] > s[j]) credit += 1.0;
      else if (s[i] == s[j]) credit += 0.5;
    }
  }
  return credit / pairs;
}

// Confusion counts at threshold theta for the rule score >= theta.
struct Confusion {
  double tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Confusion confusion(const std::vector<double>& s, const std::vector<std::uint8_t>& y, double theta) {
  Confusion c;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool predicted = s[i] >= theta;
    if (predicted && y[i]) c.tp += 1;
    if (predicted && !y[i]) c.fp += 1;
    if (!predicted && y[i]) c.fn += 1;
    if (!predicted && !y[i]) c.tn += 1;
  }
  return c;
}

inline std::vector<double> distinct_descending(std::vector<double> s) {
  std::sort(s.begin(), s.end(), std::greater<>());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

// Step-wise average precision: every distinct threshold recomputes its own
// confusion matrix.
inline double average_precision(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double ap = 0.0, prev_recall = 0.0;
  for (const double theta : distinct_descending(s)) {
    const auto c = confusion(s, y, theta);
    const double recall = c.tp / (c.tp + c.fn);
    const double precision = c.tp / (c.tp + c.fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

// Minimum edit cost by enumerating every order-preserving pairing of hyp and
// ref positions; unpaired hyp words are insertions and unpaired ref words are
// deletions. Every alignment reduces to one such pairing.
inline long long min_edit_cost(const std::vector<int>& hyp, const std::vector<int>& ref, int sub, int del, int ins) {
  long long best = std::numeric_limits<long long>::max();
  std::vector<std::pair<int, int>> pairs;
  const auto rec = [&](auto&& self, int i, int j, long long paired_cost) -> void {
    const long long k = static_cast<long long>(pairs.size());
    const long long total = paired_cost + del * (static_cast<long long>(ref.size()) - k) +
                            ins * (static_cast<long long>(hyp.size()) - k);
    best = std::min(best, total);
    for (int a = i; a < static_cast<int>(hyp.size()); ++a) {
      for (int b = j; b < static_cast<int>(ref.size()); ++b) {
        pairs.emplace_back(a, b);
        self(self, a + 1, b + 1, paired_cost + (hyp[a] == ref[b] ? 0 : sub));
        pairs.pop_back();
      }
    }
  };
  rec(rec, 0, 0, 0);
  return best;
}

}  // namespace oracle
