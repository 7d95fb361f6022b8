#include "delconf/align.hpp"

#include <algorithm>
#include <limits>

#include "delconf/error.hpp"

namespace delconf::align {

void EditWeights::validate() const {
  if (sub <= 0 || del <= 0 || ins <= 0) throw ValidationError("edit weights must be positive");
}

Alignment levenshtein_align(std::span<const std::string> hyp, std::span<const std::string> ref,
                            const EditWeights& weights) {
  weights.validate();
  const std::size_t n = hyp.size();
  const std::size_t m = ref.size();
  const std::size_t cols = m + 1;
  // cost[i * cols + j]: best cost of aligning hyp[0, i) with ref[0, j).
  std::vector<long long> cost((n + 1) * cols, 0);
  for (std::size_t j = 1; j <= m; ++j) cost[j] = cost[j - 1] + weights.del;
  for (std::size_t i = 1; i <= n; ++i) {
    cost[i * cols] = cost[(i - 1) * cols] + weights.ins;
    for (std::size_t j = 1; j <= m; ++j) {
      const long long diag = cost[(i - 1) * cols + j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : weights.sub);
      const long long del = cost[i * cols + j - 1] + weights.del;
      const long long ins = cost[(i - 1) * cols + j] + weights.ins;
      cost[i * cols + j] = std::min({diag, del, ins});
    }
  }

  Alignment out;
  out.total_cost = cost[n * cols + m];
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const long long here = cost[i * cols + j];
    if (i > 0 && j > 0) {
      const bool match = hyp[i - 1] == ref[j - 1];
      const long long prev = cost[(i - 1) * cols + j - 1];
      if (match && here == prev) {
        out.steps.push_back({EditOp::Cor, static_cast<int>(i - 1), static_cast<int>(j - 1)});
        --i, --j;
        continue;
      }
      if (!match && here == prev + weights.sub) {
        out.steps.push_back({EditOp::Sub, static_cast<int>(i - 1), static_cast<int>(j - 1)});
        --i, --j;
        continue;
      }
    }
    if (j > 0 && here == cost[i * cols + j - 1] + weights.del) {
      out.steps.push_back({EditOp::Del, -1, static_cast<int>(j - 1)});
      --j;
      continue;
    }
    out.steps.push_back({EditOp::Ins, static_cast<int>(i - 1), -1});
    --i;
  }
  std::reverse(out.steps.begin(), out.steps.end());
  return out;
}

corpus::Targets derive_targets(const Alignment& alignment, std::size_t hyp_len) {
  corpus::Targets targets;
  targets.c.assign(hyp_len, 0);
  targets.d.assign(hyp_len, 0);
  // Index of the most recent hypothesis word, or -1 before the first one.
  long long last = -1;
  for (const auto& step : alignment.steps) {
    if (step.op == EditOp::Del) {
      if (last < 0)
        targets.s = 1;
      else
        targets.d[static_cast<std::size_t>(last)] = 1;
      continue;
    }
    if (step.hyp != last + 1 || static_cast<std::size_t>(step.hyp) >= hyp_len)
      throw ValidationError("alignment does not cover hypothesis words 0.." + std::to_string(hyp_len) +
                            " in order");
    last = step.hyp;
    if (step.op == EditOp::Cor) targets.c[static_cast<std::size_t>(last)] = 1;
  }
  if (static_cast<std::size_t>(last + 1) != hyp_len)
    throw ValidationError("alignment covers " + std::to_string(last + 1) + " hypothesis words, expected " +
                          std::to_string(hyp_len));
  return targets;
}

double ErrorCounts::wer() const {
  const long long n = ref_words();
  if (n == 0) {
    if (ins > 0) throw DegenerateError("WER undefined: empty reference with a non-empty hypothesis");
    return 0.0;
  }
  return static_cast<double>(errors()) / static_cast<double>(n);
}

ErrorCounts& ErrorCounts::operator+=(const ErrorCounts& other) {
  cor += other.cor;
  sub += other.sub;
  del += other.del;
  ins += other.ins;
  return *this;
}

ErrorCounts error_counts(const Alignment& alignment) {
  ErrorCounts counts;
  for (const auto& step : alignment.steps) {
    switch (step.op) {
      case EditOp::Cor: ++counts.cor; break;
      case EditOp::Sub: ++counts.sub; break;
      case EditOp::Del: ++counts.del; break;
      case EditOp::Ins: ++counts.ins; break;
    }
  }
  return counts;
}

long long script_cost(std::span<const EditStep> steps, const EditWeights& weights) {
  long long total = 0;
  for (const auto& step : steps) {
    switch (step.op) {
      case EditOp::Cor: break;
      case EditOp::Sub: total += weights.sub; break;
      case EditOp::Del: total += weights.del; break;
      case EditOp::Ins: total += weights.ins; break;
    }
  }
  return total;
}

corpus::LabeledUtterance with_targets(corpus::LabeledUtterance utt, const EditWeights& weights) {
  if (!utt.reference) throw ValidationError("utterance '" + utt.id() + "': missing ref");
  const auto hyp = utt.utterance.tokens();
  const auto alignment = levenshtein_align(hyp, *utt.reference, weights);
  utt.targets = derive_targets(alignment, hyp.size());
  return utt;
}

}  // namespace delconf::align
