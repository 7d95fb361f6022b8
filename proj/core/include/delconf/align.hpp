#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "delconf/corpus.hpp"

namespace delconf::align {

// Edit costs; a correct match costs nothing. Defaults follow the HTK scoring
// convention (substitution 10, deletion 7, insertion 7).
struct EditWeights {
  int sub = 10;
  int del = 7;
  int ins = 7;

  void validate() const;
};

enum class EditOp { Cor, Sub, Ins, Del };

// One step of an edit script. `hyp`/`ref` are -1 when the step does not
// consume a token on that side.
struct EditStep {
  EditOp op;
  int hyp = -1;
  int ref = -1;

  bool operator==(const EditStep&) const = default;
};

struct Alignment {
  std::vector<EditStep> steps;
  long long total_cost = 0;
};

// Minimum-cost alignment of `hyp` against `ref`. Among optimal scripts the
// backtrace prefers COR, then SUB, DEL, INS at every cell, so the result is
// reproducible.
Alignment levenshtein_align(std::span<const std::string> hyp, std::span<const std::string> ref,
                            const EditWeights& weights = {});

corpus::Targets derive_targets(const Alignment& alignment, std::size_t hyp_len);

struct ErrorCounts {
  long long cor = 0;
  long long sub = 0;
  long long del = 0;
  long long ins = 0;

  long long errors() const { return sub + del + ins; }
  long long ref_words() const { return cor + sub + del; }
  long long hyp_words() const { return cor + sub + ins; }
  // (sub + del + ins) / (cor + sub + del); 0 when both sides are empty.
  // Throws DegenerateError for an empty reference with a non-empty hypothesis.
  double wer() const;

  ErrorCounts& operator+=(const ErrorCounts& other);
  bool operator==(const ErrorCounts&) const = default;
};

ErrorCounts error_counts(const Alignment& alignment);

// Cost of a script under `weights`.
long long script_cost(std::span<const EditStep> steps, const EditWeights& weights);

// Aligns an utterance against its reference (ValidationError when absent) and
// returns it with targets filled in.
corpus::LabeledUtterance with_targets(corpus::LabeledUtterance utt, const EditWeights& weights = {});

}  // namespace delconf::align
