#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "delconf/corpus.hpp"

namespace delconf::simgen {

// Word-level recogniser simulator. Each reference word is deleted with
// probability p_del, substituted with p_sub or recognised correctly; after
// each reference position a random word is inserted with probability p_ins.
struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t vocab_size = 1000;
  std::size_t n_utts = 100;
  std::size_t min_len = 3;
  std::size_t max_len = 20;

  double p_sub = 0.2;
  double p_del = 0.08;
  double p_ins = 0.03;

  // Raw posteriors: Beta(a_cor, b_cor) for correct words, Beta(a_err, b_err)
  // for substitutions and insertions, then p + overconfidence * (1 - p).
  double a_cor = 4.0;
  double b_cor = 1.5;
  double a_err = 1.5;
  double b_err = 2.0;
  double overconfidence = 0.8;

  // Seconds.
  double dur_min = 0.15;
  double dur_max = 0.6;
  double gap_prob = 0.2;
  double gap_min = 0.05;
  double gap_max = 0.4;
  // Chance that a deleted word's time span is absorbed by the preceding
  // hypothesis word instead of being left silent.
  double absorb_prob = 0.5;

  // Probability that a reference word follows one of its predecessor's
  // preferred successors rather than the unigram distribution.
  double successor_prob = 0.5;

  std::string id_prefix = "utt";
  std::size_t utts_per_recording = 10;

  void validate() const;
  bool operator==(const SimConfig&) const = default;
};

// "matched" or "mismatched" (deletion-heavy). Throws ValidationError for
// other names.
SimConfig preset(std::string_view name);

// Utterances with references and raw posteriors; targets and predictions are
// left empty. Deterministic in the config.
std::vector<corpus::LabeledUtterance> generate(const SimConfig& config);

// Concatenation of generate() over several configs, which must use distinct
// id prefixes.
std::vector<corpus::LabeledUtterance> generate_mix(const std::vector<SimConfig>& configs);

// The vocabulary of a config: token k is spelled from the base-20 syllable
// digits of k + 1, so frequent (low k) tokens are shorter.
std::string token_for(std::size_t k);

// Config files. A single object holds SimConfig fields, optionally starting
// from "preset". An object with "components" holds a list of such objects;
// component k defaults to seed + k and prefix "c<k>-utt". `seed_override`
// replaces the top-level seed when set.
std::vector<SimConfig> configs_from_json(std::string_view text, const std::uint64_t* seed_override = nullptr);
std::string config_to_json(const SimConfig& config);

}  // namespace delconf::simgen
