#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace delconf::corpus {

// Frame shift used to turn word durations into frame counts.
inline constexpr double kFrameSeconds = 0.01;

// Frames covered by a word of the given duration: round(duration / 10 ms).
int frames_for_duration(double duration);

struct HypWord {
  std::string text;
  double start = 0.0;     // seconds
  double duration = 0.0;  // seconds
  int frames = 0;         // 10 ms frames
  double raw_posterior = 0.0;

  bool operator==(const HypWord&) const = default;
};

// Builds a word with `frames` derived from `duration`.
HypWord make_word(std::string text, double start, double duration, double raw_posterior);

struct Utterance {
  std::string id;
  std::string recording_id;
  std::vector<HypWord> words;

  double total_duration() const;
  std::vector<std::string> tokens() const;
  bool operator==(const Utterance&) const = default;
};

// Reference targets: c* per word (1 = correct), d* per word (1 = at least one
// deletion in the gap after the word, the last word owning the gap to the
// utterance end) and s* (1 = at least one deletion before the first word).
struct Targets {
  std::vector<std::uint8_t> c;
  std::vector<std::uint8_t> d;
  std::uint8_t s = 0;

  bool operator==(const Targets&) const = default;
};

// Model outputs aligned with the hypothesis words. `d` is empty and `s` unset
// when the producing model has no deletion heads.
struct Predictions {
  std::vector<double> c;
  std::vector<double> d;
  std::optional<double> s;

  bool has_deletions() const { return s.has_value(); }
  bool operator==(const Predictions&) const = default;
};

struct LabeledUtterance {
  Utterance utterance;
  // Absent for untranscribed data.
  std::optional<std::vector<std::string>> reference;
  std::optional<Targets> targets;
  std::optional<Predictions> predictions;

  const std::string& id() const { return utterance.id; }
  std::size_t size() const { return utterance.words.size(); }
  bool operator==(const LabeledUtterance&) const = default;
};

// Throws ValidationError naming the utterance id and offending field.
void validate(const LabeledUtterance& utt);
// Also checks id uniqueness.
void validate(const std::vector<LabeledUtterance>& corpus);

// JSONL codec. Each record is one line; numbers use 17 significant digits.
std::string to_json_line(const LabeledUtterance& utt);
// `line_number` is only used in error messages.
LabeledUtterance from_json_line(std::string_view line, std::size_t line_number = 1);

std::string to_jsonl(const std::vector<LabeledUtterance>& corpus);
std::vector<LabeledUtterance> from_jsonl(std::string_view text);

std::vector<LabeledUtterance> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::vector<LabeledUtterance>& corpus, const std::filesystem::path& path);

// Formats a double with 17 significant digits ("%.17g").
std::string format_number(double value);

}  // namespace delconf::corpus
