#include "delconf/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <unordered_set>

#include <json.hpp>

#include "delconf/error.hpp"
#include "delconf/io.hpp"

namespace delconf::corpus {

using nlohmann::json;

namespace {

// Boundary rounding in simulated timings can leave a word ending a few ulps
// after the next one starts.
constexpr double kTimeTolerance = 1e-9;

std::string quote(const std::string& text) {
  try {
    return json(text).dump();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("string is not valid UTF-8: ") + e.what());
  }
}

template <typename Range, typename Fn>
void append_array(std::string& out, const Range& values, Fn&& format) {
  out += '[';
  bool first = true;
  for (const auto& v : values) {
    if (!first) out += ',';
    first = false;
    out += format(v);
  }
  out += ']';
}

std::string fail_where(const LabeledUtterance& utt, const std::string& what) {
  return "utterance '" + utt.id() + "': " + what;
}

bool is_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

int frames_for_duration(double duration) {
  return static_cast<int>(std::lround(duration / kFrameSeconds));
}

HypWord make_word(std::string text, double start, double duration, double raw_posterior) {
  return HypWord{std::move(text), start, duration, frames_for_duration(duration), raw_posterior};
}

double Utterance::total_duration() const {
  double total = 0.0;
  for (const auto& w : words) total += w.duration;
  return total;
}

std::vector<std::string> Utterance::tokens() const {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(w.text);
  return out;
}

void validate(const LabeledUtterance& utt) {
  const auto& u = utt.utterance;
  if (u.id.empty()) throw ValidationError("utterance with empty id");
  if (u.words.empty()) throw ValidationError(fail_where(utt, "words is empty"));
  for (std::size_t t = 0; t < u.words.size(); ++t) {
    const auto& w = u.words[t];
    const std::string at = "words[" + std::to_string(t) + "]";
    if (w.text.empty()) throw ValidationError(fail_where(utt, at + ".w is empty"));
    if (!(w.start >= 0.0) || !std::isfinite(w.start))
      throw ValidationError(fail_where(utt, at + ".start must be a finite value >= 0"));
    if (!(w.duration > 0.0) || !std::isfinite(w.duration))
      throw ValidationError(fail_where(utt, at + ".dur must be a finite value > 0"));
    if (w.frames < 1 || w.frames != frames_for_duration(w.duration))
      throw ValidationError(fail_where(utt, at + ".frames must equal round(dur / 0.01) and be >= 1"));
    if (!is_unit(w.raw_posterior))
      throw ValidationError(fail_where(utt, at + ".post = " + format_number(w.raw_posterior) +
                                                " outside [0,1]"));
    if (t > 0) {
      const auto& prev = u.words[t - 1];
      if (w.start + kTimeTolerance < prev.start + prev.duration)
        throw ValidationError(fail_where(utt, at + " overlaps the previous word"));
    }
  }
  if (utt.reference) {
    for (const auto& tok : *utt.reference)
      if (tok.empty()) throw ValidationError(fail_where(utt, "ref contains an empty token"));
  }
  const std::size_t n = u.words.size();
  if (utt.targets) {
    const auto& tg = *utt.targets;
    if (tg.c.size() != n || tg.d.size() != n)
      throw ValidationError(fail_where(utt, "targets length does not match word count"));
    for (auto v : tg.c)
      if (v > 1) throw ValidationError(fail_where(utt, "targets.c must be 0 or 1"));
    for (auto v : tg.d)
      if (v > 1) throw ValidationError(fail_where(utt, "targets.d must be 0 or 1"));
    if (tg.s > 1) throw ValidationError(fail_where(utt, "targets.s must be 0 or 1"));
  }
  if (utt.predictions) {
    const auto& p = *utt.predictions;
    if (p.c.size() != n) throw ValidationError(fail_where(utt, "pred.c length does not match word count"));
    if (p.has_deletions() ? p.d.size() != n : !p.d.empty())
      throw ValidationError(fail_where(utt, "pred.d must have one value per word and come with pred.s"));
    for (double v : p.c)
      if (!is_unit(v)) throw ValidationError(fail_where(utt, "pred.c value outside [0,1]"));
    for (double v : p.d)
      if (!is_unit(v)) throw ValidationError(fail_where(utt, "pred.d value outside [0,1]"));
    if (p.s && !is_unit(*p.s)) throw ValidationError(fail_where(utt, "pred.s outside [0,1]"));
  }
}

void validate(const std::vector<LabeledUtterance>& corpus) {
  std::unordered_set<std::string> seen;
  for (const auto& utt : corpus) {
    validate(utt);
    if (!seen.insert(utt.id()).second)
      throw ValidationError("utterance '" + utt.id() + "': duplicate id");
  }
}

std::string format_number(double value) {
  if (!std::isfinite(value)) throw ValidationError("cannot serialise a non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string to_json_line(const LabeledUtterance& utt) {
  const auto& u = utt.utterance;
  const auto num = [](double v) { return format_number(v); };
  const auto bit = [](std::uint8_t v) { return std::string(1, v ? '1' : '0'); };

  std::string out = "{\"id\":" + quote(u.id) + ",\"recording_id\":" + quote(u.recording_id) + ",\"words\":";
  append_array(out, u.words, [&](const HypWord& w) {
    return "{\"w\":" + quote(w.text) + ",\"start\":" + num(w.start) + ",\"dur\":" + num(w.duration) +
           ",\"post\":" + num(w.raw_posterior) + "}";
  });
  if (utt.reference) {
    out += ",\"ref\":";
    append_array(out, *utt.reference, quote);
  }
  if (utt.targets) {
    out += ",\"targets\":{\"c\":";
    append_array(out, utt.targets->c, bit);
    out += ",\"d\":";
    append_array(out, utt.targets->d, bit);
    out += ",\"s\":" + bit(utt.targets->s) + "}";
  }
  if (utt.predictions) {
    const auto& p = *utt.predictions;
    out += ",\"pred\":{\"c\":";
    append_array(out, p.c, num);
    if (p.has_deletions()) {
      out += ",\"d\":";
      append_array(out, p.d, num);
      out += ",\"s\":" + num(*p.s);
    }
    out += '}';
  }
  out += '}';
  return out;
}

namespace {

std::vector<std::uint8_t> read_bits(const json& arr, const char* field) {
  if (!arr.is_array()) throw ParseError(std::string(field) + " must be an array");
  std::vector<std::uint8_t> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number_integer()) throw ParseError(std::string(field) + " must hold integers");
    const auto x = v.get<long long>();
    if (x != 0 && x != 1) throw ParseError(std::string(field) + " values must be 0 or 1");
    out.push_back(static_cast<std::uint8_t>(x));
  }
  return out;
}

std::vector<double> read_numbers(const json& arr, const char* field) {
  if (!arr.is_array()) throw ParseError(std::string(field) + " must be an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) throw ParseError(std::string(field) + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

double read_number(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw ParseError(std::string("missing numeric field '") + key + "'");
  return it->get<double>();
}

std::string read_string(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) throw ParseError(std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

LabeledUtterance parse_record(const json& j) {
  if (!j.is_object()) throw ParseError("record is not a JSON object");
  LabeledUtterance utt;
  utt.utterance.id = read_string(j, "id");
  utt.utterance.recording_id = read_string(j, "recording_id");
  const auto words = j.find("words");
  if (words == j.end() || !words->is_array()) throw ParseError("missing array field 'words'");
  for (const auto& w : *words) {
    if (!w.is_object()) throw ParseError("words entries must be objects");
    HypWord word = make_word(read_string(w, "w"), read_number(w, "start"), read_number(w, "dur"),
                             read_number(w, "post"));
    if (const auto f = w.find("frames"); f != w.end()) {
      if (!f->is_number_integer()) throw ParseError("'frames' must be an integer");
      word.frames = f->get<int>();
    }
    utt.utterance.words.push_back(std::move(word));
  }
  if (const auto ref = j.find("ref"); ref != j.end()) {
    if (!ref->is_array()) throw ParseError("'ref' must be an array");
    std::vector<std::string> tokens;
    for (const auto& tok : *ref) {
      if (!tok.is_string()) throw ParseError("'ref' must hold strings");
      tokens.push_back(tok.get<std::string>());
    }
    utt.reference = std::move(tokens);
  }
  if (const auto tg = j.find("targets"); tg != j.end()) {
    if (!tg->is_object() || !tg->contains("c") || !tg->contains("d") || !tg->contains("s"))
      throw ParseError("'targets' must be an object with c, d and s");
    Targets t;
    t.c = read_bits(tg->at("c"), "targets.c");
    t.d = read_bits(tg->at("d"), "targets.d");
    const auto& s = tg->at("s");
    if (!s.is_number_integer() || (s.get<long long>() != 0 && s.get<long long>() != 1))
      throw ParseError("targets.s must be 0 or 1");
    t.s = static_cast<std::uint8_t>(s.get<long long>());
    utt.targets = std::move(t);
  }
  if (const auto pr = j.find("pred"); pr != j.end()) {
    if (!pr->is_object() || !pr->contains("c")) throw ParseError("'pred' must be an object with c");
    Predictions p;
    p.c = read_numbers(pr->at("c"), "pred.c");
    const bool has_d = pr->contains("d");
    const bool has_s = pr->contains("s");
    if (has_d != has_s) throw ParseError("pred.d and pred.s must appear together");
    if (has_d) {
      p.d = read_numbers(pr->at("d"), "pred.d");
      if (!pr->at("s").is_number()) throw ParseError("pred.s must be a number");
      p.s = pr->at("s").get<double>();
    }
    utt.predictions = std::move(p);
  }
  return utt;
}

}  // namespace

LabeledUtterance from_json_line(std::string_view line, std::size_t line_number) {
  LabeledUtterance utt;
  try {
    utt = parse_record(json::parse(line));
  } catch (const json::exception& e) {
    throw ParseError("line " + std::to_string(line_number) + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError("line " + std::to_string(line_number) + ": " + e.what());
  }
  validate(utt);
  return utt;
}

std::string to_jsonl(const std::vector<LabeledUtterance>& corpus) {
  validate(corpus);
  std::string out;
  for (const auto& utt : corpus) {
    out += to_json_line(utt);
    out += '\n';
  }
  return out;
}

std::vector<LabeledUtterance> from_jsonl(std::string_view text) {
  std::vector<LabeledUtterance> out;
  std::size_t line_number = 0;
  while (!text.empty()) {
    ++line_number;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    out.push_back(from_json_line(line, line_number));
  }
  validate(out);
  return out;
}

std::vector<LabeledUtterance> read_corpus(const std::filesystem::path& path) {
  return from_jsonl(io::read_text_file(path));
}

void write_corpus(const std::vector<LabeledUtterance>& corpus, const std::filesystem::path& path) {
  io::write_text_file_atomic(path, to_jsonl(corpus));
}

}  // namespace delconf::corpus
