#include "delconf/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iterator>
#include <map>
#include <set>

#include <json.hpp>

#include "delconf/error.hpp"
#include "delconf/random.hpp"

namespace delconf::simgen {

using nlohmann::json;

namespace {

constexpr const char* kSyllables[] = {"ka", "to", "mi", "re", "su", "no", "la", "pe", "di", "go",
                                      "ba", "fu", "zi", "ve", "ho", "ru", "ne", "sa", "ti", "wo"};
constexpr std::uint64_t kSyllableCount = 20;
constexpr std::uint64_t kSuccessors = 4;

bool prob(double p) { return p >= 0.0 && p <= 1.0; }

struct Draft {
  std::string text;
  double start;
  double duration;
  double posterior;
};

class Generator {
 public:
  explicit Generator(const SimConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    cdf_.reserve(cfg.vocab_size);
    double acc = 0.0;
    for (std::size_t k = 0; k < cfg.vocab_size; ++k) {
      acc += 1.0 / static_cast<double>(k + 1);
      cdf_.push_back(acc);
    }
    vocab_.reserve(cfg.vocab_size);
    for (std::size_t k = 0; k < cfg.vocab_size; ++k) vocab_.push_back(token_for(k));
  }

  corpus::LabeledUtterance utterance(std::size_t index) {
    const std::size_t len = cfg_.min_len + rng_.below(cfg_.max_len - cfg_.min_len + 1);
    std::vector<std::size_t> ref;
    ref.push_back(unigram());
    while (ref.size() < len) ref.push_back(rng_.bernoulli(cfg_.successor_prob) ? successor(ref.back()) : unigram());

    std::vector<Draft> words;
    while (words.empty()) words = channel(ref);

    corpus::LabeledUtterance out;
    out.utterance.id = cfg_.id_prefix + number(index + 1, 5);
    out.utterance.recording_id = cfg_.id_prefix + "-rec" + number(index / cfg_.utts_per_recording, 4);
    for (auto& w : words) out.utterance.words.push_back(corpus::make_word(std::move(w.text), w.start, w.duration, w.posterior));
    std::vector<std::string> reference;
    for (const auto k : ref) reference.push_back(vocab_[k]);
    out.reference = std::move(reference);
    return out;
  }

 private:
  static std::string number(std::size_t n, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*zu", width, n);
    return buf;
  }

  std::size_t unigram() {
    const double u = rng_.uniform() * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

  // Fixed word-to-successor table shared by every config, so corpora from
  // different presets come from the same language.
  std::size_t successor(std::size_t word) {
    const std::uint64_t j = rng_.below(kSuccessors);
    return static_cast<std::size_t>(mix64(word * kSuccessors + j + 0x5eedULL) % cfg_.vocab_size);
  }

  std::size_t other_than(std::size_t word) {
    std::size_t k = static_cast<std::size_t>(rng_.below(cfg_.vocab_size - 1));
    if (k >= word) ++k;
    return k;
  }

  double posterior(bool correct) {
    const double p = correct ? rng_.beta(cfg_.a_cor, cfg_.b_cor) : rng_.beta(cfg_.a_err, cfg_.b_err);
    return std::clamp(p + cfg_.overconfidence * (1.0 - p), 0.0, 1.0);
  }

  std::vector<Draft> channel(const std::vector<std::size_t>& ref) {
    std::vector<Draft> words;
    double t = 0.0;
    if (rng_.bernoulli(cfg_.gap_prob)) t += rng_.uniform(cfg_.gap_min, cfg_.gap_max);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (i > 0 && rng_.bernoulli(cfg_.gap_prob)) t += rng_.uniform(cfg_.gap_min, cfg_.gap_max);
      const double dur = rng_.uniform(cfg_.dur_min, cfg_.dur_max);
      const double u = rng_.uniform();
      if (u < cfg_.p_del) {
        const bool absorb = rng_.bernoulli(cfg_.absorb_prob);
        if (absorb && !words.empty()) words.back().duration = t + dur - words.back().start;
      } else {
        const bool sub = u < cfg_.p_del + cfg_.p_sub;
        const std::size_t tok = sub ? other_than(ref[i]) : ref[i];
        words.push_back({vocab_[tok], t, dur, posterior(!sub)});
      }
      t += dur;
      if (rng_.bernoulli(cfg_.p_ins)) {
        const double d = 0.5 * rng_.uniform(cfg_.dur_min, cfg_.dur_max);
        const auto tok = static_cast<std::size_t>(rng_.below(cfg_.vocab_size));
        words.push_back({vocab_[tok], t, d, posterior(false)});
        t += d;
      }
    }
    return words;
  }

  const SimConfig& cfg_;
  Rng rng_;
  std::vector<double> cdf_;
  std::vector<std::string> vocab_;
};

// Field table for the JSON codec.
struct Fields {
  std::map<std::string, double SimConfig::*> reals;
  std::map<std::string, std::size_t SimConfig::*> counts;
};

const Fields& fields() {
  static const Fields f{
      {{"p_sub", &SimConfig::p_sub},
       {"p_del", &SimConfig::p_del},
       {"p_ins", &SimConfig::p_ins},
       {"a_cor", &SimConfig::a_cor},
       {"b_cor", &SimConfig::b_cor},
       {"a_err", &SimConfig::a_err},
       {"b_err", &SimConfig::b_err},
       {"overconfidence", &SimConfig::overconfidence},
       {"dur_min", &SimConfig::dur_min},
       {"dur_max", &SimConfig::dur_max},
       {"gap_prob", &SimConfig::gap_prob},
       {"gap_min", &SimConfig::gap_min},
       {"gap_max", &SimConfig::gap_max},
       {"absorb_prob", &SimConfig::absorb_prob},
       {"successor_prob", &SimConfig::successor_prob}},
      {{"vocab_size", &SimConfig::vocab_size},
       {"n_utts", &SimConfig::n_utts},
       {"min_len", &SimConfig::min_len},
       {"max_len", &SimConfig::max_len},
       {"utts_per_recording", &SimConfig::utts_per_recording}}};
  return f;
}

SimConfig config_from_object(const json& j, std::uint64_t default_seed) {
  if (!j.is_object()) throw ValidationError("simulation config must be a JSON object");
  SimConfig cfg = j.contains("preset") ? preset(j.at("preset").get<std::string>()) : SimConfig{};
  cfg.seed = default_seed;
  for (const auto& [key, value] : j.items()) {
    if (key == "preset") continue;
    if (key == "seed") {
      if (!value.is_number_unsigned()) throw ValidationError("'seed' must be a non-negative integer");
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "id_prefix") {
      if (!value.is_string()) throw ValidationError("'id_prefix' must be a string");
      cfg.id_prefix = value.get<std::string>();
    } else if (const auto r = fields().reals.find(key); r != fields().reals.end()) {
      if (!value.is_number()) throw ValidationError("'" + key + "' must be a number");
      cfg.*(r->second) = value.get<double>();
    } else if (const auto c = fields().counts.find(key); c != fields().counts.end()) {
      if (!value.is_number_unsigned()) throw ValidationError("'" + key + "' must be a non-negative integer");
      cfg.*(c->second) = value.get<std::size_t>();
    } else {
      throw ValidationError("unknown simulation config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace

void SimConfig::validate() const {
  if (vocab_size < 2) throw ValidationError("vocab_size must be at least 2");
  if (n_utts == 0) throw ValidationError("n_utts must be positive");
  if (min_len == 0 || min_len > max_len) throw ValidationError("need 1 <= min_len <= max_len");
  if (!prob(p_sub) || !prob(p_del) || !prob(p_ins)) throw ValidationError("error probabilities must lie in [0, 1]");
  if (p_sub + p_del > 1.0) throw ValidationError("p_sub + p_del must not exceed 1");
  if (p_del >= 1.0) throw ValidationError("p_del must be below 1");
  if (!(a_cor > 0.0) || !(b_cor > 0.0) || !(a_err > 0.0) || !(b_err > 0.0))
    throw ValidationError("Beta parameters must be positive");
  if (!(overconfidence >= 0.0) || !std::isfinite(overconfidence))
    throw ValidationError("overconfidence must be finite and non-negative");
  if (!(dur_min >= 0.02) || !(dur_min <= dur_max) || !std::isfinite(dur_max))
    throw ValidationError("need 0.02 <= dur_min <= dur_max");
  if (!prob(gap_prob) || !prob(absorb_prob) || !prob(successor_prob))
    throw ValidationError("gap_prob, absorb_prob and successor_prob must lie in [0, 1]");
  if (!(gap_min >= 0.0) || !(gap_min <= gap_max) || !std::isfinite(gap_max))
    throw ValidationError("need 0 <= gap_min <= gap_max");
  if (id_prefix.empty()) throw ValidationError("id_prefix must not be empty");
  if (utts_per_recording == 0) throw ValidationError("utts_per_recording must be positive");
}

SimConfig preset(std::string_view name) {
  SimConfig cfg;
  if (name == "matched") {
    cfg.p_sub = 0.24;
    cfg.p_del = 0.08;
    cfg.p_ins = 0.03;
  } else if (name == "mismatched") {
    cfg.p_sub = 0.23;
    cfg.p_del = 0.19;
    cfg.p_ins = 0.013;
  } else {
    throw ValidationError("unknown preset '" + std::string(name) + "' (expected matched or mismatched)");
  }
  return cfg;
}

std::string token_for(std::size_t k) {
  std::string out;
  std::uint64_t n = k + 1;
  while (n > 0) {
    --n;
    out.insert(0, kSyllables[n % kSyllableCount]);
    n /= kSyllableCount;
  }
  return out;
}

std::vector<corpus::LabeledUtterance> generate(const SimConfig& config) {
  config.validate();
  Generator gen(config);
  std::vector<corpus::LabeledUtterance> out;
  out.reserve(config.n_utts);
  for (std::size_t u = 0; u < config.n_utts; ++u) out.push_back(gen.utterance(u));
  return out;
}

std::vector<corpus::LabeledUtterance> generate_mix(const std::vector<SimConfig>& configs) {
  if (configs.empty()) throw ValidationError("no simulation components");
  std::set<std::string> prefixes;
  for (const auto& c : configs)
    if (!prefixes.insert(c.id_prefix).second) throw ValidationError("duplicate id_prefix '" + c.id_prefix + "'");
  std::vector<corpus::LabeledUtterance> out;
  for (const auto& c : configs) {
    auto part = generate(c);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<SimConfig> configs_from_json(std::string_view text, const std::uint64_t* seed_override) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("simulation config: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("simulation config must be a JSON object");
  if (seed_override) j["seed"] = *seed_override;
  if (!j.contains("components")) return {config_from_object(j, 1)};

  for (const auto& [key, value] : j.items())
    if (key != "components" && key != "seed") throw ValidationError("unknown top-level key '" + key + "'");
  std::uint64_t base = 1;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ValidationError("'seed' must be a non-negative integer");
    base = j.at("seed").get<std::uint64_t>();
  }
  const auto& comps = j.at("components");
  if (!comps.is_array() || comps.empty()) throw ValidationError("'components' must be a non-empty array");
  std::vector<SimConfig> out;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    json c = comps[k];
    if (c.is_object() && !c.contains("id_prefix")) c["id_prefix"] = "c" + std::to_string(k) + "-utt";
    out.push_back(config_from_object(c, base + k));
  }
  return out;
}

std::string config_to_json(const SimConfig& config) {
  json j;
  j["seed"] = config.seed;
  j["id_prefix"] = config.id_prefix;
  for (const auto& [key, member] : fields().reals) j[key] = config.*member;
  for (const auto& [key, member] : fields().counts) j[key] = config.*member;
  return j.dump();
}

}  // namespace delconf::simgen
