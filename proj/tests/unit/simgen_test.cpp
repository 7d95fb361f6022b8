#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "delconf/align.hpp"
#include "delconf/corpus.hpp"
#include "delconf/error.hpp"
#include "delconf/metrics.hpp"
#include "delconf/simgen.hpp"

using namespace delconf;
using namespace delconf::simgen;

namespace {

align::ErrorCounts aligned_counts(const std::vector<corpus::LabeledUtterance>& corpus) {
  align::ErrorCounts total;
  for (const auto& u : corpus)
    total += align::error_counts(align::levenshtein_align(u.utterance.tokens(), *u.reference));
  return total;
}

SimConfig sized(SimConfig c, std::size_t ref_words) {
  c.n_utts = ref_words * 2 / (c.min_len + c.max_len);
  return c;
}

}  // namespace

TEST(Simgen, NoiselessChannelIsExact) {
  SimConfig c;
  c.p_sub = c.p_del = c.p_ins = 0.0;
  c.n_utts = 50;
  for (const auto& u : generate(c)) EXPECT_EQ(u.utterance.tokens(), *u.reference);
  EXPECT_EQ(aligned_counts(generate(c)).errors(), 0);
}

TEST(Simgen, Deterministic) {
  SimConfig c;
  c.n_utts = 30;
  EXPECT_EQ(generate(c), generate(c));
  auto other = c;
  other.seed = 2;
  EXPECT_NE(generate(other), generate(c));
  EXPECT_EQ(generate(preset("mismatched")), generate(preset("mismatched")));
}

TEST(Simgen, OutputIsValidCorpus) {
  auto c = preset("mismatched");
  c.n_utts = 200;
  const auto corpus = generate(c);
  EXPECT_EQ(corpus.size(), 200u);
  EXPECT_NO_THROW(corpus::validate(corpus));
  std::set<std::string> recordings;
  for (const auto& u : corpus) {
    EXPECT_FALSE(u.targets);
    EXPECT_FALSE(u.predictions);
    EXPECT_GE(u.reference->size(), c.min_len);
    EXPECT_LE(u.reference->size(), c.max_len);
    recordings.insert(u.utterance.recording_id);
  }
  EXPECT_EQ(recordings.size(), 20u);
  EXPECT_EQ(corpus[0].id(), "utt00001");
}

TEST(Simgen, DefaultRatesConverge) {
  const auto corpus = generate(sized(SimConfig{}, 10000));
  const auto k = aligned_counts(corpus);
  const double n = static_cast<double>(k.ref_words());
  EXPECT_NEAR(static_cast<double>(k.del) / n, 0.08, 0.01);
  EXPECT_NEAR(static_cast<double>(k.sub) / n, 0.2, 0.02);
  EXPECT_NEAR(static_cast<double>(k.ins) / n, 0.03, 0.01);
}

TEST(Simgen, PresetRates) {
  const auto matched = aligned_counts(generate(sized(preset("matched"), 20000)));
  EXPECT_NEAR(static_cast<double>(matched.del) / static_cast<double>(matched.ref_words()), 0.08, 0.015);
  const auto mismatched = aligned_counts(generate(sized(preset("mismatched"), 20000)));
  EXPECT_NEAR(static_cast<double>(mismatched.del) / static_cast<double>(mismatched.ref_words()), 0.19, 0.02);
  EXPECT_THROW(preset("wideband"), ValidationError);
}

TEST(Simgen, RawPosteriorsAreOverconfident) {
  auto corpus = generate(sized(preset("matched"), 20000));
  metrics::ScoredSet set;
  double err_post = 0.0, err_n = 0.0;
  for (auto& u : corpus) {
    u = align::with_targets(u);
    for (std::size_t t = 0; t < u.size(); ++t) {
      set.scores.push_back(u.utterance.words[t].raw_posterior);
      set.labels.push_back(u.targets->c[t]);
      if (!u.targets->c[t]) {
        err_post += u.utterance.words[t].raw_posterior;
        err_n += 1.0;
      }
    }
  }
  EXPECT_GT(err_post / err_n, 0.5);
  EXPECT_LT(metrics::nce(set), 0.0);
}

TEST(Simgen, ConfigValidation) {
  SimConfig c;
  c.p_sub = 0.7;
  c.p_del = 0.5;
  EXPECT_THROW(generate(c), ValidationError);
  c = {};
  c.min_len = 5;
  c.max_len = 2;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.a_cor = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.overconfidence = -0.1;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Simgen, MixNeedsDistinctPrefixes) {
  SimConfig a, b;
  a.n_utts = b.n_utts = 5;
  b.seed = 9;
  EXPECT_THROW(generate_mix({a, b}), ValidationError);
  b.id_prefix = "other";
  const auto mix = generate_mix({a, b});
  EXPECT_EQ(mix.size(), 10u);
  EXPECT_NO_THROW(corpus::validate(mix));
}

TEST(Simgen, TokensAreDistinctAndShortFirst) {
  std::set<std::string> seen;
  for (std::size_t k = 0; k < 5000; ++k) EXPECT_TRUE(seen.insert(token_for(k)).second);
  EXPECT_LE(token_for(0).size(), token_for(4999).size());
}

TEST(Simgen, ConfigJson) {
  auto c = preset("mismatched");
  c.seed = 77;
  c.id_prefix = "mm";
  const auto back = configs_from_json(config_to_json(c));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], c);

  const auto parts = configs_from_json(R"({"seed": 10, "components": [{"preset": "matched"}, {"preset": "mismatched", "n_utts": 7}]})");
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].seed, 10u);
  EXPECT_EQ(parts[1].seed, 11u);
  EXPECT_EQ(parts[1].n_utts, 7u);
  EXPECT_NE(parts[0].id_prefix, parts[1].id_prefix);

  const std::uint64_t seed = 3;
  EXPECT_EQ(configs_from_json(R"({"preset": "matched"})", &seed)[0].seed, 3u);
  EXPECT_THROW(configs_from_json(R"({"bogus": 1})"), ValidationError);
  EXPECT_THROW(configs_from_json("{"), ParseError);
}
