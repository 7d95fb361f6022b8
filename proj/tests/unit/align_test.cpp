#include <gtest/gtest.h>

#include "delconf/align.hpp"
#include "delconf/error.hpp"
#include "delconf/random.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace delconf;
using namespace delconf::align;
using Tokens = std::vector<std::string>;

namespace {

std::vector<int> codes(const Tokens& t) {
  std::vector<int> out;
  for (const auto& s : t) out.push_back(s[0]);
  return out;
}

std::vector<EditOp> ops(const Alignment& a) {
  std::vector<EditOp> out;
  for (const auto& s : a.steps) out.push_back(s.op);
  return out;
}

}  // namespace

TEST(Align, IdentityIsAllCorrect) {
  const Tokens t{"a", "b", "c"};
  const auto a = levenshtein_align(t, t);
  EXPECT_EQ(ops(a), (std::vector<EditOp>{EditOp::Cor, EditOp::Cor, EditOp::Cor}));
  EXPECT_EQ(a.total_cost, 0);
  const auto tg = derive_targets(a, 3);
  EXPECT_EQ(tg.c, (std::vector<std::uint8_t>{1, 1, 1}));
  EXPECT_EQ(tg.d, (std::vector<std::uint8_t>{0, 0, 0}));
  EXPECT_EQ(tg.s, 0);
}

TEST(Align, MiddleDeletion) {
  const auto a = levenshtein_align(Tokens{"a", "c"}, Tokens{"a", "b", "c"}, {10, 7, 7});
  EXPECT_EQ(ops(a), (std::vector<EditOp>{EditOp::Cor, EditOp::Del, EditOp::Cor}));
  EXPECT_EQ(a.steps[1].ref, 1);
  EXPECT_EQ(a.total_cost, 7);
  const auto tg = derive_targets(a, 2);
  EXPECT_EQ(tg.c, (std::vector<std::uint8_t>{1, 1}));
  EXPECT_EQ(tg.d, (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(tg.s, 0);
  const auto counts = error_counts(a);
  EXPECT_EQ(counts, (ErrorCounts{2, 0, 1, 0}));
  EXPECT_DOUBLE_EQ(counts.wer(), 1.0 / 3.0);
}

TEST(Align, StartDeletion) {
  const auto a = levenshtein_align(Tokens{"a"}, Tokens{"b", "a"});
  const auto tg = derive_targets(a, 1);
  EXPECT_EQ(tg.c, (std::vector<std::uint8_t>{1}));
  EXPECT_EQ(tg.d, (std::vector<std::uint8_t>{0}));
  EXPECT_EQ(tg.s, 1);
}

TEST(Align, EmptyReference) {
  const EditWeights w{10, 7, 5};
  const auto a = levenshtein_align(Tokens{"x"}, Tokens{}, w);
  EXPECT_EQ(ops(a), (std::vector<EditOp>{EditOp::Ins}));
  EXPECT_EQ(a.total_cost, 5);
  EXPECT_THROW(error_counts(a).wer(), DegenerateError);
  EXPECT_DOUBLE_EQ(ErrorCounts{}.wer(), 0.0);
}

TEST(Align, InsertionCounts) {
  const auto counts = error_counts(levenshtein_align(Tokens{"x", "a"}, Tokens{"a"}));
  EXPECT_EQ(counts, (ErrorCounts{1, 0, 0, 1}));
  EXPECT_DOUBLE_EQ(counts.wer(), 1.0);
}

TEST(Align, IdentityOfLengthFive) {
  const Tokens t{"a", "b", "c", "d", "e"};
  const auto counts = error_counts(levenshtein_align(t, t));
  EXPECT_EQ(counts, (ErrorCounts{5, 0, 0, 0}));
  EXPECT_DOUBLE_EQ(counts.wer(), 0.0);
}

TEST(Align, TrailingDeletionsGoToLastWord) {
  const auto tg = derive_targets(levenshtein_align(Tokens{"a", "b"}, Tokens{"a", "b", "c", "d"}), 2);
  EXPECT_EQ(tg.d, (std::vector<std::uint8_t>{0, 1}));
}

TEST(Align, RejectsBadInput) {
  EXPECT_THROW((EditWeights{0, 7, 7}.validate()), ValidationError);
  EXPECT_THROW(levenshtein_align(Tokens{"a"}, Tokens{"a"}, {10, -1, 7}), ValidationError);
  const auto a = levenshtein_align(Tokens{"a", "b"}, Tokens{"a", "b"});
  EXPECT_THROW(derive_targets(a, 3), ValidationError);
  corpus::LabeledUtterance u;
  u.utterance.id = "x";
  u.utterance.words = {corpus::make_word("a", 0, 0.1, 0.5)};
  EXPECT_THROW(with_targets(u), ValidationError);
}

// Properties over random short strings, with the exhaustive matching oracle.
TEST(AlignProperty, RandomPairsAgainstOracle) {
  Rng rng(11);
  const std::vector<EditWeights> weights{{10, 7, 7}, {1, 1, 1}, {3, 2, 5}, {20, 7, 7}};
  for (int trial = 0; trial < 3000; ++trial) {
    const auto hyp = gen::tokens(rng, 5, 3);
    const auto ref = gen::tokens(rng, 5, 3);
    const auto w = weights[rng.below(weights.size())];
    const auto a = levenshtein_align(hyp, ref, w);

    ASSERT_EQ(a.total_cost, oracle::min_edit_cost(codes(hyp), codes(ref), w.sub, w.del, w.ins));
    ASSERT_EQ(script_cost(a.steps, w), a.total_cost);

    int next_hyp = 0, next_ref = 0;
    for (const auto& s : a.steps) {
      if (s.hyp >= 0) {
        ASSERT_EQ(s.hyp, next_hyp++);
      }
      if (s.ref >= 0) {
        ASSERT_EQ(s.ref, next_ref++);
      }
      if (s.op == EditOp::Cor) {
        ASSERT_EQ(hyp[s.hyp], ref[s.ref]);
      }
      if (s.op == EditOp::Sub) {
        ASSERT_NE(hyp[s.hyp], ref[s.ref]);
      }
    }
    ASSERT_EQ(next_hyp, static_cast<int>(hyp.size()));
    ASSERT_EQ(next_ref, static_cast<int>(ref.size()));

    const auto counts = error_counts(a);
    ASSERT_EQ(counts.hyp_words(), static_cast<long long>(hyp.size()));
    ASSERT_EQ(counts.ref_words(), static_cast<long long>(ref.size()));

    // Swapping sides and the ins/del costs preserves the optimum.
    ASSERT_EQ(levenshtein_align(ref, hyp, {w.sub, w.ins, w.del}).total_cost, a.total_cost);

    if (hyp.empty()) continue;
    const auto tg = derive_targets(a, hyp.size());
    long long ones = tg.s;
    for (auto v : tg.d) ones += v;
    long long correct = 0;
    for (auto v : tg.c) correct += v;
    ASSERT_EQ(correct, counts.cor);
    ASSERT_LE(ones, counts.del);

    bool consecutive = false;
    for (std::size_t k = 1; k < a.steps.size(); ++k)
      consecutive |= a.steps[k].op == EditOp::Del && a.steps[k - 1].op == EditOp::Del;
    if (!consecutive) {
      ASSERT_EQ(ones, counts.del);
    }
  }
}

TEST(Align, WithTargetsFillsTargets) {
  corpus::LabeledUtterance u;
  u.utterance.id = "x";
  u.utterance.words = {corpus::make_word("a", 0, 0.1, 0.5), corpus::make_word("c", 0.1, 0.1, 0.5)};
  u.reference = Tokens{"a", "b", "c"};
  const auto out = with_targets(u);
  ASSERT_TRUE(out.targets);
  EXPECT_EQ(out.targets->d, (std::vector<std::uint8_t>{1, 0}));
}
