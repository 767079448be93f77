#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "trc/tr_svd.hpp"

using namespace trc;
using trc::testing::random_tensor;

TEST(TRSVD, DeltaScheduleSplitsTheBudget) {
  const auto d = delta_schedule(0.3, 10.0, 4);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_DOUBLE_EQ(d[0], std::sqrt(2.0 / 4) * 3.0);
  EXPECT_DOUBLE_EQ(d[1], std::sqrt(1.0 / 4) * 3.0);
  EXPECT_DOUBLE_EQ(d[2], d[1]);
  EXPECT_NEAR(d[0] * d[0] + d[1] * d[1] + d[2] * d[2], 9.0, 1e-12);
}

TEST(TRSVD, DivisorsMatchTrialDivision) {
  for (std::uint64_t r = 1; r <= 300; ++r) {
    std::vector<std::uint64_t> want;
    for (std::uint64_t d = 1; d <= r; ++d)
      if (r % d == 0) want.push_back(d);
    EXPECT_EQ(divisors(r), want) << r;
  }
  EXPECT_THROW(divisors(0), std::invalid_argument);
}

TEST(TRSVD, ExactAtZeroEps) {
  const auto w = random_tensor<double>({8, 6, 3, 3}, 1);
  for (std::size_t s = 0; s < 4; ++s) {
    const std::size_t rank = leading_rank(w, 0.0, s);
    for (auto r1 : divisors(rank)) {
      const auto c = tr_svd(w, {0.0, s, std::size_t(r1)});
      EXPECT_NO_THROW(c.validate());
      EXPECT_EQ(c.shift, s);
      EXPECT_EQ(c.ranks()[0], r1);
      EXPECT_LT(relative_error(tr_reconstruct_original(c), w), 1e-12);
      EXPECT_LT(relative_error(tr_reconstruct(c), circular_shift(w, s)), 1e-12);
    }
  }
}

TEST(TRSVD, ErrorBoundHolds) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto w = random_tensor<double>({12, 10, 3, 3}, seed);
    for (double eps : {0.05, 0.2, 0.4, 0.6}) {
      for (std::size_t s = 0; s < 4; ++s) {
        const auto c = tr_svd(w, {eps, s, 1});
        EXPECT_LE(relative_error(tr_reconstruct_original(c), w), eps + 1e-12);
      }
    }
  }
}

TEST(TRSVD, RankOneKernelGivesUnitRanks) {
  const auto w = trc::testing::rank_one_kernel({6, 5, 3, 3}, 7);
  const auto res = rsdtr_search(w, 0.0);
  EXPECT_EQ(res.cores.ranks(), (Shape{1, 1, 1, 1}));
  EXPECT_EQ(res.storage, 6u + 5 + 3 + 3);
  EXPECT_LT(res.achieved_rel_error, 1e-12);
}

TEST(TRSVD, RejectsBadConfig) {
  const auto w = random_tensor<double>({4, 4, 3, 3}, 2);
  EXPECT_THROW(tr_svd(w, {1.0, 0, 1}), DecompositionError);
  EXPECT_THROW(tr_svd(w, {-0.1, 0, 1}), DecompositionError);
  EXPECT_THROW(tr_svd(random_tensor<double>({4, 4, 3}, 1), {0.1, 0, 1}), DecompositionError);
  const std::size_t rank = leading_rank(w, 0.0, 0);
  std::size_t bad = 2;
  while (rank % bad == 0) ++bad;
  EXPECT_THROW(tr_svd(w, {0.0, 0, bad}), DecompositionError);
}

TEST(TRSVD, SearchIsExhaustiveAndOptimal) {
  for (std::uint64_t seed = 10; seed < 16; ++seed) {
    const auto w = random_tensor<double>({10, 8, 3, 3}, seed);
    const double eps = 0.1 * double(seed % 5);
    const auto res = rsdtr_search(w, eps);
    std::size_t count = 0;
    std::uint64_t best = UINT64_MAX;
    std::size_t best_shift = 0, best_r1 = 0;
    for (std::size_t s = 0; s < 4; ++s)
      for (auto r1 : divisors(leading_rank(w, eps, s))) {
        ++count;
        const auto p = param_count(tr_svd(w, {eps, s, std::size_t(r1)}));
        if (p < best) {
          best = p;
          best_shift = s;
          best_r1 = r1;
        }
      }
    EXPECT_EQ(res.candidates_evaluated, count);
    EXPECT_EQ(res.storage, best);
    EXPECT_EQ(res.shift, best_shift);
    EXPECT_EQ(res.r1, best_r1);
    EXPECT_EQ(param_count(res.cores), res.storage);
    EXPECT_LE(res.achieved_rel_error, eps + 1e-8);
  }
}

TEST(TRSVD, SelectionIgnoresEvaluationOrder) {
  const auto w = trc::testing::rank_one_kernel({6, 6, 3, 3}, 3);  // many ties
  const auto ref = rsdtr_search(w, 0.0, {std::nullopt, false});
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto r = rsdtr_search(w, 0.0, {s, true});
    EXPECT_EQ(r.shift, ref.shift);
    EXPECT_EQ(r.r1, ref.r1);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(r.cores.cores[k], ref.cores.cores[k]);
  }
  EXPECT_EQ(ref.shift, 0u);  // all shifts tie; the smallest wins
}

TEST(TRSVD, CandidatesListedInOrder) {
  const auto w = random_tensor<double>({6, 4, 3, 3}, 4);
  const auto res = rsdtr_search(w, 0.2, {42, true});
  for (std::size_t i = 1; i < res.candidates.size(); ++i) {
    const auto& a = res.candidates[i - 1];
    const auto& b = res.candidates[i];
    EXPECT_TRUE(a.shift < b.shift || (a.shift == b.shift && a.r1 < b.r1));
  }
  for (const auto& c : res.candidates) EXPECT_LE(c.predicted_rel_error, 0.2 + 1e-12);
}
