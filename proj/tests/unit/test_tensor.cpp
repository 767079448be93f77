#include <gtest/gtest.h>

#include <array>
#include <vector>

#include "oracles.hpp"
#include "trc/tensor.hpp"

using namespace trc;
using trc::testing::random_tensor;

TEST(Tensor, RejectsZeroDimsAndBadPayload) {
  EXPECT_THROW(Tensor64({2, 0, 3}), std::invalid_argument);
  EXPECT_THROW(Tensor64(Shape{}), std::invalid_argument);
  EXPECT_THROW(Tensor64({2, 3}, std::vector<double>(5)), std::invalid_argument);
}

TEST(Tensor, RowMajorIndexing) {
  Tensor64 t({2, 3, 4});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = double(i);
  EXPECT_EQ(t(1, 2, 3), 23.0);
  EXPECT_EQ(t(0, 1, 0), 4.0);
  EXPECT_EQ(row_major_strides(t.dims()), (Shape{12, 4, 1}));
}

TEST(Tensor, UnfoldColumnsAreLexicographic) {
  Tensor64 t({2, 3, 4});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = double(i);
  const auto m = unfold(t, 1);
  ASSERT_EQ(m.dims(), (Shape{3, 8}));
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(m(b, a * 4 + c), t(a, b, c));
}

TEST(Tensor, FoldInvertsUnfold) {
  const auto t = random_tensor<double>({3, 2, 5, 4}, 1);
  for (std::size_t n = 0; n < 4; ++n) EXPECT_EQ(fold(unfold(t, n), n, t.dims()), t);
}

TEST(Tensor, CircularShiftRotatesModes) {
  const auto t = random_tensor<double>({2, 3, 4, 5}, 2);
  const auto s = circular_shift(t, 1);
  ASSERT_EQ(s.dims(), (Shape{3, 4, 5, 2}));
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t d = 0; d < 5; ++d) EXPECT_EQ(s(b, c, d, a), t(a, b, c, d));
  EXPECT_EQ(circular_shift(t, 0), t);
  EXPECT_EQ(circular_shift(circular_shift(t, 1), 3), t);
  EXPECT_THROW(circular_shift(t, 4), std::out_of_range);
}

TEST(Tensor, PermuteMatchesExplicitLoop) {
  const auto t = random_tensor<double>({2, 3, 4}, 3);
  const std::array<std::size_t, 3> perm{2, 0, 1};
  const auto p = permute(t, perm);
  ASSERT_EQ(p.dims(), (Shape{4, 2, 3}));
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(p(c, a, b), t(a, b, c));
}

TEST(Tensor, ContractMatchesNaiveSum) {
  const auto x = random_tensor<double>({3, 4, 5}, 4);
  const auto y = random_tensor<double>({4, 2, 6}, 5);
  const auto got = contract(x, y, 1, 0);
  const auto want = trc::testing::naive_multi_contract(x, y, {1}, {0});
  ASSERT_EQ(got.dims(), (Shape{3, 5, 2, 6}));
  EXPECT_LT(trc::testing::max_abs_diff(got, want), 1e-12);
}

TEST(Tensor, MultiContractMatchesNaiveSum) {
  const auto x = random_tensor<double>({3, 4, 5, 2}, 6);
  const auto y = random_tensor<double>({5, 7, 3}, 7);
  const std::array<std::size_t, 2> mx{2, 0}, my{0, 2};
  const auto got = multi_contract(x, y, std::span<const std::size_t>(mx), std::span<const std::size_t>(my));
  const auto want = trc::testing::naive_multi_contract(x, y, {2, 0}, {0, 2});
  ASSERT_EQ(got.dims(), (Shape{4, 2, 7}));
  EXPECT_LT(trc::testing::max_abs_diff(got, want), 1e-12);
}

TEST(Tensor, FullContractionIsInnerProduct) {
  const auto x = random_tensor<double>({3, 4}, 8);
  const auto y = random_tensor<double>({3, 4}, 9);
  const std::array<std::size_t, 2> m{0, 1};
  const auto got = multi_contract(x, y, std::span<const std::size_t>(m), std::span<const std::size_t>(m));
  ASSERT_EQ(got.dims(), (Shape{1}));
  double want = 0;
  for (std::size_t i = 0; i < x.size(); ++i) want += x[i] * y[i];
  EXPECT_NEAR(got[0], want, 1e-12);
}

TEST(Tensor, ContractRejectsMismatchedModes) {
  const auto x = random_tensor<double>({3, 4}, 1);
  const auto y = random_tensor<double>({5, 4}, 2);
  EXPECT_THROW(contract(x, y, 0, 0), std::invalid_argument);
  const std::array<std::size_t, 2> rep{1, 1};
  EXPECT_THROW(multi_contract(x, y, std::span<const std::size_t>(rep), std::span<const std::size_t>(rep)),
               std::invalid_argument);
}

TEST(Tensor, NormsAndRelativeError) {
  Tensor64 a({2}, {3.0, 4.0});
  EXPECT_DOUBLE_EQ(frobenius_norm(a), 5.0);
  Tensor64 b({2}, {3.0, 4.5});
  EXPECT_DOUBLE_EQ(relative_error(b, a), 0.1);
}

TEST(Tensor, FloatInstantiation) {
  const auto t = random_tensor<float>({2, 3, 4}, 11);
  EXPECT_EQ(fold(unfold(t, 2), 2, t.dims()), t);
  EXPECT_EQ(t.cast<double>().cast<float>(), t);
}
