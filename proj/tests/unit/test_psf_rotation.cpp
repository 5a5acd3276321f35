#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "spectsim/projector.hpp"
#include "test_support.hpp"

namespace spectsim {
namespace {

using testing::dot;
using testing::random_field;

TEST(PsfKernel, VanishingSigmaIsDelta) {
  EXPECT_EQ(psf_kernel(0.0, PsfModel::none(), 4.0), std::vector<double>{1.0});
  EXPECT_EQ(psf_kernel(250.0, PsfModel::none(), 4.0), std::vector<double>{1.0});
}

TEST(PsfKernel, NarrowSigmaBelowOneTapIsDelta) {
  // 3 * 0.3 bins < 1 tap.
  EXPECT_EQ(psf_kernel(0.0, PsfModel{1.2, 0.0, 3.0}, 4.0), std::vector<double>{1.0});
}

TEST(PsfKernel, NormalizedSymmetricNonnegative) {
  PhiloxStream rng(3, 1);
  for (int i = 0; i < 200; ++i) {
    const PsfModel psf{rng.uniform(0.0, 10.0), rng.uniform(0.0, 0.05), rng.uniform(1.0, 4.0)};
    const auto k = psf_kernel(rng.uniform(0.0, 600.0), psf, rng.uniform(1.0, 8.0));
    ASSERT_EQ(k.size() % 2, 1U);
    EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-12);
    for (std::size_t j = 0; j < k.size(); ++j) {
      EXPECT_GE(k[j], 0.0);
      EXPECT_DOUBLE_EQ(k[j], k[k.size() - 1 - j]);
    }
  }
}

TEST(PsfKernel, FwhmToSigma) {
  const PsfModel psf{7.4 / kFwhmPerSigma, 0.0, 3.0};
  EXPECT_NEAR(psf.sigma_mm(100.0), 3.1425, 1e-4);
  // Discrete variance of a 3-sigma truncated Gaussian with 1 mm bins: within 3% of sigma^2.
  const auto k = psf_kernel(100.0, psf, 1.0);
  const auto half = static_cast<double>(k.size() / 2);
  double var = 0.0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    const double d = static_cast<double>(j) - half;
    var += k[j] * d * d;
  }
  EXPECT_NEAR(std::sqrt(var), 3.1425, 0.03 * 3.1425);
  EXPECT_EQ(k.size(), 19U);  // |k| <= floor(3 * 3.1425) = 9
}

TEST(PsfKernel, WidthGrowsWithDepth) {
  const PsfModel psf;
  EXPECT_LE(psf_kernel(10.0, psf, 4.0).size(), psf_kernel(300.0, psf, 4.0).size());
  EXPECT_LT(psf_kernel(10.0, psf, 4.0).size(), psf_kernel(500.0, psf, 4.0).size());
}

TEST(Rotation, ZeroAndFullTurnAreIdentity) {
  constexpr std::size_t n = 17;
  const auto plane = random_field(n * n, 5);
  const auto r0 = rotate_slice(plane, n, 0.0);
  const auto r360 = rotate_slice(plane, n, 360.0);
  const auto rneg = rotate_slice(plane, n, -720.0);
  for (std::size_t i = 0; i < plane.size(); ++i) {
    EXPECT_EQ(r0[i], plane[i]);
    EXPECT_NEAR(r360[i], plane[i], 1e-12);
    EXPECT_NEAR(rneg[i], plane[i], 1e-12);
  }
}

TEST(Rotation, NormalizeAngle) {
  EXPECT_DOUBLE_EQ(normalize_angle_deg(360.0), 0.0);
  EXPECT_DOUBLE_EQ(normalize_angle_deg(-45.0), 315.0);
  EXPECT_DOUBLE_EQ(normalize_angle_deg(765.0), 45.0);
}

TEST(Rotation, QuarterTurnIsAPermutation) {
  constexpr std::size_t n = 8;
  const auto plane = random_field(n * n, 6);
  const auto r = rotate_slice(plane, n, 90.0);
  // Output (y, x) samples source (x' = c - (y - c), y' = c + (x - c)).
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      EXPECT_EQ(r[y * n + x], plane[x * n + (n - 1 - y)]);
    }
  }
}

TEST(Rotation, AdjointDotProduct) {
  for (std::size_t n : {9U, 16U, 33U}) {
    for (double angle : {0.0, 13.0, 45.0, 90.0, 137.5, 200.0, 301.3}) {
      const auto x = random_field(n * n, 100 + n, -1.0, 1.0);
      const auto y = random_field(n * n, 200 + n, -1.0, 1.0);
      const double lhs = dot(rotate_slice(x, n, angle), y);
      const double rhs = dot(x, rotate_slice_adjoint(y, n, angle));
      EXPECT_NEAR(lhs, rhs, 1e-6 * std::max(std::abs(lhs), 1.0)) << "n=" << n << " angle=" << angle;
    }
  }
}

TEST(Rotation, OutOfGridSamplesReadZero) {
  constexpr std::size_t n = 11;
  std::vector<float> ones(n * n, 1.0F);
  const auto r = rotate_slice(ones, n, 45.0);
  EXPECT_FLOAT_EQ(r[0], 0.0F);                  // corner maps outside the grid
  EXPECT_FLOAT_EQ(r[(n / 2) * n + n / 2], 1.0F);  // center is fixed
}

}  // namespace
}  // namespace spectsim
