#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ordlab/diff.hpp"
#include "ordlab/parallel.hpp"
#include "ordlab/tridiagonal.hpp"

using namespace ordlab;

TEST(DiffConfig, Validation) {
  EXPECT_NO_THROW(DiffConfig{}.validate());
  EXPECT_THROW((DiffConfig{0.0, 2, 4}.validate()), std::invalid_argument);
  EXPECT_THROW((DiffConfig{1e-3, 2, 3}.validate()), std::invalid_argument);
  EXPECT_THROW((DiffConfig{1e-3, 0, 4}.validate()), std::invalid_argument);
  const DiffConfig c{1e-3, 2, 4};
  EXPECT_EQ(c.step_at(0.5), 1e-3);
  EXPECT_EQ(c.step_at(-4.0), 4e-3);
  EXPECT_EQ(c.widened(8.0).base_step, 8e-3);
}

TEST(Differentiate, ScalarJetOfSmoothFunction) {
  const ScalarFunction f = [](const Point& x) { return std::sin(x[0]) * std::exp(0.5 * x[1]); };
  Point x(2);
  x << 0.3, -0.7;
  const ScalarJet j = differentiate_scalar(f, x, {});
  const double s = std::sin(0.3), c = std::cos(0.3), e = std::exp(-0.35);
  EXPECT_NEAR(j.value, s * e, 1e-15);
  EXPECT_NEAR(j.gradient[0], c * e, 1e-11);
  EXPECT_NEAR(j.gradient[1], 0.5 * s * e, 1e-11);
  EXPECT_NEAR(j.hessian(0, 0), -s * e, 1e-9);
  EXPECT_NEAR(j.hessian(0, 1), 0.5 * c * e, 1e-9);
  EXPECT_NEAR(j.hessian(1, 0), j.hessian(0, 1), 1e-12);
  EXPECT_NEAR(j.hessian(1, 1), 0.25 * s * e, 1e-9);
}

TEST(Differentiate, PolynomialsAreExactUpToRounding) {
  const VectorFunction f = [](const Point& x) {
    Eigen::VectorXd v(2);
    v << x[0] * x[0] * x[1], x[1] * x[1] * x[1];
    return v;
  };
  Point x(2);
  x << 1.5, -2.0;
  const Derivatives d = differentiate(f, x, {});
  EXPECT_NEAR(d.first[0][0], 2 * 1.5 * -2.0, 1e-10);
  EXPECT_NEAR(d.first[1][1], 3 * 4.0, 1e-10);
  EXPECT_NEAR(d.hessian_entry(0, 1)[0], 3.0, 1e-8);
  EXPECT_NEAR(d.hessian_entry(1, 1)[1], 6 * -2.0, 1e-8);
  const Derivatives first_only = differentiate(f, x, {}, 1);
  EXPECT_TRUE(first_only.second.empty());
}

TEST(Differentiate, RichardsonImprovesAccuracy) {
  const ScalarFunction f = [](const Point& x) { return std::exp(std::sin(3 * x[0])); };
  Point x(1);
  x << 0.4;
  const double exact = 3 * std::cos(1.2) * std::exp(std::sin(1.2));
  const double plain = std::abs(gradient(f, x, DiffConfig{1e-2, 1, 2})[0] - exact);
  const double extrapolated = std::abs(gradient(f, x, DiffConfig{1e-2, 3, 2})[0] - exact);
  EXPECT_LT(extrapolated, plain * 1e-3);
}

TEST(Tridiagonal, DiscreteLaplacianSpectrum) {
  const int n = 50;
  SymmetricTridiagonal t{Eigen::VectorXd::Constant(n, 2.0), Eigen::VectorXd::Constant(n - 1, -1.0)};
  const auto ev = smallest_eigenvalues(t, 5);
  ASSERT_EQ(ev.size(), 5u);
  for (int k = 1; k <= 5; ++k) {
    const double exact = 2.0 - 2.0 * std::cos(k * std::numbers::pi / (n + 1));
    EXPECT_NEAR(ev[static_cast<std::size_t>(k - 1)], exact, 1e-13);
  }
  EXPECT_EQ(sturm_count(t, 0.0), 0);
  EXPECT_EQ(sturm_count(t, 4.0), n);
  EXPECT_EQ(sturm_count(t, ev[2] + 1e-9), 3);
}

TEST(Tridiagonal, DiagonalMatrix) {
  SymmetricTridiagonal t{Eigen::VectorXd(4), Eigen::VectorXd::Zero(3)};
  t.diag << 3.0, -1.0, 7.0, 0.5;
  const auto ev = smallest_eigenvalues(t, 4);
  EXPECT_NEAR(ev[0], -1.0, 1e-14);
  EXPECT_NEAR(ev[1], 0.5, 1e-14);
  EXPECT_NEAR(ev[2], 3.0, 1e-14);
  EXPECT_NEAR(ev[3], 7.0, 1e-14);
  EXPECT_THROW(smallest_eigenvalues(t, 5), std::invalid_argument);
}

TEST(Parallel, MapPreservesOrder) {
  const auto out = parallel_map<int>(1000, [](std::size_t i) { return static_cast<int>(i * i % 97); });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i % 97));
  EXPECT_GE(worker_count(), 1u);
}

TEST(Parallel, LowestIndexExceptionWins) {
  std::atomic<int> ran{0};
  try {
    parallel_for(200, [&](std::size_t i) {
      ++ran;
      if (i == 37 || i == 150) throw std::runtime_error("fail " + std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "fail 37");
  }
  EXPECT_GT(ran.load(), 0);
}

TEST(Parallel, EmptyRange) {
  EXPECT_NO_THROW(parallel_for(0, [](std::size_t) { throw std::logic_error("never"); }));
}
