#include <gtest/gtest.h>

#include <cmath>

#include "ordlab/catalog.hpp"
#include "ordlab/conformal.hpp"
#include "ordlab/errors.hpp"

using namespace ordlab;

namespace {

double value(const Rational& r) { return boost::rational_cast<double>(r); }

}  // namespace

TEST(ConformalRicci, ConstantDeterminantIsFlat) {
  ConformalJet j{Point::Zero(3), 3, 8.0, Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Zero(3, 3)};
  EXPECT_EQ(conformal_ricci(j), 0.0);
  j.n = 1;
  EXPECT_THROW(conformal_ricci(j), std::invalid_argument);
}

TEST(ConformalRicci, UnitTwoSphereAtOrigin) {
  const MetricJet jet = metric_jet(make_metric("stereo-sphere:2:1"), Point::Zero(2));
  EXPECT_NEAR(conformal_ricci(conformal_jet(jet)), 2.0, 1e-12);
}

TEST(ConformalRicci, MatchesChristoffelOnConformallyFlatCatalog) {
  for (const char* label : {"conf-gauss:3:0.25", "conf-gauss:2:0.5", "conf-gauss:5:0.1", "stereo-sphere:3:1",
                            "stereo-sphere:4:2", "stereo-sphere:6:1", "euclidean:3"}) {
    const MetricField m = make_metric(label);
    for (const auto& p : sample_points(m, 5, 7)) {
      const MetricJet a = metric_jet(m, p);
      const double r = ricci_scalar_christoffel(a);
      EXPECT_NEAR(conformal_ricci(conformal_jet(a)), r, 1e-9 * std::max(1.0, std::abs(r))) << label;
      const MetricJet n = metric_jet(m.as_numeric(), p);
      EXPECT_NEAR(conformal_ricci(conformal_jet(n)), ricci_scalar_christoffel(n), 1e-5 * std::max(1.0, std::abs(r)))
          << label;
    }
  }
}

TEST(ConformalRicci, AtOriginOfGaussianFactor) {
  // phi = exp(-|x|^2 / 4) is conf-gauss with sigma = 1/4
  const MetricJet jet = metric_jet(make_metric("conf-gauss:3:0.25"), Point::Zero(3));
  EXPECT_NEAR(conformal_ricci(conformal_jet(jet)), ricci_scalar_christoffel(jet), 1e-12);
  EXPECT_NEAR(ricci_scalar_christoffel(jet), 6.0, 1e-12);  // -e^{-2w}(4 dw) with dw = -3/2
}

TEST(ConformalRicci, FlippedGradientCoefficientDisagrees) {
  // The gradient term needs 1/(2n) + 3/4; with 1/(2n) - 3/4 the curvature is wrong.
  const MetricField m = make_metric("conf-gauss:3:0.25");
  const MetricJet jet = metric_jet(m, sample_points(m, 1, 3).front());
  const ConformalJet cj = conformal_jet(jet);
  const double truth = ricci_scalar_christoffel(jet);
  EXPECT_NEAR(conformal_ricci_with_coefficient(cj, 1.0 / 6.0 + 0.75), truth, 1e-10);
  EXPECT_GT(std::abs(conformal_ricci_with_coefficient(cj, 1.0 / 6.0 - 0.75) - truth), 1e-2);
}

TEST(SolveExponents, ThreeDimensions) {
  const auto s = solve_exponents(3);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].alpha_tilde, Rational(0));
  EXPECT_EQ(s[0].beta_tilde, Rational(0));
  EXPECT_EQ(s[0].c, Rational(0));
  EXPECT_EQ(s[0].kind, ExponentSolution::Kind::trivial);
  EXPECT_EQ(s[1].alpha_tilde, Rational(-1, 6));
  EXPECT_EQ(s[1].beta_tilde, Rational(1, 12));
  EXPECT_EQ(s[1].c, Rational(-1, 8));
  EXPECT_EQ(s[1].kind, ExponentSolution::Kind::conformal);
}

TEST(SolveExponents, TwoDimensionsCollapse) {
  const auto s = solve_exponents(2);
  ASSERT_EQ(s.size(), 2u);
  for (const auto& sol : s) {
    EXPECT_EQ(sol.alpha_tilde, Rational(0));
    EXPECT_EQ(sol.beta_tilde, Rational(0));
    EXPECT_EQ(sol.c, Rational(0));
  }
}

TEST(SolveExponents, FourDimensions) {
  const auto s = solve_exponents(4);
  EXPECT_EQ(s[1].alpha_tilde, Rational(-1, 4));
  EXPECT_EQ(s[1].beta_tilde, Rational(1, 8));
  EXPECT_EQ(s[1].c, Rational(-1, 6));
}

TEST(SolveExponents, ExactRelations) {
  for (int n = 2; n <= 6; ++n) {
    for (const auto& s : solve_exponents(n)) {
      EXPECT_EQ(s.alpha_tilde + 2 * s.beta_tilde, Rational(0));
      EXPECT_EQ(s.c, -s.beta_tilde / (Rational(1) - Rational(1, n)));
      EXPECT_EQ(s.c, curvature_coefficient_for_beta(s.beta_tilde, n));
    }
    EXPECT_EQ(solve_exponents(n)[1].c, Rational(-(n - 2), 4 * (n - 1)));
  }
}

TEST(SolveExponents, ProductFormOfLinearRelationIsInconsistent) {
  // C = -beta (1 - 1/n) does not reproduce -(n-2)/(4(n-1)) for n >= 3.
  for (int n = 3; n <= 6; ++n) {
    const auto s = solve_exponents(n)[1];
    EXPECT_NE(-s.beta_tilde * (Rational(1) - Rational(1, n)), s.c);
  }
}

TEST(SolveExponents, RejectsSmallN) {
  EXPECT_THROW(solve_exponents(1), std::invalid_argument);
  EXPECT_THROW(curvature_coefficient_for_beta(Rational(1), 1), std::invalid_argument);
}

TEST(SolveExponents, Json) {
  const nlohmann::json j = to_json(solve_exponents(3)[1]);
  EXPECT_EQ(j["beta_tilde"]["num"], 1);
  EXPECT_EQ(j["beta_tilde"]["den"], 12);
  EXPECT_EQ(j["kind"], "conformal");
}

TEST(VerifyTwoSolutions, ThreeDimensionalGaussian) {
  const MetricField m = make_metric("conf-gauss:3:0.25");
  const auto r = verify_two_solutions(3, m, sample_points(m, 8, 1), {});
  EXPECT_TRUE(r.drift_condition_checked);
  ASSERT_EQ(r.roots.size(), 2u);
  EXPECT_EQ(r.root_count(), 2);
  EXPECT_NEAR(r.roots[0].beta, 0.0, 1e-8);
  EXPECT_NEAR(r.roots[1].beta, 1.0 / 12.0, 1e-8);
  EXPECT_NEAR(r.roots[1].alpha, -1.0 / 6.0, 2e-8);
  EXPECT_NEAR(r.roots[1].fitted_c, -0.125, 1e-4);
  EXPECT_NEAR(r.roots[0].fitted_c, 0.0, 1e-4);
}

TEST(VerifyTwoSolutions, TwoDimensionalRootsCoincide) {
  const MetricField m = make_metric("stereo-sphere:2:1");
  const auto r = verify_two_solutions(2, m, sample_points(m, 6, 2), {});
  ASSERT_EQ(r.roots.size(), 1u);
  EXPECT_EQ(r.roots[0].multiplicity, 2);
  EXPECT_EQ(r.root_count(), 2);
  EXPECT_NEAR(r.roots[0].beta, 0.0, 1e-8);
}

TEST(VerifyTwoSolutions, FiveDimensionalGaussian) {
  const MetricField m = make_metric("conf-gauss:5:0.1");
  const auto r = verify_two_solutions(5, m, sample_points(m, 6, 3), {});
  ASSERT_EQ(r.roots.size(), 2u);
  EXPECT_NEAR(r.roots[1].beta, 0.15, 1e-8);
  EXPECT_NEAR(r.roots[1].fitted_c, -3.0 / 16.0, 1e-4);
}

TEST(VerifyTwoSolutions, NumericDerivativesStillFindRoots) {
  const MetricField m = make_metric("conf-gauss:3:0.25").as_numeric();
  const auto r = verify_two_solutions(3, m, sample_points(m, 5, 4), {});
  ASSERT_EQ(r.root_count(), 2);
  EXPECT_NEAR(r.roots[1].beta, 1.0 / 12.0, 1e-6);
  EXPECT_NEAR(r.roots[1].fitted_c, -0.125, 1e-4);
}

TEST(VerifyTwoSolutions, Errors) {
  const MetricField flat = make_metric("conf-gauss:3:0.25");
  const auto pts = sample_points(flat, 5, 1);
  EXPECT_THROW(verify_two_solutions(4, flat, pts, {}), std::invalid_argument);
  EXPECT_THROW(verify_two_solutions(3, flat, std::vector<Point>(pts.begin(), pts.begin() + 2), {}),
               std::invalid_argument);
  const MetricField generic = make_metric("poly-perturb:3:2:0.2");
  EXPECT_THROW(verify_two_solutions(3, generic, sample_points(generic, 5, 1), {}), InvalidMetric);
}

TEST(VerifyTwoSolutions, JsonShape) {
  const MetricField m = make_metric("conf-gauss:4:0.2");
  const nlohmann::json j = to_json(verify_two_solutions(4, m, sample_points(m, 4, 5), {}));
  EXPECT_EQ(j["n"], 4);
  EXPECT_EQ(j["metric"], "conf-gauss:4:0.2");
  EXPECT_TRUE(j["drift_condition_checked"].get<bool>());
  ASSERT_EQ(j["roots"].size(), 2u);
  for (const char* key : {"beta", "alpha", "fitted_C", "residual"}) EXPECT_TRUE(j["roots"][0].contains(key));
  EXPECT_NEAR(value(solve_exponents(4)[1].beta_tilde), j["roots"][1]["beta"].get<double>(), 1e-8);
}
