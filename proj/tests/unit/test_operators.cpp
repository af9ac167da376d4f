#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ordlab/catalog.hpp"
#include "ordlab/errors.hpp"
#include "ordlab/operators.hpp"
#include "ordlab/tolerances.hpp"

using namespace ordlab;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

std::vector<ScalarField> probe_fields(int n) {
  std::vector<ScalarField> out{fields::constant(n, 1.0), fields::coordinate(n, 0), fields::exp_quadratic(n, -0.3)};
  Eigen::VectorXd k = Eigen::VectorXd::LinSpaced(n, 0.4, -0.2);
  out.push_back(fields::plane_wave(k));
  out.push_back(fields::product(fields::coordinate(n, n - 1), fields::exp_quadratic(n, 0.2)));
  return out;
}

}  // namespace

TEST(BuildOperator, Validation) {
  EXPECT_THROW(build_operator(OperatorSpec::conformal_lb(), make_metric("euclidean:1")), std::invalid_argument);
  EXPECT_THROW(OperatorSpec::power(std::nan(""), 0.0), std::invalid_argument);
  EXPECT_THROW(OperatorSpec::power(0.0, INFINITY), std::invalid_argument);
  EXPECT_NO_THROW(build_operator(OperatorSpec::conformal_lb(), make_metric("euclidean:2")));
  const auto w = fields::constant(2, 1.0);
  EXPECT_THROW(build_operator(OperatorSpec::sandwich(w, w, w), make_metric("euclidean:3")), DimensionMismatch);
}

TEST(BuildOperator, NonPositiveSandwichWeightRejected) {
  const Operator op(OperatorSpec::sandwich(fields::coordinate(1, 0), fields::constant(1, 1.0), fields::constant(1, 1.0)),
                    make_metric("euclidean:1"));
  EXPECT_THROW(op.apply(fields::constant(1, 1.0), pt({-0.5}), {}), EvaluationError);
  EXPECT_THROW(op.apply(fields::constant(1, 1.0), pt({-0.5}), {}, EvaluationRoute::nested), EvaluationError);
  EXPECT_NO_THROW(op.apply(fields::constant(1, 1.0), pt({0.5}), {}));
}

TEST(ApplyOperator, FlatLaplacian) {
  const Operator lb(OperatorSpec::laplace_beltrami(), make_metric("euclidean:2"));
  const ScalarField psi = fields::linear_combination(
      1.0, fields::product(fields::coordinate(2, 0), fields::coordinate(2, 0)), 1.0,
      fields::product(fields::coordinate(2, 1), fields::coordinate(2, 1)));
  for (const auto& p : {pt({0.0, 0.0}), pt({1.3, -0.4})}) {
    EXPECT_NEAR(apply_operator(lb, psi, p, {}), -4.0, 1e-12);
    EXPECT_NEAR(apply_operator(lb, psi, p, {}, EvaluationRoute::nested), -4.0, 1e-7);
  }
}

TEST(ApplyOperator, ConstantIsAnnihilatedByLaplaceBeltrami) {
  for (const char* label : {"spherical3", "conf-gauss:3:0.3", "poly-perturb:3:4:0.1"}) {
    const MetricField m = make_metric(label);
    const Operator lb(OperatorSpec::laplace_beltrami(), m);
    for (const auto& p : sample_points(m, 3, 1)) {
      EXPECT_EQ(lb.apply(fields::constant(3, 1.0), p, {}), 0.0) << label;
      EXPECT_EQ(lb.apply(fields::constant(3, 1.0), p, {}, EvaluationRoute::nested), 0.0) << label;
    }
  }
}

TEST(ApplyOperator, NaiveSphericalByHand) {
  const Operator naive(OperatorSpec::naive(), make_metric("spherical3"));
  const ScalarField r2 = fields::product(fields::coordinate(3, 0), fields::coordinate(3, 0));
  const Point p = pt({1.0, std::numbers::pi / 2, 0.0});
  EXPECT_NEAR(naive.apply(r2, p, {}), -2.0, 1e-12);
  EXPECT_NEAR(naive.apply(r2.without_closed_form(), p, {}, EvaluationRoute::nested), -2.0, 1e-8);
}

TEST(ApplyOperator, PowerOrderingOnConformalGaussian) {
  // With the -g^{ab} d_a d_b sign convention the constant field picks up +R/8
  // at n = 3, i.e. C = -1/8 in the positive-Laplacian form.
  const MetricField m = make_metric("conf-gauss:3:0.25").as_numeric();
  const Operator op(OperatorSpec::power(-1.0 / 6.0, 1.0 / 12.0), m);
  for (const auto& p : sample_points(m, 5, 21)) {
    const double r = ricci_scalar_christoffel(metric_jet(make_metric("conf-gauss:3:0.25"), p));
    const double v = apply_operator(op, fields::constant(3, 1.0), p, {});
    EXPECT_NEAR(v, r / 8.0, 1e-4 * std::abs(r / 8.0));
  }
}

TEST(ApplyOperator, PowerZeroIsLaplaceBeltrami) {
  for (const char* label : {"spherical3", "poly-perturb:3:9:0.1", "stereo-sphere:2:1"}) {
    const MetricField m = make_metric(label);
    const int n = m.dimension();
    const Operator p0(OperatorSpec::power(0.0, 0.0), m);
    const Operator lb(OperatorSpec::laplace_beltrami(), m);
    for (const auto& f : probe_fields(n)) {
      for (const auto& p : sample_points(m, 3, 2)) {
        EXPECT_NEAR(p0.apply(f, p, {}), lb.apply(f, p, {}), 1e-12) << label;
      }
    }
  }
}

TEST(ApplyOperator, ConformalLbOnFlatSpaceIsLaplaceBeltrami) {
  const MetricField m = make_metric("euclidean:3");
  const Operator c(OperatorSpec::conformal_lb(), m);
  const Operator lb(OperatorSpec::laplace_beltrami(), m);
  for (const auto& f : probe_fields(3)) {
    EXPECT_EQ(c.apply(f, pt({0.2, 0.1, -0.7}), {}), lb.apply(f, pt({0.2, 0.1, -0.7}), {}));
  }
}

TEST(ApplyOperator, NestedRouteMatchesExpanded) {
  for (const char* label : {"poly-perturb:3:3:0.1", "conf-gauss:2:0.4", "spherical3"}) {
    const MetricField m = make_metric(label);
    const int n = m.dimension();
    for (const OperatorSpec& spec : {OperatorSpec::laplace_beltrami(), OperatorSpec::power(0.3, -0.4),
                                     OperatorSpec::naive(), OperatorSpec::conformal_lb()}) {
      const Operator op(spec, m);
      const Operator numeric(spec, m.as_numeric());
      for (const auto& f : probe_fields(n)) {
        for (const auto& p : sample_points(m, 2, 5)) {
          const double a = op.apply(f, p, {});
          const double b = numeric.apply(f.without_closed_form(), p, {});
          EXPECT_NEAR(a, b, 1e-6 * std::max(1.0, std::abs(a))) << label << " " << to_string(spec.kind());
        }
      }
    }
  }
}

TEST(ApplyOperator, Linearity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const MetricField m = make_metric("poly-perturb:3:11:0.1");
  const Operator op(OperatorSpec::power(0.2, 0.7), m);
  const auto fs = probe_fields(3);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = u(rng);
    const double b = u(rng);
    const auto& f = fs[static_cast<std::size_t>(trial) % fs.size()];
    const auto& g = fs[static_cast<std::size_t>(trial + 2) % fs.size()];
    const ScalarField combo = fields::linear_combination(a, f, b, g);
    for (const auto& p : sample_points(m, 2, static_cast<std::uint64_t>(trial))) {
      const double lhs = op.apply(combo, p, {});
      const double rhs = a * op.apply(f, p, {}) + b * op.apply(g, p, {});
      EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST(ApplyOperator, PrincipalPartSharedByAllOrderings) {
  // (op - naive) exp(k.x) / exp(k.x) is at most linear in |k|.
  const MetricField m = make_metric("poly-perturb:3:2:0.1");
  const Point p = pt({0.2, -0.3, 0.5});
  const Operator naive(OperatorSpec::naive(), m);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (const OperatorSpec& spec : {OperatorSpec::laplace_beltrami(), OperatorSpec::power(-0.4, 0.9),
                                   OperatorSpec::conformal_lb()}) {
    const Operator op(spec, m);
    Eigen::VectorXd dir(3);
    for (int c = 0; c < 3; ++c) dir[c] = nd(rng);
    dir.normalize();
    std::vector<double> ratio;
    for (double s : {1.0, 2.0, 4.0}) {
      const ScalarField f = fields::plane_wave(s * dir);
      ratio.push_back((op.apply(f, p, {}) - naive.apply(f, p, {})) / f(p));
    }
    // exact for a polynomial of degree <= 1 in |k|: equal second differences vanish
    const double second = (ratio[2] - ratio[1]) / 2.0 - (ratio[1] - ratio[0]);
    EXPECT_NEAR(second, 0.0, 1e-9) << to_string(spec.kind());
  }
}

TEST(ApplyOperator, LaplaceBeltramiIsChartIndependent) {
  const auto cart = [](const Point& x) { return std::exp(0.3 * x[0] - 0.2 * x[1] + 0.1 * x[2]) * (1.0 + x[2] * x[0]); };
  const auto to_cart = [](const Point& s) {
    return pt({s[0] * std::sin(s[1]) * std::cos(s[2]), s[0] * std::sin(s[1]) * std::sin(s[2]), s[0] * std::cos(s[1])});
  };
  const ScalarField f_cart(3, cart);
  const ScalarField f_sph(3, [&](const Point& s) { return cart(to_cart(s)); });
  const Operator lb_cart(OperatorSpec::laplace_beltrami(), make_metric("euclidean:3"));
  const Operator lb_sph(OperatorSpec::laplace_beltrami(), make_metric("spherical3"));
  for (const auto& s : sample_points(make_metric("spherical3"), 10, 4)) {
    const double a = lb_cart.apply(f_cart, to_cart(s), {});
    const double b = lb_sph.apply(f_sph, s, {});
    EXPECT_NEAR(a, b, 1e-5);
  }
}

TEST(EffectivePotential, LaplaceBeltramiHasNone) {
  for (const char* label : {"spherical3", "poly-perturb:3:1:0.1", "stereo-sphere:4:1"}) {
    const MetricField m = make_metric(label);
    for (const auto& p : sample_points(m, 3, 9)) {
      const auto r = effective_potential(OperatorSpec::laplace_beltrami(), m, p, {});
      EXPECT_EQ(r.v_eff, 0.0);
      EXPECT_LE(r.drift.lpNorm<Eigen::Infinity>(), 1e-12);
    }
  }
}

TEST(EffectivePotential, ConformalLbOnUnitThreeSphere) {
  const MetricField m = make_metric("stereo-sphere:3:1");
  for (const auto& p : sample_points(m, 5, 13)) {
    const auto r = effective_potential(OperatorSpec::conformal_lb(), m, p, {});
    EXPECT_NEAR(r.v_eff, 0.75, 1e-10);
    EXPECT_LE(r.drift.lpNorm<Eigen::Infinity>(), 1e-12);
    ASSERT_TRUE(r.fitted_c.has_value());
    EXPECT_NEAR(*r.fitted_c, -0.125, 1e-10);
  }
}

TEST(EffectivePotential, ConformalLbPotentialIsCouplingTimesCurvature) {
  for (const char* label : {"stereo-sphere:2:1", "conf-gauss:2:0.3", "stereo-sphere:3:1.5", "conf-gauss:3:0.25",
                            "stereo-sphere:4:1", "conf-gauss:4:0.2", "poly-perturb:3:6:0.1", "spherical3"}) {
    const MetricField m = make_metric(label);
    const int n = m.dimension();
    for (DerivativeMode mode : {DerivativeMode::analytic, DerivativeMode::numeric}) {
      const MetricField field = mode == DerivativeMode::analytic ? m : m.as_numeric();
      const double tol = tolerances_for(mode).operator_;
      for (const auto& p : sample_points(m, 3, 31)) {
        const auto r = effective_potential(OperatorSpec::conformal_lb(), field, p, {});
        const double expected = conformal_coupling(n) * ricci_scalar_christoffel(metric_jet(m, p));
        EXPECT_NEAR(r.v_eff, expected, tol * std::max(1.0, std::abs(expected))) << label;
        if (n == 2) EXPECT_EQ(r.v_eff, 0.0);
      }
    }
  }
}

TEST(EffectivePotential, DriftAppearsOffTheCancellationLine) {
  const MetricField m = make_metric("conf-gauss:3:0.25");
  const auto r = effective_potential(OperatorSpec::power(0.3, 0.1), m, pt({0.4, -0.5, 0.3}), {});
  EXPECT_GT(r.drift.lpNorm<Eigen::Infinity>(), 1e-3);
}

TEST(EffectivePotential, FittedCUndefinedOnFlatSpace) {
  const auto r = effective_potential(OperatorSpec::naive(), make_metric("euclidean:2"), pt({0.1, 0.2}), {});
  EXPECT_FALSE(r.fitted_c.has_value());
  EXPECT_TRUE(to_json(r)["fitted_C"].is_null());
}

TEST(EffectivePotential, BatchFitAndCsv) {
  const MetricField m = make_metric("conf-gauss:3:0.25");
  const auto pts = sample_points(m, 6, 3);
  const auto batch = effective_potential_batch(OperatorSpec::power(-1.0 / 6.0, 1.0 / 12.0), m, pts, {});
  ASSERT_EQ(batch.size(), 6u);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(batch[i].point, pts[i]);
  const CurvatureFit fit = fit_curvature_coefficient(batch);
  EXPECT_NEAR(fit.c, -0.125, 1e-10);
  EXPECT_LT(fit.relative_residual, 1e-10);
  const std::string csv = to_csv(batch);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "point_0,point_1,point_2,V_eff,drift_0,drift_1,drift_2,ricci,fitted_C,residual");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(OperatorSpec, JsonRoundTrip) {
  const OperatorSpec p = OperatorSpec::power(-0.25, 0.125);
  const OperatorSpec q = OperatorSpec::from_json(p.to_json(), 4);
  EXPECT_EQ(q.kind(), OrderingKind::power);
  EXPECT_EQ(q.alpha_tilde(), -0.25);
  EXPECT_EQ(q.beta_tilde(), 0.125);

  const OperatorSpec s = OperatorSpec::sandwich(fields::exp_quadratic(2, 0.5), fields::constant(2, 2.0),
                                                fields::product(fields::exp_quadratic(2, -0.1), fields::constant(2, 3.0)));
  const nlohmann::json j = s.to_json();
  EXPECT_EQ(j["kind"], "Sandwich");
  const OperatorSpec t = OperatorSpec::from_json(j, 2);
  const Point x = pt({0.3, -0.8});
  EXPECT_DOUBLE_EQ(t.weights().pre(x), s.weights().pre(x));
  EXPECT_DOUBLE_EQ(t.weights().post(x), s.weights().post(x));

  for (const OperatorSpec& k : {OperatorSpec::naive(), OperatorSpec::laplace_beltrami(), OperatorSpec::conformal_lb()}) {
    EXPECT_EQ(OperatorSpec::from_json(k.to_json(), 3).kind(), k.kind());
  }
  EXPECT_THROW(OperatorSpec::from_json(nlohmann::json{{"kind", "Weyl"}}, 3), ParseError);
  EXPECT_THROW(OperatorSpec::from_json(nlohmann::json{{"kind", "PowerOrdering"}, {"params", {}}}, 3), ParseError);
}

TEST(SimilarityOrdering, UnitWeightsGiveFreeParticle) {
  const OperatorSpec s = similarity_ordering(fields::constant(1, 1.0), fields::constant(1, 1.0));
  const Operator op(s, make_metric("euclidean:1"));
  const ScalarField psi = fields::exp_quadratic(1, 0.7);
  for (double x : {-1.0, 0.2, 1.5}) {
    const ScalarJet j = psi.jet(pt({x}), {});
    EXPECT_NEAR(op.apply(psi, pt({x}), {}), -j.hessian(0, 0), 1e-12);
  }
}

TEST(SimilarityOrdering, ShiftedOscillator) {
  const double w = 1.0;
  const ScalarField h = fields::exp_quadratic(1, -0.5 * w);
  const ScalarField f = fields::exp_quadratic(1, w);
  const Operator op(similarity_ordering(f, h), make_metric("euclidean:1"));
  EXPECT_NEAR(0.5 * op.apply(fields::constant(1, 1.0), pt({1.0}), {}), 1.0, 1e-12);
  EXPECT_NEAR(0.5 * op.apply(h, pt({0.7}), {}), w * h(pt({0.7})), 1e-12);
  EXPECT_NEAR(0.5 * op.apply(h.without_closed_form(), pt({0.7}), {}), w * h(pt({0.7})), 1e-9);
  EXPECT_THROW(similarity_ordering(fields::coordinate(1, 0), h, std::vector<Point>{pt({-1.0})}), EvaluationError);
}
