#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordlab/geometry.hpp"
#include "ordlab/scalar_field.hpp"

namespace ordlab {

enum class OrderingKind { naive, laplace_beltrami, conformal_lb, power, sandwich };

const char* to_string(OrderingKind kind);

/// Declarative factor ordering of the kinetic term g^{ab} p_a p_b.
///
/// Operators quantize with p_a -> -i d_a, hbar = m = 1, and drop the 1/2m
/// prefactor, so every ordering has principal part -g^{ab} d_a d_b:
///
///   naive             -g^{ab} d_a d_b psi
///   laplace_beltrami  -(1/sqrt g) d_a (sqrt g g^{ab} d_b psi)
///   conformal_lb      laplace_beltrami + (n-2)/(4(n-1)) R psi
///   power(at, bt)     -(1/(sqrt g g^{at+bt})) d_a (g^{at} sqrt g g^{ab} d_b (g^{bt} psi))
///   sandwich(p,m,q)   -(1/p) d_a (m g^{ab} d_b (q psi))
///
/// where g is det g_{ab} and R the Ricci scalar.
class OperatorSpec {
 public:
  struct Weights {
    ScalarField pre;
    ScalarField mid;
    ScalarField post;
  };

  static OperatorSpec naive();
  static OperatorSpec laplace_beltrami();
  static OperatorSpec conformal_lb();
  static OperatorSpec power(double alpha_tilde, double beta_tilde);
  static OperatorSpec sandwich(ScalarField pre, ScalarField mid, ScalarField post);

  OrderingKind kind() const { return kind_; }
  double alpha_tilde() const { return alpha_; }
  double beta_tilde() const { return beta_; }
  /// Only meaningful for sandwich specs.
  const Weights& weights() const;

  nlohmann::json to_json() const;
  /// Sandwich weights are resolved with fields::from_label in `dimension`.
  static OperatorSpec from_json(const nlohmann::json& j, int dimension);

 private:
  OperatorSpec(OrderingKind kind, double alpha, double beta, std::optional<Weights> weights);

  OrderingKind kind_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  std::optional<Weights> weights_;
};

/// How apply evaluates the divergence form.
///   expanded  product rule on the metric 2-jet and the 2-jet of psi
///   nested    finite differences of the flux w_mid g^{ab} d_b(w_post psi),
///             whose own gradient is a finite difference at the base step;
///             the outer step is kNestedStepFactor times wider
///   automatic expanded for metrics with closed-form partials, nested otherwise
enum class EvaluationRoute { automatic, expanded, nested };

/// Executable ordering bound to a metric. Immutable; safe to apply concurrently.
class Operator {
 public:
  Operator(OperatorSpec spec, MetricField metric);

  const OperatorSpec& spec() const { return spec_; }
  const MetricField& metric() const { return metric_; }

  double apply(const ScalarField& psi, const Point& p, const DiffConfig& cfg,
               EvaluationRoute route = EvaluationRoute::automatic) const;
  /// Expanded route from a precomputed jet.
  double apply(const ScalarField& psi, const MetricJet& jet, const DiffConfig& cfg) const;

 private:
  double apply_nested(const ScalarField& psi, const Point& p, const DiffConfig& cfg) const;

  OperatorSpec spec_;
  MetricField metric_;
};

/// Checks the ordering against the metric. Throws std::invalid_argument for
/// conformal_lb with n = 1, non-finite power exponents or dimension mismatch.
Operator build_operator(const OperatorSpec& spec, const MetricField& metric);

double apply_operator(const Operator& op, const ScalarField& psi, const Point& p, const DiffConfig& cfg,
                      EvaluationRoute route = EvaluationRoute::automatic);

/// (n-2)/(4(n-1)), the curvature coupling of the conformal Laplacian.
double conformal_coupling(int n);

/// Difference between an ordering and the Laplace-Beltrami operator, read off
/// with the probe fields 1 and q^c.
///
/// fitted_c is the curvature coefficient C in the positive-Laplacian form
/// Delta_LB + C R. Because operators here carry the overall -1 of p^2, an
/// ordering with potential C R in that form has v_eff = -C R, so
/// fitted_c = -v_eff / ricci. It is empty where |ricci| <= kCurvatureFloor.
struct EffectivePotentialReport {
  Point point;
  double v_eff = 0.0;
  Eigen::VectorXd drift;
  double ricci = 0.0;
  std::optional<double> fitted_c;
  double residual = 0.0;
};

EffectivePotentialReport effective_potential(const OperatorSpec& spec, const MetricField& metric, const Point& p,
                                             const DiffConfig& cfg,
                                             EvaluationRoute route = EvaluationRoute::automatic);
/// Expanded route with a precomputed jet (cheap repeated evaluation).
EffectivePotentialReport effective_potential(const Operator& op, const MetricJet& jet, const DiffConfig& cfg);

std::vector<EffectivePotentialReport> effective_potential_batch(const OperatorSpec& spec, const MetricField& metric,
                                                                std::span<const Point> points, const DiffConfig& cfg,
                                                                EvaluationRoute route = EvaluationRoute::automatic);

/// Least-squares fit of a single C with v_eff = -C R across a batch.
struct CurvatureFit {
  double c = 0.0;
  double residual = 0.0;           // |v + C R|_2
  double relative_residual = 0.0;  // residual / |v|_2 (0 when v vanishes)
  std::size_t points = 0;
};
CurvatureFit fit_curvature_coefficient(std::span<const EffectivePotentialReport> batch);
CurvatureFit fit_curvature_coefficient(std::span<const double> v_eff, std::span<const double> ricci);

/// CSV with columns point_0..point_{n-1}, V_eff, drift_0.., ricci, fitted_C, residual.
std::string to_csv(std::span<const EffectivePotentialReport> batch);
nlohmann::json to_json(const EffectivePotentialReport& report);

/// Similarity ordering -(1/(f h)) d_x (f d_x (h psi)) as a sandwich OperatorSpec on
/// the flat metric. f and h must be positive; they are checked at `probes`.
OperatorSpec similarity_ordering(const ScalarField& f, const ScalarField& h, std::span<const Point> probes = {});

}  // namespace ordlab
