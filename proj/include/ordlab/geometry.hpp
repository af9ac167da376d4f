#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "ordlab/diff.hpp"

namespace ordlab {

/// Closed-form metric partials: dg[c](a,b) = g_{ab,c}, d2g[c*n+d](a,b) = g_{ab,cd}.
struct MetricPartials {
  Eigen::MatrixXd g;
  std::vector<Eigen::MatrixXd> dg;
  std::vector<Eigen::MatrixXd> d2g;
};

/// Axis-aligned box used for drawing regular sample points.
struct SampleBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

/// A Riemannian metric on a chart of R^n. Immutable and safe to share across
/// threads as long as the supplied callables are.
class MetricField {
 public:
  using Evaluator = std::function<Eigen::MatrixXd(const Point&)>;
  using PartialsFn = std::function<MetricPartials(const Point&)>;

  MetricField(std::string label, int dimension, Evaluator evaluator, PartialsFn partials = nullptr);

  const std::string& label() const { return label_; }
  int dimension() const { return dimension_; }
  DerivativeMode derivative_mode() const {
    return partials_ ? DerivativeMode::analytic : DerivativeMode::numeric;
  }

  /// Metric matrix at p. Throws DimensionMismatch or EvaluationError (non-finite output).
  Eigen::MatrixXd evaluate(const Point& p) const;
  /// Closed-form partials, if this metric carries them.
  std::optional<MetricPartials> partials(const Point& p) const;

  /// Same metric with closed-form partials dropped; all derivatives then come
  /// from finite differences.
  MetricField as_numeric() const;

  bool conformally_flat() const { return conformally_flat_; }
  MetricField& set_conformally_flat(bool flag);

  const SampleBox& sample_box() const { return box_; }
  MetricField& set_sample_box(SampleBox box);

 private:
  std::string label_;
  int dimension_;
  Evaluator evaluator_;
  PartialsFn partials_;
  bool conformally_flat_ = false;
  SampleBox box_;
};

/// Pointwise 2-jet of a metric. Index conventions follow MetricPartials;
/// d_ginv[c](a,b) = g^{ab}_{,c} and d2_ginv[c*n+d](a,b) = g^{ab}_{,cd}.
struct MetricJet {
  Point point;
  DerivativeMode mode = DerivativeMode::analytic;
  Eigen::MatrixXd g;
  Eigen::MatrixXd g_inv;
  double det = 0.0;
  std::vector<Eigen::MatrixXd> dg;
  std::vector<Eigen::MatrixXd> d2g;
  Eigen::VectorXd d_det;
  Eigen::MatrixXd d2_det;
  std::vector<Eigen::MatrixXd> d_ginv;
  std::vector<Eigen::MatrixXd> d2_ginv;

  int dimension() const { return static_cast<int>(g.rows()); }
  const Eigen::MatrixXd& d2g_at(int c, int d) const {
    return d2g[static_cast<std::size_t>(c * dimension() + d)];
  }
  const Eigen::MatrixXd& d2_ginv_at(int c, int d) const {
    return d2_ginv[static_cast<std::size_t>(c * dimension() + d)];
  }
};

/// Builds the jet at p. Analytic metrics use their closed-form partials and
/// derive determinant and inverse partials algebraically; numeric metrics
/// difference the matrix, its determinant and its inverse independently, so
/// the jet identities are a genuine check in that mode.
///
/// Throws DimensionMismatch, InvalidMetric (not positive definite at p or on
/// the stencil) or SingularMatrix.
MetricJet metric_jet(const MetricField& metric, const Point& p, const DiffConfig& cfg = {});

/// Largest violations of the jet invariants.
struct JetDefects {
  double symmetry = 0.0;         // g, g_inv and d2g symmetry
  double inverse = 0.0;          // |g g_inv - I|
  double jacobi = 0.0;           // |d_det - det tr(g_inv dg)| / max(1, det)
  double inverse_derivative = 0.0;  // |d_ginv + g_inv dg g_inv|
  double mixed_partials = 0.0;   // |d2g[c,d] - d2g[d,c]|
};
JetDefects jet_defects(const MetricJet& jet);

/// The five weighted addends of the determinant-based closed form
///   R = -g^{ab} g_{,ab}/g + 3/4 g^{ab} g_{,a} g_{,b}/g^2 - (g_{,b}/g) g^{ab}_{,a}
///       - 1/2 g^{ab}_{,l} g_{ra,b} g^{lr} + 1/4 g^{ab}_{,l} g_{ab,r} g^{lr}
/// evaluated exactly as written. This expression omits the term
/// -g^{ab}_{,ab} and is not the Ricci scalar of a general metric;
/// formula_audit measures the gap against the Christoffel route.
struct RicciAddends {
  std::array<double, 5> terms{};
  double total() const;
};
RicciAddends ricci_direct_addends(const MetricJet& jet);
double ricci_scalar_direct(const MetricJet& jet);

/// g^{ab}_{,ab}, the term missing from the five-term closed form.
double ginv_double_divergence(const MetricJet& jet);

/// Five-term closed form plus -g^{ab}_{,ab}; equals the Ricci scalar.
double ricci_scalar_six_term(const MetricJet& jet);

/// Ricci scalar from Christoffel symbols and their derivatives, built from
/// g, dg and d2g only. This is the reference curvature for the library.
double ricci_scalar_christoffel(const MetricJet& jet);

struct AuditReport {
  std::string metric;
  DerivativeMode mode = DerivativeMode::analytic;
  double tolerance = 0.0;
  std::vector<Point> points;
  std::vector<double> direct;
  std::vector<double> christoffel;
  std::vector<double> abs_diff;
  std::vector<double> rel_diff;
  std::vector<double> missing_term;  // -g^{ab}_{,ab} at each point
  std::vector<bool> point_pass;
  bool pass = true;
};

enum class CurvatureFormula { five_term, six_term };

/// Evaluates the chosen closed form and the Christoffel route at every sample
/// and compares them. A point passes when |direct - christoffel| <= tolerance *
/// max(1, |christoffel|). Never alters either value.
AuditReport formula_audit(const MetricField& metric, std::span<const Point> samples,
                          const DiffConfig& cfg, double tolerance,
                          CurvatureFormula formula = CurvatureFormula::five_term);

nlohmann::json to_json(const AuditReport& report);

/// Deterministic uniform samples inside the metric's sample box.
std::vector<Point> sample_points(const MetricField& metric, std::size_t count, std::uint64_t seed);

/// Uniform double in [0, 1) with a platform-independent mapping from the
/// 64-bit generator output.
double unit_uniform(std::uint64_t bits);

nlohmann::json point_to_json(const Point& p);

}  // namespace ordlab
