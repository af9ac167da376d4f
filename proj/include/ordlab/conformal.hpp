#pragma once

#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "json.hpp"
#include "ordlab/geometry.hpp"

namespace ordlab {

/// 2-jet of g = det g_{ab} for a conformally flat metric phi^2 delta_{ab}.
struct ConformalJet {
  Point point;
  int n = 0;
  double det = 0.0;
  Eigen::VectorXd d_det;
  Eigen::MatrixXd d2_det;
};

ConformalJet conformal_jet(const MetricJet& jet);

/// Scalar curvature of phi^2 delta written through g = phi^{2n}:
///
///   R = -(1 - 1/n) g^{-1/n} [ d^2 g / g - (1/(2n) + 3/4) (dg)^2 / g^2 ]
///
/// with both brackets contracted with delta. Throws std::invalid_argument for n < 2.
double conformal_ricci(const ConformalJet& jet);

/// Same expression with an arbitrary coefficient in front of (dg)^2 / g^2
/// (the curvature above uses 1/(2n) + 3/4).
double conformal_ricci_with_coefficient(const ConformalJet& jet, double gradient_coefficient);

using Rational = boost::rational<long long>;

/// Determinant-power exponents reproducing the conformal Laplacian.
struct ExponentSolution {
  enum class Kind { trivial, conformal };
  Rational alpha_tilde;
  Rational beta_tilde;
  Rational c;  // potential C R in the positive-Laplacian form
  Kind kind = Kind::trivial;
};

const char* to_string(ExponentSolution::Kind kind);

/// Both solutions in exact arithmetic: (0, 0, 0) and
/// (1/n - 1/2, 1/4 - 1/(2n), -(n-2)/(4(n-1))). At n = 2 they coincide.
std::vector<ExponentSolution> solve_exponents(int n);

/// C as a function of the drift-free exponent: C = -beta / (1 - 1/n).
Rational curvature_coefficient_for_beta(Rational beta, int n);

nlohmann::json to_json(const ExponentSolution& s);

struct ExponentRoot {
  double beta = 0.0;
  double alpha = 0.0;
  double fitted_c = 0.0;
  double residual = 0.0;           // |V_eff + C R|_2 over the samples
  double relative_residual = 0.0;  // relative to |V_eff|_2 on the scan
  int multiplicity = 1;
};

struct VerificationReport {
  int n = 0;
  std::string metric;
  std::size_t samples = 0;
  std::vector<ExponentRoot> roots;
  bool drift_condition_checked = false;
  double max_drift_on_line = 0.0;   // largest drift with alpha + 2 beta = 0
  double min_drift_off_line = 0.0;  // smallest max-drift with alpha + 2 beta != 0
  double root_tolerance = 0.0;

  /// Roots counted with multiplicity.
  int root_count() const;
};

struct VerificationOptions {
  double beta_lo = -1.0;
  double beta_hi = 1.0;
  int grid_intervals = 400;
  double beta_tolerance = 1e-12;
  /// A candidate root is accepted when its residual is below this fraction
  /// of the largest residual on the scan.
  double residual_tolerance = 1e-7;
  double drift_tolerance = 1e-7;
};

/// Numeric scan for drift-free, curvature-proportional power orderings.
///
/// (i) The drift of PowerOrdering(a, b) is evaluated on a 5 x 5 grid of
/// (a, b) in [-1, 1]^2 and must vanish exactly on the line a + 2b = 0.
/// (ii) Along that line the residual vector r(b) of the least-squares fit
/// V_eff = -C R over all samples is projected on a fixed direction; its
/// zeros are bracketed on the grid and refined by bisection. Zeros without
/// a sign change (even multiplicity) are located as extrema of the
/// projection.
///
/// Throws std::invalid_argument (n mismatch, n < 2, fewer than 3 samples)
/// and InvalidMetric when conformal_ricci disagrees with the Christoffel
/// route, i.e. the metric is not conformally flat.
VerificationReport verify_two_solutions(int n, const MetricField& metric, std::span<const Point> samples,
                                        const DiffConfig& cfg, const VerificationOptions& options = {});

nlohmann::json to_json(const VerificationReport& report);

}  // namespace ordlab
