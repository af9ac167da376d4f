#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ordlab/geometry.hpp"

namespace ordlab {

/// Built-in metrics, all carrying closed-form partials:
///
///   euclidean:n              identity matrix
///   spherical3               flat R^3 in (r, theta, phi): diag(1, r^2, r^2 sin^2 theta)
///   conf-gauss:n:s           phi^2 delta, phi = exp(-s |x|^2)
///   stereo-sphere:n:a        phi^2 delta, phi = 2a^2 / (a^2 + |x|^2); R = n(n-1)/a^2
///   poly-perturb:n:seed:eps  I + eps S(x), S a seeded symmetric polynomial
///                            perturbation with linear and quadratic parts
///
/// The seed field of poly-perturb may be written as `seed=7`. Throws
/// ParseError for malformed labels and InvalidMetric when a poly-perturb
/// draw cannot be certified positive definite on [-1, 1]^n.
MetricField make_metric(std::string_view label);

/// Comma-separated metric labels; integer fields may be ranges `lo..hi`,
/// e.g. "poly-perturb:3:1..4:0.1" expands to four metrics.
std::vector<MetricField> make_metric_family(std::string_view spec);

/// Symmetric-polynomial perturbation coefficients behind poly-perturb.
/// Certified positive definite on the unit box when eps * bound < 1, with
/// bound = sum_c |M_c|_F + 1/2 sum_{c,d} |N_cd|_F.
struct PolyPerturbation {
  int dimension = 0;
  std::vector<Eigen::MatrixXd> linear;     // M_c
  std::vector<Eigen::MatrixXd> quadratic;  // N_cd, row-major, N_cd = N_dc
  double bound = 0.0;
};
PolyPerturbation draw_poly_perturbation(int dimension, std::uint64_t seed);

}  // namespace ordlab
