#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace ordlab {

using Point = Eigen::VectorXd;

enum class DerivativeMode { analytic, numeric };

const char* to_string(DerivativeMode mode);

/// Finite-difference configuration shared by every numeric derivative in the
/// library.
///
/// The step along coordinate c is `base_step * max(1, |x_c|)`. Each estimate
/// is a central stencil of `stencil_order` (2, 4 or 6); `richardson_levels`
/// estimates at steps h, h/2, h/4, ... are combined by Richardson
/// extrapolation, removing one more even power of h per level.
struct DiffConfig {
  double base_step = 2e-3;
  int richardson_levels = 2;
  int stencil_order = 4;

  void validate() const;
  double step_at(double coordinate) const;
  /// Copy with the base step multiplied by `factor` (used for the outer
  /// differentiation of nested derivatives).
  DiffConfig widened(double factor) const;
};

using VectorFunction = std::function<Eigen::VectorXd(const Point&)>;
using ScalarFunction = std::function<double(const Point&)>;

/// Value, first and second partials of a vector-valued function.
struct Derivatives {
  Eigen::VectorXd value;
  std::vector<Eigen::VectorXd> first;   // first[c] = d/dx_c
  std::vector<Eigen::VectorXd> second;  // second[c * n + d] = d2/dx_c dx_d

  const Eigen::VectorXd& hessian_entry(int c, int d) const {
    return second[static_cast<std::size_t>(c) * first.size() + static_cast<std::size_t>(d)];
  }
};

/// Central differences with Richardson extrapolation. With `max_order == 1`
/// only first partials are produced (`second` is left empty).
Derivatives differentiate(const VectorFunction& f, const Point& x, const DiffConfig& cfg,
                          int max_order = 2);

struct ScalarJet {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

ScalarJet differentiate_scalar(const ScalarFunction& f, const Point& x, const DiffConfig& cfg);
Eigen::VectorXd gradient(const ScalarFunction& f, const Point& x, const DiffConfig& cfg);

}  // namespace ordlab
