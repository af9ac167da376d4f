#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "ordlab/diff.hpp"

namespace ordlab {

/// A twice-differentiable scalar function on a chart of R^n, optionally
/// with closed-form gradient and Hessian.
class ScalarField {
 public:
  using Evaluator = std::function<double(const Point&)>;
  using JetFn = std::function<ScalarJet(const Point&)>;

  ScalarField(int dimension, Evaluator evaluator, JetFn jet = nullptr, std::string label = {});

  int dimension() const { return dimension_; }
  const std::string& label() const { return label_; }
  bool has_closed_form() const { return static_cast<bool>(jet_); }

  double operator()(const Point& p) const;
  /// Closed-form jet when available, otherwise central differences.
  ScalarJet jet(const Point& p, const DiffConfig& cfg) const;

  ScalarField without_closed_form() const;

 private:
  int dimension_;
  Evaluator evaluator_;
  JetFn jet_;
  std::string label_;
};

namespace fields {

ScalarField constant(int dimension, double value);
ScalarField coordinate(int dimension, int axis);
/// exp(c |x|^2)
ScalarField exp_quadratic(int dimension, double c);
ScalarField product(const ScalarField& a, const ScalarField& b);
/// a*f + b*g
ScalarField linear_combination(double a, const ScalarField& f, double b, const ScalarField& g);
/// exp(k . x)
ScalarField plane_wave(const Eigen::VectorXd& k);

/// Parses labels produced by the builders above: "const:c", "coord:i",
/// "exp-quad:c" and products "A*B". Throws ParseError.
ScalarField from_label(std::string_view label, int dimension);

}  // namespace fields

}  // namespace ordlab
