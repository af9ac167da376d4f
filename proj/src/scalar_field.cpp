#include "ordlab/scalar_field.hpp"

#include <cmath>
#include <sstream>

#include "ordlab/errors.hpp"

namespace ordlab {

ScalarField::ScalarField(int dimension, Evaluator evaluator, JetFn jet, std::string label)
    : dimension_(dimension), evaluator_(std::move(evaluator)), jet_(std::move(jet)), label_(std::move(label)) {
  if (dimension_ < 1) throw std::invalid_argument("scalar field dimension must be >= 1");
  if (!evaluator_) throw std::invalid_argument("scalar field has no evaluator");
}

double ScalarField::operator()(const Point& p) const {
  if (p.size() != dimension_) {
    throw DimensionMismatch("scalar field '" + label_ + "' evaluated at a point of wrong dimension");
  }
  const double v = evaluator_(p);
  if (!std::isfinite(v)) throw EvaluationError("scalar field '" + label_ + "' is not finite");
  return v;
}

ScalarJet ScalarField::jet(const Point& p, const DiffConfig& cfg) const {
  if (p.size() != dimension_) {
    throw DimensionMismatch("scalar field '" + label_ + "' evaluated at a point of wrong dimension");
  }
  if (jet_) return jet_(p);
  return differentiate_scalar([this](const Point& q) { return (*this)(q); }, p, cfg);
}

ScalarField ScalarField::without_closed_form() const {
  return ScalarField(dimension_, evaluator_, nullptr, label_);
}

namespace fields {

namespace {

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ScalarField constant(int n, double value) {
  return ScalarField(
      n, [value](const Point&) { return value; },
      [n, value](const Point&) {
        return ScalarJet{value, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
      },
      "const:" + format_real(value));
}

ScalarField coordinate(int n, int axis) {
  if (axis < 0 || axis >= n) throw std::invalid_argument("coordinate axis out of range");
  return ScalarField(
      n, [axis](const Point& x) { return x[axis]; },
      [n, axis](const Point& x) {
        ScalarJet j{x[axis], Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
        j.gradient[axis] = 1.0;
        return j;
      },
      "coord:" + std::to_string(axis));
}

ScalarField exp_quadratic(int n, double c) {
  return ScalarField(
      n, [c](const Point& x) { return std::exp(c * x.squaredNorm()); },
      [n, c](const Point& x) {
        const double v = std::exp(c * x.squaredNorm());
        ScalarJet j{v, 2.0 * c * v * x, Eigen::MatrixXd(n, n)};
        j.hessian = v * (4.0 * c * c * x * x.transpose() + 2.0 * c * Eigen::MatrixXd::Identity(n, n));
        return j;
      },
      "exp-quad:" + format_real(c));
}

ScalarField product(const ScalarField& a, const ScalarField& b) {
  if (a.dimension() != b.dimension()) throw DimensionMismatch("product of fields of different dimension");
  ScalarField::JetFn jet;
  if (a.has_closed_form() && b.has_closed_form()) {
    jet = [a, b](const Point& x) {
      const DiffConfig unused;
      const ScalarJet ja = a.jet(x, unused);
      const ScalarJet jb = b.jet(x, unused);
      ScalarJet j;
      j.value = ja.value * jb.value;
      j.gradient = ja.value * jb.gradient + jb.value * ja.gradient;
      j.hessian = ja.value * jb.hessian + jb.value * ja.hessian + ja.gradient * jb.gradient.transpose() +
                  jb.gradient * ja.gradient.transpose();
      return j;
    };
  }
  return ScalarField(
      a.dimension(), [a, b](const Point& x) { return a(x) * b(x); }, jet, a.label() + "*" + b.label());
}

ScalarField linear_combination(double a, const ScalarField& f, double b, const ScalarField& g) {
  if (f.dimension() != g.dimension()) throw DimensionMismatch("combination of fields of different dimension");
  ScalarField::JetFn jet;
  if (f.has_closed_form() && g.has_closed_form()) {
    jet = [a, f, b, g](const Point& x) {
      const DiffConfig unused;
      const ScalarJet jf = f.jet(x, unused);
      const ScalarJet jg = g.jet(x, unused);
      return ScalarJet{a * jf.value + b * jg.value, a * jf.gradient + b * jg.gradient,
                       a * jf.hessian + b * jg.hessian};
    };
  }
  return ScalarField(
      f.dimension(), [a, f, b, g](const Point& x) { return a * f(x) + b * g(x); }, jet);
}

ScalarField plane_wave(const Eigen::VectorXd& k) {
  const auto n = static_cast<int>(k.size());
  return ScalarField(
      n, [k](const Point& x) { return std::exp(k.dot(x)); },
      [k](const Point& x) {
        const double v = std::exp(k.dot(x));
        return ScalarJet{v, v * k, v * k * k.transpose()};
      });
}

ScalarField from_label(std::string_view label, int n) {
  const auto star = label.find('*');
  if (star != std::string_view::npos) {
    return product(from_label(label.substr(0, star), n), from_label(label.substr(star + 1), n));
  }
  const auto colon = label.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError("scalar field label '" + std::string(label) + "' has no parameter");
  }
  const std::string kind(label.substr(0, colon));
  const std::string arg(label.substr(colon + 1));
  try {
    std::size_t used = 0;
    if (kind == "coord") {
      const int axis = std::stoi(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
      return coordinate(n, axis);
    }
    const double v = std::stod(arg, &used);
    if (used != arg.size()) throw std::invalid_argument(arg);
    if (kind == "const") return constant(n, v);
    if (kind == "exp-quad") return exp_quadratic(n, v);
  } catch (const std::logic_error&) {
    throw ParseError("scalar field label '" + std::string(label) + "' has a malformed parameter");
  }
  throw ParseError("unknown scalar field label '" + std::string(label) + "'");
}

}  // namespace fields

}  // namespace ordlab
