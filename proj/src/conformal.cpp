#include "ordlab/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ordlab/errors.hpp"
#include "ordlab/operators.hpp"
#include "ordlab/parallel.hpp"
#include "ordlab/tolerances.hpp"

namespace ordlab {

ConformalJet conformal_jet(const MetricJet& jet) {
  return {jet.point, jet.dimension(), jet.det, jet.d_det, jet.d2_det};
}

double conformal_ricci_with_coefficient(const ConformalJet& jet, double gradient_coefficient) {
  const int n = jet.n;
  if (n < 2) throw std::invalid_argument("conformal curvature needs n >= 2");
  if (!(jet.det > 0.0)) throw InvalidMetric("conformal jet has non-positive determinant");
  const double g = jet.det;
  const double laplacian = jet.d2_det.trace() / g;
  const double grad_sq = jet.d_det.squaredNorm() / (g * g);
  return -(1.0 - 1.0 / n) * std::pow(g, -1.0 / n) * (laplacian - gradient_coefficient * grad_sq);
}

double conformal_ricci(const ConformalJet& jet) {
  return conformal_ricci_with_coefficient(jet, 1.0 / (2.0 * jet.n) + 0.75);
}

const char* to_string(ExponentSolution::Kind kind) {
  return kind == ExponentSolution::Kind::trivial ? "trivial" : "conformal";
}

Rational curvature_coefficient_for_beta(Rational beta, int n) {
  if (n < 2) throw std::invalid_argument("exponent relation needs n >= 2");
  return -beta / (Rational(1) - Rational(1, n));
}

std::vector<ExponentSolution> solve_exponents(int n) {
  if (n < 2) throw std::invalid_argument("solve_exponents needs n >= 2");
  const Rational beta = Rational(1, 4) - Rational(1, 2 * n);
  ExponentSolution conformal{-2 * beta, beta, curvature_coefficient_for_beta(beta, n),
                             ExponentSolution::Kind::conformal};
  return {ExponentSolution{}, conformal};
}

namespace {

nlohmann::json rational_json(const Rational& r) {
  return {{"num", r.numerator()}, {"den", r.denominator()}, {"value", boost::rational_cast<double>(r)}};
}

}  // namespace

nlohmann::json to_json(const ExponentSolution& s) {
  return {{"kind", to_string(s.kind)},
          {"alpha_tilde", rational_json(s.alpha_tilde)},
          {"beta_tilde", rational_json(s.beta_tilde)},
          {"C", rational_json(s.c)}};
}

int VerificationReport::root_count() const {
  int count = 0;
  for (const auto& r : roots) count += r.multiplicity;
  return count;
}

namespace {

struct Scan {
  const MetricField& metric;
  std::vector<MetricJet> jets;
  Eigen::VectorXd ricci;
  DiffConfig cfg;

  Eigen::VectorXd potentials(double alpha, double beta) const {
    const Operator op(OperatorSpec::power(alpha, beta), metric);
    const Operator lb(OperatorSpec::laplace_beltrami(), metric);
    const ScalarField one = fields::constant(metric.dimension(), 1.0);
    Eigen::VectorXd v(static_cast<Eigen::Index>(jets.size()));
    for (std::size_t i = 0; i < jets.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = op.apply(one, jets[i], cfg) - lb.apply(one, jets[i], cfg);
    }
    return v;
  }

  // Residual of the best single-C fit V = -C R.
  Eigen::VectorXd residual(double beta, double* fitted_c = nullptr) const {
    const Eigen::VectorXd v = potentials(-2.0 * beta, beta);
    const double rr = ricci.squaredNorm();
    const double c = rr > 0.0 ? -v.dot(ricci) / rr : 0.0;
    if (fitted_c) *fitted_c = c;
    return v + c * ricci;
  }
};

double bisect(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a);
  if (fa == 0.0) return a;
  if (f(b) == 0.0) return b;
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

VerificationReport verify_two_solutions(int n, const MetricField& metric, std::span<const Point> samples,
                                        const DiffConfig& cfg, const VerificationOptions& options) {
  if (n < 2) throw std::invalid_argument("verify_two_solutions needs n >= 2");
  if (metric.dimension() != n) throw std::invalid_argument("metric dimension differs from n");
  if (samples.size() < 3) throw std::invalid_argument("verify_two_solutions needs at least 3 samples");
  if (options.grid_intervals < 4) throw std::invalid_argument("scan grid too coarse");

  Scan scan{metric, {}, Eigen::VectorXd(static_cast<Eigen::Index>(samples.size())), cfg};
  scan.jets = parallel_map<MetricJet>(samples.size(), [&](std::size_t i) { return metric_jet(metric, samples[i], cfg); });
  const double curvature_tol = tolerances_for(metric.derivative_mode()).curvature;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double chr = ricci_scalar_christoffel(scan.jets[i]);
    const double conf = conformal_ricci(conformal_jet(scan.jets[i]));
    if (std::abs(conf - chr) > curvature_tol * std::max(1.0, std::abs(chr))) {
      throw InvalidMetric("metric '" + metric.label() + "' is not conformally flat: conformal curvature " +
                          std::to_string(conf) + " vs Christoffel " + std::to_string(chr));
    }
    scan.ricci[static_cast<Eigen::Index>(i)] = chr;
  }

  VerificationReport report;
  report.n = n;
  report.metric = metric.label();
  report.samples = samples.size();
  report.root_tolerance = options.beta_tolerance;

  // (i) drift vanishes exactly on a + 2b = 0
  {
    double on_line = 0.0;
    double off_line = std::numeric_limits<double>::infinity();
    for (int ia = -2; ia <= 2; ++ia) {
      for (int ib = -2; ib <= 2; ++ib) {
        const double a = 0.5 * ia;
        const double b = 0.5 * ib;
        const Operator op(OperatorSpec::power(a, b), metric);
        double worst = 0.0;
        for (const auto& jet : scan.jets) {
          worst = std::max(worst, effective_potential(op, jet, cfg).drift.lpNorm<Eigen::Infinity>());
        }
        if (ia + 2 * ib == 0) {
          on_line = std::max(on_line, worst);
        } else {
          off_line = std::min(off_line, worst);
        }
      }
    }
    report.max_drift_on_line = on_line;
    report.min_drift_off_line = off_line;
    report.drift_condition_checked = on_line <= options.drift_tolerance && off_line > options.drift_tolerance;
  }

  // (ii) scan along a = -2b
  const int intervals = options.grid_intervals;
  const auto beta_at = [&](int i) {
    return options.beta_lo + (options.beta_hi - options.beta_lo) * static_cast<double>(i) / intervals;
  };
  const auto residuals = parallel_map<Eigen::VectorXd>(static_cast<std::size_t>(intervals + 1),
                                                       [&](std::size_t i) { return scan.residual(beta_at(static_cast<int>(i))); });
  std::size_t widest = 0;
  for (std::size_t i = 1; i < residuals.size(); ++i) {
    if (residuals[i].norm() > residuals[widest].norm()) widest = i;
  }
  const double r_max = residuals[widest].norm();
  if (r_max == 0.0) {
    // Every ordering on the line is proportional to R: no isolated roots.
    return report;
  }
  const Eigen::VectorXd direction = residuals[widest] / r_max;
  const auto s = [&](double beta) { return scan.residual(beta).dot(direction); };
  std::vector<double> grid_s(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) grid_s[i] = residuals[i].dot(direction);
  const double threshold = options.residual_tolerance * r_max;

  struct Candidate {
    double beta;
    int multiplicity;
  };
  std::vector<Candidate> found;
  const double h_slope = 1e-6;
  const auto slope = [&](double beta) { return (s(beta + h_slope) - s(beta - h_slope)) / (2.0 * h_slope); };
  const auto add_extremum = [&](int i) {
    const double a = beta_at(std::max(i - 1, 0));
    const double b = beta_at(std::min(i + 1, intervals));
    double beta = beta_at(i);
    if ((slope(a) < 0.0) != (slope(b) < 0.0)) beta = bisect(slope, a, b, options.beta_tolerance);
    if (scan.residual(beta).norm() <= threshold) found.push_back({beta, 2});
  };

  for (int i = 0; i < intervals; ++i) {
    if (grid_s[static_cast<std::size_t>(i)] * grid_s[static_cast<std::size_t>(i + 1)] < 0.0) {
      found.push_back({bisect(s, beta_at(i), beta_at(i + 1), options.beta_tolerance), 1});
    }
  }
  for (int i = 1; i < intervals; ++i) {
    const double prev = grid_s[static_cast<std::size_t>(i - 1)];
    const double cur = grid_s[static_cast<std::size_t>(i)];
    const double next = grid_s[static_cast<std::size_t>(i + 1)];
    if (std::abs(cur) <= threshold) {
      if (prev * next < 0.0) {
        found.push_back({bisect(s, beta_at(i - 1), beta_at(i + 1), options.beta_tolerance), 1});
      } else {
        add_extremum(i);
      }
    } else if (std::abs(cur) <= std::abs(prev) && std::abs(cur) <= std::abs(next) && prev * cur > 0.0 &&
               cur * next > 0.0) {
      add_extremum(i);
    }
  }

  std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) { return a.beta < b.beta; });
  std::vector<Candidate> merged;
  for (const auto& c : found) {
    if (!merged.empty() && std::abs(c.beta - merged.back().beta) < 1e-7) {
      merged.back().multiplicity = std::max(merged.back().multiplicity, c.multiplicity);
      continue;
    }
    merged.push_back(c);
  }

  for (const auto& c : merged) {
    ExponentRoot root;
    root.beta = c.beta;
    root.alpha = -2.0 * c.beta;
    const Eigen::VectorXd r = scan.residual(c.beta, &root.fitted_c);
    root.residual = r.norm();
    root.relative_residual = root.residual / r_max;
    root.multiplicity = c.multiplicity;
    report.roots.push_back(root);
  }
  return report;
}

nlohmann::json to_json(const VerificationReport& report) {
  nlohmann::json roots = nlohmann::json::array();
  for (const auto& r : report.roots) {
    roots.push_back({{"beta", r.beta},
                     {"alpha", r.alpha},
                     {"fitted_C", r.fitted_c},
                     {"residual", r.residual},
                     {"relative_residual", r.relative_residual},
                     {"multiplicity", r.multiplicity}});
  }
  return {{"n", report.n},
          {"metric", report.metric},
          {"samples", report.samples},
          {"roots", roots},
          {"root_count", report.root_count()},
          {"drift_condition_checked", report.drift_condition_checked},
          {"max_drift_on_line", report.max_drift_on_line},
          {"min_drift_off_line", report.min_drift_off_line}};
}

}  // namespace ordlab
