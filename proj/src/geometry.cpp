#include "ordlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ordlab/errors.hpp"
#include "ordlab/parallel.hpp"

namespace ordlab {

namespace {

void require_dimension(const Point& p, int dimension, const std::string& what) {
  if (p.size() != dimension) {
    std::ostringstream msg;
    msg << what << ": point has " << p.size() << " coordinates, expected " << dimension;
    throw DimensionMismatch(msg.str());
  }
}

struct Factorized {
  Eigen::MatrixXd inverse;
  double det;
};

// Cholesky doubles as the positive-definiteness test.
Factorized factorize(const Eigen::MatrixXd& g, const std::string& label, const Point& p) {
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "metric '" << label << "' is not positive definite at (" << p.transpose() << ")";
    throw InvalidMetric(msg.str());
  }
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  double det = 1.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) det *= diag[i] * diag[i];
  if (!(det > 0.0) || !std::isfinite(det) ||
      diag.minCoeff() <= 1e-12 * std::max(1.0, diag.maxCoeff())) {
    std::ostringstream msg;
    msg << "metric '" << label << "' is singular at (" << p.transpose() << ")";
    throw SingularMatrix(msg.str());
  }
  Factorized out{llt.solve(Eigen::MatrixXd::Identity(g.rows(), g.cols())), det};
  out.inverse = 0.5 * (out.inverse + out.inverse.transpose()).eval();
  return out;
}

Eigen::Map<const Eigen::MatrixXd> as_matrix(const Eigen::VectorXd& v, Eigen::Index offset,
                                            Eigen::Index n) {
  return {v.data() + offset, n, n};
}

MetricJet analytic_jet(const MetricField& metric, const Point& p) {
  const int n = metric.dimension();
  MetricPartials part = *metric.partials(p);
  if (part.g.rows() != n || part.dg.size() != static_cast<std::size_t>(n) ||
      part.d2g.size() != static_cast<std::size_t>(n * n)) {
    throw DimensionMismatch("metric '" + metric.label() + "': partials have wrong shape");
  }
  MetricJet jet;
  jet.point = p;
  jet.mode = DerivativeMode::analytic;
  jet.g = part.g;
  const Factorized fac = factorize(jet.g, metric.label(), p);
  jet.g_inv = fac.inverse;
  jet.det = fac.det;
  jet.dg = std::move(part.dg);
  jet.d2g = std::move(part.d2g);

  const Eigen::MatrixXd& G = jet.g_inv;
  std::vector<Eigen::MatrixXd> Gdg(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) Gdg[static_cast<std::size_t>(c)] = G * jet.dg[static_cast<std::size_t>(c)];

  jet.d_det.resize(n);
  jet.d2_det.resize(n, n);
  for (int a = 0; a < n; ++a) {
    jet.d_det[a] = jet.det * Gdg[static_cast<std::size_t>(a)].trace();
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double ta = Gdg[static_cast<std::size_t>(a)].trace();
      const double tb = Gdg[static_cast<std::size_t>(b)].trace();
      const double cross = (Gdg[static_cast<std::size_t>(b)] * Gdg[static_cast<std::size_t>(a)]).trace();
      const double second = (G * jet.d2g_at(a, b)).trace();
      jet.d2_det(a, b) = jet.det * (ta * tb - cross + second);
    }
  }

  jet.d_ginv.resize(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    jet.d_ginv[static_cast<std::size_t>(c)] = -Gdg[static_cast<std::size_t>(c)] * G;
  }
  jet.d2_ginv.resize(static_cast<std::size_t>(n * n));
  for (int c = 0; c < n; ++c) {
    for (int d = 0; d < n; ++d) {
      const auto& A = Gdg[static_cast<std::size_t>(c)];
      const auto& B = Gdg[static_cast<std::size_t>(d)];
      jet.d2_ginv[static_cast<std::size_t>(c * n + d)] = B * A * G + A * B * G - G * jet.d2g_at(c, d) * G;
    }
  }
  return jet;
}

MetricJet numeric_jet(const MetricField& metric, const Point& p, const DiffConfig& cfg) {
  const int n = metric.dimension();
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;

  // Packs [g, det, g_inv] so one stencil sweep differentiates all three.
  const VectorFunction packed = [&metric, nn](const Point& q) {
    const Eigen::MatrixXd g = metric.evaluate(q);
    const Factorized fac = factorize(g, metric.label(), q);
    Eigen::VectorXd out(2 * nn + 1);
    out.head(nn) = Eigen::Map<const Eigen::VectorXd>(g.data(), nn);
    out[nn] = fac.det;
    out.tail(nn) = Eigen::Map<const Eigen::VectorXd>(fac.inverse.data(), nn);
    return out;
  };
  const Derivatives d = differentiate(packed, p, cfg, 2);

  MetricJet jet;
  jet.point = p;
  jet.mode = DerivativeMode::numeric;
  jet.g = metric.evaluate(p);
  const Factorized fac = factorize(jet.g, metric.label(), p);
  jet.g_inv = fac.inverse;
  jet.det = fac.det;

  jet.dg.resize(static_cast<std::size_t>(n));
  jet.d_ginv.resize(static_cast<std::size_t>(n));
  jet.d_det.resize(n);
  for (int c = 0; c < n; ++c) {
    const auto& v = d.first[static_cast<std::size_t>(c)];
    jet.dg[static_cast<std::size_t>(c)] = as_matrix(v, 0, n);
    jet.d_det[c] = v[nn];
    jet.d_ginv[static_cast<std::size_t>(c)] = as_matrix(v, nn + 1, n);
  }
  jet.d2g.resize(static_cast<std::size_t>(n * n));
  jet.d2_ginv.resize(static_cast<std::size_t>(n * n));
  jet.d2_det.resize(n, n);
  for (int c = 0; c < n; ++c) {
    for (int e = 0; e < n; ++e) {
      const auto& v = d.hessian_entry(c, e);
      jet.d2g[static_cast<std::size_t>(c * n + e)] = as_matrix(v, 0, n);
      jet.d2_det(c, e) = v[nn];
      jet.d2_ginv[static_cast<std::size_t>(c * n + e)] = as_matrix(v, nn + 1, n);
    }
  }
  return jet;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

MetricField::MetricField(std::string label, int dimension, Evaluator evaluator, PartialsFn partials)
    : label_(std::move(label)),
      dimension_(dimension),
      evaluator_(std::move(evaluator)),
      partials_(std::move(partials)) {
  if (dimension_ < 1 || dimension_ > 6) {
    throw std::invalid_argument("metric dimension must be in [1, 6], got " + std::to_string(dimension_));
  }
  if (!evaluator_) throw std::invalid_argument("metric '" + label_ + "' has no evaluator");
  box_.lo = Eigen::VectorXd::Constant(dimension_, -1.0);
  box_.hi = Eigen::VectorXd::Constant(dimension_, 1.0);
}

Eigen::MatrixXd MetricField::evaluate(const Point& p) const {
  require_dimension(p, dimension_, "metric '" + label_ + "'");
  Eigen::MatrixXd g = evaluator_(p);
  if (g.rows() != dimension_ || g.cols() != dimension_) {
    throw DimensionMismatch("metric '" + label_ + "' evaluator returned wrong shape");
  }
  if (!g.allFinite()) {
    throw EvaluationError("metric '" + label_ + "' is not finite at the queried point");
  }
  if ((g - g.transpose()).cwiseAbs().maxCoeff() != 0.0) {
    throw InvalidMetric("metric '" + label_ + "' evaluator is not symmetric");
  }
  return g;
}

std::optional<MetricPartials> MetricField::partials(const Point& p) const {
  if (!partials_) return std::nullopt;
  require_dimension(p, dimension_, "metric '" + label_ + "'");
  return partials_(p);
}

MetricField MetricField::as_numeric() const {
  MetricField out = *this;
  out.partials_ = nullptr;
  return out;
}

MetricField& MetricField::set_conformally_flat(bool flag) {
  conformally_flat_ = flag;
  return *this;
}

MetricField& MetricField::set_sample_box(SampleBox box) {
  if (box.lo.size() != dimension_ || box.hi.size() != dimension_) {
    throw DimensionMismatch("sample box dimension mismatch for metric '" + label_ + "'");
  }
  box_ = std::move(box);
  return *this;
}

MetricJet metric_jet(const MetricField& metric, const Point& p, const DiffConfig& cfg) {
  require_dimension(p, metric.dimension(), "metric_jet");
  if (metric.derivative_mode() == DerivativeMode::analytic) {
    return analytic_jet(metric, p);
  }
  return numeric_jet(metric, p, cfg);
}

JetDefects jet_defects(const MetricJet& jet) {
  const int n = jet.dimension();
  JetDefects out;
  out.symmetry = std::max(max_abs(jet.g - jet.g.transpose()), max_abs(jet.g_inv - jet.g_inv.transpose()));
  out.inverse = max_abs(jet.g * jet.g_inv - Eigen::MatrixXd::Identity(n, n));
  const double det_scale = std::max(1.0, std::abs(jet.det));
  for (int c = 0; c < n; ++c) {
    const auto& dgc = jet.dg[static_cast<std::size_t>(c)];
    out.symmetry = std::max(out.symmetry, max_abs(dgc - dgc.transpose()));
    const double jacobi = jet.det * (jet.g_inv * dgc).trace();
    out.jacobi = std::max(out.jacobi, std::abs(jet.d_det[c] - jacobi) / det_scale);
    out.inverse_derivative = std::max(
        out.inverse_derivative, max_abs(jet.d_ginv[static_cast<std::size_t>(c)] + jet.g_inv * dgc * jet.g_inv));
    for (int d = 0; d < n; ++d) {
      const auto& h = jet.d2g_at(c, d);
      out.symmetry = std::max(out.symmetry, max_abs(h - h.transpose()));
      out.mixed_partials = std::max(out.mixed_partials, max_abs(h - jet.d2g_at(d, c)));
    }
  }
  return out;
}

double RicciAddends::total() const {
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

RicciAddends ricci_direct_addends(const MetricJet& jet) {
  const int n = jet.dimension();
  const Eigen::MatrixXd& G = jet.g_inv;
  const double g = jet.det;

  double lap_det = 0.0;
  double grad_det_sq = 0.0;
  double det_div = 0.0;
  double cross = 0.0;
  double trace_sq = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      lap_det += G(a, b) * jet.d2_det(a, b) / g;
      grad_det_sq += G(a, b) * jet.d_det[a] * jet.d_det[b] / (g * g);
      det_div += jet.d_det[b] / g * jet.d_ginv[static_cast<std::size_t>(a)](a, b);
      for (int l = 0; l < n; ++l) {
        const double dGl = jet.d_ginv[static_cast<std::size_t>(l)](a, b);
        for (int r = 0; r < n; ++r) {
          cross += dGl * jet.dg[static_cast<std::size_t>(b)](r, a) * G(l, r);
          trace_sq += dGl * jet.dg[static_cast<std::size_t>(r)](a, b) * G(l, r);
        }
      }
    }
  }
  RicciAddends out;
  out.terms = {-lap_det, 0.75 * grad_det_sq, -det_div, -0.5 * cross, 0.25 * trace_sq};
  return out;
}

double ricci_scalar_direct(const MetricJet& jet) { return ricci_direct_addends(jet).total(); }

double ginv_double_divergence(const MetricJet& jet) {
  const int n = jet.dimension();
  double s = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) s += jet.d2_ginv_at(a, b)(a, b);
  }
  return s;
}

double ricci_scalar_six_term(const MetricJet& jet) {
  return ricci_scalar_direct(jet) - ginv_double_divergence(jet);
}

double ricci_scalar_christoffel(const MetricJet& jet) {
  const int n = jet.dimension();
  const auto N = static_cast<std::size_t>(n);
  const Eigen::MatrixXd& G = jet.g_inv;
  auto idx3 = [N](int c, int a, int b) { return (static_cast<std::size_t>(c) * N + static_cast<std::size_t>(a)) * N + static_cast<std::size_t>(b); };

  // Lowered symbols [ab,d] = 1/2 (g_{da,b} + g_{db,a} - g_{ab,d}) and their derivatives.
  std::vector<double> lowered(N * N * N);
  std::vector<double> d_lowered(N * N * N * N);  // [e][d][a][b]
  for (int d = 0; d < n; ++d) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        lowered[idx3(d, a, b)] = 0.5 * (jet.dg[static_cast<std::size_t>(b)](d, a) +
                                        jet.dg[static_cast<std::size_t>(a)](d, b) -
                                        jet.dg[static_cast<std::size_t>(d)](a, b));
        for (int e = 0; e < n; ++e) {
          d_lowered[static_cast<std::size_t>(e) * N * N * N + idx3(d, a, b)] =
              0.5 * (jet.d2g_at(b, e)(d, a) + jet.d2g_at(a, e)(d, b) - jet.d2g_at(d, e)(a, b));
        }
      }
    }
  }

  std::vector<Eigen::MatrixXd> dG(N);
  for (int e = 0; e < n; ++e) dG[static_cast<std::size_t>(e)] = -G * jet.dg[static_cast<std::size_t>(e)] * G;

  std::vector<double> gamma(N * N * N, 0.0);           // [c][a][b]
  std::vector<double> d_gamma(N * N * N * N, 0.0);     // [e][c][a][b]
  for (int c = 0; c < n; ++c) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) s += G(c, d) * lowered[idx3(d, a, b)];
        gamma[idx3(c, a, b)] = s;
        for (int e = 0; e < n; ++e) {
          double t = 0.0;
          for (int d = 0; d < n; ++d) {
            t += dG[static_cast<std::size_t>(e)](c, d) * lowered[idx3(d, a, b)] +
                 G(c, d) * d_lowered[static_cast<std::size_t>(e) * N * N * N + idx3(d, a, b)];
          }
          d_gamma[static_cast<std::size_t>(e) * N * N * N + idx3(c, a, b)] = t;
        }
      }
    }
  }
  auto dgam = [&](int e, int c, int a, int b) { return d_gamma[static_cast<std::size_t>(e) * N * N * N + idx3(c, a, b)]; };

  double R = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double ricci_ab = 0.0;
      for (int c = 0; c < n; ++c) {
        ricci_ab += dgam(c, c, a, b) - dgam(b, c, a, c);
        for (int d = 0; d < n; ++d) {
          ricci_ab += gamma[idx3(c, c, d)] * gamma[idx3(d, a, b)] - gamma[idx3(c, a, d)] * gamma[idx3(d, c, b)];
        }
      }
      R += G(a, b) * ricci_ab;
    }
  }
  return R;
}

AuditReport formula_audit(const MetricField& metric, std::span<const Point> samples,
                          const DiffConfig& cfg, double tolerance, CurvatureFormula formula) {
  if (samples.empty()) throw std::invalid_argument("formula_audit needs at least one sample point");
  struct Row {
    double direct, christoffel, missing;
  };
  const auto rows = parallel_map<Row>(samples.size(), [&](std::size_t i) {
    const MetricJet jet = metric_jet(metric, samples[i], cfg);
    const double five = ricci_scalar_direct(jet);
    const double missing = -ginv_double_divergence(jet);
    return Row{formula == CurvatureFormula::five_term ? five : five + missing,
               ricci_scalar_christoffel(jet), missing};
  });

  AuditReport report;
  report.metric = metric.label();
  report.mode = metric.derivative_mode();
  report.tolerance = tolerance;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Row& r = rows[i];
    const double abs_diff = std::abs(r.direct - r.christoffel);
    const double scale = std::abs(r.christoffel);
    report.points.push_back(samples[i]);
    report.direct.push_back(r.direct);
    report.christoffel.push_back(r.christoffel);
    report.missing_term.push_back(r.missing);
    report.abs_diff.push_back(abs_diff);
    report.rel_diff.push_back(scale > 0.0 ? abs_diff / scale : abs_diff);
    const bool ok = abs_diff <= tolerance * std::max(1.0, scale);
    report.point_pass.push_back(ok);
    report.pass = report.pass && ok;
  }
  return report;
}

nlohmann::json point_to_json(const Point& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) arr.push_back(p[i]);
  return arr;
}

nlohmann::json to_json(const AuditReport& report) {
  nlohmann::json j;
  j["metric"] = report.metric;
  j["mode"] = to_string(report.mode);
  j["tolerance"] = report.tolerance;
  j["points"] = nlohmann::json::array();
  for (const auto& p : report.points) j["points"].push_back(point_to_json(p));
  j["direct"] = report.direct;
  j["christoffel"] = report.christoffel;
  j["abs_diff"] = report.abs_diff;
  j["rel_diff"] = report.rel_diff;
  j["missing_term"] = report.missing_term;
  j["point_pass"] = report.point_pass;
  j["pass"] = report.pass;
  return j;
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::vector<Point> sample_points(const MetricField& metric, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const SampleBox& box = metric.sample_box();
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Point p(metric.dimension());
    for (int c = 0; c < metric.dimension(); ++c) {
      p[c] = box.lo[c] + (box.hi[c] - box.lo[c]) * unit_uniform(rng());
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace ordlab
