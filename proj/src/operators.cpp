#include "ordlab/operators.hpp"

#include <cmath>
#include <sstream>

#include "ordlab/errors.hpp"
#include "ordlab/parallel.hpp"
#include "ordlab/tolerances.hpp"

namespace ordlab {

const char* to_string(OrderingKind kind) {
  switch (kind) {
    case OrderingKind::naive: return "Naive";
    case OrderingKind::laplace_beltrami: return "LaplaceBeltrami";
    case OrderingKind::conformal_lb: return "ConformalLB";
    case OrderingKind::power: return "PowerOrdering";
    case OrderingKind::sandwich: return "Sandwich";
  }
  return "?";
}

OperatorSpec::OperatorSpec(OrderingKind kind, double alpha, double beta, std::optional<Weights> weights)
    : kind_(kind), alpha_(alpha), beta_(beta), weights_(std::move(weights)) {}

OperatorSpec OperatorSpec::naive() { return {OrderingKind::naive, 0.0, 0.0, std::nullopt}; }
OperatorSpec OperatorSpec::laplace_beltrami() { return {OrderingKind::laplace_beltrami, 0.0, 0.0, std::nullopt}; }
OperatorSpec OperatorSpec::conformal_lb() { return {OrderingKind::conformal_lb, 0.0, 0.0, std::nullopt}; }

OperatorSpec OperatorSpec::power(double alpha_tilde, double beta_tilde) {
  if (!std::isfinite(alpha_tilde) || !std::isfinite(beta_tilde)) {
    throw std::invalid_argument("PowerOrdering exponents must be finite");
  }
  return {OrderingKind::power, alpha_tilde, beta_tilde, std::nullopt};
}

OperatorSpec OperatorSpec::sandwich(ScalarField pre, ScalarField mid, ScalarField post) {
  if (pre.dimension() != mid.dimension() || mid.dimension() != post.dimension()) {
    throw DimensionMismatch("sandwich weights have different dimensions");
  }
  return {OrderingKind::sandwich, 0.0, 0.0, Weights{std::move(pre), std::move(mid), std::move(post)}};
}

const OperatorSpec::Weights& OperatorSpec::weights() const {
  if (!weights_) throw std::logic_error("OperatorSpec: only Sandwich specs carry weights");
  return *weights_;
}

nlohmann::json OperatorSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  j["params"] = nlohmann::json::object();
  if (kind_ == OrderingKind::power) {
    j["params"]["alpha_tilde"] = alpha_;
    j["params"]["beta_tilde"] = beta_;
  } else if (kind_ == OrderingKind::sandwich) {
    j["params"]["w_pre"] = weights_->pre.label();
    j["params"]["w_mid"] = weights_->mid.label();
    j["params"]["w_post"] = weights_->post.label();
  }
  return j;
}

OperatorSpec OperatorSpec::from_json(const nlohmann::json& j, int dimension) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ParseError("OperatorSpec JSON needs a string 'kind'");
  }
  const std::string kind = j["kind"].get<std::string>();
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  try {
    if (kind == "Naive") return naive();
    if (kind == "LaplaceBeltrami") return laplace_beltrami();
    if (kind == "ConformalLB") return conformal_lb();
    if (kind == "PowerOrdering") {
      return power(params.at("alpha_tilde").get<double>(), params.at("beta_tilde").get<double>());
    }
    if (kind == "Sandwich") {
      return sandwich(fields::from_label(params.at("w_pre").get<std::string>(), dimension),
                      fields::from_label(params.at("w_mid").get<std::string>(), dimension),
                      fields::from_label(params.at("w_post").get<std::string>(), dimension));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("OperatorSpec JSON: ") + e.what());
  }
  throw ParseError("unknown operator kind '" + kind + "'");
}

double conformal_coupling(int n) {
  if (n < 2) throw std::invalid_argument("conformal coupling is undefined for n < 2");
  return (n - 2.0) / (4.0 * (n - 1.0));
}

namespace {

// g^s with its gradient and Hessian, from the determinant partials.
ScalarJet det_power(const MetricJet& jet, double s) {
  const double g = jet.det;
  const double v = std::pow(g, s);
  ScalarJet out;
  out.value = v;
  out.gradient = (s * v / g) * jet.d_det;
  out.hessian = (s * (s - 1.0) * v / (g * g)) * (jet.d_det * jet.d_det.transpose()) + (s * v / g) * jet.d2_det;
  return out;
}

struct DetExponents {
  double pre, mid, post;
};

DetExponents det_exponents(const OperatorSpec& spec) {
  if (spec.kind() == OrderingKind::power) {
    const double a = spec.alpha_tilde();
    const double b = spec.beta_tilde();
    return {0.5 + a + b, 0.5 + a, b};
  }
  return {0.5, 0.5, 0.0};
}

void require_positive(double w, const char* which, const Point& p) {
  if (!(w > 0.0)) {
    std::ostringstream msg;
    msg << "sandwich weight " << which << " = " << w << " is not positive at (" << p.transpose() << ")";
    throw EvaluationError(msg.str());
  }
}

struct DetInverse {
  double det;
  Eigen::MatrixXd inverse;
};

DetInverse det_inverse(const MetricField& metric, const Point& q) {
  const Eigen::MatrixXd g = metric.evaluate(q);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) {
    throw InvalidMetric("metric '" + metric.label() + "' is not positive definite on the stencil");
  }
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  return {diag.array().square().prod(), llt.solve(Eigen::MatrixXd::Identity(g.rows(), g.cols()))};
}

}  // namespace

Operator::Operator(OperatorSpec spec, MetricField metric) : spec_(std::move(spec)), metric_(std::move(metric)) {
  if (spec_.kind() == OrderingKind::conformal_lb && metric_.dimension() < 2) {
    throw std::invalid_argument("ConformalLB needs dimension n >= 2");
  }
  if (spec_.kind() == OrderingKind::sandwich && spec_.weights().pre.dimension() != metric_.dimension()) {
    throw DimensionMismatch("sandwich weights do not match the metric dimension");
  }
}

Operator build_operator(const OperatorSpec& spec, const MetricField& metric) { return Operator(spec, metric); }

double apply_operator(const Operator& op, const ScalarField& psi, const Point& p, const DiffConfig& cfg,
                      EvaluationRoute route) {
  return op.apply(psi, p, cfg, route);
}

double Operator::apply(const ScalarField& psi, const Point& p, const DiffConfig& cfg, EvaluationRoute route) const {
  if (psi.dimension() != metric_.dimension()) {
    throw DimensionMismatch("wavefunction and metric dimensions differ");
  }
  if (route == EvaluationRoute::automatic) {
    route = metric_.derivative_mode() == DerivativeMode::analytic ? EvaluationRoute::expanded
                                                                  : EvaluationRoute::nested;
  }
  if (route == EvaluationRoute::nested) return apply_nested(psi, p, cfg);
  return apply(psi, metric_jet(metric_, p, cfg), cfg);
}

double Operator::apply(const ScalarField& psi, const MetricJet& jet, const DiffConfig& cfg) const {
  const int n = jet.dimension();
  const Eigen::MatrixXd& G = jet.g_inv;
  const ScalarJet f = psi.jet(jet.point, cfg);

  if (spec_.kind() == OrderingKind::naive) {
    return -(G.array() * f.hessian.array()).sum();
  }

  ScalarJet pre;
  ScalarJet mid;
  ScalarJet post;
  if (spec_.kind() == OrderingKind::sandwich) {
    const auto& w = spec_.weights();
    pre = w.pre.jet(jet.point, cfg);
    mid = w.mid.jet(jet.point, cfg);
    post = w.post.jet(jet.point, cfg);
    require_positive(pre.value, "w_pre", jet.point);
    require_positive(mid.value, "w_mid", jet.point);
    require_positive(post.value, "w_post", jet.point);
  } else {
    const DetExponents e = det_exponents(spec_);
    pre = det_power(jet, e.pre);
    mid = det_power(jet, e.mid);
    post = det_power(jet, e.post);
  }

  // u = w_post psi
  const Eigen::VectorXd du = post.value * f.gradient + f.value * post.gradient;
  const Eigen::MatrixXd d2u = post.value * f.hessian + f.value * post.hessian +
                              post.gradient * f.gradient.transpose() + f.gradient * post.gradient.transpose();

  // d_a (w_mid g^{ab})
  Eigen::VectorXd flux_div = G * mid.gradient;
  for (int a = 0; a < n; ++a) {
    flux_div += mid.value * jet.d_ginv[static_cast<std::size_t>(a)].row(a).transpose();
  }
  double result = -(flux_div.dot(du) + mid.value * (G.array() * d2u.array()).sum()) / pre.value;

  if (spec_.kind() == OrderingKind::conformal_lb) {
    result += conformal_coupling(n) * ricci_scalar_christoffel(jet) * f.value;
  }
  return result;
}

double Operator::apply_nested(const ScalarField& psi, const Point& p, const DiffConfig& cfg) const {
  const int n = metric_.dimension();
  if (spec_.kind() == OrderingKind::naive) {
    const DetInverse di = det_inverse(metric_, p);
    const ScalarJet f = differentiate_scalar([&psi](const Point& q) { return psi(q); }, p, cfg);
    return -(di.inverse.array() * f.hessian.array()).sum();
  }

  const bool sandwich = spec_.kind() == OrderingKind::sandwich;
  const DetExponents e = det_exponents(spec_);
  auto weight = [&](const Point& q, double exponent, const ScalarField* field, const char* which) {
    if (sandwich) {
      const double w = (*field)(q);
      require_positive(w, which, q);
      return w;
    }
    return std::pow(det_inverse(metric_, q).det, exponent);
  };
  const ScalarField* wpre = sandwich ? &spec_.weights().pre : nullptr;
  const ScalarField* wmid = sandwich ? &spec_.weights().mid : nullptr;
  const ScalarField* wpost = sandwich ? &spec_.weights().post : nullptr;

  const ScalarFunction u = [&](const Point& q) { return weight(q, e.post, wpost, "w_post") * psi(q); };
  const VectorFunction flux = [&](const Point& q) -> Eigen::VectorXd {
    const DetInverse di = det_inverse(metric_, q);
    const double w = sandwich ? weight(q, e.mid, wmid, "w_mid") : std::pow(di.det, e.mid);
    return w * di.inverse * gradient(u, q, cfg);
  };
  const Derivatives d = differentiate(flux, p, cfg.widened(kNestedStepFactor), 1);
  double div = 0.0;
  for (int a = 0; a < n; ++a) div += d.first[static_cast<std::size_t>(a)][a];
  double result = -div / weight(p, e.pre, wpre, "w_pre");

  if (spec_.kind() == OrderingKind::conformal_lb) {
    result += conformal_coupling(n) * ricci_scalar_christoffel(metric_jet(metric_, p, cfg)) * psi(p);
  }
  return result;
}

namespace {

EffectivePotentialReport finish_report(const Point& p, double v_eff, Eigen::VectorXd drift, double ricci) {
  EffectivePotentialReport r;
  r.point = p;
  r.v_eff = v_eff;
  r.drift = std::move(drift);
  r.ricci = ricci;
  if (std::abs(ricci) > kCurvatureFloor) {
    r.fitted_c = -v_eff / ricci;
    r.residual = std::abs(v_eff + *r.fitted_c * ricci);
  }
  return r;
}

}  // namespace

EffectivePotentialReport effective_potential(const Operator& op, const MetricJet& jet, const DiffConfig& cfg) {
  const int n = jet.dimension();
  const Operator lb(OperatorSpec::laplace_beltrami(), op.metric());
  const ScalarField one = fields::constant(n, 1.0);
  const double v_eff = op.apply(one, jet, cfg) - lb.apply(one, jet, cfg);
  Eigen::VectorXd drift(n);
  for (int c = 0; c < n; ++c) {
    const ScalarField q = fields::coordinate(n, c);
    drift[c] = op.apply(q, jet, cfg) - lb.apply(q, jet, cfg) - v_eff * jet.point[c];
  }
  return finish_report(jet.point, v_eff, std::move(drift), ricci_scalar_christoffel(jet));
}

EffectivePotentialReport effective_potential(const OperatorSpec& spec, const MetricField& metric, const Point& p,
                                             const DiffConfig& cfg, EvaluationRoute route) {
  const Operator op = build_operator(spec, metric);
  if (route == EvaluationRoute::automatic) {
    route = metric.derivative_mode() == DerivativeMode::analytic ? EvaluationRoute::expanded
                                                                 : EvaluationRoute::nested;
  }
  const MetricJet jet = metric_jet(metric, p, cfg);
  if (route == EvaluationRoute::expanded) return effective_potential(op, jet, cfg);

  const int n = metric.dimension();
  const Operator lb(OperatorSpec::laplace_beltrami(), metric);
  const ScalarField one = fields::constant(n, 1.0);
  const double v_eff = op.apply(one, p, cfg, route) - lb.apply(one, p, cfg, route);
  Eigen::VectorXd drift(n);
  for (int c = 0; c < n; ++c) {
    const ScalarField q = fields::coordinate(n, c);
    drift[c] = op.apply(q, p, cfg, route) - lb.apply(q, p, cfg, route) - v_eff * p[c];
  }
  return finish_report(p, v_eff, std::move(drift), ricci_scalar_christoffel(jet));
}

std::vector<EffectivePotentialReport> effective_potential_batch(const OperatorSpec& spec, const MetricField& metric,
                                                                std::span<const Point> points, const DiffConfig& cfg,
                                                                EvaluationRoute route) {
  return parallel_map<EffectivePotentialReport>(
      points.size(), [&](std::size_t i) { return effective_potential(spec, metric, points[i], cfg, route); });
}

CurvatureFit fit_curvature_coefficient(std::span<const double> v_eff, std::span<const double> ricci) {
  if (v_eff.size() != ricci.size()) throw std::invalid_argument("curvature fit: length mismatch");
  double vr = 0.0;
  double rr = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < v_eff.size(); ++i) {
    vr += v_eff[i] * ricci[i];
    rr += ricci[i] * ricci[i];
    vv += v_eff[i] * v_eff[i];
  }
  CurvatureFit fit;
  fit.points = v_eff.size();
  fit.c = rr > 0.0 ? -vr / rr : 0.0;
  double res = 0.0;
  for (std::size_t i = 0; i < v_eff.size(); ++i) {
    const double r = v_eff[i] + fit.c * ricci[i];
    res += r * r;
  }
  fit.residual = std::sqrt(res);
  fit.relative_residual = vv > 0.0 ? fit.residual / std::sqrt(vv) : 0.0;
  return fit;
}

CurvatureFit fit_curvature_coefficient(std::span<const EffectivePotentialReport> batch) {
  std::vector<double> v;
  std::vector<double> r;
  for (const auto& rep : batch) {
    v.push_back(rep.v_eff);
    r.push_back(rep.ricci);
  }
  return fit_curvature_coefficient(v, r);
}

std::string to_csv(std::span<const EffectivePotentialReport> batch) {
  std::ostringstream os;
  os.precision(17);
  if (batch.empty()) return {};
  const auto n = batch.front().point.size();
  for (Eigen::Index c = 0; c < n; ++c) os << "point_" << c << ",";
  os << "V_eff,";
  for (Eigen::Index c = 0; c < n; ++c) os << "drift_" << c << ",";
  os << "ricci,fitted_C,residual\n";
  for (const auto& r : batch) {
    for (Eigen::Index c = 0; c < n; ++c) os << r.point[c] << ",";
    os << r.v_eff << ",";
    for (Eigen::Index c = 0; c < n; ++c) os << r.drift[c] << ",";
    os << r.ricci << ",";
    if (r.fitted_c) os << *r.fitted_c;
    os << "," << r.residual << "\n";
  }
  return os.str();
}

nlohmann::json to_json(const EffectivePotentialReport& r) {
  nlohmann::json j;
  j["point"] = point_to_json(r.point);
  j["V_eff"] = r.v_eff;
  j["drift"] = point_to_json(r.drift);
  j["ricci"] = r.ricci;
  j["fitted_C"] = r.fitted_c ? nlohmann::json(*r.fitted_c) : nlohmann::json(nullptr);
  j["residual"] = r.residual;
  return j;
}

OperatorSpec similarity_ordering(const ScalarField& f, const ScalarField& h, std::span<const Point> probes) {
  for (const auto& p : probes) {
    if (!(f(p) > 0.0) || !(h(p) > 0.0)) {
      std::ostringstream msg;
      msg << "similarity ordering needs positive f and h; violated at (" << p.transpose() << ")";
      throw EvaluationError(msg.str());
    }
  }
  return OperatorSpec::sandwich(fields::product(f, h), f, h);
}

}  // namespace ordlab
