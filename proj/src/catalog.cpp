#include "ordlab/catalog.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ordlab/errors.hpp"

namespace ordlab {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

long parse_int(const std::string& s, std::string_view label) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("metric label '" + std::string(label) + "': '" + s + "' is not an integer");
  }
  return v;
}

double parse_real(const std::string& s, std::string_view label) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("metric label '" + std::string(label) + "': '" + s + "' is not a real number");
  }
}

int parse_dimension(const std::string& s, std::string_view label) {
  const long n = parse_int(s, label);
  if (n < 1 || n > 6) {
    throw ParseError("metric label '" + std::string(label) + "': dimension must be in [1, 6]");
  }
  return static_cast<int>(n);
}

void expect_fields(const std::vector<std::string>& parts, std::size_t count, std::string_view label,
                   const char* form) {
  if (parts.size() != count) {
    throw ParseError("metric label '" + std::string(label) + "' does not match " + form);
  }
}

MetricField euclidean(int n) {
  const std::string label = "euclidean:" + std::to_string(n);
  MetricField m(
      label, n, [n](const Point&) { return Eigen::MatrixXd::Identity(n, n).eval(); },
      [n](const Point&) {
        MetricPartials p;
        p.g = Eigen::MatrixXd::Identity(n, n);
        p.dg.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));
        p.d2g.assign(static_cast<std::size_t>(n * n), Eigen::MatrixXd::Zero(n, n));
        return p;
      });
  m.set_conformally_flat(true);
  return m;
}

MetricField spherical3() {
  auto eval = [](const Point& q) {
    const double r = q[0];
    const double s = std::sin(q[1]);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
    g(0, 0) = 1.0;
    g(1, 1) = r * r;
    g(2, 2) = r * r * s * s;
    return g;
  };
  auto partials = [eval](const Point& q) {
    const double r = q[0];
    const double s = std::sin(q[1]);
    const double c = std::cos(q[1]);
    MetricPartials p;
    p.g = eval(q);
    p.dg.assign(3, Eigen::MatrixXd::Zero(3, 3));
    p.d2g.assign(9, Eigen::MatrixXd::Zero(3, 3));
    p.dg[0](1, 1) = 2.0 * r;
    p.dg[0](2, 2) = 2.0 * r * s * s;
    p.dg[1](2, 2) = 2.0 * r * r * s * c;
    p.d2g[0](1, 1) = 2.0;
    p.d2g[0](2, 2) = 2.0 * s * s;
    p.d2g[1](2, 2) = 4.0 * r * s * c;
    p.d2g[3](2, 2) = 4.0 * r * s * c;
    p.d2g[4](2, 2) = 2.0 * r * r * (c * c - s * s);
    return p;
  };
  MetricField m("spherical3", 3, eval, partials);
  // Regular points only: keep away from r = 0 and the polar axis.
  SampleBox box;
  box.lo = Eigen::Vector3d(0.1, 0.1, 0.0);
  box.hi = Eigen::Vector3d(3.0, std::numbers::pi - 0.1, 2.0 * std::numbers::pi);
  m.set_sample_box(box);
  return m;
}

// Conformal factor with its gradient and Hessian.
struct FactorJet {
  double phi;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

MetricField conformally_flat(std::string label, int n, std::function<FactorJet(const Point&)> factor) {
  auto eval = [n, factor](const Point& q) {
    const double phi = factor(q).phi;
    return (phi * phi * Eigen::MatrixXd::Identity(n, n)).eval();
  };
  auto partials = [n, factor](const Point& q) {
    const FactorJet f = factor(q);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    MetricPartials p;
    p.g = f.phi * f.phi * I;
    p.dg.resize(static_cast<std::size_t>(n));
    p.d2g.resize(static_cast<std::size_t>(n * n));
    for (int c = 0; c < n; ++c) {
      p.dg[static_cast<std::size_t>(c)] = 2.0 * f.phi * f.grad[c] * I;
      for (int d = 0; d < n; ++d) {
        p.d2g[static_cast<std::size_t>(c * n + d)] =
            2.0 * (f.grad[c] * f.grad[d] + f.phi * f.hess(c, d)) * I;
      }
    }
    return p;
  };
  MetricField m(std::move(label), n, eval, partials);
  m.set_conformally_flat(true);
  return m;
}

MetricField conf_gauss(int n, double sigma, std::string label) {
  return conformally_flat(std::move(label), n, [sigma, n](const Point& x) {
    const double phi = std::exp(-sigma * x.squaredNorm());
    FactorJet f{phi, -2.0 * sigma * phi * x, Eigen::MatrixXd(n, n)};
    f.hess = phi * (4.0 * sigma * sigma * x * x.transpose() - 2.0 * sigma * Eigen::MatrixXd::Identity(n, n));
    return f;
  });
}

MetricField stereo_sphere(int n, double a, std::string label) {
  if (!(a > 0.0)) throw ParseError("stereo-sphere radius must be positive");
  return conformally_flat(std::move(label), n, [a, n](const Point& x) {
    const double a2 = a * a;
    const double s = a2 + x.squaredNorm();
    const double phi = 2.0 * a2 / s;
    FactorJet f{phi, -4.0 * a2 / (s * s) * x, Eigen::MatrixXd(n, n)};
    f.hess = -4.0 * a2 / (s * s) * Eigen::MatrixXd::Identity(n, n) + 16.0 * a2 / (s * s * s) * x * x.transpose();
    return f;
  });
}

Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = (2.0 * unit_uniform(rng()) - 1.0) / n;
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

MetricField poly_perturb(int n, std::uint64_t seed, double eps, std::string label) {
  const PolyPerturbation pert = draw_poly_perturbation(n, seed);
  if (!(std::abs(eps) * pert.bound < 1.0)) {
    std::ostringstream msg;
    msg << "metric '" << label << "' rejected: eps * bound = " << std::abs(eps) * pert.bound
        << " >= 1, positive definiteness on [-1,1]^" << n << " not certified";
    throw InvalidMetric(msg.str());
  }
  auto perturbation = [pert, n](const Point& x) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (int c = 0; c < n; ++c) {
      s += x[c] * pert.linear[static_cast<std::size_t>(c)];
      for (int d = 0; d < n; ++d) {
        s += 0.5 * x[c] * x[d] * pert.quadratic[static_cast<std::size_t>(c * n + d)];
      }
    }
    return s;
  };
  auto eval = [n, eps, perturbation](const Point& x) {
    return (Eigen::MatrixXd::Identity(n, n) + eps * perturbation(x)).eval();
  };
  auto partials = [n, eps, pert, eval](const Point& x) {
    MetricPartials p;
    p.g = eval(x);
    p.dg.resize(static_cast<std::size_t>(n));
    p.d2g.resize(static_cast<std::size_t>(n * n));
    for (int c = 0; c < n; ++c) {
      Eigen::MatrixXd d = pert.linear[static_cast<std::size_t>(c)];
      for (int e = 0; e < n; ++e) d += x[e] * pert.quadratic[static_cast<std::size_t>(c * n + e)];
      p.dg[static_cast<std::size_t>(c)] = eps * d;
      for (int e = 0; e < n; ++e) {
        p.d2g[static_cast<std::size_t>(c * n + e)] = eps * pert.quadratic[static_cast<std::size_t>(c * n + e)];
      }
    }
    return p;
  };
  return MetricField(std::move(label), n, eval, partials);
}

}  // namespace

PolyPerturbation draw_poly_perturbation(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PolyPerturbation out;
  out.dimension = n;
  for (int c = 0; c < n; ++c) {
    out.linear.push_back(random_symmetric(n, rng));
    out.bound += out.linear.back().norm();
  }
  out.quadratic.assign(static_cast<std::size_t>(n * n), Eigen::MatrixXd::Zero(n, n));
  for (int c = 0; c < n; ++c) {
    for (int d = c; d < n; ++d) {
      const Eigen::MatrixXd m = random_symmetric(n, rng);
      out.quadratic[static_cast<std::size_t>(c * n + d)] = m;
      out.quadratic[static_cast<std::size_t>(d * n + c)] = m;
      out.bound += (c == d ? 0.5 : 1.0) * m.norm();
    }
  }
  return out;
}

MetricField make_metric(std::string_view label) {
  const auto parts = split(label, ':');
  const std::string& kind = parts.front();
  const std::string name(label);
  if (kind == "euclidean") {
    expect_fields(parts, 2, label, "euclidean:n");
    return euclidean(parse_dimension(parts[1], label));
  }
  if (kind == "spherical3") {
    expect_fields(parts, 1, label, "spherical3");
    return spherical3();
  }
  if (kind == "conf-gauss") {
    expect_fields(parts, 3, label, "conf-gauss:n:sigma");
    return conf_gauss(parse_dimension(parts[1], label), parse_real(parts[2], label), name);
  }
  if (kind == "stereo-sphere") {
    expect_fields(parts, 3, label, "stereo-sphere:n:a");
    return stereo_sphere(parse_dimension(parts[1], label), parse_real(parts[2], label), name);
  }
  if (kind == "poly-perturb") {
    expect_fields(parts, 4, label, "poly-perturb:n:seed:eps");
    std::string seed = parts[2];
    if (seed.rfind("seed=", 0) == 0) seed = seed.substr(5);
    const long s = parse_int(seed, label);
    if (s < 0) throw ParseError("metric label '" + name + "': seed must be non-negative");
    return poly_perturb(parse_dimension(parts[1], label), static_cast<std::uint64_t>(s),
                        parse_real(parts[3], label), name);
  }
  throw ParseError("unknown metric label '" + name + "'");
}

std::vector<MetricField> make_metric_family(std::string_view spec) {
  std::vector<MetricField> out;
  for (const auto& label : split(spec, ',')) {
    if (label.empty()) throw ParseError("empty label in metric family '" + std::string(spec) + "'");
    auto fields = split(label, ':');
    std::size_t range_field = fields.size();
    long lo = 0;
    long hi = 0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto dots = fields[i].find("..");
      if (dots == std::string::npos) continue;
      if (range_field != fields.size()) {
        throw ParseError("metric family label '" + label + "' has more than one range");
      }
      std::string a = fields[i].substr(0, dots);
      if (a.rfind("seed=", 0) == 0) a = a.substr(5);
      lo = parse_int(a, label);
      hi = parse_int(fields[i].substr(dots + 2), label);
      if (hi < lo) throw ParseError("metric family label '" + label + "' has an empty range");
      range_field = i;
    }
    if (range_field == fields.size()) {
      out.push_back(make_metric(label));
      continue;
    }
    for (long v = lo; v <= hi; ++v) {
      fields[range_field] = std::to_string(v);
      std::string expanded = fields.front();
      for (std::size_t i = 1; i < fields.size(); ++i) expanded += ":" + fields[i];
      out.push_back(make_metric(expanded));
    }
  }
  return out;
}

}  // namespace ordlab
