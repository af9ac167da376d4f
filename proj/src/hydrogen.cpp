#include "ordlab/hydrogen.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gegenbauer.hpp>

#include "ordlab/catalog.hpp"
#include "ordlab/errors.hpp"
#include "ordlab/geometry.hpp"
#include "ordlab/operators.hpp"
#include "ordlab/parallel.hpp"
#include "ordlab/tridiagonal.hpp"

namespace ordlab {

void QuantumNumbers::validate() const {
  if (n < 1) throw std::invalid_argument("principal quantum number must be >= 1");
  if (l < 0 || l > n - 1) throw std::invalid_argument("angular label must satisfy 0 <= l <= n - 1");
}

namespace {

double gegenbauer_index(int m) { return 0.5 * (1.0 + std::sqrt(4.0 * m * m + 1.0)); }

double radial_lambda(double mu) { return -0.5 + std::sqrt(mu + 0.25); }

// L_k^{(a)}(x) by the three-term recurrence; a need not be an integer.
double generalized_laguerre(int k, double a, double x) {
  double prev = 1.0;
  if (k == 0) return prev;
  double cur = 1.0 + a - x;
  for (int j = 1; j < k; ++j) {
    const double next = ((2.0 * j + 1.0 + a - x) * cur - (j + a) * prev) / (j + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace

double angular_label(int l, int m) {
  if (l < 0) throw std::invalid_argument("angular label must be >= 0");
  return m == 0 ? static_cast<double>(l) : l + gegenbauer_index(m);
}

double naive_energy(const QuantumNumbers& qn) {
  qn.validate();
  const double big_l = angular_label(qn.l, qn.m);
  const double bracket = qn.n - qn.l - 0.5 + std::sqrt(big_l * big_l + 0.25);
  return -1.0 / (2.0 * bracket * bracket);
}

double standard_energy(int n) {
  if (n < 1) throw std::invalid_argument("principal quantum number must be >= 1");
  return -1.0 / (2.0 * n * n);
}

std::vector<double> angular_eigenvalues(int m, int count, int grid) {
  if (grid < 200) throw std::invalid_argument("angular grid must have at least 200 points");
  if (count < 1 || count >= grid / 4) throw std::invalid_argument("angular eigenvalue count too large for grid");
  const double h = std::numbers::pi / grid;
  const double inv_h2 = 1.0 / (h * h);
  SymmetricTridiagonal t;
  if (m == 0) {
    // cells centred at (i + 1/2) h, mirrored ghost cells at both ends
    t.diag = Eigen::VectorXd::Constant(grid, 2.0 * inv_h2);
    t.diag[0] = inv_h2;
    t.diag[grid - 1] = inv_h2;
    t.off = Eigen::VectorXd::Constant(grid - 1, -inv_h2);
  } else {
    const int nodes = grid - 1;
    t.diag.resize(nodes);
    for (int i = 0; i < nodes; ++i) {
      const double s = std::sin((i + 1) * h);
      t.diag[i] = 2.0 * inv_h2 + static_cast<double>(m) * m / (s * s);
    }
    t.off = Eigen::VectorXd::Constant(nodes - 1, -inv_h2);
  }
  return smallest_eigenvalues(t, count);
}

namespace {

std::vector<double> radial_raw(double mu, int count, double r_max, int grid) {
  const double h = r_max / (grid + 1);
  const double inv_h2 = 1.0 / (h * h);
  SymmetricTridiagonal t;
  t.diag.resize(grid);
  for (int i = 0; i < grid; ++i) {
    const double r = (i + 1) * h;
    t.diag[i] = 2.0 * inv_h2 + mu / (r * r) - 2.0 / r;
  }
  t.off = Eigen::VectorXd::Constant(grid - 1, -inv_h2);
  std::vector<double> e = smallest_eigenvalues(t, count);
  for (double& v : e) v *= 0.5;
  return e;
}

// Outer classical turning point of mu/r^2 - 2/r = 2E, E < 0.
double turning_point(double mu, double energy) {
  const double disc = std::max(0.0, 1.0 + 2.0 * energy * mu);
  return (1.0 + std::sqrt(disc)) / (-2.0 * energy);
}

}  // namespace

std::vector<double> radial_eigenvalues(double mu, int count, double r_max, int grid, const RadialOptions& options) {
  if (!(mu >= 0.0)) throw std::invalid_argument("radial problem needs mu >= 0");
  if (count < 1) throw std::invalid_argument("radial eigenvalue count must be >= 1");
  if (grid < 4 * count) throw std::invalid_argument("radial grid too coarse");
  if (r_max <= 0.0) r_max = 40.0 * count;

  const std::vector<double> coarse = radial_raw(mu, count, r_max, grid);
  const std::vector<double> fine = radial_raw(mu, count, r_max, 2 * grid);
  for (int k = 0; k < count; ++k) {
    const double e = coarse[static_cast<std::size_t>(k)];
    if (!(e < 0.0)) {
      throw ConvergenceError("radial level " + std::to_string(k) + " is not bound in a box of radius " +
                             std::to_string(r_max));
    }
    const double drift = std::abs(fine[static_cast<std::size_t>(k)] - e);
    if (drift > options.drift_tolerance) {
      throw ConvergenceError("radial level " + std::to_string(k) + " moved by " + std::to_string(drift) +
                             " under grid doubling");
    }
    const double kappa = std::sqrt(-2.0 * e);
    if (kappa * (r_max - turning_point(mu, e)) < options.decay_margin) {
      throw ConvergenceError("radial box " + std::to_string(r_max) + " too small for level " + std::to_string(k));
    }
  }
  return coarse;
}

SpectrumRow solve_state(const QuantumNumbers& qn, const SpectrumOptions& options) {
  qn.validate();
  if (options.levels < 2) throw std::invalid_argument("spectrum chain needs at least two grid levels");
  const int k = qn.radial_index();
  const RadialOptions radial_options;

  std::vector<double> mus;
  for (int j = 0; j < options.levels; ++j) {
    mus.push_back(angular_eigenvalues(qn.m, qn.l + 1, options.angular_grid << j)[static_cast<std::size_t>(qn.l)]);
  }

  // grow the box until the state has decayed well before the wall
  double r_max = 40.0 * (k + 1);
  for (int attempt = 0;; ++attempt) {
    if (attempt == 12) throw ConvergenceError("radial box did not settle");
    const double e = radial_raw(mus.front(), k + 1, r_max, options.radial_grid)[static_cast<std::size_t>(k)];
    if (!(e < 0.0)) {
      r_max *= 2.0;
      continue;
    }
    const double needed = turning_point(mus.front(), e) + (radial_options.decay_margin + 4.0) / std::sqrt(-2.0 * e);
    if (needed <= r_max) break;
    r_max = needed;
  }
  // drift, boundness and decay checks at the base level
  radial_eigenvalues(mus.front(), k + 1, r_max, options.radial_grid, radial_options);

  SpectrumRow row;
  row.qn = qn;
  row.e_closed = naive_energy(qn);
  row.mu_numeric = mus.back();
  row.r_max = r_max;
  for (int j = 0; j < options.levels; ++j) {
    row.raw.push_back(
        radial_raw(mus[static_cast<std::size_t>(j)], k + 1, r_max, options.radial_grid << j)[static_cast<std::size_t>(k)]);
  }
  const auto last = row.raw.size() - 1;
  row.e_numeric = (4.0 * row.raw[last] - row.raw[last - 1]) / 3.0;
  row.abs_err = std::abs(row.e_numeric - row.e_closed);
  row.rel_err = row.abs_err / std::abs(row.e_closed);
  if (row.raw.size() >= 3) {
    const double d1 = row.raw[last - 2] - row.raw[last - 1];
    const double d2 = row.raw[last - 1] - row.raw[last];
    row.order = std::log2(std::abs(d1 / d2));
  }
  return row;
}

SpectrumTable naive_spectrum(int n_max, std::span<const int> ms, const SpectrumOptions& options) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (ms.empty()) throw std::invalid_argument("no magnetic quantum numbers requested");
  std::vector<QuantumNumbers> states;
  for (int n = 1; n <= n_max; ++n) {
    for (int l = 0; l < n; ++l) {
      for (int m : ms) states.push_back({n, l, m});
    }
  }
  SpectrumTable table;
  table.rows = parallel_map<SpectrumRow>(states.size(), [&](std::size_t i) { return solve_state(states[i], options); });
  return table;
}

std::string to_csv(const SpectrumTable& table) {
  std::ostringstream os;
  os.precision(17);
  os << "n,l,m,E_closed,E_numeric,abs_err,rel_err\n";
  for (const auto& r : table.rows) {
    os << r.qn.n << "," << r.qn.l << "," << r.qn.m << "," << r.e_closed << "," << r.e_numeric << "," << r.abs_err
       << "," << r.rel_err << "\n";
  }
  return os.str();
}

nlohmann::json to_json(const SpectrumTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"n", r.qn.n},
                    {"l", r.qn.l},
                    {"m", r.qn.m},
                    {"E_closed", r.e_closed},
                    {"E_numeric", r.e_numeric},
                    {"abs_err", r.abs_err},
                    {"rel_err", r.rel_err},
                    {"mu_numeric", r.mu_numeric},
                    {"r_max", r.r_max},
                    {"order", r.order}});
  }
  return {{"rows", rows}};
}

namespace {

struct EigenfunctionParts {
  int k;
  int l;
  int m;
  double lambda;
  double kappa;
  double s;

  double theta_part(double theta) const {
    if (m == 0) return std::cos(l * theta);
    return std::pow(std::sin(theta), s) * boost::math::gegenbauer(static_cast<unsigned>(l), s, std::cos(theta));
  }
  double laguerre_part(double r) const { return generalized_laguerre(k, 2.0 * lambda + 1.0, 2.0 * kappa * r); }
  double radial_part(double r) const { return std::pow(r, lambda + 1.0) * std::exp(-kappa * r) * laguerre_part(r); }
};

EigenfunctionParts parts_for(const QuantumNumbers& qn) {
  qn.validate();
  const double big_l = angular_label(qn.l, qn.m);
  const double lambda = radial_lambda(big_l * big_l);
  const int k = qn.radial_index();
  return {k, qn.l, qn.m, lambda, 1.0 / (k + lambda + 1.0), gegenbauer_index(qn.m)};
}

}  // namespace

ScalarField naive_eigenfunction(const QuantumNumbers& qn) {
  const EigenfunctionParts parts = parts_for(qn);
  return ScalarField(
      3,
      [parts](const Point& x) { return parts.radial_part(x[0]) * parts.theta_part(x[1]) * std::cos(parts.m * x[2]); },
      nullptr,
      "hydrogen:" + std::to_string(qn.n) + ":" + std::to_string(qn.l) + ":" + std::to_string(qn.m));
}

std::vector<Point> regular_samples(const QuantumNumbers& qn, std::size_t count, std::uint64_t seed) {
  const EigenfunctionParts parts = parts_for(qn);
  std::mt19937_64 rng(seed);
  const double lag0 = std::abs(parts.laguerre_part(0.0));
  std::vector<Point> out;
  while (out.size() < count) {
    Point p(3);
    p[0] = 0.5 + 7.5 * unit_uniform(rng());
    p[1] = 0.1 + (std::numbers::pi - 0.2) * unit_uniform(rng());
    p[2] = 2.0 * std::numbers::pi * unit_uniform(rng());
    if (std::abs(parts.theta_part(p[1])) < 0.1) continue;
    if (std::abs(std::cos(parts.m * p[2])) < 0.1) continue;
    if (std::abs(parts.laguerre_part(p[0])) < 0.1 * lag0) continue;
    out.push_back(p);
  }
  return out;
}

double eigenfunction_residual(const QuantumNumbers& qn, std::span<const Point> samples, const DiffConfig& cfg) {
  const double energy = naive_energy(qn);
  const ScalarField psi = naive_eigenfunction(qn);
  const Operator naive = build_operator(OperatorSpec::naive(), make_metric("spherical3"));
  double worst = 0.0;
  for (const auto& p : samples) {
    if (p.size() != 3) throw DimensionMismatch("hydrogen samples are (r, theta, phi)");
    const double sin_theta = std::sin(p[1]);
    if (!(p[0] > 0.0) || std::abs(sin_theta) < 1e-8) {
      throw EvaluationError("hydrogen sample on a coordinate singularity");
    }
    const double value = psi(p);
    const double h_psi = 0.5 * naive.apply(psi, p, cfg, EvaluationRoute::expanded) - value / p[0];
    worst = std::max(worst, std::abs((h_psi - energy * value) / value));
  }
  return worst;
}

}  // namespace ordlab
