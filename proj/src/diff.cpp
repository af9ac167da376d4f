#include "ordlab/diff.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace ordlab {

const char* to_string(DerivativeMode mode) {
  return mode == DerivativeMode::analytic ? "analytic" : "numeric";
}

void DiffConfig::validate() const {
  if (!(base_step > 0.0) || !std::isfinite(base_step)) {
    throw std::invalid_argument("DiffConfig: base_step must be positive");
  }
  if (richardson_levels < 1) {
    throw std::invalid_argument("DiffConfig: richardson_levels must be >= 1");
  }
  if (stencil_order != 2 && stencil_order != 4 && stencil_order != 6) {
    throw std::invalid_argument("DiffConfig: stencil_order must be 2, 4 or 6, got " +
                                std::to_string(stencil_order));
  }
}

double DiffConfig::step_at(double coordinate) const {
  return base_step * std::max(1.0, std::abs(coordinate));
}

DiffConfig DiffConfig::widened(double factor) const {
  DiffConfig out = *this;
  out.base_step *= factor;
  return out;
}

namespace {

struct Tap {
  int offset;
  double weight;
};

// Positive-offset half of the antisymmetric first-derivative stencil.
std::span<const Tap> first_stencil(int order) {
  static constexpr Tap o2[] = {{1, 0.5}};
  static constexpr Tap o4[] = {{1, 2.0 / 3.0}, {2, -1.0 / 12.0}};
  static constexpr Tap o6[] = {{1, 0.75}, {2, -3.0 / 20.0}, {3, 1.0 / 60.0}};
  switch (order) {
    case 2: return o2;
    case 4: return o4;
    default: return o6;
  }
}

// Positive-offset half of the symmetric second-derivative stencil.
std::span<const Tap> second_stencil(int order) {
  static constexpr Tap o2[] = {{1, 1.0}};
  static constexpr Tap o4[] = {{1, 4.0 / 3.0}, {2, -1.0 / 12.0}};
  static constexpr Tap o6[] = {{1, 1.5}, {2, -3.0 / 20.0}, {3, 1.0 / 90.0}};
  switch (order) {
    case 2: return o2;
    case 4: return o4;
    default: return o6;
  }
}

double second_center(int order) {
  switch (order) {
    case 2: return -2.0;
    case 4: return -2.5;
    default: return -49.0 / 18.0;
  }
}

// One stencil application at a fixed set of steps.
Derivatives estimate(const VectorFunction& f, const Point& x, const Eigen::VectorXd& h,
                     const Eigen::VectorXd& f0, int order, int max_order) {
  const auto n = static_cast<int>(x.size());
  Derivatives out;
  out.first.assign(static_cast<std::size_t>(n), Eigen::VectorXd::Zero(f0.size()));
  if (max_order >= 2) {
    out.second.assign(static_cast<std::size_t>(n * n), Eigen::VectorXd::Zero(f0.size()));
  }

  const auto d1 = first_stencil(order);
  const auto d2 = second_stencil(order);
  const int reach = order / 2;

  for (int c = 0; c < n; ++c) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(f0.size());
    Eigen::VectorXd curv = second_center(order) * f0;
    for (int k = 1; k <= reach; ++k) {
      Point xp = x;
      Point xm = x;
      xp[c] += k * h[c];
      xm[c] -= k * h[c];
      const Eigen::VectorXd fp = f(xp);
      const Eigen::VectorXd fm = f(xm);
      grad += d1[static_cast<std::size_t>(k - 1)].weight * (fp - fm);
      curv += d2[static_cast<std::size_t>(k - 1)].weight * (fp + fm);
    }
    out.first[static_cast<std::size_t>(c)] = grad / h[c];
    if (max_order >= 2) {
      out.second[static_cast<std::size_t>(c * n + c)] = curv / (h[c] * h[c]);
    }
  }
  if (max_order < 2) {
    return out;
  }

  for (int c = 0; c < n; ++c) {
    for (int d = c + 1; d < n; ++d) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(f0.size());
      for (int i = 1; i <= reach; ++i) {
        for (int j = 1; j <= reach; ++j) {
          const double w = d1[static_cast<std::size_t>(i - 1)].weight *
                           d1[static_cast<std::size_t>(j - 1)].weight;
          for (int si : {1, -1}) {
            for (int sj : {1, -1}) {
              Point xs = x;
              xs[c] += si * i * h[c];
              xs[d] += sj * j * h[d];
              acc += (si * sj * w) * f(xs);
            }
          }
        }
      }
      acc /= h[c] * h[d];
      out.second[static_cast<std::size_t>(c * n + d)] = acc;
      out.second[static_cast<std::size_t>(d * n + c)] = acc;
    }
  }
  return out;
}

// In-place Richardson tableau over estimates at h, h/2, h/4, ...; the leading
// error term of a central stencil of order p is h^p, followed by h^(p+2), ...
void extrapolate(std::vector<Eigen::VectorXd>& column, int order) {
  const auto levels = column.size();
  for (std::size_t j = 1; j < levels; ++j) {
    const double factor = std::pow(2.0, order + 2 * static_cast<int>(j - 1));
    for (std::size_t k = levels - 1; k >= j; --k) {
      column[k] = column[k] + (column[k] - column[k - 1]) / (factor - 1.0);
    }
  }
}

}  // namespace

Derivatives differentiate(const VectorFunction& f, const Point& x, const DiffConfig& cfg,
                          int max_order) {
  cfg.validate();
  const auto n = static_cast<int>(x.size());
  const Eigen::VectorXd f0 = f(x);

  Eigen::VectorXd h(n);
  for (int c = 0; c < n; ++c) {
    h[c] = cfg.step_at(x[c]);
  }

  std::vector<Derivatives> levels;
  levels.reserve(static_cast<std::size_t>(cfg.richardson_levels));
  for (int level = 0; level < cfg.richardson_levels; ++level) {
    levels.push_back(estimate(f, x, h, f0, cfg.stencil_order, max_order));
    h /= 2.0;
  }

  Derivatives out;
  out.value = f0;
  out.first.resize(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    std::vector<Eigen::VectorXd> column;
    for (const auto& lv : levels) column.push_back(lv.first[static_cast<std::size_t>(c)]);
    extrapolate(column, cfg.stencil_order);
    out.first[static_cast<std::size_t>(c)] = column.back();
  }
  if (max_order >= 2) {
    out.second.resize(static_cast<std::size_t>(n * n));
    for (std::size_t idx = 0; idx < out.second.size(); ++idx) {
      std::vector<Eigen::VectorXd> column;
      for (const auto& lv : levels) column.push_back(lv.second[idx]);
      extrapolate(column, cfg.stencil_order);
      out.second[idx] = column.back();
    }
  }
  return out;
}

ScalarJet differentiate_scalar(const ScalarFunction& f, const Point& x, const DiffConfig& cfg) {
  const VectorFunction wrapped = [&f](const Point& q) {
    Eigen::VectorXd v(1);
    v[0] = f(q);
    return v;
  };
  const Derivatives d = differentiate(wrapped, x, cfg, 2);
  const auto n = x.size();
  ScalarJet jet;
  jet.value = d.value[0];
  jet.gradient.resize(n);
  jet.hessian.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    jet.gradient[c] = d.first[static_cast<std::size_t>(c)][0];
    for (Eigen::Index e = 0; e < n; ++e) {
      jet.hessian(c, e) = d.second[static_cast<std::size_t>(c * n + e)][0];
    }
  }
  return jet;
}

Eigen::VectorXd gradient(const ScalarFunction& f, const Point& x, const DiffConfig& cfg) {
  const VectorFunction wrapped = [&f](const Point& q) {
    Eigen::VectorXd v(1);
    v[0] = f(q);
    return v;
  };
  const Derivatives d = differentiate(wrapped, x, cfg, 1);
  Eigen::VectorXd g(x.size());
  for (Eigen::Index c = 0; c < x.size(); ++c) g[c] = d.first[static_cast<std::size_t>(c)][0];
  return g;
}

}  // namespace ordlab
