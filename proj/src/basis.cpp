#include "ordlab/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/SVD>

#include "ordlab/parallel.hpp"

namespace ordlab {

TermVector curvature_term_vector(const MetricJet& jet) {
  const int n = jet.dimension();
  const Eigen::MatrixXd& G = jet.g_inv;
  const double g = jet.det;
  const auto dG = [&](int c) -> const Eigen::MatrixXd& { return jet.d_ginv[static_cast<std::size_t>(c)]; };
  const auto dg = [&](int c) -> const Eigen::MatrixXd& { return jet.dg[static_cast<std::size_t>(c)]; };

  TermVector v;
  v.point = jet.point;
  auto& t = v.t;
  Eigen::VectorXd div_ginv = Eigen::VectorXd::Zero(n);  // g^{ab}_{,b}
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      t[0] += G(a, b) * jet.d2_det(a, b) / g;
      t[1] += G(a, b) * jet.d_det[a] * jet.d_det[b] / (g * g);
      t[2] += jet.d_det[b] / g * dG(a)(a, b);
      t[5] += jet.d2_ginv_at(a, b)(a, b);
      div_ginv[a] += dG(b)(a, b);
      for (int l = 0; l < n; ++l) {
        for (int r = 0; r < n; ++r) {
          t[3] += dG(l)(a, b) * dg(b)(r, a) * G(l, r);
          t[4] += dG(l)(a, b) * dg(r)(a, b) * G(l, r);
        }
      }
    }
  }
  t[6] = div_ginv.dot(jet.g * div_ginv);
  return v;
}

double weighted_sum(const TermVector& v, std::size_t count) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(count, 7); ++i) s += kCurvatureWeights[i] * v.t[i];
  return s;
}

RankReport independence_rank(std::span<const MetricField> family, std::size_t points_per_metric,
                             const DiffConfig& cfg, std::uint64_t seed, double threshold) {
  std::vector<std::pair<const MetricField*, Point>> jobs;
  RankReport report;
  report.seed = seed;
  report.threshold = threshold;
  for (std::size_t i = 0; i < family.size(); ++i) {
    report.metrics.push_back(family[i].label());
    for (auto& p : sample_points(family[i], points_per_metric, seed + 0x9e3779b97f4a7c15ULL * (i + 1))) {
      jobs.emplace_back(&family[i], std::move(p));
    }
  }
  if (jobs.size() < 7) throw std::invalid_argument("independence_rank needs at least 7 samples");
  const auto rows = parallel_map<TermVector>(jobs.size(), [&](std::size_t i) {
    return curvature_term_vector(metric_jet(*jobs[i].first, jobs[i].second, cfg));
  });
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), 7);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < 7; ++c) m(static_cast<Eigen::Index>(i), c) = rows[i].t[static_cast<std::size_t>(c)];
  }
  report.samples = rows.size();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& sv = svd.singularValues();
  report.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double largest = sv.size() > 0 ? sv[0] : 0.0;
  if (largest > 0.0) {
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv[i] > threshold * largest) ++report.rank;
    }
    report.condition_number = largest / sv[report.rank - 1];
  }
  return report;
}

nlohmann::json to_json(const RankReport& r) {
  return {{"rank", r.rank},
          {"singular_values", r.singular_values},
          {"condition_number", r.condition_number},
          {"threshold", r.threshold},
          {"samples", r.samples},
          {"metrics", r.metrics},
          {"seed", r.seed}};
}

namespace {

int permutation_sign(const std::vector<int>& p) {
  int sign = 1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      if (p[i] > p[j]) sign = -sign;
    }
  }
  return sign;
}

}  // namespace

IdentityReport verify_matrix_identities(const MetricJet& jet, std::span<const int> chain_lengths) {
  for (int q : chain_lengths) {
    if (q < 1 || q > 4) throw std::invalid_argument("chain lengths must lie in 1..4");
  }
  const int n = jet.dimension();
  const Eigen::MatrixXd& g = jet.g;
  const Eigen::MatrixXd& gi = jet.g_inv;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  IdentityReport report;
  report.point = jet.point;
  report.n = n;

  for (int q : chain_lengths) {
    Eigen::MatrixXd lower_first = id;
    Eigen::MatrixXd raise_first = id;
    Eigen::MatrixXd lowered = id;
    Eigen::MatrixXd raised = id;
    for (int i = 0; i < q; ++i) {
      lower_first = lower_first * g * gi;
      raise_first = raise_first * gi * g;
      lowered = lowered * g;
      raised = raised * gi;
    }
    const double dev = std::max({(lower_first - id).cwiseAbs().maxCoeff(), (raise_first - id).cwiseAbs().maxCoeff(),
                                 (lowered * raised - id).cwiseAbs().maxCoeff()});
    report.checks.push_back({"alternating_chain", {q}, 1.0, dev});
  }

  {
    std::vector<int> sigma(static_cast<std::size_t>(n));
    std::iota(sigma.begin(), sigma.end(), 0);
    double sum = 0.0;
    do {
      const int s_sigma = permutation_sign(sigma);
      std::vector<int> tau(static_cast<std::size_t>(n));
      std::iota(tau.begin(), tau.end(), 0);
      do {
        double prod = s_sigma * permutation_sign(tau);
        for (std::size_t i = 0; i < sigma.size(); ++i) prod *= g(sigma[i], tau[i]);
        sum += prod;
      } while (std::next_permutation(tau.begin(), tau.end()));
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    double factorial = 1.0;
    for (int i = 2; i <= n; ++i) factorial *= i;
    const double value = sum / (factorial * jet.det);
    report.checks.push_back({"determinant_expansion", {n}, 1.0, std::abs(value - 1.0)});
  }

  const double tr_lower = (g * gi).trace();
  const double tr_raise = (gi * g).trace();
  for (int q1 : chain_lengths) {
    for (int q2 : chain_lengths) {
      const double expected = std::pow(static_cast<double>(n), q1 + q2);
      const double value = std::pow(tr_lower, q1) * std::pow(tr_raise, q2);
      report.checks.push_back({"trace_power", {q1, q2}, expected, std::abs(value - expected) / expected});
    }
  }

  for (const auto& c : report.checks) report.max_deviation = std::max(report.max_deviation, c.deviation);
  return report;
}

nlohmann::json to_json(const IdentityReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"lengths", c.lengths}, {"expected", c.expected}, {"deviation", c.deviation}});
  }
  return {{"point", point_to_json(r.point)}, {"n", r.n}, {"checks", checks}, {"max_deviation", r.max_deviation}};
}

}  // namespace ordlab
