#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordlab/geometry.hpp"

namespace ordlab {

/// Seven second-order scalars of a metric jet:
///
///   t1 = g^{ab} g_{,ab} / g            t5 = g^{ab}_{,l} g_{ab,r} g^{lr}
///   t2 = g^{ab} g_{,a} g_{,b} / g^2    t6 = g^{ab}_{,ab}
///   t3 = (g_{,b} / g) g^{ab}_{,a}      t7 = g^{ab}_{,b} g_{ac} g^{cl}_{,l}
///   t4 = g^{ab}_{,l} g_{ra,b} g^{lr}
///
/// t1..t5 are the addends of the five-term closed form, t6 the term it
/// lacks, t7 the obstruction term. Unweighted.
struct TermVector {
  Point point;
  std::array<double, 7> t{};
};

/// Weights turning t1..t6 into the Ricci scalar; the first five reproduce
/// the five-term closed form.
inline constexpr std::array<double, 7> kCurvatureWeights{-1.0, 0.75, -1.0, -0.5, 0.25, -1.0, 0.0};

TermVector curvature_term_vector(const MetricJet& jet);

/// sum_i weights[i] t[i] over the first `count` entries.
double weighted_sum(const TermVector& v, std::size_t count);

struct RankReport {
  int rank = 0;
  std::vector<double> singular_values;
  double condition_number = 0.0;  // sigma_max / smallest retained sigma
  double threshold = 0.0;         // relative cutoff
  std::size_t samples = 0;
  std::vector<std::string> metrics;
  std::uint64_t seed = 0;
};

/// Numerical rank of the stacked term vectors (singular values above
/// `threshold` times the largest). Each metric contributes
/// `points_per_metric` seeded samples from its sample box. Throws
/// std::invalid_argument when fewer than 7 samples result.
RankReport independence_rank(std::span<const MetricField> family, std::size_t points_per_metric,
                             const DiffConfig& cfg, std::uint64_t seed, double threshold = 1e-8);

nlohmann::json to_json(const RankReport& report);

struct IdentityCheck {
  std::string name;
  std::vector<int> lengths;
  double expected = 0.0;
  double deviation = 0.0;
};

struct IdentityReport {
  Point point;
  int n = 0;
  std::vector<IdentityCheck> checks;
  double max_deviation = 0.0;
};

/// Exact linear-algebra identities of the metric at the jet point.
///   alternating_chain  (g g^-1)^q, (g^-1 g)^q and g^q (g^-1)^q equal I, for q in lengths
///   determinant_expansion  (1 / (n! g)) eps eps g...g (n factors) = 1,
///                          summed literally over both permutations
///   trace_power  tr(g g^-1)^{q1} tr(g^-1 g)^{q2} = n^{q1 + q2} for q1, q2 in lengths
/// Deviations are absolute for the chains and relative otherwise.
/// Throws std::invalid_argument for lengths outside 1..4.
IdentityReport verify_matrix_identities(const MetricJet& jet, std::span<const int> chain_lengths);

nlohmann::json to_json(const IdentityReport& report);

}  // namespace ordlab
