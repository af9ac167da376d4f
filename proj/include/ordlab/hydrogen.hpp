#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordlab/diff.hpp"
#include "ordlab/scalar_field.hpp"

namespace ordlab {

/// Hydrogen labels for the naive ordering. m is not bounded by l: angular
/// levels for each m are labelled l = 0, 1, 2, ... from the bottom.
struct QuantumNumbers {
  int n = 1;
  int l = 0;
  int m = 0;

  /// Throws std::invalid_argument unless n >= 1 and 0 <= l <= n - 1.
  void validate() const;
  int radial_index() const { return n - l - 1; }
};

/// Angular label L: l for m = 0, l + (1 + sqrt(4 m^2 + 1)) / 2 otherwise.
double angular_label(int l, int m);

/// Bound-state energy (hartree) of -1/2 g^{ab} d_a d_b - 1/r in spherical
/// coordinates:  -1 / (2 [n - l - 1/2 + sqrt(L^2 + 1/4)]^2).
double naive_energy(const QuantumNumbers& qn);

/// -1 / (2 n^2)
double standard_energy(int n);

/// Lowest `count` eigenvalues mu of -Theta'' + m^2 / sin^2(theta) Theta on
/// (0, pi) with second-order differences: cell-centred Neumann for m = 0,
/// nodal Dirichlet for m != 0. Throws std::invalid_argument when
/// grid < 200 or count >= grid / 4.
std::vector<double> angular_eigenvalues(int m, int count, int grid);

struct RadialOptions {
  /// Largest allowed change of any eigenvalue when the grid is doubled.
  double drift_tolerance = 1e-4;
  /// Required decay kappa (r_max - r_turn) beyond the classical turning point.
  double decay_margin = 12.0;
};

/// Lowest `count` energies E of -R'' + (mu / r^2 - 2 / r) R = 2 E R on
/// (0, r_max] with R = 0 at both ends. r_max <= 0 selects 40 * count.
/// Throws ConvergenceError when doubling the grid moves an eigenvalue by
/// more than the drift tolerance, when a level is not bound, or when the
/// box ends before the wavefunction has decayed.
std::vector<double> radial_eigenvalues(double mu, int count, double r_max = 0.0, int grid = 4000,
                                       const RadialOptions& options = {});

struct SpectrumOptions {
  int angular_grid = 2000;
  int radial_grid = 4000;
  /// Number of grid doublings; the last two levels are Richardson-combined.
  int levels = 3;
};

struct SpectrumRow {
  QuantumNumbers qn;
  double e_closed = 0.0;
  double e_numeric = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  double mu_numeric = 0.0;     // finest angular eigenvalue
  double r_max = 0.0;          // box used for the radial problem
  double order = 0.0;          // observed convergence order under grid doubling
  std::vector<double> raw;     // unextrapolated energies, coarse to fine
};

/// Angular eigensolver followed by the radial eigensolver, both refined by
/// grid doubling; e_numeric is the Richardson extrapolation of the two
/// finest levels. The radial box grows until the state has decayed.
SpectrumRow solve_state(const QuantumNumbers& qn, const SpectrumOptions& options = {});

struct SpectrumTable {
  std::vector<SpectrumRow> rows;
};

/// All (n <= n_max, l <= n - 1, m in ms); parallel over states, rows in
/// lexicographic (n, l, m) order of the input.
SpectrumTable naive_spectrum(int n_max, std::span<const int> ms, const SpectrumOptions& options = {});

/// Columns n,l,m,E_closed,E_numeric,abs_err,rel_err.
std::string to_csv(const SpectrumTable& table);
nlohmann::json to_json(const SpectrumTable& table);

/// Closed-form separated eigenfunction R(r) Theta(theta) cos(m phi) in
/// coordinates (r, theta, phi), with
///   R = r^{lambda+1} e^{-kappa r} L_k^{(2 lambda + 1)}(2 kappa r),
///   lambda = -1/2 + sqrt(L^2 + 1/4), kappa = 1 / (k + lambda + 1),
///   Theta = cos(l theta) for m = 0, sin^s(theta) C_l^{(s)}(cos theta) otherwise,
/// s = (1 + sqrt(4 m^2 + 1)) / 2. No closed-form jet is attached.
ScalarField naive_eigenfunction(const QuantumNumbers& qn);

/// Seeded points (r, theta, phi) with r in [0.5, 8], theta in [0.1, pi - 0.1],
/// kept away from the nodes of the eigenfunction.
std::vector<Point> regular_samples(const QuantumNumbers& qn, std::size_t count, std::uint64_t seed);

/// max |(H psi - E psi) / psi| over the samples, H = 1/2 Naive - 1/r on the
/// spherical chart of flat R^3 and E = naive_energy(qn). Derivatives of psi
/// are taken numerically. Throws EvaluationError at r <= 0 or on the axis.
double eigenfunction_residual(const QuantumNumbers& qn, std::span<const Point> samples, const DiffConfig& cfg = {});

}  // namespace ordlab
