#pragma once

#include <vector>

#include <Eigen/Dense>

namespace ordlab {

/// Real symmetric tridiagonal matrix: diag(0..N-1), off(0..N-2).
struct SymmetricTridiagonal {
  Eigen::VectorXd diag;
  Eigen::VectorXd off;

  Eigen::Index size() const { return diag.size(); }
};

/// Number of eigenvalues strictly below x (Sturm sequence count).
int sturm_count(const SymmetricTridiagonal& t, double x);

/// The `count` smallest eigenvalues in increasing order, by bisection on the
/// Sturm count to within `abs_tol` (0 picks a tolerance near machine
/// precision relative to the Gershgorin bound).
std::vector<double> smallest_eigenvalues(const SymmetricTridiagonal& t, int count, double abs_tol = 0.0);

}  // namespace ordlab
