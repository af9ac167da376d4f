#include "ordlab/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ordlab {

int sturm_count(const SymmetricTridiagonal& t, double x) {
  const Eigen::Index n = t.size();
  constexpr double tiny = std::numeric_limits<double>::min();
  int count = 0;
  double q = t.diag[0] - x;
  if (q < 0.0) ++count;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (q == 0.0) q = tiny;
    q = t.diag[i] - x - t.off[i - 1] * t.off[i - 1] / q;
    if (q < 0.0) ++count;
  }
  return count;
}

std::vector<double> smallest_eigenvalues(const SymmetricTridiagonal& t, int count, double abs_tol) {
  const Eigen::Index n = t.size();
  if (n < 1) throw std::invalid_argument("empty tridiagonal matrix");
  if (t.off.size() != n - 1) throw std::invalid_argument("tridiagonal off-diagonal has wrong length");
  if (count < 1 || count > n) throw std::invalid_argument("eigenvalue count out of range");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(t.off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(t.off[i]) : 0.0);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  if (abs_tol <= 0.0) abs_tol = 4.0 * std::numeric_limits<double>::epsilon() * scale;

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(count));
  double floor = lo;
  for (int k = 0; k < count; ++k) {
    // k-th eigenvalue (0-based): smallest x with sturm_count(x) > k
    double a = floor;
    double b = hi;
    while (b - a > abs_tol) {
      const double m = 0.5 * (a + b);
      if (m == a || m == b) break;
      if (sturm_count(t, m) > k) {
        b = m;
      } else {
        a = m;
      }
    }
    values.push_back(0.5 * (a + b));
    floor = a;
  }
  return values;
}

}  // namespace ordlab
