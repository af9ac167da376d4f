#pragma once

#include "ordlab/diff.hpp"

namespace ordlab {

// Single source of truth for mode-dependent acceptance thresholds.
struct Tolerances {
  double linear;     // |g * g_inv - I|, Jacobi and inverse-derivative identities
  double curvature;  // relative agreement between curvature routes
  double operator_;  // relative agreement of operator evaluations
};

inline constexpr Tolerances kAnalyticTolerances{1e-10, 1e-9, 1e-9};
inline constexpr Tolerances kNumericTolerances{1e-7, 1e-5, 1e-5};

constexpr const Tolerances& tolerances_for(DerivativeMode mode) {
  return mode == DerivativeMode::analytic ? kAnalyticTolerances : kNumericTolerances;
}

// |ricci| below this leaves the per-point curvature coefficient undefined.
inline constexpr double kCurvatureFloor = 1e-8;

// Relative singular-value cutoff for numerical rank.
inline constexpr double kRankThreshold = 1e-8;

inline constexpr double kIdentityTolerance = 1e-12;

// Outer-step multiplier for nested (flux-divergence) differentiation.
inline constexpr double kNestedStepFactor = 8.0;

inline constexpr int kMaxDimension = 6;

}  // namespace ordlab
