#pragma once

#include <cmath>

#include "morphoflow/geometry.hpp"

namespace morphoflow {

/// Reproducing kernel of the deformation velocity space:
/// k_V(x, y) = 1 / (1 + |x-y|^2 / sigma_v^2). Symmetric, in (0, 1].
inline double cauchy_kernel(const Vec3& x, const Vec3& y, double sigma_v) {
  return 1.0 / (1.0 + (x - y).squaredNorm() / (sigma_v * sigma_v));
}

/// Cauchy kernel as a function of squared distance, plus its derivative with
/// respect to squared distance (needed by the adjoint):
///   k(d2)  = 1 / (1 + d2/s^2),    dk/d(d2) = -k^2 / s^2.
inline double cauchy_k(double d2, double sigma_v) {
  return 1.0 / (1.0 + d2 / (sigma_v * sigma_v));
}
inline double cauchy_dk(double d2, double sigma_v) {
  const double k = cauchy_k(d2, sigma_v);
  return -k * k / (sigma_v * sigma_v);
}

/// Kernel of the currents space W. Gaussian is the default; Cauchy is an
/// accepted alternate behind this switch.
enum class CurrentsKernel { Gaussian, Cauchy };

inline double currents_k(CurrentsKernel kind, double d2, double sigma_w) {
  const double s2 = sigma_w * sigma_w;
  if (kind == CurrentsKernel::Gaussian) return std::exp(-d2 / s2);
  return 1.0 / (1.0 + d2 / s2);
}

/// d/d(d2) of currents_k.
inline double currents_dk(CurrentsKernel kind, double d2, double sigma_w) {
  const double s2 = sigma_w * sigma_w;
  if (kind == CurrentsKernel::Gaussian) return -std::exp(-d2 / s2) / s2;
  const double k = 1.0 / (1.0 + d2 / s2);
  return -k * k / s2;
}

} // namespace morphoflow
