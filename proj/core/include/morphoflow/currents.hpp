#pragma once

#include <cstddef>

#include "morphoflow/kernels.hpp"
#include "morphoflow/mesh.hpp"

namespace morphoflow {

/// A surface's image in the currents space: one weighted Dirac per face,
/// located at the face barycenter and carrying the area-weighted normal.
struct CurrentRep {
  PointList centers;  // face barycenters (m)
  PointList normals;  // direction = face normal, magnitude = face area (m^2)
  std::size_t source_face_count = 0;
};

struct CurrentsParams {
  double sigma_w;                                        // kernel width (m), > 0
  CurrentsKernel kernel = CurrentsKernel::Gaussian;
};

/// Default currents scale: 10% of the target's bounding-box diagonal.
double default_sigma_w(const SurfaceMesh& target);

CurrentRep current_of(const SurfaceMesh& mesh);

/// <a, b>_W = sum_p sum_q k_W(c_p^a, c_q^b) (n_p^a . n_q^b).
/// Symmetric; deterministic summation order (per-row partials combined in
/// index order), so results are identical across runs and thread counts.
double currents_inner(const CurrentRep& a, const CurrentRep& b,
                      const CurrentsParams& params);

/// Squared currents distance E = <A,A> - 2<A,B> + <B,B> with A = current_of
/// (moved), B = target. Tiny negative values from cancellation (within
/// 1e-12 * <B,B>) are clamped to zero; anything more negative throws
/// NumericError.
double data_term_E(const SurfaceMesh& moved, const CurrentRep& target,
                   const CurrentsParams& params);

/// Exact analytic gradient of data_term_E with respect to every vertex of
/// `moved` (chain rule through face centers and area-weighted normals).
PointList grad_data_term(const SurfaceMesh& moved, const CurrentRep& target,
                         const CurrentsParams& params);

} // namespace morphoflow
