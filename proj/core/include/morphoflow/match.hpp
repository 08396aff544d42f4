#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "morphoflow/currents.hpp"
#include "morphoflow/flow.hpp"
#include "morphoflow/mesh.hpp"

namespace morphoflow {

/// Matching configuration. sigma_v / sigma_w left unset resolve to the
/// scale-relative defaults (25% of the source bounding-box diagonal and 10%
/// of the target's respectively).
struct MatchParams {
  std::optional<double> sigma_v;
  std::optional<double> sigma_w;
  double gamma = 0.01;
  int n_steps = 10;
  int max_iterations = 200;
  double grad_tolerance = 1e-6;  // relative to the initial gradient scale
  double rel_j_tolerance = 1e-12;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  int max_halvings = 30;
  double initial_step = 1.0;
  CurrentsKernel currents_kernel = CurrentsKernel::Gaussian;
  /// Optionally precondition the descent direction with the per-step kernel
  /// Gram matrix (steepest descent in the velocity-space metric instead of
  /// the raw coordinate gradient). Still a descent direction either way.
  bool kernel_preconditioned = false;
  /// Place a control point on every k-th source vertex instead of all of
  /// them (for large meshes). With stride > 1 the mesh vertices ride the
  /// flow as passive points while the momenta live on the subset.
  int control_stride = 1;
};

/// MatchParams with every default resolved against a concrete mesh pair.
struct ResolvedMatchParams {
  double sigma_v = 0.0;
  double sigma_w = 0.0;
  double gamma = 0.0;
  int n_steps = 0;
  int max_iterations = 0;
  double grad_tolerance = 0.0;
  double rel_j_tolerance = 0.0;
  double armijo_c = 0.0;
  double backtrack_factor = 0.0;
  int max_halvings = 0;
  double initial_step = 0.0;
  CurrentsKernel currents_kernel = CurrentsKernel::Gaussian;
  bool kernel_preconditioned = false;
  int control_stride = 1;
  std::string source_label;
  std::string target_label;
};

ResolvedMatchParams resolve_params(const MatchParams& params,
                                   const SurfaceMesh& source,
                                   const SurfaceMesh& target);

struct ObjectiveValue {
  double j = 0.0;
  double reg = 0.0; // unweighted energy integral; j = gamma*reg + e
  double e = 0.0;
};

/// J for a stored field. Precondition: the field's step-0 control points are
/// exactly the source vertices.
ObjectiveValue objective_J(const SurfaceMesh& source, const CurrentRep& target,
                           const MomentumField& field,
                           const CurrentsParams& currents);

/// J as a function of raw momenta. With `control_indices` empty the control
/// points are the source vertices; otherwise they are the indexed subset and
/// all vertices are transported passively (momenta shape [T][indices]).
ObjectiveValue objective_value(const SurfaceMesh& source, const CurrentRep& target,
                               const std::vector<PointList>& momenta,
                               double sigma_v, double gamma,
                               const CurrentsParams& currents,
                               const std::vector<std::size_t>& control_indices = {});

struct ObjectiveGradient {
  ObjectiveValue value;
  std::vector<PointList> grad; // [T][Nc], dJ/dalpha
};

/// Analytic gradient of the discretized J with respect to every momentum
/// component, computed by a reverse sweep through the stored RK4 stages.
ObjectiveGradient objective_gradient(const SurfaceMesh& source,
                                     const CurrentRep& target,
                                     const std::vector<PointList>& momenta,
                                     double sigma_v, double gamma,
                                     const CurrentsParams& currents,
                                     const std::vector<std::size_t>& control_indices = {});

struct MatchReport {
  int iterations = 0;      // accepted descent steps
  bool converged = false;  // stopped by a tolerance rather than the cap
  std::string stop_reason; // gradient_tolerance | j_stalled | max_iterations
  double j_initial = 0.0, reg_initial = 0.0, e_initial = 0.0;
  double j_final = 0.0, reg_final = 0.0, e_final = 0.0;
  std::vector<double> j_trace; // J at start plus after each accepted step
  ResolvedMatchParams params;
};

/// Finds momenta minimizing the discretized J by gradient descent with
/// Armijo backtracking from zero initialization. Deterministic: identical
/// inputs give bit-identical fields. Throws NumericError if a step diverges
/// (line search exhausts its halvings on a non-improving or non-finite J).
std::pair<MomentumField, MatchReport> match(const SurfaceMesh& source,
                                            const SurfaceMesh& target,
                                            const MatchParams& params = {});

} // namespace morphoflow
