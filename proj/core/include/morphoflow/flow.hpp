#pragma once

#include <string>
#include <vector>

#include "morphoflow/geometry.hpp"
#include "morphoflow/kernels.hpp"
#include "morphoflow/mesh.hpp"

namespace morphoflow {

/// A time-discretized flow of diffeomorphisms: control-point trajectories
/// x_n(t_k) on the uniform grid t_k = k/T and per-step momentum vectors
/// alpha_n(t_k). Together with the Cauchy kernel width sigma_v this fully
/// determines the velocity field
///   v(t_k, x) = sum_n k_V(x_n(t_k), x) alpha_n(t_k)
/// and hence the transport of any point set. Immutable once built.
struct MomentumField {
  std::vector<PointList> control_trajectories; // (T+1) x Nc
  std::vector<PointList> momenta;              // T x Nc
  double sigma_v = 0.0;
  double gamma = 0.0; // regularization weight the field was learned with
  int n_steps = 0;
  std::string source_label;
  std::string target_label;
};

/// Shape/finiteness/positivity invariants. Throws InvalidArgument.
void check_field(const MomentumField& field);

/// Velocity induced at x by controls carrying momenta (Cauchy kernel).
Vec3 velocity_at(const Vec3& x, const PointList& controls,
                 const PointList& momenta, double sigma_v);

/// Transports arbitrary points through the field with fixed-step RK4,
/// re-integrating the self-interacting control system alongside them.
/// t_end snaps to the nearest step-grid time. Returns positions at every
/// step 0..k_end inclusive (index 0 is the input).
std::vector<PointList> integrate_flow(const PointList& points,
                                      const MomentumField& field,
                                      double t_end = 1.0);

/// Reverse-time transport from t=1 to t=0: steps in reversed order with
/// negated momenta, controls re-integrated backward from their endpoint.
/// Approximately inverts integrate_flow (up to integrator error).
std::vector<PointList> integrate_flow_reverse(const PointList& points,
                                              const MomentumField& field);

/// Discrete deformation energy integral (without the gamma weight):
///   (1/T) sum_k sum_{p,q} alpha_p(t_k)^T k_V(x_p(t_k), x_q(t_k)) alpha_q(t_k)
double regularization_energy(const MomentumField& field);

/// Applies the fields' flows sequentially (each over t: 0 -> 1) to every
/// vertex. Connectivity unchanged. Empty list is the identity.
SurfaceMesh apply_flow(const SurfaceMesh& mesh,
                       const std::vector<MomentumField>& fields);

struct FlowSnapshot {
  double time = 0.0;                // requested time snapped to the step grid
  SurfaceMesh mesh;
  std::vector<double> displacement; // per-vertex cumulative trajectory arc length
};

/// Mesh states along the flow plus cumulative per-vertex displacement,
/// e.g. for rendering the deformation as a time sequence.
std::vector<FlowSnapshot> flow_snapshots(const SurfaceMesh& mesh,
                                         const MomentumField& field,
                                         const std::vector<double>& times);

/// Max deviation (relative to the trajectory coordinate scale) between the
/// stored control trajectories and a re-integration from step 0. Fields
/// produced by match() reproduce themselves exactly; the documented
/// tolerance is 1e-10.
double self_consistency_error(const MomentumField& field);

} // namespace morphoflow
