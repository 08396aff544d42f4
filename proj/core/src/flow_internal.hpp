#pragma once

// RK4 stepping internals shared by the flow integrator and the adjoint
// gradient in match.cpp. Not installed.

#include "morphoflow/flow.hpp"

namespace morphoflow::detail {

/// v(x_i) for every query point; deterministic (each row summed sequentially).
void velocities(const PointList& queries, const PointList& controls,
                const PointList& alpha, double sigma_v, PointList& out);

/// Control positions and velocities at the four RK4 stage points of one step.
struct StepStages {
  PointList y0, y1, y2, y3;
  PointList k1, k2, k3, k4;
};

/// One RK4 step of the self-interacting control system
///   dx_i/dt = sum_n k_V(x_n, x_i) alpha_n
/// with the momenta held constant within the step. Fills `stages` and the
/// end-of-step positions `x_next`.
void control_step(const PointList& x, const PointList& alpha, double sigma_v,
                  double dt, StepStages& stages, PointList& x_next);

/// Transports passive points through the same step, evaluating the velocity
/// field at the control stage positions. In-place update of `points`.
/// A passive copy of the controls reproduces the control step bit-exactly.
void transport_step(const StepStages& stages, const PointList& alpha,
                    double sigma_v, double dt, PointList& points);

/// Accumulates the vector-Jacobian products of F(X) = velocities(X, X, alpha)
/// for weights w:  abar += (dF/dalpha)^T w  and  xbar += (dF/dX)^T w.
void vjp_self_velocity(const PointList& x, const PointList& alpha,
                       double sigma_v, const PointList& w, PointList& xbar,
                       PointList& abar);

/// Reverse sweep through one stored RK4 step: consumes lambda = dJ/dx_{k+1},
/// leaves lambda = dJ/dx_k and adds dJ/dalpha_k into abar.
void rk4_adjoint_step(const StepStages& stages, const PointList& alpha,
                      double sigma_v, double dt, PointList& lambda,
                      PointList& abar);

/// Passive-point stage positions within one step (for the joint adjoint
/// used with subsampled control points).
struct PassiveStages {
  PointList y0, y1, y2, y3;
};

/// transport_step with the stage positions captured. Same arithmetic.
void transport_step_stages(const StepStages& control_stages, const PointList& alpha,
                           double sigma_v, double dt, PassiveStages& stages,
                           PointList& points);

/// VJP of the passive velocity evaluation G_i(X, Y) = sum_n k(|x_n - y_i|^2)
/// alpha_n for weights w over G: accumulates dG/dX^T w, dG/dY^T w, dG/dalpha^T w.
void vjp_passive_velocity(const PointList& x, const PointList& y,
                          const PointList& alpha, double sigma_v,
                          const PointList& w, PointList& xbar, PointList& ybar,
                          PointList& abar);

/// Reverse sweep through one joint RK4 step (controls + passive points).
/// Consumes lambda_x = dJ/dx_{k+1}, lambda_y = dJ/dy_{k+1}; leaves the
/// step-k adjoints and adds dJ/dalpha_k into abar.
void rk4_joint_adjoint_step(const StepStages& control_stages,
                            const PassiveStages& passive_stages,
                            const PointList& alpha, double sigma_v, double dt,
                            PointList& lambda_x, PointList& lambda_y,
                            PointList& abar);

/// sum_{p,q} (alpha_p . alpha_q) k_V(x_p, x_q)  (one step, no dt factor).
double reg_step(const PointList& x, const PointList& alpha, double sigma_v);

/// Gradients of reg_step: dalpha_p = 2 sum_q k a_q,
/// dx_m = 4 sum_q (a_m.a_q) k'(d2)(x_m - x_q). Accumulated with `weight`.
void reg_step_gradients(const PointList& x, const PointList& alpha,
                        double sigma_v, double weight, PointList& xgrad,
                        PointList& agrad);

} // namespace morphoflow::detail
