#include "morphoflow/flow.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "flow_internal.hpp"
#include "morphoflow/errors.hpp"

namespace morphoflow {

namespace detail {

void velocities(const PointList& queries, const PointList& controls,
                const PointList& alpha, double sigma_v, PointList& out) {
  out.resize(queries.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(queries.size()); ++i) {
    const Vec3& q = queries[i];
    Vec3 v = Vec3::Zero();
    for (std::size_t n = 0; n < controls.size(); ++n) {
      v += cauchy_k((controls[n] - q).squaredNorm(), sigma_v) * alpha[n];
    }
    out[i] = v;
  }
}

namespace {

void axpy(const PointList& x, double a, const PointList& y, PointList& out) {
  out.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * y[i];
}

} // namespace

void control_step(const PointList& x, const PointList& alpha, double sigma_v,
                  double dt, StepStages& s, PointList& x_next) {
  s.y0 = x;
  velocities(s.y0, s.y0, alpha, sigma_v, s.k1);
  axpy(s.y0, 0.5 * dt, s.k1, s.y1);
  velocities(s.y1, s.y1, alpha, sigma_v, s.k2);
  axpy(s.y0, 0.5 * dt, s.k2, s.y2);
  velocities(s.y2, s.y2, alpha, sigma_v, s.k3);
  axpy(s.y0, dt, s.k3, s.y3);
  velocities(s.y3, s.y3, alpha, sigma_v, s.k4);
  x_next.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x_next[i] = s.y0[i] + (dt / 6.0) * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
  }
}

void transport_step(const StepStages& s, const PointList& alpha, double sigma_v,
                    double dt, PointList& points) {
  PointList l1, l2, l3, l4, tmp;
  velocities(points, s.y0, alpha, sigma_v, l1);
  axpy(points, 0.5 * dt, l1, tmp);
  velocities(tmp, s.y1, alpha, sigma_v, l2);
  axpy(points, 0.5 * dt, l2, tmp);
  velocities(tmp, s.y2, alpha, sigma_v, l3);
  axpy(points, dt, l3, tmp);
  velocities(tmp, s.y3, alpha, sigma_v, l4);
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i] += (dt / 6.0) * (l1[i] + 2.0 * l2[i] + 2.0 * l3[i] + l4[i]);
  }
}

void transport_step_stages(const StepStages& s, const PointList& alpha,
                           double sigma_v, double dt, PassiveStages& ps,
                           PointList& points) {
  PointList l1, l2, l3, l4;
  ps.y0 = points;
  velocities(ps.y0, s.y0, alpha, sigma_v, l1);
  axpy(ps.y0, 0.5 * dt, l1, ps.y1);
  velocities(ps.y1, s.y1, alpha, sigma_v, l2);
  axpy(ps.y0, 0.5 * dt, l2, ps.y2);
  velocities(ps.y2, s.y2, alpha, sigma_v, l3);
  axpy(ps.y0, dt, l3, ps.y3);
  velocities(ps.y3, s.y3, alpha, sigma_v, l4);
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i] = ps.y0[i] + (dt / 6.0) * (l1[i] + 2.0 * l2[i] + 2.0 * l3[i] + l4[i]);
  }
}

void vjp_self_velocity(const PointList& x, const PointList& alpha,
                       double sigma_v, const PointList& w, PointList& xbar,
                       PointList& abar) {
  const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t m = 0; m < n; ++m) {
    const Vec3& xm = x[m];
    Vec3 xacc = Vec3::Zero();
    Vec3 aacc = Vec3::Zero();
    for (std::int64_t j = 0; j < n; ++j) {
      const Vec3 diff = xm - x[j];
      const double d2 = diff.squaredNorm();
      // dF/dalpha_m^T w: row m of the kernel matrix applied to w
      aacc += cauchy_k(d2, sigma_v) * w[j];
      // dF/dx_m^T w: both the "field source" and "query point" roles of x_m
      xacc += (2.0 * cauchy_dk(d2, sigma_v) *
               (alpha[m].dot(w[j]) + alpha[j].dot(w[m]))) * diff;
    }
    xbar[m] += xacc;
    abar[m] += aacc;
  }
}

void rk4_adjoint_step(const StepStages& s, const PointList& alpha,
                      double sigma_v, double dt, PointList& lambda,
                      PointList& abar) {
  const std::size_t n = lambda.size();
  PointList kb(n), yb(n, Vec3::Zero());
  PointList y0b(n, Vec3::Zero()), y1b(n, Vec3::Zero()), y2b(n, Vec3::Zero()),
      y3b(n, Vec3::Zero());

  // x_{k+1} = y0 + dt/6 (k1 + 2 k2 + 2 k3 + k4); y_s = y0 + c_s dt k_s.
  for (std::size_t i = 0; i < n; ++i) kb[i] = (dt / 6.0) * lambda[i];
  vjp_self_velocity(s.y3, alpha, sigma_v, kb, y3b, abar);

  for (std::size_t i = 0; i < n; ++i) kb[i] = (dt / 3.0) * lambda[i] + dt * y3b[i];
  vjp_self_velocity(s.y2, alpha, sigma_v, kb, y2b, abar);

  for (std::size_t i = 0; i < n; ++i) kb[i] = (dt / 3.0) * lambda[i] + 0.5 * dt * y2b[i];
  vjp_self_velocity(s.y1, alpha, sigma_v, kb, y1b, abar);

  for (std::size_t i = 0; i < n; ++i) kb[i] = (dt / 6.0) * lambda[i] + 0.5 * dt * y1b[i];
  vjp_self_velocity(s.y0, alpha, sigma_v, kb, y0b, abar);

  for (std::size_t i = 0; i < n; ++i) {
    lambda[i] += y0b[i] + y1b[i] + y2b[i] + y3b[i];
  }
}

void vjp_passive_velocity(const PointList& x, const PointList& y,
                          const PointList& alpha, double sigma_v,
                          const PointList& w, PointList& xbar, PointList& ybar,
                          PointList& abar) {
  const auto nx = static_cast<std::int64_t>(x.size());
  const auto ny = static_cast<std::int64_t>(y.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < nx; ++n) {
    Vec3 xacc = Vec3::Zero();
    Vec3 aacc = Vec3::Zero();
    for (std::int64_t i = 0; i < ny; ++i) {
      const Vec3 diff = x[n] - y[i];
      const double d2 = diff.squaredNorm();
      aacc += cauchy_k(d2, sigma_v) * w[i];
      xacc += (2.0 * cauchy_dk(d2, sigma_v) * alpha[n].dot(w[i])) * diff;
    }
    xbar[n] += xacc;
    abar[n] += aacc;
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < ny; ++i) {
    Vec3 yacc = Vec3::Zero();
    for (std::int64_t n = 0; n < nx; ++n) {
      const Vec3 diff = y[i] - x[n];
      const double d2 = diff.squaredNorm();
      yacc += (2.0 * cauchy_dk(d2, sigma_v) * alpha[n].dot(w[i])) * diff;
    }
    ybar[i] += yacc;
  }
}

void rk4_joint_adjoint_step(const StepStages& s, const PassiveStages& ps,
                            const PointList& alpha, double sigma_v, double dt,
                            PointList& lambda_x, PointList& lambda_y,
                            PointList& abar) {
  const std::size_t nc = lambda_x.size();
  const std::size_t np = lambda_y.size();

  // Passive chain first: it injects adjoint into the control stage
  // positions (x0ext..x3ext) consumed by the control chain below.
  PointList lb(np);
  PointList y0b(np, Vec3::Zero()), y1b(np, Vec3::Zero()), y2b(np, Vec3::Zero()),
      y3b(np, Vec3::Zero());
  PointList x0ext(nc, Vec3::Zero()), x1ext(nc, Vec3::Zero()), x2ext(nc, Vec3::Zero()),
      x3ext(nc, Vec3::Zero());

  for (std::size_t i = 0; i < np; ++i) lb[i] = (dt / 6.0) * lambda_y[i];
  vjp_passive_velocity(s.y3, ps.y3, alpha, sigma_v, lb, x3ext, y3b, abar);

  for (std::size_t i = 0; i < np; ++i) lb[i] = (dt / 3.0) * lambda_y[i] + dt * y3b[i];
  vjp_passive_velocity(s.y2, ps.y2, alpha, sigma_v, lb, x2ext, y2b, abar);

  for (std::size_t i = 0; i < np; ++i) lb[i] = (dt / 3.0) * lambda_y[i] + 0.5 * dt * y2b[i];
  vjp_passive_velocity(s.y1, ps.y1, alpha, sigma_v, lb, x1ext, y1b, abar);

  for (std::size_t i = 0; i < np; ++i) lb[i] = (dt / 6.0) * lambda_y[i] + 0.5 * dt * y1b[i];
  vjp_passive_velocity(s.y0, ps.y0, alpha, sigma_v, lb, x0ext, y0b, abar);

  for (std::size_t i = 0; i < np; ++i) {
    lambda_y[i] += y0b[i] + y1b[i] + y2b[i] + y3b[i];
  }

  // Control chain, with the passive-side stage contributions folded into
  // each stage adjoint before it propagates.
  PointList kb(nc);
  PointList x0b(nc, Vec3::Zero()), x1b(nc, Vec3::Zero()), x2b(nc, Vec3::Zero()),
      x3b(nc, Vec3::Zero());

  for (std::size_t i = 0; i < nc; ++i) kb[i] = (dt / 6.0) * lambda_x[i];
  vjp_self_velocity(s.y3, alpha, sigma_v, kb, x3b, abar);
  for (std::size_t i = 0; i < nc; ++i) x3b[i] += x3ext[i];

  for (std::size_t i = 0; i < nc; ++i) kb[i] = (dt / 3.0) * lambda_x[i] + dt * x3b[i];
  vjp_self_velocity(s.y2, alpha, sigma_v, kb, x2b, abar);
  for (std::size_t i = 0; i < nc; ++i) x2b[i] += x2ext[i];

  for (std::size_t i = 0; i < nc; ++i) kb[i] = (dt / 3.0) * lambda_x[i] + 0.5 * dt * x2b[i];
  vjp_self_velocity(s.y1, alpha, sigma_v, kb, x1b, abar);
  for (std::size_t i = 0; i < nc; ++i) x1b[i] += x1ext[i];

  for (std::size_t i = 0; i < nc; ++i) kb[i] = (dt / 6.0) * lambda_x[i] + 0.5 * dt * x1b[i];
  vjp_self_velocity(s.y0, alpha, sigma_v, kb, x0b, abar);
  for (std::size_t i = 0; i < nc; ++i) x0b[i] += x0ext[i];

  for (std::size_t i = 0; i < nc; ++i) {
    lambda_x[i] += x0b[i] + x1b[i] + x2b[i] + x3b[i];
  }
}

double reg_step(const PointList& x, const PointList& alpha, double sigma_v) {
  const auto n = static_cast<std::int64_t>(x.size());
  std::vector<double> row(x.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < n; ++p) {
    double acc = 0.0;
    for (std::int64_t q = 0; q < n; ++q) {
      acc += cauchy_k((x[p] - x[q]).squaredNorm(), sigma_v) * alpha[p].dot(alpha[q]);
    }
    row[p] = acc;
  }
  double total = 0.0;
  for (double r : row) total += r;
  return total;
}

void reg_step_gradients(const PointList& x, const PointList& alpha,
                        double sigma_v, double weight, PointList& xgrad,
                        PointList& agrad) {
  const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t m = 0; m < n; ++m) {
    Vec3 xacc = Vec3::Zero();
    Vec3 aacc = Vec3::Zero();
    for (std::int64_t q = 0; q < n; ++q) {
      const Vec3 diff = x[m] - x[q];
      const double d2 = diff.squaredNorm();
      aacc += 2.0 * cauchy_k(d2, sigma_v) * alpha[q];
      xacc += (4.0 * alpha[m].dot(alpha[q]) * cauchy_dk(d2, sigma_v)) * diff;
    }
    xgrad[m] += weight * xacc;
    agrad[m] += weight * aacc;
  }
}

} // namespace detail

void check_field(const MomentumField& field) {
  if (field.n_steps < 1) throw InvalidArgument("MomentumField: n_steps must be >= 1");
  if (!(field.sigma_v > 0.0)) throw InvalidArgument("MomentumField: sigma_v must be positive");
  if (!(field.gamma > 0.0)) throw InvalidArgument("MomentumField: gamma must be positive");
  const auto t = static_cast<std::size_t>(field.n_steps);
  if (field.control_trajectories.size() != t + 1) {
    throw InvalidArgument("MomentumField: expected " + std::to_string(t + 1) +
                          " trajectory arrays, got " +
                          std::to_string(field.control_trajectories.size()));
  }
  if (field.momenta.size() != t) {
    throw InvalidArgument("MomentumField: expected " + std::to_string(t) +
                          " momentum arrays, got " + std::to_string(field.momenta.size()));
  }
  const std::size_t nc = field.control_trajectories.front().size();
  if (nc == 0) throw InvalidArgument("MomentumField: no control points");
  for (const PointList& pts : field.control_trajectories) {
    if (pts.size() != nc) throw InvalidArgument("MomentumField: ragged trajectories");
    for (const Vec3& p : pts) {
      if (!p.allFinite()) throw InvalidArgument("MomentumField: non-finite trajectory entry");
    }
  }
  for (const PointList& al : field.momenta) {
    if (al.size() != nc) throw InvalidArgument("MomentumField: ragged momenta");
    for (const Vec3& a : al) {
      if (!a.allFinite()) throw InvalidArgument("MomentumField: non-finite momentum entry");
    }
  }
}

Vec3 velocity_at(const Vec3& x, const PointList& controls,
                 const PointList& momenta, double sigma_v) {
  if (controls.size() != momenta.size()) {
    throw InvalidArgument("velocity_at: controls and momenta differ in length");
  }
  if (!(sigma_v > 0.0)) throw InvalidArgument("velocity_at: sigma_v must be positive");
  Vec3 v = Vec3::Zero();
  for (std::size_t n = 0; n < controls.size(); ++n) {
    v += cauchy_k((controls[n] - x).squaredNorm(), sigma_v) * momenta[n];
  }
  return v;
}

namespace {

int snap_step(double t, int n_steps) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidArgument("flow time " + std::to_string(t) + " outside [0, 1]");
  }
  return static_cast<int>(std::lround(t * n_steps));
}

} // namespace

std::vector<PointList> integrate_flow(const PointList& points,
                                      const MomentumField& field, double t_end) {
  check_field(field);
  const int k_end = snap_step(t_end, field.n_steps);
  const double dt = 1.0 / field.n_steps;

  std::vector<PointList> trajectory;
  trajectory.reserve(static_cast<std::size_t>(k_end) + 1);
  trajectory.push_back(points);

  PointList controls = field.control_trajectories.front();
  PointList moving = points;
  detail::StepStages stages;
  PointList controls_next;
  for (int k = 0; k < k_end; ++k) {
    detail::control_step(controls, field.momenta[k], field.sigma_v, dt, stages,
                         controls_next);
    detail::transport_step(stages, field.momenta[k], field.sigma_v, dt, moving);
    controls.swap(controls_next);
    trajectory.push_back(moving);
  }
  return trajectory;
}

std::vector<PointList> integrate_flow_reverse(const PointList& points,
                                              const MomentumField& field) {
  check_field(field);
  const double dt = 1.0 / field.n_steps;

  std::vector<PointList> trajectory;
  trajectory.reserve(static_cast<std::size_t>(field.n_steps) + 1);
  trajectory.push_back(points);

  PointList controls = field.control_trajectories.back();
  PointList moving = points;
  detail::StepStages stages;
  PointList controls_next;
  PointList neg;
  for (int k = field.n_steps - 1; k >= 0; --k) {
    neg = field.momenta[k];
    for (Vec3& a : neg) a = -a;
    detail::control_step(controls, neg, field.sigma_v, dt, stages, controls_next);
    detail::transport_step(stages, neg, field.sigma_v, dt, moving);
    controls.swap(controls_next);
    trajectory.push_back(moving);
  }
  return trajectory;
}

double regularization_energy(const MomentumField& field) {
  check_field(field);
  const double dt = 1.0 / field.n_steps;
  double total = 0.0;
  for (int k = 0; k < field.n_steps; ++k) {
    total += detail::reg_step(field.control_trajectories[k], field.momenta[k],
                              field.sigma_v);
  }
  return dt * total;
}

SurfaceMesh apply_flow(const SurfaceMesh& mesh,
                       const std::vector<MomentumField>& fields) {
  SurfaceMesh out = mesh;
  for (const MomentumField& field : fields) {
    out.vertices = integrate_flow(out.vertices, field, 1.0).back();
  }
  return out;
}

std::vector<FlowSnapshot> flow_snapshots(const SurfaceMesh& mesh,
                                         const MomentumField& field,
                                         const std::vector<double>& times) {
  const std::vector<PointList> trajectory = integrate_flow(mesh.vertices, field, 1.0);

  // Cumulative arc length of each vertex's discrete trajectory.
  std::vector<std::vector<double>> arc(trajectory.size(),
                                       std::vector<double>(mesh.vertices.size(), 0.0));
  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      arc[k][i] = arc[k - 1][i] + (trajectory[k][i] - trajectory[k - 1][i]).norm();
    }
  }

  std::vector<FlowSnapshot> snapshots;
  snapshots.reserve(times.size());
  for (double t : times) {
    const int k = snap_step(t, field.n_steps);
    FlowSnapshot snap;
    snap.time = static_cast<double>(k) / field.n_steps;
    snap.mesh = mesh;
    snap.mesh.vertices = trajectory[static_cast<std::size_t>(k)];
    snap.displacement = arc[static_cast<std::size_t>(k)];
    snapshots.push_back(std::move(snap));
  }
  return snapshots;
}

double self_consistency_error(const MomentumField& field) {
  check_field(field);
  const double dt = 1.0 / field.n_steps;

  double scale = 1.0;
  for (const PointList& pts : field.control_trajectories) {
    for (const Vec3& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  }

  PointList x = field.control_trajectories.front();
  detail::StepStages stages;
  PointList x_next;
  double worst = 0.0;
  for (int k = 0; k < field.n_steps; ++k) {
    detail::control_step(x, field.momenta[k], field.sigma_v, dt, stages, x_next);
    x.swap(x_next);
    const PointList& stored = field.control_trajectories[static_cast<std::size_t>(k) + 1];
    for (std::size_t i = 0; i < x.size(); ++i) {
      worst = std::max(worst, (x[i] - stored[i]).norm() / scale);
    }
  }
  return worst;
}

} // namespace morphoflow
