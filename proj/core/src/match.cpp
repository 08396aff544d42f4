#include "morphoflow/match.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "flow_internal.hpp"
#include "morphoflow/errors.hpp"

namespace morphoflow {

namespace {

using detail::PassiveStages;
using detail::StepStages;

// One objective evaluation. With an empty control-index list the controls
// are the source vertices themselves (the default model); otherwise the
// controls are the indexed subset and every source vertex rides the flow as
// a passive point.
struct EvalState {
  ObjectiveValue value;
  std::vector<PointList> control_traj;  // T+1
  std::vector<StepStages> control_stages;
  std::vector<PointList> passive_traj;  // T+1, empty unless subsampled
  std::vector<PassiveStages> passive_stages;
};

PointList gather(const PointList& points, const std::vector<std::size_t>& indices) {
  PointList out;
  out.reserve(indices.size());
  for (std::size_t idx : indices) out.push_back(points[idx]);
  return out;
}

EvalState eval_state(const SurfaceMesh& source, const CurrentRep& target,
                     const std::vector<std::size_t>& control_indices,
                     const std::vector<PointList>& momenta, double sigma_v,
                     double gamma, const CurrentsParams& currents,
                     bool keep_stages) {
  const int n_steps = static_cast<int>(momenta.size());
  const double dt = 1.0 / n_steps;
  const bool subsampled = !control_indices.empty();

  EvalState state;
  PointList x = subsampled ? gather(source.vertices, control_indices) : source.vertices;
  PointList y = source.vertices;

  state.control_traj.reserve(static_cast<std::size_t>(n_steps) + 1);
  state.control_traj.push_back(x);
  if (subsampled) {
    state.passive_traj.reserve(static_cast<std::size_t>(n_steps) + 1);
    state.passive_traj.push_back(y);
  }
  if (keep_stages) {
    state.control_stages.resize(static_cast<std::size_t>(n_steps));
    if (subsampled) state.passive_stages.resize(static_cast<std::size_t>(n_steps));
  }

  double reg = 0.0;
  PointList x_next;
  StepStages scratch;
  PassiveStages pscratch;
  for (int k = 0; k < n_steps; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    StepStages& stages = keep_stages ? state.control_stages[ku] : scratch;
    reg += detail::reg_step(x, momenta[ku], sigma_v);
    detail::control_step(x, momenta[ku], sigma_v, dt, stages, x_next);
    if (subsampled) {
      PassiveStages& pstages = keep_stages ? state.passive_stages[ku] : pscratch;
      detail::transport_step_stages(stages, momenta[ku], sigma_v, dt, pstages, y);
      state.passive_traj.push_back(y);
    }
    x.swap(x_next);
    state.control_traj.push_back(x);
  }

  SurfaceMesh moved = source;
  moved.vertices = subsampled ? state.passive_traj.back() : state.control_traj.back();
  state.value.reg = dt * reg;
  state.value.e = data_term_E(moved, target, currents);
  state.value.j = gamma * state.value.reg + state.value.e;
  return state;
}

std::vector<PointList> eval_gradient(const SurfaceMesh& source, const CurrentRep& target,
                                     const std::vector<std::size_t>& control_indices,
                                     const std::vector<PointList>& momenta,
                                     double sigma_v, double gamma,
                                     const CurrentsParams& currents,
                                     const EvalState& state) {
  const int n_steps = static_cast<int>(momenta.size());
  const double dt = 1.0 / n_steps;
  const bool subsampled = !control_indices.empty();
  const std::size_t nc = state.control_traj.front().size();

  SurfaceMesh moved = source;
  moved.vertices = subsampled ? state.passive_traj.back() : state.control_traj.back();
  PointList grad_e = grad_data_term(moved, target, currents);

  std::vector<PointList> grad(momenta.size(), PointList(nc, Vec3::Zero()));
  if (!subsampled) {
    PointList lambda = std::move(grad_e);
    for (int k = n_steps - 1; k >= 0; --k) {
      const auto ku = static_cast<std::size_t>(k);
      detail::rk4_adjoint_step(state.control_stages[ku], momenta[ku], sigma_v, dt,
                               lambda, grad[ku]);
      detail::reg_step_gradients(state.control_traj[ku], momenta[ku], sigma_v,
                                 gamma * dt, lambda, grad[ku]);
    }
    return grad;
  }

  PointList lambda_y = std::move(grad_e);
  PointList lambda_x(nc, Vec3::Zero());
  for (int k = n_steps - 1; k >= 0; --k) {
    const auto ku = static_cast<std::size_t>(k);
    detail::rk4_joint_adjoint_step(state.control_stages[ku], state.passive_stages[ku],
                                   momenta[ku], sigma_v, dt, lambda_x, lambda_y,
                                   grad[ku]);
    detail::reg_step_gradients(state.control_traj[ku], momenta[ku], sigma_v,
                               gamma * dt, lambda_x, grad[ku]);
  }
  return grad;
}

void check_momenta_shape(const SurfaceMesh& source,
                         const std::vector<std::size_t>& control_indices,
                         const std::vector<PointList>& momenta) {
  if (momenta.empty()) throw InvalidArgument("objective: momenta must cover >= 1 step");
  const std::size_t expected =
      control_indices.empty() ? source.vertices.size() : control_indices.size();
  for (const PointList& a : momenta) {
    if (a.size() != expected) {
      throw InvalidArgument("objective: one momentum vector per control point required");
    }
  }
  for (std::size_t idx : control_indices) {
    if (idx >= source.vertices.size()) {
      throw InvalidArgument("objective: control index " + std::to_string(idx) +
                            " out of range");
    }
  }
}

double inf_norm(const std::vector<PointList>& grad) {
  double worst = 0.0;
  for (const PointList& step : grad) {
    for (const Vec3& g : step) worst = std::max(worst, g.cwiseAbs().maxCoeff());
  }
  return worst;
}

double dot(const std::vector<PointList>& a, const std::vector<PointList>& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t i = 0; i < a[k].size(); ++i) acc += a[k][i].dot(b[k][i]);
  }
  return acc;
}

// Descent direction: either -grad, or -K(x_k) grad_k per step (the gradient
// mapped through the kernel Gram matrix, i.e. steepest descent in the
// velocity-space metric). K is symmetric positive definite, so this is
// always a descent direction.
std::vector<PointList> descent_direction(const std::vector<PointList>& grad,
                                         const std::vector<PointList>& trajectory,
                                         double sigma_v, bool preconditioned) {
  std::vector<PointList> dir(grad.size());
  for (std::size_t k = 0; k < grad.size(); ++k) {
    if (!preconditioned) {
      dir[k] = grad[k];
      for (Vec3& d : dir[k]) d = -d;
      continue;
    }
    const PointList& x = trajectory[k];
    PointList out(grad[k].size());
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(x.size()); ++p) {
      Vec3 acc = Vec3::Zero();
      for (std::size_t q = 0; q < x.size(); ++q) {
        acc += cauchy_k((x[p] - x[q]).squaredNorm(), sigma_v) * grad[k][q];
      }
      out[p] = -acc;
    }
    dir[k] = std::move(out);
  }
  return dir;
}

} // namespace

ResolvedMatchParams resolve_params(const MatchParams& params,
                                   const SurfaceMesh& source,
                                   const SurfaceMesh& target) {
  ResolvedMatchParams r;
  r.sigma_v = params.sigma_v ? *params.sigma_v : 0.25 * bounding_box(source).diagonal();
  r.sigma_w = params.sigma_w ? *params.sigma_w : default_sigma_w(target);
  r.gamma = params.gamma;
  r.n_steps = params.n_steps;
  r.max_iterations = params.max_iterations;
  r.grad_tolerance = params.grad_tolerance;
  r.rel_j_tolerance = params.rel_j_tolerance;
  r.armijo_c = params.armijo_c;
  r.backtrack_factor = params.backtrack_factor;
  r.max_halvings = params.max_halvings;
  r.initial_step = params.initial_step;
  r.currents_kernel = params.currents_kernel;
  r.kernel_preconditioned = params.kernel_preconditioned;
  r.control_stride = params.control_stride;
  r.source_label = source.name;
  r.target_label = target.name;

  if (!(r.sigma_v > 0.0)) throw InvalidArgument("match: sigma_v must be positive");
  if (!(r.sigma_w > 0.0)) throw InvalidArgument("match: sigma_w must be positive");
  if (!(r.gamma > 0.0)) throw InvalidArgument("match: gamma must be positive");
  if (r.n_steps < 1) throw InvalidArgument("match: n_steps must be >= 1");
  if (r.max_iterations < 1) throw InvalidArgument("match: max_iterations must be >= 1");
  if (!(r.grad_tolerance > 0.0)) throw InvalidArgument("match: grad_tolerance must be positive");
  if (!(r.rel_j_tolerance > 0.0)) throw InvalidArgument("match: rel_j_tolerance must be positive");
  if (!(r.backtrack_factor > 0.0 && r.backtrack_factor < 1.0)) {
    throw InvalidArgument("match: backtrack_factor must be in (0, 1)");
  }
  if (!(r.initial_step > 0.0)) throw InvalidArgument("match: initial_step must be positive");
  if (r.control_stride < 1) throw InvalidArgument("match: control_stride must be >= 1");
  return r;
}

ObjectiveValue objective_value(const SurfaceMesh& source, const CurrentRep& target,
                               const std::vector<PointList>& momenta,
                               double sigma_v, double gamma,
                               const CurrentsParams& currents,
                               const std::vector<std::size_t>& control_indices) {
  check_momenta_shape(source, control_indices, momenta);
  return eval_state(source, target, control_indices, momenta, sigma_v, gamma, currents,
                    false)
      .value;
}

ObjectiveGradient objective_gradient(const SurfaceMesh& source,
                                     const CurrentRep& target,
                                     const std::vector<PointList>& momenta,
                                     double sigma_v, double gamma,
                                     const CurrentsParams& currents,
                                     const std::vector<std::size_t>& control_indices) {
  check_momenta_shape(source, control_indices, momenta);
  const EvalState state = eval_state(source, target, control_indices, momenta, sigma_v,
                                     gamma, currents, true);
  ObjectiveGradient out;
  out.value = state.value;
  out.grad = eval_gradient(source, target, control_indices, momenta, sigma_v, gamma,
                           currents, state);
  return out;
}

ObjectiveValue objective_J(const SurfaceMesh& source, const CurrentRep& target,
                           const MomentumField& field,
                           const CurrentsParams& currents) {
  check_field(field);
  const PointList& controls = field.control_trajectories.front();
  if (controls.size() != source.vertices.size()) {
    throw InvalidArgument("objective_J: field has " + std::to_string(controls.size()) +
                          " control points but the source has " +
                          std::to_string(source.vertices.size()) + " vertices");
  }
  for (std::size_t i = 0; i < controls.size(); ++i) {
    if (controls[i] != source.vertices[i]) {
      throw InvalidArgument("objective_J: field control points differ from source vertices");
    }
  }
  return objective_value(source, target, field.momenta, field.sigma_v, field.gamma,
                         currents);
}

std::pair<MomentumField, MatchReport> match(const SurfaceMesh& source,
                                            const SurfaceMesh& target,
                                            const MatchParams& params) {
  require_valid(source, "match(source)");
  require_valid(target, "match(target)");
  const ResolvedMatchParams p = resolve_params(params, source, target);
  const CurrentsParams currents{p.sigma_w, p.currents_kernel};
  const CurrentRep target_rep = current_of(target);
  const auto t_steps = static_cast<std::size_t>(p.n_steps);

  std::vector<std::size_t> control_indices;
  if (p.control_stride > 1) {
    for (std::size_t i = 0; i < source.vertices.size();
         i += static_cast<std::size_t>(p.control_stride)) {
      control_indices.push_back(i);
    }
  }
  const std::size_t nc =
      control_indices.empty() ? source.vertices.size() : control_indices.size();

  std::vector<PointList> alpha(t_steps, PointList(nc, Vec3::Zero()));

  MatchReport report;
  report.params = p;

  EvalState state = eval_state(source, target_rep, control_indices, alpha, p.sigma_v,
                               p.gamma, currents, true);
  report.j_initial = state.value.j;
  report.reg_initial = state.value.reg;
  report.e_initial = state.value.e;
  report.j_trace.push_back(state.value.j);

  std::vector<PointList> grad = eval_gradient(source, target_rep, control_indices, alpha,
                                              p.sigma_v, p.gamma, currents, state);
  // Convergence threshold pinned to the gradient scale of the zero-momentum
  // start, with 1.0 as a floor for already-matched inputs.
  const double grad_scale = std::max(1.0, inf_norm(grad));

  double step = p.initial_step;
  std::vector<PointList> candidate = alpha;

  while (true) {
    if (inf_norm(grad) <= p.grad_tolerance * grad_scale) {
      report.converged = true;
      report.stop_reason = "gradient_tolerance";
      break;
    }
    if (report.iterations >= p.max_iterations) {
      report.stop_reason = "max_iterations";
      break;
    }

    const std::vector<PointList> dir =
        descent_direction(grad, state.control_traj, p.sigma_v, p.kernel_preconditioned);
    const double slope = dot(grad, dir); // negative
    if (!(slope < 0.0)) {
      report.converged = true; // gradient numerically zero in the search metric
      report.stop_reason = "gradient_tolerance";
      break;
    }

    bool accepted = false;
    EvalState trial;
    for (int halving = 0; halving <= p.max_halvings; ++halving) {
      for (std::size_t k = 0; k < t_steps; ++k) {
        for (std::size_t i = 0; i < nc; ++i) {
          candidate[k][i] = alpha[k][i] + step * dir[k][i];
        }
      }
      trial = eval_state(source, target_rep, control_indices, candidate, p.sigma_v,
                         p.gamma, currents, true);
      if (std::isfinite(trial.value.j) &&
          trial.value.j <= state.value.j + p.armijo_c * step * slope) {
        accepted = true;
        break;
      }
      step *= p.backtrack_factor;
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "match: line search failed after " << p.max_halvings
          << " halvings (J=" << state.value.j << ", reg=" << state.value.reg
          << ", E=" << state.value.e << "); sigma_v/sigma_w may not fit the data scale";
      throw NumericError(msg.str());
    }

    const double j_prev = state.value.j;
    alpha.swap(candidate);
    state = std::move(trial);
    report.iterations += 1;
    report.j_trace.push_back(state.value.j);

    if (std::abs(j_prev - state.value.j) <=
        p.rel_j_tolerance * std::max(1.0, std::abs(j_prev))) {
      report.converged = true;
      report.stop_reason = "j_stalled";
      break;
    }

    grad = eval_gradient(source, target_rep, control_indices, alpha, p.sigma_v, p.gamma,
                         currents, state);
    step = std::min(step * 2.0, 1e12);
  }

  MomentumField field;
  field.control_trajectories = state.control_traj;
  field.momenta = std::move(alpha);
  field.sigma_v = p.sigma_v;
  field.gamma = p.gamma;
  field.n_steps = p.n_steps;
  field.source_label = source.name;
  field.target_label = target.name;

  report.reg_final = state.value.reg;
  // Recomputed through the public transport path so that
  // data_term_E(apply_flow(source, {field}), target) reproduces it exactly.
  report.e_final = data_term_E(apply_flow(source, {field}), target_rep, currents);
  report.j_final = p.gamma * report.reg_final + report.e_final;
  return {std::move(field), std::move(report)};
}

} // namespace morphoflow
