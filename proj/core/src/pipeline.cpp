#include "morphoflow/pipeline.hpp"

#include <cmath>
#include <set>

#include "morphoflow/errors.hpp"

namespace morphoflow {

void check_assets(const SubjectAssets& assets) {
  require_valid(assets.full, "assets(" + assets.label + ").full");
  require_valid(assets.head_torso_no_ears, "assets(" + assets.label + ").head_torso");
  require_valid(assets.left_ear, "assets(" + assets.label + ").left_ear");
  if (assets.label.empty()) throw InvalidArgument("SubjectAssets: empty label");
  const std::set<std::string> names{assets.full.name, assets.head_torso_no_ears.name,
                                    assets.left_ear.name};
  if (names.size() != 3) {
    throw InvalidArgument("SubjectAssets(" + assets.label + "): mesh labels must be distinct");
  }
}

namespace {

StageRecord run_match_stage(const std::string& stage, const SurfaceMesh& source,
                            const SurfaceMesh& target, const MatchParams& params) {
  try {
    auto [field, report] = match(source, target, params);
    return {stage, std::move(field), std::move(report)};
  } catch (const NumericError& err) {
    throw NumericError("stage '" + stage + "': " + err.what());
  }
}

CurrentsParams currents_for(const SurfaceMesh& target, const MatchParams& params) {
  return {params.sigma_w ? *params.sigma_w : default_sigma_w(target),
          params.currents_kernel};
}

FarFieldReport far_field_report(const SurfaceMesh& full_before,
                                const SurfaceMesh& full_after,
                                const MomentumField& ear_field, const Box3& region) {
  FarFieldReport rep;
  rep.ear_region = region;
  rep.sigma_v = ear_field.sigma_v;

  // max_k sum_n |alpha_n(t_k)|, the momentum mass entering the tail bound
  double momentum_mass = 0.0;
  for (const PointList& step : ear_field.momenta) {
    double sum = 0.0;
    for (const Vec3& a : step) sum += a.norm();
    momentum_mass = std::max(momentum_mass, sum);
  }

  const double far_cutoff = 10.0 * ear_field.sigma_v;
  double min_far_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < full_before.vertices.size(); ++i) {
    const Vec3& v = full_before.vertices[i];
    if (region.contains(v)) continue;
    const double moved = (full_after.vertices[i] - v).norm();
    rep.max_outside_displacement = std::max(rep.max_outside_displacement, moved);

    double d_min = std::numeric_limits<double>::infinity();
    for (const PointList& controls : ear_field.control_trajectories) {
      for (const Vec3& c : controls) d_min = std::min(d_min, (c - v).norm());
    }
    if (d_min > far_cutoff) {
      rep.far_vertex_count += 1;
      rep.max_far_displacement = std::max(rep.max_far_displacement, moved);
      min_far_distance = std::min(min_far_distance, d_min);
    }
  }

  if (rep.far_vertex_count > 0) {
    rep.min_control_distance = min_far_distance;
    // Controls stay on their stored trajectories; a far vertex can close the
    // gap by at most its own displacement, so shrink the distance by that
    // before applying k_V(d) <= sigma^2/d^2.
    const double d_eff = std::max(min_far_distance - rep.max_far_displacement,
                                  0.5 * min_far_distance);
    rep.displacement_bound =
        (rep.sigma_v * rep.sigma_v) / (d_eff * d_eff) * momentum_mass;
  }
  return rep;
}

} // namespace

PipelineResult synth_all(const SubjectAssets& src, const SubjectAssets& tgt,
                         const PipelineParams& params) {
  check_assets(src);
  check_assets(tgt);

  PipelineResult out;

  StageRecord ht = run_match_stage("match_head_torso", src.head_torso_no_ears,
                                   tgt.head_torso_no_ears, params.match);

  SurfaceMesh ear_carried = apply_flow(src.left_ear, {ht.field});
  ear_carried.name = src.left_ear.name + "~head_torso_flow";
  out.intermediates.emplace_back("ear_carried", ear_carried);

  StageRecord ear = run_match_stage("match_ear", ear_carried, tgt.left_ear, params.match);

  out.result = apply_flow(src.full, {ht.field, ear.field});
  out.result.name = src.label + "_to_" + tgt.label + "_all";

  const CurrentsParams currents = currents_for(tgt.full, params.match);
  const CurrentRep target_full = current_of(tgt.full);
  out.e_source_target = data_term_E(src.full, target_full, currents);
  out.e_result_target = data_term_E(out.result, target_full, currents);

  out.stages.push_back(std::move(ht));
  out.stages.push_back(std::move(ear));
  return out;
}

PipelineResult synth_ear_only(const SubjectAssets& src,
                              const SurfaceMesh& tgt_left_ear,
                              const PipelineParams& params) {
  check_assets(src);
  require_valid(tgt_left_ear, "synth_ear_only(target ear)");
  if (params.far_field_report && !params.ear_region) {
    throw InvalidArgument("synth_ear_only: far-field report requested without an ear region");
  }

  PipelineResult out;

  auto [ear_aligned, shift] = translate_align(tgt_left_ear, src.left_ear);
  ear_aligned.name = tgt_left_ear.name + "~aligned";
  out.intermediates.emplace_back("target_ear_aligned", ear_aligned);

  StageRecord ear = run_match_stage("match_ear", src.left_ear, ear_aligned, params.match);

  out.result = apply_flow(src.full, {ear.field});
  out.result.name = src.label + "_to_" + tgt_left_ear.name + "_ear_only";

  if (params.far_field_report) {
    out.far_field = far_field_report(src.full, out.result, ear.field, *params.ear_region);
  }
  out.stages.push_back(std::move(ear));
  return out;
}

MirrorResult mirror_direction(const SubjectAssets& src, const SubjectAssets& tgt,
                              const PipelineParams& params) {
  MirrorResult out;
  out.all = synth_all(tgt, src, params);
  out.ear_only = synth_ear_only(tgt, src.left_ear, params);
  return out;
}

} // namespace morphoflow
