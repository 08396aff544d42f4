#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "morphoflow/match.hpp"

namespace morphoflow {

/// One subject's meshes: the full surface (torso + head + ears), the same
/// body without ears, and the left ear alone.
struct SubjectAssets {
  SurfaceMesh full;
  SurfaceMesh head_torso_no_ears;
  SurfaceMesh left_ear;
  std::string label;
};

void check_assets(const SubjectAssets& assets);

struct StageRecord {
  std::string name;
  MomentumField field;
  MatchReport report;
};

/// Diagnostic for the ear-only transformation: how much geometry far away
/// from the ear moved, against the kernel tail bound
///   displacement <= (sigma_v^2 / d^2) * max_k sum_n |alpha_n(t_k)|
/// evaluated from the learned momenta (k_V(d) <= sigma_v^2/d^2).
struct FarFieldReport {
  Box3 ear_region;
  double sigma_v = 0.0;
  std::size_t far_vertex_count = 0;     // outside the region, > 10 sigma_v from all controls
  double min_control_distance = 0.0;    // over far vertices, controls, steps
  double max_far_displacement = 0.0;    // actual, over the far set
  double displacement_bound = 0.0;      // kernel tail bound for the far set
  double max_outside_displacement = 0.0; // actual, over everything outside the region
};

struct PipelineResult {
  SurfaceMesh result;
  std::vector<std::pair<std::string, SurfaceMesh>> intermediates;
  std::vector<StageRecord> stages;
  /// E(source full, target full) and E(result, target full), filled when a
  /// full target mesh is part of the procedure (synth_all).
  std::optional<double> e_source_target;
  std::optional<double> e_result_target;
  std::optional<FarFieldReport> far_field;
};

struct PipelineParams {
  MatchParams match;                  // per-stage sigma defaults resolve per mesh pair
  std::optional<Box3> ear_region;     // axis-aligned ear bounds (caller-supplied)
  bool far_field_report = false;      // requires ear_region
};

/// Whole-body transformation: learn the head/torso flow, carry the source
/// ear through it, learn the residual ear flow, then apply both flows
/// sequentially to the full source mesh. Two match stages.
PipelineResult synth_all(const SubjectAssets& src, const SubjectAssets& tgt,
                         const PipelineParams& params);

/// Ear-only transformation: translate the target ear onto the source ear,
/// learn the ear flow, apply it to the full source mesh. The Cauchy kernel's
/// far-field decay leaves distant geometry nearly unchanged; the optional
/// report quantifies that.
PipelineResult synth_ear_only(const SubjectAssets& src,
                              const SurfaceMesh& tgt_left_ear,
                              const PipelineParams& params);

struct MirrorResult {
  PipelineResult all;
  PipelineResult ear_only;
};

/// Runs both procedures with the subject roles swapped (target -> source).
MirrorResult mirror_direction(const SubjectAssets& src, const SubjectAssets& tgt,
                              const PipelineParams& params);

} // namespace morphoflow
