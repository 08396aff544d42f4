#include <doctest.h>

#include <cmath>

#include "morphoflow/errors.hpp"
#include "morphoflow/pipeline.hpp"
#include "morphoflow/shapes.hpp"
#include "support/test_utils.hpp"

using namespace morphoflow;

namespace {

/// Small, fast subject pair (coarser than the acceptance fixture).
mftest::SubjectPair small_subjects() {
  mftest::SubjectPair pair;
  const Vec3 ear_axes(0.10, 0.16, 0.22);
  const Vec3 ear_center(1.05, 0.0, 0.0);
  Eigen::Matrix3d twist =
      Eigen::AngleAxisd(15.0 * M_PI / 180.0, Vec3::UnitX()).toRotationMatrix();

  pair.src.label = "A";
  pair.src.head_torso_no_ears = make_icosphere(1, 1.0, Vec3::Zero(), "HTA");
  pair.src.left_ear =
      make_ellipsoid(1, ear_axes, Eigen::Matrix3d::Identity(), ear_center, "LEA");
  pair.src.full = concat(pair.src.head_torso_no_ears, pair.src.left_ear, "A_full");

  pair.tgt.label = "B";
  pair.tgt.head_torso_no_ears = make_icosphere(1, 1.1, Vec3::Zero(), "HTB");
  pair.tgt.left_ear = make_ellipsoid(1, 1.1 * ear_axes, twist, 1.1 * ear_center, "LEB");
  pair.tgt.full = concat(pair.tgt.head_torso_no_ears, pair.tgt.left_ear, "B_full");
  return pair;
}

PipelineParams fast_params() {
  PipelineParams params;
  params.match.max_iterations = 60;
  return params;
}

} // namespace

TEST_CASE("synth_all: identical subjects return the source within tolerance") {
  mftest::SubjectPair pair = small_subjects();
  SubjectAssets tgt = pair.src;
  tgt.label = "A_copy";

  const PipelineResult out = synth_all(pair.src, tgt, fast_params());
  const double diag = bounding_box(pair.src.full).diagonal();
  REQUIRE(out.result.vertex_count() == pair.src.full.vertex_count());
  for (std::size_t i = 0; i < out.result.vertex_count(); ++i) {
    CHECK((out.result.vertices[i] - pair.src.full.vertices[i]).norm() <= 1e-6 * diag);
  }
  CHECK(out.stages.size() == 2);
  CHECK(out.stages[0].name == "match_head_torso");
  CHECK(out.stages[1].name == "match_ear");
}

TEST_CASE("synth_all: synthetic transfer reduces the full-mesh mismatch") {
  mftest::SubjectPair pair = small_subjects();
  const PipelineResult out = synth_all(pair.src, pair.tgt, fast_params());
  REQUIRE(out.e_source_target.has_value());
  REQUIRE(out.e_result_target.has_value());
  CHECK(*out.e_result_target <= 0.10 * *out.e_source_target);

  SUBCASE("carried ear equals an independent recomputation") {
    const SurfaceMesh recomputed =
        apply_flow(pair.src.left_ear, {out.stages[0].field});
    const auto& stored = out.intermediates;
    REQUIRE(!stored.empty());
    REQUIRE(stored[0].first == "ear_carried");
    REQUIRE(stored[0].second.vertex_count() == recomputed.vertex_count());
    for (std::size_t i = 0; i < recomputed.vertex_count(); ++i) {
      CHECK(stored[0].second.vertices[i] == recomputed.vertices[i]);
    }
  }

  SUBCASE("inputs are not modified") {
    mftest::SubjectPair fresh = small_subjects();
    for (std::size_t i = 0; i < fresh.src.full.vertex_count(); ++i) {
      CHECK(fresh.src.full.vertices[i] == pair.src.full.vertices[i]);
    }
  }
}

TEST_CASE("synth_ear_only: identity target leaves the subject in place") {
  mftest::SubjectPair pair = small_subjects();
  const PipelineResult out = synth_ear_only(pair.src, pair.src.left_ear, fast_params());
  const double diag = bounding_box(pair.src.full).diagonal();
  for (std::size_t i = 0; i < out.result.vertex_count(); ++i) {
    CHECK((out.result.vertices[i] - pair.src.full.vertices[i]).norm() <= 1e-6 * diag);
  }
  CHECK(out.stages.size() == 1);
}

TEST_CASE("synth_ear_only: ear transfer with far-field report") {
  mftest::SubjectPair pair = small_subjects();
  PipelineParams params = fast_params();
  params.ear_region = mftest::synthetic_ear_region();
  params.far_field_report = true;

  const PipelineResult out = synth_ear_only(pair.src, pair.tgt.left_ear, params);
  const MatchReport& ear = out.stages[0].report;
  CHECK(ear.e_final <= 0.10 * ear.e_initial);

  REQUIRE(out.far_field.has_value());
  const FarFieldReport& ff = *out.far_field;
  CHECK(ff.far_vertex_count > 0);
  CHECK(ff.min_control_distance > 10.0 * ff.sigma_v);
  CHECK(ff.max_far_displacement < ff.displacement_bound);

  SUBCASE("stored stage field re-verifies against the result") {
    const SurfaceMesh redo = apply_flow(pair.src.full, {out.stages[0].field});
    for (std::size_t i = 0; i < redo.vertex_count(); ++i) {
      CHECK(redo.vertices[i] == out.result.vertices[i]);
    }
  }
}

TEST_CASE("synth_ear_only: far-field report without a region is an error") {
  mftest::SubjectPair pair = small_subjects();
  PipelineParams params = fast_params();
  params.far_field_report = true;
  params.ear_region.reset();
  CHECK_THROWS_AS(synth_ear_only(pair.src, pair.tgt.left_ear, params), InvalidArgument);
}

TEST_CASE("mirror_direction: swapped roles show up in the provenance labels") {
  mftest::SubjectPair pair = small_subjects();
  PipelineParams params = fast_params();
  params.match.max_iterations = 10;
  const MirrorResult mirrored = mirror_direction(pair.src, pair.tgt, params);
  CHECK(mirrored.all.result.name.rfind("B_to_A", 0) == 0);
  CHECK(mirrored.all.stages[0].field.source_label == "HTB");
  CHECK(mirrored.all.stages[0].field.target_label == "HTA");
  CHECK(mirrored.ear_only.result.name.rfind("B_to_", 0) == 0);
}

TEST_CASE("check_assets: validity and distinct labels enforced") {
  mftest::SubjectPair pair = small_subjects();
  CHECK_NOTHROW(check_assets(pair.src));

  SubjectAssets bad = pair.src;
  bad.left_ear.name = bad.full.name;
  CHECK_THROWS_AS(check_assets(bad), InvalidArgument);

  bad = pair.src;
  bad.label.clear();
  CHECK_THROWS_AS(check_assets(bad), InvalidArgument);

  bad = pair.src;
  bad.head_torso_no_ears.faces.clear();
  CHECK_THROWS_AS(check_assets(bad), InvalidArgument);
}
