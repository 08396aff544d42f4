// morphoflow: batch front end for diffeomorphic surface matching and
// spatial-audio response analysis. One subcommand per run; deterministic
// file outputs (no timestamps), so identical invocations are byte-identical.
//
// Exit codes: 0 success, 2 usage, 3 IO/parse failure, 4 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "morphoflow/currents.hpp"
#include "morphoflow/errors.hpp"
#include "morphoflow/field_io.hpp"
#include "morphoflow/flow.hpp"
#include "morphoflow/hrtf.hpp"
#include "morphoflow/manifest.hpp"
#include "morphoflow/match.hpp"
#include "morphoflow/mesh_io.hpp"
#include "morphoflow/pipeline.hpp"

namespace mf = morphoflow;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct GlobalOptions {
  std::string units = "m";
  long seed = 0; // reserved for data-generation commands; recorded for provenance
  bool quiet = false;
};

double unit_scale(const std::string& units) {
  if (units == "m") return 1.0;
  if (units == "mm") return 1e-3;
  throw CLI::ValidationError("--units must be 'm' or 'mm'");
}

mf::SurfaceMesh load_mesh_scaled(const std::string& path, const GlobalOptions& global) {
  mf::SurfaceMesh mesh = mf::load_mesh(path);
  const double scale = unit_scale(global.units);
  if (scale != 1.0) mesh = mf::scaled(mesh, scale);
  mesh.name = path;
  return mesh;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw mf::IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw mf::IoError("write failure on '" + path + "'");
}

struct MatchFlags {
  double sigma_v = 0.0; // 0 = scale-relative default
  double sigma_w = 0.0;
  double gamma = 0.01;
  int steps = 10;
  int max_iterations = 200;
  double grad_tol = 1e-6;
  double rel_j_tol = 1e-12;
  std::string currents_kernel = "gaussian";
  bool rkhs_descent = false;
  int control_stride = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--sigma-v", sigma_v,
                    "Deformation kernel width in meters (default: 25% of the source "
                    "bounding-box diagonal)");
    cmd->add_option("--sigma-w", sigma_w,
                    "Currents kernel width in meters (default: 10% of the target "
                    "bounding-box diagonal)");
    cmd->add_option("--gamma", gamma, "Regularization weight")->capture_default_str();
    cmd->add_option("--steps", steps, "Number of time steps")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--max-iterations", max_iterations, "Descent iteration cap")->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--grad-tol", grad_tol, "Relative gradient tolerance")->capture_default_str();
    cmd->add_option("--rel-j-tol", rel_j_tol, "Relative objective stall tolerance")->capture_default_str();
    cmd->add_option("--currents-kernel", currents_kernel,
                    "Currents kernel: gaussian or cauchy")->capture_default_str()
        ->check(CLI::IsMember({"gaussian", "cauchy"}));
    cmd->add_flag("--rkhs-descent", rkhs_descent,
                  "Precondition the descent direction with the kernel Gram matrix");
    cmd->add_option("--control-stride", control_stride,
                    "Place a control point on every k-th source vertex")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  mf::MatchParams to_params() const {
    mf::MatchParams p;
    if (sigma_v > 0.0) p.sigma_v = sigma_v;
    if (sigma_w > 0.0) p.sigma_w = sigma_w;
    p.gamma = gamma;
    p.n_steps = steps;
    p.max_iterations = max_iterations;
    p.grad_tolerance = grad_tol;
    p.rel_j_tolerance = rel_j_tol;
    p.currents_kernel = currents_kernel == "cauchy" ? mf::CurrentsKernel::Cauchy
                                                    : mf::CurrentsKernel::Gaussian;
    p.kernel_preconditioned = rkhs_descent;
    p.control_stride = control_stride;
    return p;
  }
};

json params_json(const mf::ResolvedMatchParams& p) {
  return json{{"sigma_v", p.sigma_v},
              {"sigma_w", p.sigma_w},
              {"gamma", p.gamma},
              {"n_steps", p.n_steps},
              {"max_iterations", p.max_iterations},
              {"grad_tolerance", p.grad_tolerance},
              {"rel_j_tolerance", p.rel_j_tolerance},
              {"armijo_c", p.armijo_c},
              {"backtrack_factor", p.backtrack_factor},
              {"max_halvings", p.max_halvings},
              {"initial_step", p.initial_step},
              {"currents_kernel",
               p.currents_kernel == mf::CurrentsKernel::Cauchy ? "cauchy" : "gaussian"},
              {"kernel_preconditioned", p.kernel_preconditioned},
              {"control_stride", p.control_stride},
              {"source", p.source_label},
              {"target", p.target_label}};
}

json report_json(const mf::MatchReport& r) {
  return json{{"iterations", r.iterations},
              {"converged", r.converged},
              {"stop_reason", r.stop_reason},
              {"j_initial", r.j_initial},
              {"reg_initial", r.reg_initial},
              {"e_initial", r.e_initial},
              {"j_final", r.j_final},
              {"reg_final", r.reg_final},
              {"e_final", r.e_final},
              {"j_trace", r.j_trace},
              {"effective_parameters", params_json(r.params)}};
}

void print_effective_parameters(const GlobalOptions& global, const json& params) {
  if (global.quiet) return;
  json block = params;
  block["units"] = global.units;
  block["seed"] = global.seed;
  std::cout << "effective-parameters: " << block.dump() << "\n";
}

// ---------------------------------------------------------------------------
// match

struct MatchArgs {
  std::string source, target, out_field, report_path;
  MatchFlags flags;
};

int cmd_match(const MatchArgs& args, const GlobalOptions& global) {
  const mf::SurfaceMesh source = load_mesh_scaled(args.source, global);
  const mf::SurfaceMesh target = load_mesh_scaled(args.target, global);

  auto [field, report] = mf::match(source, target, args.flags.to_params());
  mf::save_field(field, args.out_field);

  const std::string report_path =
      args.report_path.empty() ? args.out_field + ".report.json" : args.report_path;
  write_text_file(report_path, report_json(report).dump(2) + "\n");

  print_effective_parameters(global, params_json(report.params));
  if (!global.quiet) {
    std::printf("match: %s -> %s, %d iterations (%s), E %.6g -> %.6g\n",
                args.source.c_str(), args.target.c_str(), report.iterations,
                report.stop_reason.c_str(), report.e_initial, report.e_final);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// flow

struct FlowArgs {
  std::string mesh_path, out_path;
  std::vector<std::string> field_paths;
  std::vector<double> times;
  std::string snapshot_prefix;
};

int cmd_flow(const FlowArgs& args, const GlobalOptions& global) {
  const mf::SurfaceMesh mesh = load_mesh_scaled(args.mesh_path, global);
  std::vector<mf::MomentumField> fields;
  fields.reserve(args.field_paths.size());
  for (const std::string& path : args.field_paths) {
    fields.push_back(mf::load_field(path));
    if (!fields.back().source_label.empty() && fields.back().source_label != mesh.name) {
      std::cerr << "warning: field '" << path << "' was learned on '"
                << fields.back().source_label << "', applying it to '" << mesh.name
                << "' (flows transport arbitrary points)\n";
    }
  }

  const mf::SurfaceMesh out = mf::apply_flow(mesh, fields);
  mf::save_mesh(out, args.out_path);

  if (!args.times.empty()) {
    if (fields.size() != 1) {
      throw CLI::ValidationError("--t snapshots require exactly one field");
    }
    const std::string prefix =
        args.snapshot_prefix.empty()
            ? std::filesystem::path(args.out_path).replace_extension("").string() + "_t"
            : args.snapshot_prefix;
    const auto snapshots = mf::flow_snapshots(mesh, fields.front(), args.times);
    for (const mf::FlowSnapshot& snap : snapshots) {
      char stamp[32];
      std::snprintf(stamp, sizeof(stamp), "%.3f", snap.time);
      mf::save_ascii_ply_with_scalar(snap.mesh, snap.displacement, "displacement",
                                     prefix + stamp + ".ply");
    }
  }

  print_effective_parameters(
      global, json{{"fields", args.field_paths}, {"snapshot_times", args.times}});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string mode;
  std::string src_full, src_ht, src_ear;
  std::string tgt_full, tgt_ht, tgt_ear;
  std::string out_dir;
  std::string src_label = "S1", tgt_label = "S2";
  std::vector<double> ear_box; // x0 y0 z0 x1 y1 z1
  bool far_field = false;
  MatchFlags flags;
};

json far_field_json(const mf::FarFieldReport& ff) {
  return json{{"sigma_v", ff.sigma_v},
              {"far_vertex_count", ff.far_vertex_count},
              {"min_control_distance", ff.min_control_distance},
              {"max_far_displacement", ff.max_far_displacement},
              {"displacement_bound", ff.displacement_bound},
              {"max_outside_displacement", ff.max_outside_displacement},
              {"ear_region",
               {{"min", {ff.ear_region.min.x(), ff.ear_region.min.y(), ff.ear_region.min.z()}},
                {"max", {ff.ear_region.max.x(), ff.ear_region.max.y(), ff.ear_region.max.z()}}}}};
}

int cmd_synth(const SynthArgs& args, const GlobalOptions& global) {
  if (args.mode == "all") {
    if (args.tgt_full.empty()) throw CLI::ValidationError("mode=all requires --tgt-full");
    if (args.tgt_ht.empty()) throw CLI::ValidationError("mode=all requires --tgt-ht");
  }

  mf::SubjectAssets src;
  src.label = args.src_label;
  src.full = load_mesh_scaled(args.src_full, global);
  src.head_torso_no_ears = load_mesh_scaled(args.src_ht, global);
  src.left_ear = load_mesh_scaled(args.src_ear, global);

  mf::PipelineParams params;
  params.match = args.flags.to_params();
  if (!args.ear_box.empty()) {
    mf::Box3 box;
    box.expand(mf::Vec3(args.ear_box[0], args.ear_box[1], args.ear_box[2]));
    box.expand(mf::Vec3(args.ear_box[3], args.ear_box[4], args.ear_box[5]));
    params.ear_region = box;
  }
  params.far_field_report = args.far_field;

  mf::PipelineResult result;
  json inputs = json::array();
  auto record_input = [&inputs](const std::string& role, const std::string& path) {
    inputs.push_back(
        {{"role", role}, {"path", path}, {"fnv1a64", mf::hex_u64(mf::fnv1a64_file(path))}});
  };
  record_input("src_full", args.src_full);
  record_input("src_head_torso", args.src_ht);
  record_input("src_left_ear", args.src_ear);

  if (args.mode == "all") {
    mf::SubjectAssets tgt;
    tgt.label = args.tgt_label;
    tgt.full = load_mesh_scaled(args.tgt_full, global);
    tgt.head_torso_no_ears = load_mesh_scaled(args.tgt_ht, global);
    tgt.left_ear = load_mesh_scaled(args.tgt_ear, global);
    record_input("tgt_full", args.tgt_full);
    record_input("tgt_head_torso", args.tgt_ht);
    record_input("tgt_left_ear", args.tgt_ear);
    result = mf::synth_all(src, tgt, params);
  } else {
    const mf::SurfaceMesh tgt_ear = load_mesh_scaled(args.tgt_ear, global);
    record_input("tgt_left_ear", args.tgt_ear);
    result = mf::synth_ear_only(src, tgt_ear, params);
  }

  std::filesystem::create_directories(args.out_dir);
  auto out_path = [&](const std::string& name) {
    return (std::filesystem::path(args.out_dir) / name).string();
  };

  json stages = json::array();
  for (std::size_t i = 0; i < result.stages.size(); ++i) {
    const mf::StageRecord& stage = result.stages[i];
    const std::string field_file =
        out_path("stage" + std::to_string(i) + "_" + stage.name + ".field");
    const std::string report_file =
        out_path("stage" + std::to_string(i) + "_" + stage.name + ".report.json");
    mf::save_field(stage.field, field_file);
    write_text_file(report_file, report_json(stage.report).dump(2) + "\n");
    stages.push_back({{"name", stage.name},
                      {"field", field_file},
                      {"field_fnv1a64", mf::hex_u64(mf::fnv1a64_file(field_file))},
                      {"report", report_file},
                      {"iterations", stage.report.iterations},
                      {"e_initial", stage.report.e_initial},
                      {"e_final", stage.report.e_final},
                      {"momentum_sup",
                       [&stage] {
                         double worst = 0.0;
                         for (const auto& step : stage.field.momenta) {
                           for (const auto& a : step) {
                             worst = std::max(worst, a.cwiseAbs().maxCoeff());
                           }
                         }
                         return worst;
                       }()}});
  }

  json intermediates = json::array();
  for (const auto& [name, meshval] : result.intermediates) {
    const std::string path = out_path(name + ".off");
    mf::save_mesh(meshval, path);
    intermediates.push_back(
        {{"name", name}, {"path", path}, {"fnv1a64", mf::hex_u64(mf::fnv1a64_file(path))}});
  }

  const std::string result_path = out_path("result.off");
  mf::save_mesh(result.result, result_path);

  json manifest{{"format", "morphoflow-manifest"},
                {"version", 1},
                {"command", "synth"},
                {"mode", args.mode},
                {"units", global.units},
                {"seed", global.seed},
                {"inputs", inputs},
                {"stages", stages},
                {"intermediates", intermediates},
                {"result", {{"path", result_path},
                            {"fnv1a64", mf::hex_u64(mf::fnv1a64_file(result_path))}}}};
  // Stage sigma values are per-pair defaults; record them all.
  json effective = json::array();
  for (const mf::StageRecord& stage : result.stages) {
    effective.push_back(params_json(stage.report.params));
  }
  manifest["effective_parameters"] = effective;
  if (result.e_source_target) manifest["e_source_target"] = *result.e_source_target;
  if (result.e_result_target) manifest["e_result_target"] = *result.e_result_target;
  if (result.far_field) manifest["far_field"] = far_field_json(*result.far_field);

  write_text_file(out_path("manifest.json"), manifest.dump(2) + "\n");

  print_effective_parameters(global, json{{"stages", effective}});
  if (!global.quiet) {
    std::printf("synth --mode %s: result written to %s\n", args.mode.c_str(),
                result_path.c_str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sfrs / corr / oracle

struct SfrsArgs {
  std::string set_path, out_csv;
  double frequency = 0.0;
};

int cmd_sfrs(const SfrsArgs& args, const GlobalOptions& global) {
  const mf::HrtfSet set = mf::load_hrtf_set(args.set_path);
  const mf::SfrsMap map = mf::sfrs(set, args.frequency);
  write_text_file(args.out_csv, mf::sfrs_csv(map));
  print_effective_parameters(global, json{{"set", args.set_path}, {"f_hz", args.frequency}});
  return kExitOk;
}

struct CorrArgs {
  std::string set_a, set_b, out_csv;
  std::vector<double> freqs;
  bool unweighted = false;
};

int cmd_corr(const CorrArgs& args, const GlobalOptions& global) {
  const mf::HrtfSet a = mf::load_hrtf_set(args.set_a);
  const mf::HrtfSet b = mf::load_hrtf_set(args.set_b);
  const std::vector<double> freqs = args.freqs.empty() ? a.frequencies_hz : args.freqs;
  const mf::CorrelationCurve curve = mf::correlation_curve(
      a, b, freqs,
      args.unweighted ? mf::CorrelationWeighting::Uniform
                      : mf::CorrelationWeighting::SolidAngle);
  write_text_file(args.out_csv, mf::correlation_csv(curve));
  print_effective_parameters(global, json{{"set_a", args.set_a},
                                          {"set_b", args.set_b},
                                          {"freqs", freqs},
                                          {"weighting", args.unweighted ? "uniform" : "solid_angle"}});
  return kExitOk;
}

struct OracleArgs {
  std::string out_path;
  double radius = 0.0875;
  double ear_az = 90.0, ear_el = 0.0;
  double grid_az_step = 30.0, grid_el_step = 30.0;
  std::vector<double> freqs;
  double speed_of_sound = 343.0;
  std::string ear_label = "left";
};

int cmd_oracle(const OracleArgs& args, const GlobalOptions& global) {
  const auto grid = mf::make_az_el_grid(args.grid_az_step, args.grid_el_step);
  const mf::Vec3 ear = mf::direction_unit({args.ear_az, args.ear_el});
  const mf::HrtfSet set = mf::sphere_hrtf_oracle(args.radius, ear, grid, args.freqs,
                                                 args.speed_of_sound, args.ear_label);
  mf::save_hrtf_set(set, args.out_path);
  print_effective_parameters(global, json{{"radius_m", args.radius},
                                          {"ear_az_deg", args.ear_az},
                                          {"ear_el_deg", args.ear_el},
                                          {"grid_az_step_deg", args.grid_az_step},
                                          {"grid_el_step_deg", args.grid_el_step},
                                          {"freqs_hz", args.freqs},
                                          {"speed_of_sound", args.speed_of_sound}});
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffeomorphic surface matching and spatial response analysis"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--units", global.units, "Mesh coordinate units on load: m or mm")->capture_default_str()
      ->check(CLI::IsMember({"m", "mm"}));
  app.add_option("--seed", global.seed,
                 "Random seed recorded for provenance (generation commands)")->capture_default_str();
  app.add_flag("--quiet", global.quiet, "Suppress progress output");

  MatchArgs match_args;
  CLI::App* match_cmd = app.add_subcommand("match", "Learn a deformation field between meshes");
  match_cmd->add_option("source", match_args.source, "Source mesh (.off/.ply)")->required();
  match_cmd->add_option("target", match_args.target, "Target mesh (.off/.ply)")->required();
  match_cmd->add_option("-o,--out", match_args.out_field, "Output field file")->required();
  match_cmd->add_option("--report", match_args.report_path,
                        "Report file (default: <out>.report.json)");
  match_args.flags.attach(match_cmd);

  FlowArgs flow_args;
  CLI::App* flow_cmd = app.add_subcommand("flow", "Transport a mesh through stored fields");
  flow_cmd->add_option("mesh", flow_args.mesh_path, "Input mesh")->required();
  flow_cmd->add_option("-f,--field", flow_args.field_paths, "Field file(s), applied in order")
      ->required();
  flow_cmd->add_option("-o,--out", flow_args.out_path, "Output mesh")->required();
  flow_cmd->add_option("--t", flow_args.times, "Snapshot times in [0,1] (single field only)")
      ->delimiter(',');
  flow_cmd->add_option("--snapshot-prefix", flow_args.snapshot_prefix,
                       "Snapshot file prefix (default: <out>_t)");

  SynthArgs synth_args;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Composite subject shape transformations");
  synth_cmd->add_option("--mode", synth_args.mode, "Procedure: all or ear-only")
      ->required()
      ->check(CLI::IsMember({"all", "ear-only"}));
  synth_cmd->add_option("--src-full", synth_args.src_full, "Source full mesh")->required();
  synth_cmd->add_option("--src-ht", synth_args.src_ht, "Source head+torso (no ears) mesh")
      ->required();
  synth_cmd->add_option("--src-ear", synth_args.src_ear, "Source left-ear mesh")->required();
  synth_cmd->add_option("--tgt-full", synth_args.tgt_full, "Target full mesh (mode=all)");
  synth_cmd->add_option("--tgt-ht", synth_args.tgt_ht, "Target head+torso mesh (mode=all)");
  synth_cmd->add_option("--tgt-ear", synth_args.tgt_ear, "Target left-ear mesh")->required();
  synth_cmd->add_option("--out-dir", synth_args.out_dir, "Output directory")->required();
  synth_cmd->add_option("--src-label", synth_args.src_label, "Source subject label")->capture_default_str();
  synth_cmd->add_option("--tgt-label", synth_args.tgt_label, "Target subject label")->capture_default_str();
  synth_cmd->add_option("--ear-box", synth_args.ear_box,
                        "Ear region x0,y0,z0,x1,y1,z1 (for the far-field report)")
      ->delimiter(',')
      ->expected(6);
  synth_cmd->add_flag("--far-field-report", synth_args.far_field,
                      "Report displacement far from the ear (ear-only mode)");
  synth_args.flags.attach(synth_cmd);

  SfrsArgs sfrs_args;
  CLI::App* sfrs_cmd = app.add_subcommand("sfrs", "Magnitude-gain map at one frequency");
  sfrs_cmd->add_option("set", sfrs_args.set_path, "HRTF grid file")->required();
  sfrs_cmd->add_option("-f,--frequency", sfrs_args.frequency, "Frequency in Hz")->required();
  sfrs_cmd->add_option("-o,--out", sfrs_args.out_csv, "Output CSV")->required();

  CorrArgs corr_args;
  CLI::App* corr_cmd = app.add_subcommand("corr", "Spatial correlation versus frequency");
  corr_cmd->add_option("set_a", corr_args.set_a, "First HRTF grid file")->required();
  corr_cmd->add_option("set_b", corr_args.set_b, "Second HRTF grid file")->required();
  corr_cmd->add_option("-o,--out", corr_args.out_csv, "Output CSV")->required();
  corr_cmd->add_option("--freqs", corr_args.freqs,
                       "Frequencies in Hz (default: first set's grid)")
      ->delimiter(',');
  corr_cmd->add_flag("--unweighted", corr_args.unweighted,
                     "Plain Pearson instead of solid-angle weighting");

  OracleArgs oracle_args;
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "Analytic rigid-sphere transfer-function generator");
  oracle_cmd->add_option("-o,--out", oracle_args.out_path, "Output HRTF grid file")->required();
  oracle_cmd->add_option("--radius", oracle_args.radius, "Sphere radius in meters")->capture_default_str();
  oracle_cmd->add_option("--ear-az", oracle_args.ear_az, "Ear azimuth in degrees")->capture_default_str();
  oracle_cmd->add_option("--ear-el", oracle_args.ear_el, "Ear elevation in degrees")->capture_default_str();
  oracle_cmd->add_option("--grid-az-step", oracle_args.grid_az_step,
                         "Grid azimuth step in degrees")->capture_default_str();
  oracle_cmd->add_option("--grid-el-step", oracle_args.grid_el_step,
                         "Grid elevation step in degrees")->capture_default_str();
  oracle_cmd->add_option("--freqs", oracle_args.freqs, "Frequencies in Hz")
      ->required()
      ->delimiter(',');
  oracle_cmd->add_option("--speed-of-sound", oracle_args.speed_of_sound,
                         "Speed of sound in m/s")->capture_default_str();
  oracle_cmd->add_option("--ear-label", oracle_args.ear_label, "Ear label")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*match_cmd) return cmd_match(match_args, global);
    if (*flow_cmd) return cmd_flow(flow_args, global);
    if (*synth_cmd) return cmd_synth(synth_args, global);
    if (*sfrs_cmd) return cmd_sfrs(sfrs_args, global);
    if (*corr_cmd) return cmd_corr(corr_args, global);
    if (*oracle_cmd) return cmd_oracle(oracle_args, global);
  } catch (const CLI::ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const mf::IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitIo;
  } catch (const mf::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitIo;
  } catch (const mf::NumericError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitNumeric;
  } catch (const mf::InvalidArgument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
