#include "morphoflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "morphoflow/errors.hpp"

namespace morphoflow {

const char* validation_code_name(ValidationCode code) {
  switch (code) {
    case ValidationCode::IndexOutOfRange: return "INDEX_OUT_OF_RANGE";
    case ValidationCode::RepeatedVertexInFace: return "REPEATED_VERTEX";
    case ValidationCode::DegenerateFace: return "DEGENERATE_FACE";
    case ValidationCode::NonFiniteCoordinate: return "NONFINITE_COORDINATE";
    case ValidationCode::EmptyMesh: return "EMPTY_MESH";
    case ValidationCode::Orientation: return "ORIENTATION";
  }
  return "UNKNOWN";
}

namespace {

std::string describe(ValidationCode code, std::size_t element) {
  return std::string(validation_code_name(code)) + " at element " + std::to_string(element);
}

} // namespace

ValidationReport validate(const SurfaceMesh& mesh) {
  ValidationReport report;
  const auto n = static_cast<std::int64_t>(mesh.vertices.size());

  if (mesh.vertices.empty() || mesh.faces.empty()) {
    report.errors.push_back({ValidationCode::EmptyMesh, 0, "mesh has no vertices or no faces"});
  }

  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (!mesh.vertices[i].allFinite()) {
      report.errors.push_back({ValidationCode::NonFiniteCoordinate, i,
                               describe(ValidationCode::NonFiniteCoordinate, i)});
    }
  }

  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const FaceIndices& face = mesh.faces[f];
    bool in_range = true;
    for (std::int32_t idx : face) {
      if (idx < 0 || idx >= n) {
        report.errors.push_back({ValidationCode::IndexOutOfRange, f,
                                 describe(ValidationCode::IndexOutOfRange, f) +
                                     " (index " + std::to_string(idx) + " of " +
                                     std::to_string(n) + " vertices)"});
        in_range = false;
        break;
      }
    }
    if (!in_range) continue;

    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      report.errors.push_back({ValidationCode::RepeatedVertexInFace, f,
                               describe(ValidationCode::RepeatedVertexInFace, f)});
      continue;
    }

    const Vec3& v0 = mesh.vertices[face[0]];
    const Vec3& v1 = mesh.vertices[face[1]];
    const Vec3& v2 = mesh.vertices[face[2]];
    if (!v0.allFinite() || !v1.allFinite() || !v2.allFinite()) continue;
    const double area = 0.5 * (v1 - v0).cross(v2 - v0).norm();
    if (!(area > kDegenerateAreaM2)) {
      report.errors.push_back({ValidationCode::DegenerateFace, f,
                               describe(ValidationCode::DegenerateFace, f) +
                                   " (area " + std::to_string(area) + " m^2)"});
    }
  }

  // Orientation consistency: a consistently oriented surface traverses every
  // interior edge once in each direction. Same-direction pairs are warnings.
  std::map<std::pair<std::int32_t, std::int32_t>, int> forward, backward;
  for (const FaceIndices& face : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      const std::int32_t a = face[e];
      const std::int32_t b = face[(e + 1) % 3];
      if (a < 0 || b < 0 || a >= n || b >= n || a == b) continue;
      if (a < b) {
        forward[{a, b}] += 1;
      } else {
        backward[{b, a}] += 1;
      }
    }
  }
  std::size_t warned = 0;
  auto warn_same_direction = [&](const std::map<std::pair<std::int32_t, std::int32_t>, int>& dir) {
    for (const auto& [edge, count] : dir) {
      if (count >= 2 && warned < 64) {
        report.warnings.push_back(
            {ValidationCode::Orientation, static_cast<std::size_t>(edge.first),
             std::string("edge (") + std::to_string(edge.first) + "," +
                 std::to_string(edge.second) + ") traversed " + std::to_string(count) +
                 " times in the same direction"});
        ++warned;
      }
    }
  };
  warn_same_direction(forward);
  warn_same_direction(backward);

  return report;
}

void require_valid(const SurfaceMesh& mesh, const std::string& context) {
  const ValidationReport report = validate(mesh);
  if (!report.is_usable()) {
    throw InvalidArgument(context + ": invalid mesh: " + report.errors.front().message);
  }
}

Vec3 face_center(const SurfaceMesh& mesh, std::size_t face) {
  const FaceIndices& f = mesh.faces[face];
  return (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0;
}

Vec3 face_area_normal(const SurfaceMesh& mesh, std::size_t face) {
  const FaceIndices& f = mesh.faces[face];
  const Vec3& v0 = mesh.vertices[f[0]];
  return 0.5 * (mesh.vertices[f[1]] - v0).cross(mesh.vertices[f[2]] - v0);
}

double surface_area(const SurfaceMesh& mesh) {
  double area = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) area += face_area_normal(mesh, f).norm();
  return area;
}

Vec3 area_centroid(const SurfaceMesh& mesh) {
  Vec3 weighted = Vec3::Zero();
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const double area = face_area_normal(mesh, f).norm();
    weighted += area * face_center(mesh, f);
    total += area;
  }
  if (total <= 0.0) throw InvalidArgument("area_centroid: mesh has zero total area");
  return weighted / total;
}

Box3 bounding_box(const SurfaceMesh& mesh) { return bounding_box(mesh.vertices); }

std::pair<SurfaceMesh, Vec3> translate_align(const SurfaceMesh& moving,
                                             const SurfaceMesh& target) {
  require_valid(moving, "translate_align(moving)");
  require_valid(target, "translate_align(target)");
  const Vec3 shift = area_centroid(target) - area_centroid(moving);
  return {translated(moving, shift), shift};
}

SurfaceMesh translated(const SurfaceMesh& mesh, const Vec3& offset) {
  SurfaceMesh out = mesh;
  for (Vec3& v : out.vertices) v += offset;
  return out;
}

SurfaceMesh scaled(const SurfaceMesh& mesh, double factor) {
  SurfaceMesh out = mesh;
  for (Vec3& v : out.vertices) v *= factor;
  return out;
}

} // namespace morphoflow
