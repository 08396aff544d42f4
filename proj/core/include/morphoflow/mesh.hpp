#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "morphoflow/geometry.hpp"

namespace morphoflow {

using FaceIndices = std::array<std::int32_t, 3>;

/// Triangulated surface in R^3. Coordinates are meters; faces are
/// counterclockwise-ordered vertex-index triples (outward normals).
/// Immutable by convention once built: every operation returns a new mesh.
struct SurfaceMesh {
  PointList vertices;
  std::vector<FaceIndices> faces;
  std::string name;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }
};

/// Face area below this is treated as degenerate (validation error).
inline constexpr double kDegenerateAreaM2 = 1e-12;

enum class ValidationCode {
  IndexOutOfRange,
  RepeatedVertexInFace,
  DegenerateFace,
  NonFiniteCoordinate,
  EmptyMesh,
  Orientation, // warning: shared edge traversed in the same direction twice
};

const char* validation_code_name(ValidationCode code);

struct ValidationIssue {
  ValidationCode code;
  std::size_t element; // face index, or vertex index for NonFiniteCoordinate
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool is_usable() const { return errors.empty(); }
};

/// Checks every structural invariant and the orientation-consistency rule
/// (each 2-face edge must be traversed in opposite directions). Orientation
/// problems are warnings, everything else an error. Never mutates the mesh.
ValidationReport validate(const SurfaceMesh& mesh);

/// Throws InvalidArgument describing the first error if the mesh is unusable.
void require_valid(const SurfaceMesh& mesh, const std::string& context);

Vec3 face_center(const SurfaceMesh& mesh, std::size_t face);

/// Area-weighted face normal: 0.5 * (v1-v0) x (v2-v0). Magnitude = face area.
Vec3 face_area_normal(const SurfaceMesh& mesh, std::size_t face);

double surface_area(const SurfaceMesh& mesh);

/// Area-weighted centroid (mean of face centers weighted by face area).
Vec3 area_centroid(const SurfaceMesh& mesh);

Box3 bounding_box(const SurfaceMesh& mesh);

/// Rigid pre-alignment: translates `moving` so its area-weighted centroid
/// coincides with the target's. Returns the moved mesh and the translation.
std::pair<SurfaceMesh, Vec3> translate_align(const SurfaceMesh& moving,
                                             const SurfaceMesh& target);

SurfaceMesh translated(const SurfaceMesh& mesh, const Vec3& offset);
SurfaceMesh scaled(const SurfaceMesh& mesh, double factor);

} // namespace morphoflow
