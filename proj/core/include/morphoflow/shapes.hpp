#pragma once

#include <Eigen/Geometry>

#include "morphoflow/mesh.hpp"

namespace morphoflow {

/// Icosphere: regular icosahedron subdivided `subdivisions` times, vertices
/// projected to the sphere. Consistent outward (counterclockwise) orientation.
/// Vertex/face counts: V = 10*4^s + 2, F = 20*4^s.
SurfaceMesh make_icosphere(int subdivisions, double radius = 1.0,
                           const Vec3& center = Vec3::Zero(),
                           const std::string& name = "icosphere");

/// Icosphere stretched per axis, then rotated and translated.
SurfaceMesh make_ellipsoid(int subdivisions, const Vec3& semi_axes,
                           const Eigen::Matrix3d& rotation,
                           const Vec3& center,
                           const std::string& name = "ellipsoid");

/// Concatenates two meshes into one vertex/face list (indices re-based).
SurfaceMesh concat(const SurfaceMesh& a, const SurfaceMesh& b,
                   const std::string& name);

SurfaceMesh rotated(const SurfaceMesh& mesh, const Eigen::Matrix3d& rotation,
                    const Vec3& pivot);

} // namespace morphoflow
