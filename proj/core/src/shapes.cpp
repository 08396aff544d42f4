#include "morphoflow/shapes.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <utility>

#include "morphoflow/errors.hpp"

namespace morphoflow {

namespace {

// Unit icosahedron, counterclockwise faces (outward normals).
void icosahedron(PointList& vertices, std::vector<FaceIndices>& faces) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  const double s = 1.0 / std::sqrt(1.0 + t * t);
  auto v = [&](double x, double y, double z) { vertices.push_back(s * Vec3(x, y, z)); };
  v(-1, t, 0); v(1, t, 0); v(-1, -t, 0); v(1, -t, 0);
  v(0, -1, t); v(0, 1, t); v(0, -1, -t); v(0, 1, -t);
  v(t, 0, -1); v(t, 0, 1); v(-t, 0, -1); v(-t, 0, 1);
  const std::int32_t idx[20][3] = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
      {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
      {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (const auto& f : idx) faces.push_back({f[0], f[1], f[2]});
}

} // namespace

SurfaceMesh make_icosphere(int subdivisions, double radius, const Vec3& center,
                           const std::string& name) {
  if (subdivisions < 0 || subdivisions > 8) {
    throw InvalidArgument("make_icosphere: subdivisions must be in [0, 8]");
  }
  if (!(radius > 0.0)) throw InvalidArgument("make_icosphere: radius must be positive");

  PointList vertices;
  std::vector<FaceIndices> faces;
  icosahedron(vertices, faces);

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> midpoint;
    auto mid = [&](std::int32_t a, std::int32_t b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const Vec3 m = (vertices[a] + vertices[b]).normalized();
      const auto id = static_cast<std::int32_t>(vertices.size());
      vertices.push_back(m);
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<FaceIndices> next;
    next.reserve(faces.size() * 4);
    for (const FaceIndices& f : faces) {
      const std::int32_t ab = mid(f[0], f[1]);
      const std::int32_t bc = mid(f[1], f[2]);
      const std::int32_t ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  SurfaceMesh mesh;
  mesh.name = name;
  mesh.vertices.reserve(vertices.size());
  for (const Vec3& v : vertices) mesh.vertices.push_back(center + radius * v);
  mesh.faces = std::move(faces);
  return mesh;
}

SurfaceMesh make_ellipsoid(int subdivisions, const Vec3& semi_axes,
                           const Eigen::Matrix3d& rotation, const Vec3& center,
                           const std::string& name) {
  if (!(semi_axes.minCoeff() > 0.0)) {
    throw InvalidArgument("make_ellipsoid: semi-axes must be positive");
  }
  SurfaceMesh mesh = make_icosphere(subdivisions, 1.0, Vec3::Zero(), name);
  for (Vec3& v : mesh.vertices) {
    v = center + rotation * v.cwiseProduct(semi_axes);
  }
  return mesh;
}

SurfaceMesh concat(const SurfaceMesh& a, const SurfaceMesh& b, const std::string& name) {
  SurfaceMesh out;
  out.name = name;
  out.vertices = a.vertices;
  out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
  out.faces = a.faces;
  const auto offset = static_cast<std::int32_t>(a.vertices.size());
  for (FaceIndices f : b.faces) {
    for (std::int32_t& idx : f) idx += offset;
    out.faces.push_back(f);
  }
  return out;
}

SurfaceMesh rotated(const SurfaceMesh& mesh, const Eigen::Matrix3d& rotation,
                    const Vec3& pivot) {
  SurfaceMesh out = mesh;
  for (Vec3& v : out.vertices) v = pivot + rotation * (v - pivot);
  return out;
}

} // namespace morphoflow
