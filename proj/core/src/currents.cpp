#include "morphoflow/currents.hpp"

#include <cmath>
#include <string>

#include "morphoflow/errors.hpp"

namespace morphoflow {

double default_sigma_w(const SurfaceMesh& target) {
  const double diag = bounding_box(target).diagonal();
  if (!(diag > 0.0)) throw InvalidArgument("default_sigma_w: degenerate target bounding box");
  return 0.1 * diag;
}

CurrentRep current_of(const SurfaceMesh& mesh) {
  CurrentRep rep;
  rep.centers.reserve(mesh.faces.size());
  rep.normals.reserve(mesh.faces.size());
  rep.source_face_count = mesh.faces.size();
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Vec3 n = face_area_normal(mesh, f);
    if (!(n.norm() > kDegenerateAreaM2)) {
      throw InvalidArgument("current_of: degenerate face " + std::to_string(f));
    }
    rep.centers.push_back(face_center(mesh, f));
    rep.normals.push_back(n);
  }
  return rep;
}

namespace {

void check_params(const CurrentsParams& params) {
  if (!(params.sigma_w > 0.0)) throw InvalidArgument("currents: sigma_w must be positive");
}

} // namespace

double currents_inner(const CurrentRep& a, const CurrentRep& b,
                      const CurrentsParams& params) {
  check_params(params);
  const std::size_t na = a.centers.size();
  const std::size_t nb = b.centers.size();
  std::vector<double> row(na, 0.0);

#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(na); ++p) {
    const Vec3& cp = a.centers[p];
    const Vec3& np = a.normals[p];
    double acc = 0.0;
    for (std::size_t q = 0; q < nb; ++q) {
      const double d2 = (cp - b.centers[q]).squaredNorm();
      acc += currents_k(params.kernel, d2, params.sigma_w) * np.dot(b.normals[q]);
    }
    row[p] = acc;
  }

  double total = 0.0;
  for (std::size_t p = 0; p < na; ++p) total += row[p];
  return total;
}

double data_term_E(const SurfaceMesh& moved, const CurrentRep& target,
                   const CurrentsParams& params) {
  const CurrentRep a = current_of(moved);
  const double aa = currents_inner(a, a, params);
  const double ab = currents_inner(a, target, params);
  const double bb = currents_inner(target, target, params);
  double e = aa - 2.0 * ab + bb;
  if (e < 0.0) {
    if (e > -1e-12 * bb) {
      e = 0.0;
    } else {
      throw NumericError("data_term_E: negative squared norm " + std::to_string(e) +
                         " exceeds the cancellation floor (" + std::to_string(1e-12 * bb) +
                         "); inconsistent inputs or non-positive-definite kernel");
    }
  }
  return e;
}

PointList grad_data_term(const SurfaceMesh& moved, const CurrentRep& target,
                         const CurrentsParams& params) {
  check_params(params);
  const CurrentRep a = current_of(moved);
  const std::size_t m_faces = a.centers.size();

  // dE/d(center) and dE/d(normal) per face of the moved mesh.
  // E = <A,A> - 2<A,B> + const:
  //   dE/dc_m = 4 sum_g (n_m.n_g) k'(|c_m-c_g|^2)(c_m-c_g)
  //           - 4 sum_q (n_m.b_q) k'(|c_m-t_q|^2)(c_m-t_q)
  //   dE/dn_m = 2 [ sum_g k(c_m,c_g) n_g - sum_q k(c_m,t_q) b_q ]
  PointList grad_c(m_faces, Vec3::Zero());
  PointList grad_n(m_faces, Vec3::Zero());

#pragma omp parallel for schedule(static)
  for (std::int64_t m = 0; m < static_cast<std::int64_t>(m_faces); ++m) {
    const Vec3& cm = a.centers[m];
    const Vec3& nm = a.normals[m];
    Vec3 gc = Vec3::Zero();
    Vec3 gn = Vec3::Zero();
    for (std::size_t g = 0; g < m_faces; ++g) {
      const Vec3 diff = cm - a.centers[g];
      const double d2 = diff.squaredNorm();
      const double k = currents_k(params.kernel, d2, params.sigma_w);
      const double dk = currents_dk(params.kernel, d2, params.sigma_w);
      gc += 4.0 * nm.dot(a.normals[g]) * dk * diff;
      gn += 2.0 * k * a.normals[g];
    }
    for (std::size_t q = 0; q < target.centers.size(); ++q) {
      const Vec3 diff = cm - target.centers[q];
      const double d2 = diff.squaredNorm();
      const double k = currents_k(params.kernel, d2, params.sigma_w);
      const double dk = currents_dk(params.kernel, d2, params.sigma_w);
      gc -= 4.0 * nm.dot(target.normals[q]) * dk * diff;
      gn -= 2.0 * k * target.normals[q];
    }
    grad_c[m] = gc;
    grad_n[m] = gn;
  }

  // Chain rule to the vertices:
  //   c = (v0+v1+v2)/3            -> each vertex gets gc/3
  //   n = 0.5 (v1-v0) x (v2-v0)   -> with w = gn, a = v1-v0, b = v2-v0:
  //     d(n.w) = 0.5 [ da.(b x w) + db.(w x a) ]
  PointList grad(moved.vertices.size(), Vec3::Zero());
  for (std::size_t m = 0; m < m_faces; ++m) {
    const FaceIndices& f = moved.faces[m];
    const Vec3& v0 = moved.vertices[f[0]];
    const Vec3 a_edge = moved.vertices[f[1]] - v0;
    const Vec3 b_edge = moved.vertices[f[2]] - v0;
    const Vec3& w = grad_n[m];
    const Vec3 c_share = grad_c[m] / 3.0;
    const Vec3 d1 = 0.5 * b_edge.cross(w);
    const Vec3 d2 = 0.5 * w.cross(a_edge);
    grad[f[0]] += c_share - d1 - d2;
    grad[f[1]] += c_share + d1;
    grad[f[2]] += c_share + d2;
  }
  return grad;
}

} // namespace morphoflow
