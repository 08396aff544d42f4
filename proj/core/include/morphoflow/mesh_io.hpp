#pragma once

#include <string>

#include "morphoflow/mesh.hpp"

namespace morphoflow {

enum class MeshFormat {
  Auto, // pick by file extension (.off / .ply)
  Off,
  AsciiPly,
};

/// Loads a triangle mesh. The result always satisfies the structural
/// invariants (indices in range, no repeated vertex per face, no degenerate
/// face, finite coordinates); otherwise the load throws. Vertex order is
/// preserved from the file. Throws IoError / ParseError / InvalidArgument.
SurfaceMesh load_mesh(const std::string& path, MeshFormat format = MeshFormat::Auto);

/// Writes OFF or ASCII-PLY with coordinates at 9 significant digits.
/// load(save(m)) reproduces the written decimals exactly, so a second
/// save/load round trip is a fixed point.
void save_mesh(const SurfaceMesh& mesh, const std::string& path,
               MeshFormat format = MeshFormat::Auto);

MeshFormat format_from_extension(const std::string& path);

/// ASCII-PLY with one extra per-vertex scalar property (e.g. cumulative
/// displacement for flow snapshots). Loaders here ignore unknown scalar
/// vertex properties, so these files read back as plain meshes.
void save_ascii_ply_with_scalar(const SurfaceMesh& mesh,
                                const std::vector<double>& scalar,
                                const std::string& scalar_name,
                                const std::string& path);

} // namespace morphoflow
