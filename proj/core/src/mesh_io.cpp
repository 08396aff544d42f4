#include "morphoflow/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "morphoflow/errors.hpp"

namespace morphoflow {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Whitespace/comment-aware token stream over the whole file.
class TokenReader {
public:
  TokenReader(std::string text, std::string path)
      : text_(std::move(text)), path_(std::move(path)) {}

  // Next token, skipping blanks and '#' comments to end of line.
  std::string_view next(const char* what) {
    skip();
    if (pos_ >= text_.size()) {
      throw ParseError(path_ + ":" + std::to_string(line_) + ": expected " + what +
                       ", got end of file");
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return std::string_view(text_).substr(start, pos_ - start);
  }

  double next_double(const char* what) {
    const std::string_view tok = next(what);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError(path_ + ":" + std::to_string(line_) + ": expected " + what +
                       ", got '" + std::string(tok) + "'");
    }
    return value;
  }

  std::int64_t next_int(const char* what) {
    const std::string_view tok = next(what);
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError(path_ + ":" + std::to_string(line_) + ": expected " + what +
                       ", got '" + std::string(tok) + "'");
    }
    return value;
  }

  std::size_t line() const { return line_; }
  const std::string& path() const { return path_; }

private:
  void skip() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (c == '\n') ++line_;
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string text_;
  std::string path_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path + "'");
  return buf.str();
}

void check_loaded(SurfaceMesh& mesh, const std::string& path) {
  const ValidationReport report = validate(mesh);
  if (!report.is_usable()) {
    throw ParseError(path + ": " + report.errors.front().message);
  }
}

SurfaceMesh load_off(const std::string& path) {
  TokenReader tok(read_file(path), path);
  const std::string_view magic = tok.next("OFF header");
  if (magic != "OFF") throw ParseError(path + ": missing OFF header");

  const std::int64_t nv = tok.next_int("vertex count");
  const std::int64_t nf = tok.next_int("face count");
  tok.next_int("edge count"); // ignored, present in the standard counts line
  if (nv < 0 || nf < 0) throw ParseError(path + ": negative element count");

  SurfaceMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (std::int64_t i = 0; i < nv; ++i) {
    const double x = tok.next_double("vertex x");
    const double y = tok.next_double("vertex y");
    const double z = tok.next_double("vertex z");
    mesh.vertices.emplace_back(x, y, z);
  }
  mesh.faces.reserve(static_cast<std::size_t>(nf));
  for (std::int64_t f = 0; f < nf; ++f) {
    const std::int64_t count = tok.next_int("face vertex count");
    if (count != 3) {
      throw ParseError(path + ":" + std::to_string(tok.line()) + ": face " +
                       std::to_string(f) + " has " + std::to_string(count) +
                       " vertices; only triangles are supported");
    }
    FaceIndices face;
    for (int k = 0; k < 3; ++k) {
      face[k] = static_cast<std::int32_t>(tok.next_int("face index"));
    }
    mesh.faces.push_back(face);
  }
  check_loaded(mesh, path);
  return mesh;
}

struct PlyProperty {
  std::string name;
  bool is_list = false;
};

SurfaceMesh load_ascii_ply(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;

  auto next_line = [&](const char* what) {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::istringstream probe(line);
      std::string first;
      if (probe >> first && first != "comment") return;
    }
    throw ParseError(path + ": unexpected end of file while reading " + std::string(what));
  };

  next_line("magic");
  if (line != "ply") throw ParseError(path + ": missing 'ply' magic line");
  next_line("format");
  {
    std::istringstream fmt(line);
    std::string kw, kind;
    fmt >> kw >> kind;
    if (kw != "format") throw ParseError(path + ": expected 'format' line");
    if (kind != "ascii") throw ParseError(path + ": only ASCII PLY is supported");
  }

  std::int64_t nv = -1, nf = -1;
  std::vector<PlyProperty> vertex_props;
  std::string face_list_name;
  std::string current_element;

  for (;;) {
    next_line("header");
    std::istringstream hdr(line);
    std::string kw;
    hdr >> kw;
    if (kw == "end_header") break;
    if (kw == "element") {
      std::string name;
      std::int64_t count = 0;
      hdr >> name >> count;
      current_element = name;
      if (name == "vertex") nv = count;
      else if (name == "face") nf = count;
      else throw ParseError(path + ": unsupported element '" + name + "'");
    } else if (kw == "property") {
      std::string type;
      hdr >> type;
      if (type == "list") {
        std::string count_type, index_type, name;
        hdr >> count_type >> index_type >> name;
        if (current_element == "face") face_list_name = name;
        else throw ParseError(path + ": list property outside 'face' element");
      } else {
        std::string name;
        hdr >> name;
        if (current_element == "vertex") vertex_props.push_back({name, false});
        else throw ParseError(path + ": scalar property on non-vertex element");
      }
    } else {
      throw ParseError(path + ": unexpected header line '" + line + "'");
    }
  }

  if (nv < 0 || nf < 0) throw ParseError(path + ": missing vertex or face element");
  if (face_list_name != "vertex_indices" && face_list_name != "vertex_index") {
    throw ParseError(path + ": face element must carry a vertex_indices list property");
  }
  int ix = -1, iy = -1, iz = -1;
  for (std::size_t i = 0; i < vertex_props.size(); ++i) {
    if (vertex_props[i].name == "x") ix = static_cast<int>(i);
    if (vertex_props[i].name == "y") iy = static_cast<int>(i);
    if (vertex_props[i].name == "z") iz = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) {
    throw ParseError(path + ": vertex element must have x, y, z properties");
  }

  SurfaceMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (std::int64_t i = 0; i < nv; ++i) {
    next_line("vertex row");
    std::istringstream row(line);
    std::vector<double> values(vertex_props.size());
    for (double& v : values) {
      if (!(row >> v)) throw ParseError(path + ": short vertex row '" + line + "'");
    }
    mesh.vertices.emplace_back(values[ix], values[iy], values[iz]);
  }
  mesh.faces.reserve(static_cast<std::size_t>(nf));
  for (std::int64_t f = 0; f < nf; ++f) {
    next_line("face row");
    std::istringstream row(line);
    int count = 0;
    if (!(row >> count)) throw ParseError(path + ": bad face row '" + line + "'");
    if (count != 3) {
      throw ParseError(path + ": face " + std::to_string(f) +
                       " has " + std::to_string(count) + " vertices; only triangles are supported");
    }
    FaceIndices face;
    for (int k = 0; k < 3; ++k) {
      if (!(row >> face[k])) throw ParseError(path + ": short face row '" + line + "'");
    }
    mesh.faces.push_back(face);
  }
  check_loaded(mesh, path);
  return mesh;
}

// 9 significant digits, shortest form (to_chars trims trailing zeros).
void append_coord(std::string& out, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  out.append(buf, res.ptr);
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << contents;
  out.flush();
  if (!out) throw IoError("write failure on '" + path + "'");
}

void save_off(const SurfaceMesh& mesh, const std::string& path) {
  std::string out;
  out.reserve(mesh.vertices.size() * 40 + mesh.faces.size() * 24 + 64);
  out += "OFF\n";
  out += std::to_string(mesh.vertices.size()) + " " + std::to_string(mesh.faces.size()) + " 0\n";
  for (const Vec3& v : mesh.vertices) {
    append_coord(out, v.x());
    out += ' ';
    append_coord(out, v.y());
    out += ' ';
    append_coord(out, v.z());
    out += '\n';
  }
  for (const FaceIndices& f : mesh.faces) {
    out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " +
           std::to_string(f[2]) + "\n";
  }
  write_file(path, out);
}

void save_ascii_ply(const SurfaceMesh& mesh, const std::string& path) {
  std::string out;
  out.reserve(mesh.vertices.size() * 40 + mesh.faces.size() * 24 + 256);
  out += "ply\nformat ascii 1.0\n";
  out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  out += "element face " + std::to_string(mesh.faces.size()) + "\n";
  out += "property list uchar int vertex_indices\nend_header\n";
  for (const Vec3& v : mesh.vertices) {
    append_coord(out, v.x());
    out += ' ';
    append_coord(out, v.y());
    out += ' ';
    append_coord(out, v.z());
    out += '\n';
  }
  for (const FaceIndices& f : mesh.faces) {
    out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " +
           std::to_string(f[2]) + "\n";
  }
  write_file(path, out);
}

} // namespace

MeshFormat format_from_extension(const std::string& path) {
  const std::size_t dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : lower(path.substr(dot + 1));
  if (ext == "off") return MeshFormat::Off;
  if (ext == "ply") return MeshFormat::AsciiPly;
  throw InvalidArgument("cannot infer mesh format from '" + path +
                        "' (expected .off or .ply)");
}

SurfaceMesh load_mesh(const std::string& path, MeshFormat format) {
  if (format == MeshFormat::Auto) format = format_from_extension(path);
  SurfaceMesh mesh =
      format == MeshFormat::Off ? load_off(path) : load_ascii_ply(path);
  if (mesh.name.empty()) mesh.name = path;
  return mesh;
}

void save_mesh(const SurfaceMesh& mesh, const std::string& path, MeshFormat format) {
  if (format == MeshFormat::Auto) format = format_from_extension(path);
  require_valid(mesh, "save_mesh");
  if (format == MeshFormat::Off) save_off(mesh, path);
  else save_ascii_ply(mesh, path);
}

void save_ascii_ply_with_scalar(const SurfaceMesh& mesh,
                                const std::vector<double>& scalar,
                                const std::string& scalar_name,
                                const std::string& path) {
  require_valid(mesh, "save_ascii_ply_with_scalar");
  if (scalar.size() != mesh.vertices.size()) {
    throw InvalidArgument("save_ascii_ply_with_scalar: scalar column length " +
                          std::to_string(scalar.size()) + " != vertex count " +
                          std::to_string(mesh.vertices.size()));
  }
  std::string out;
  out.reserve(mesh.vertices.size() * 52 + mesh.faces.size() * 24 + 256);
  out += "ply\nformat ascii 1.0\n";
  out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  out += "property float " + scalar_name + "\n";
  out += "element face " + std::to_string(mesh.faces.size()) + "\n";
  out += "property list uchar int vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    append_coord(out, v.x());
    out += ' ';
    append_coord(out, v.y());
    out += ' ';
    append_coord(out, v.z());
    out += ' ';
    append_coord(out, scalar[i]);
    out += '\n';
  }
  for (const FaceIndices& f : mesh.faces) {
    out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " +
           std::to_string(f[2]) + "\n";
  }
  write_file(path, out);
}

} // namespace morphoflow
