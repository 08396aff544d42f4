#include "morphoflow/field_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "morphoflow/errors.hpp"

namespace morphoflow {

namespace {

constexpr const char* kMagic = "MORPHOFLOW-FIELD 1";

void append_g17(std::string& out, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

void append_point_block(std::string& out, const std::vector<PointList>& block) {
  for (const PointList& pts : block) {
    for (const Vec3& p : pts) {
      append_g17(out, p.x());
      out += ' ';
      append_g17(out, p.y());
      out += ' ';
      append_g17(out, p.z());
      out += '\n';
    }
  }
}

class LineReader {
public:
  LineReader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

  std::string next(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) {
      throw ParseError(path_ + ": unexpected end of file while reading " + std::string(what));
    }
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  // "key rest-of-line"; checks the key, returns the rest.
  std::string keyed(const char* key) {
    const std::string line = next(key);
    const std::string prefix = std::string(key);
    if (line == prefix) return "";
    if (line.rfind(prefix + " ", 0) != 0) {
      throw ParseError(path_ + ":" + std::to_string(line_) + ": expected '" + prefix +
                       " ...', got '" + line + "'");
    }
    return line.substr(prefix.size() + 1);
  }

  double keyed_double(const char* key) {
    const std::string text = keyed(key);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw ParseError(path_ + ":" + std::to_string(line_) + ": bad number '" + text + "'");
    }
    return v;
  }

  long keyed_long(const char* key) {
    const std::string text = keyed(key);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw ParseError(path_ + ":" + std::to_string(line_) + ": bad integer '" + text + "'");
    }
    return v;
  }

  Vec3 point() {
    const std::string line = next("coordinate row");
    Vec3 p;
    const char* cur = line.data();
    const char* end = line.data() + line.size();
    for (int c = 0; c < 3; ++c) {
      while (cur < end && *cur == ' ') ++cur;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cur, end, v);
      if (ec != std::errc()) {
        throw ParseError(path_ + ":" + std::to_string(line_) + ": bad coordinate row '" +
                         line + "'");
      }
      p[c] = v;
      cur = ptr;
    }
    return p;
  }

private:
  std::istream& in_;
  std::string path_;
  std::size_t line_ = 0;
};

} // namespace

void save_field(const MomentumField& field, const std::string& path) {
  check_field(field);
  std::string out;
  const std::size_t nc = field.control_trajectories.front().size();
  out.reserve((field.control_trajectories.size() + field.momenta.size()) * nc * 60 + 256);

  out += kMagic;
  out += '\n';
  out += "source " + field.source_label + "\n";
  out += "target " + field.target_label + "\n";
  out += "sigma_v ";
  append_g17(out, field.sigma_v);
  out += "\ngamma ";
  append_g17(out, field.gamma);
  out += "\nn_steps " + std::to_string(field.n_steps) + "\n";
  out += "n_controls " + std::to_string(nc) + "\n";
  out += "controls\n";
  append_point_block(out, field.control_trajectories);
  out += "momenta\n";
  append_point_block(out, field.momenta);
  out += "end\n";

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << out;
  file.flush();
  if (!file) throw IoError("write failure on '" + path + "'");
}

MomentumField load_field(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for reading");
  LineReader reader(file, path);

  if (reader.next("magic") != kMagic) {
    throw ParseError(path + ": not a MORPHOFLOW-FIELD version 1 file");
  }

  MomentumField field;
  field.source_label = reader.keyed("source");
  field.target_label = reader.keyed("target");
  field.sigma_v = reader.keyed_double("sigma_v");
  field.gamma = reader.keyed_double("gamma");
  const long n_steps = reader.keyed_long("n_steps");
  const long n_controls = reader.keyed_long("n_controls");
  if (n_steps < 1 || n_steps > 100000) throw ParseError(path + ": implausible n_steps");
  if (n_controls < 1) throw ParseError(path + ": implausible n_controls");
  field.n_steps = static_cast<int>(n_steps);

  if (reader.next("controls header") != "controls") {
    throw ParseError(path + ": expected 'controls'");
  }
  field.control_trajectories.assign(static_cast<std::size_t>(n_steps) + 1, PointList());
  for (PointList& pts : field.control_trajectories) {
    pts.reserve(static_cast<std::size_t>(n_controls));
    for (long i = 0; i < n_controls; ++i) pts.push_back(reader.point());
  }
  if (reader.next("momenta header") != "momenta") {
    throw ParseError(path + ": expected 'momenta'");
  }
  field.momenta.assign(static_cast<std::size_t>(n_steps), PointList());
  for (PointList& pts : field.momenta) {
    pts.reserve(static_cast<std::size_t>(n_controls));
    for (long i = 0; i < n_controls; ++i) pts.push_back(reader.point());
  }
  if (reader.next("end marker") != "end") throw ParseError(path + ": expected 'end'");

  try {
    check_field(field);
  } catch (const InvalidArgument& err) {
    throw ParseError(path + ": " + err.what());
  }
  const double drift = self_consistency_error(field);
  if (drift > 1e-10) {
    throw NumericError(path + ": stored trajectories are not self-consistent (drift " +
                       std::to_string(drift) + " > 1e-10); file edited or corrupted?");
  }
  return field;
}

} // namespace morphoflow
