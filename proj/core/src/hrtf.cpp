#include "morphoflow/hrtf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>

#include "morphoflow/errors.hpp"

namespace morphoflow {

namespace {

constexpr const char* kMagic = "MORPHOFLOW-HRTF 1";

void append_g17(std::string& out, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

} // namespace

Vec3 direction_unit(const Direction& d) {
  const double az = d.az_deg * std::numbers::pi / 180.0;
  const double el = d.el_deg * std::numbers::pi / 180.0;
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

void check_hrtf(const HrtfSet& set) {
  if (set.directions.size() < 4) {
    throw InvalidArgument("HrtfSet: need >= 4 directions (spatial statistics undefined below)");
  }
  if (set.frequencies_hz.empty()) throw InvalidArgument("HrtfSet: no frequencies");
  for (std::size_t i = 1; i < set.frequencies_hz.size(); ++i) {
    if (!(set.frequencies_hz[i] > set.frequencies_hz[i - 1])) {
      throw InvalidArgument("HrtfSet: frequencies must be strictly ascending (violated at index " +
                            std::to_string(i) + ")");
    }
  }
  if (set.values.size() != set.directions.size() * set.frequencies_hz.size()) {
    throw InvalidArgument("HrtfSet: value grid size mismatch");
  }
  for (const std::complex<double>& v : set.values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw InvalidArgument("HrtfSet: non-finite value");
    }
  }
  std::vector<Vec3> units;
  units.reserve(set.directions.size());
  for (const Direction& d : set.directions) units.push_back(direction_unit(d));
  for (std::size_t i = 0; i < units.size(); ++i) {
    for (std::size_t j = i + 1; j < units.size(); ++j) {
      if (units[i].dot(units[j]) > 1.0 - 1e-12) {
        throw InvalidArgument("HrtfSet: duplicate directions at rows " + std::to_string(i) +
                              " and " + std::to_string(j));
      }
    }
  }
}

HrtfSet load_hrtf_set(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for reading");

  std::size_t line_no = 0;
  auto next_line = [&](const char* what) {
    std::string line;
    if (!std::getline(file, line)) {
      throw ParseError(path + ": unexpected end of file while reading " + std::string(what));
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError(path + ":" + std::to_string(line_no) + ": " + msg);
  };
  auto keyed = [&](const char* key) {
    const std::string line = next_line(key);
    const std::string prefix = std::string(key) + " ";
    if (line.rfind(prefix, 0) != 0) throw fail("expected '" + std::string(key) + " ...'");
    return line.substr(prefix.size());
  };
  auto parse_doubles = [&](const std::string& text, std::vector<double>& out) {
    const char* cur = text.data();
    const char* end = text.data() + text.size();
    while (cur < end) {
      while (cur < end && (*cur == ' ' || *cur == '\t')) ++cur;
      if (cur >= end) break;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cur, end, v);
      if (ec != std::errc()) throw fail("bad number in '" + text + "'");
      out.push_back(v);
      cur = ptr;
    }
  };

  if (next_line("magic") != kMagic) {
    throw ParseError(path + ": not a MORPHOFLOW-HRTF version 1 file");
  }

  HrtfSet set;
  set.ear = keyed("ear");
  {
    const std::string text = keyed("radius_m");
    std::vector<double> v;
    parse_doubles(text, v);
    if (v.size() != 1) throw fail("radius_m expects one value");
    set.radius_m = v[0];
  }
  const auto n_dirs = static_cast<std::size_t>(std::stoul(keyed("directions")));
  const auto n_freqs = static_cast<std::size_t>(std::stoul(keyed("frequencies")));
  {
    std::vector<double> freqs;
    parse_doubles(keyed("freqs_hz"), freqs);
    if (freqs.size() != n_freqs) {
      throw fail("freqs_hz lists " + std::to_string(freqs.size()) + " values, header says " +
                 std::to_string(n_freqs));
    }
    set.frequencies_hz = std::move(freqs);
  }

  set.directions.reserve(n_dirs);
  set.values.reserve(n_dirs * n_freqs);
  for (std::size_t d = 0; d < n_dirs; ++d) {
    std::vector<double> row;
    parse_doubles(next_line("direction row"), row);
    if (row.size() != 2 + 2 * n_freqs) {
      throw fail("direction row has " + std::to_string(row.size()) + " values, expected " +
                 std::to_string(2 + 2 * n_freqs));
    }
    set.directions.push_back({row[0], row[1]});
    for (std::size_t f = 0; f < n_freqs; ++f) {
      set.values.emplace_back(row[2 + 2 * f], row[3 + 2 * f]);
    }
  }

  try {
    check_hrtf(set);
  } catch (const InvalidArgument& err) {
    throw ParseError(path + ": " + err.what());
  }
  return set;
}

void save_hrtf_set(const HrtfSet& set, const std::string& path) {
  check_hrtf(set);
  std::string out;
  out.reserve(set.values.size() * 40 + 256);
  out += kMagic;
  out += "\near " + set.ear + "\n";
  out += "radius_m ";
  append_g17(out, set.radius_m);
  out += "\ndirections " + std::to_string(set.directions.size());
  out += "\nfrequencies " + std::to_string(set.frequencies_hz.size());
  out += "\nfreqs_hz";
  for (double f : set.frequencies_hz) {
    out += ' ';
    append_g17(out, f);
  }
  out += '\n';
  for (std::size_t d = 0; d < set.directions.size(); ++d) {
    append_g17(out, set.directions[d].az_deg);
    out += ' ';
    append_g17(out, set.directions[d].el_deg);
    for (std::size_t f = 0; f < set.frequencies_hz.size(); ++f) {
      const std::complex<double> v = set.at(d, f);
      out += ' ';
      append_g17(out, v.real());
      out += ' ';
      append_g17(out, v.imag());
    }
    out += '\n';
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << out;
  file.flush();
  if (!file) throw IoError("write failure on '" + path + "'");
}

SfrsMap sfrs(const HrtfSet& set, double frequency_hz) {
  check_hrtf(set);
  const std::vector<double>& freqs = set.frequencies_hz;
  if (!(frequency_hz >= freqs.front() && frequency_hz <= freqs.back())) {
    throw InvalidArgument("sfrs: frequency " + std::to_string(frequency_hz) +
                          " Hz outside the set's range [" + std::to_string(freqs.front()) +
                          ", " + std::to_string(freqs.back()) + "]");
  }

  SfrsMap map;
  map.directions = set.directions;
  map.frequency_hz = frequency_hz;
  map.gains_db.reserve(set.directions.size());

  const auto it = std::lower_bound(freqs.begin(), freqs.end(), frequency_hz);
  const auto hi = static_cast<std::size_t>(it - freqs.begin());
  const bool exact = hi < freqs.size() && freqs[hi] == frequency_hz;

  for (std::size_t d = 0; d < set.directions.size(); ++d) {
    std::complex<double> h;
    if (exact) {
      h = set.at(d, hi);
    } else {
      const std::size_t lo = hi - 1; // hi >= 1 because frequency_hz > freqs.front()
      const double t = (frequency_hz - freqs[lo]) / (freqs[hi] - freqs[lo]);
      h = (1.0 - t) * set.at(d, lo) + t * set.at(d, hi);
    }
    const double mag = std::abs(h);
    if (!(mag > 0.0)) {
      throw NumericError("sfrs: zero magnitude at direction row " + std::to_string(d) +
                         "; gain undefined");
    }
    map.gains_db.push_back(20.0 * std::log10(mag));
  }
  return map;
}

std::vector<double> solid_angle_weights(const std::vector<Direction>& directions) {
  if (directions.empty()) throw InvalidArgument("solid_angle_weights: no directions");
  std::vector<Vec3> sites;
  sites.reserve(directions.size());
  for (const Direction& d : directions) sites.push_back(direction_unit(d));

  constexpr int kLatticeSize = 65536;
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<std::int64_t> counts(sites.size(), 0);

#pragma omp parallel
  {
    std::vector<std::int64_t> local(sites.size(), 0);
#pragma omp for schedule(static)
    for (int i = 0; i < kLatticeSize; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / kLatticeSize;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden_angle * i;
      const Vec3 p(r * std::cos(phi), r * std::sin(phi), z);
      std::size_t best = 0;
      double best_dot = -2.0;
      for (std::size_t s = 0; s < sites.size(); ++s) {
        const double d = sites[s].dot(p);
        if (d > best_dot) {
          best_dot = d;
          best = s;
        }
      }
      local[best] += 1;
    }
#pragma omp critical
    for (std::size_t s = 0; s < sites.size(); ++s) counts[s] += local[s];
  }

  const double cell = 4.0 * std::numbers::pi / kLatticeSize;
  std::vector<double> weights(sites.size());
  for (std::size_t s = 0; s < sites.size(); ++s) weights[s] = cell * static_cast<double>(counts[s]);
  return weights;
}

std::optional<double> spatial_correlation(const SfrsMap& a, const SfrsMap& b,
                                          CorrelationWeighting weighting) {
  if (a.directions.size() != b.directions.size()) {
    throw InvalidArgument("spatial_correlation: direction lists differ in size");
  }
  for (std::size_t i = 0; i < a.directions.size(); ++i) {
    if (a.directions[i].az_deg != b.directions[i].az_deg ||
        a.directions[i].el_deg != b.directions[i].el_deg) {
      throw InvalidArgument("spatial_correlation: direction lists differ at row " +
                            std::to_string(i));
    }
  }
  if (a.directions.size() < 4) {
    throw InvalidArgument("spatial_correlation: need >= 4 directions");
  }

  const std::size_t n = a.gains_db.size();
  const bool const_a = std::all_of(a.gains_db.begin(), a.gains_db.end(),
                                   [&](double v) { return v == a.gains_db.front(); });
  const bool const_b = std::all_of(b.gains_db.begin(), b.gains_db.end(),
                                   [&](double v) { return v == b.gains_db.front(); });
  if (const_a || const_b) return std::nullopt;

  std::vector<double> w;
  if (weighting == CorrelationWeighting::SolidAngle) {
    w = solid_angle_weights(a.directions);
  } else {
    w.assign(n, 1.0);
  }

  double wsum = 0.0, mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wsum += w[i];
    mean_a += w[i] * a.gains_db[i];
    mean_b += w[i] * b.gains_db[i];
  }
  mean_a /= wsum;
  mean_b /= wsum;

  double num = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a.gains_db[i] - mean_a;
    const double db = b.gains_db[i] - mean_b;
    num += w[i] * da * db;
    var_a += w[i] * da * da;
    var_b += w[i] * db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return std::nullopt;

  // r = sign(num) * sqrt(num^2 / (var_a var_b)): identical inputs make the
  // ratio exactly 1, so self-correlation is exactly 1.0.
  const double ratio = (num * num) / (var_a * var_b);
  const double r = std::copysign(std::min(std::sqrt(ratio), 1.0), num);
  return r;
}

CorrelationCurve correlation_curve(const HrtfSet& a, const HrtfSet& b,
                                   const std::vector<double>& frequencies_hz,
                                   CorrelationWeighting weighting) {
  check_hrtf(a);
  check_hrtf(b);
  if (a.directions.size() != b.directions.size()) {
    throw InvalidArgument("correlation_curve: direction grids differ");
  }
  for (std::size_t i = 0; i < a.directions.size(); ++i) {
    if (a.directions[i].az_deg != b.directions[i].az_deg ||
        a.directions[i].el_deg != b.directions[i].el_deg) {
      throw InvalidArgument("correlation_curve: direction grids differ at row " +
                            std::to_string(i));
    }
  }

  // The weights depend only on the (shared) grid; compute them once and
  // reuse by correlating pre-weighted via spatial_correlation on each map
  // pair. spatial_correlation recomputes weights, so inline the loop here.
  std::vector<double> w;
  if (weighting == CorrelationWeighting::SolidAngle) {
    w = solid_angle_weights(a.directions);
  } else {
    w.assign(a.directions.size(), 1.0);
  }

  CorrelationCurve curve;
  curve.reserve(frequencies_hz.size());
  for (double f : frequencies_hz) {
    const SfrsMap ma = sfrs(a, f);
    const SfrsMap mb = sfrs(b, f);

    const std::size_t n = ma.gains_db.size();
    const bool const_a = std::all_of(ma.gains_db.begin(), ma.gains_db.end(),
                                     [&](double v) { return v == ma.gains_db.front(); });
    const bool const_b = std::all_of(mb.gains_db.begin(), mb.gains_db.end(),
                                     [&](double v) { return v == mb.gains_db.front(); });
    if (const_a || const_b) {
      curve.emplace_back(f, std::nullopt);
      continue;
    }
    double wsum = 0.0, mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wsum += w[i];
      mean_a += w[i] * ma.gains_db[i];
      mean_b += w[i] * mb.gains_db[i];
    }
    mean_a /= wsum;
    mean_b /= wsum;
    double num = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double da = ma.gains_db[i] - mean_a;
      const double db = mb.gains_db[i] - mean_b;
      num += w[i] * da * db;
      var_a += w[i] * da * da;
      var_b += w[i] * db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) {
      curve.emplace_back(f, std::nullopt);
      continue;
    }
    const double ratio = (num * num) / (var_a * var_b);
    curve.emplace_back(f, std::copysign(std::min(std::sqrt(ratio), 1.0), num));
  }
  return curve;
}

namespace detail {

int sphere_series_order(double ka) {
  return static_cast<int>(std::ceil(ka)) + 12;
}

std::complex<double> rigid_sphere_pressure(double ka, double cos_source_ear,
                                           int truncation_order) {
  using namespace std::complex_literals;
  if (!(ka > 0.0)) throw InvalidArgument("rigid_sphere_pressure: ka must be positive");
  const double x = ka;
  const int order = truncation_order;

  // Incident plane wave + scattered field on a rigid sphere reduces, via the
  // Wronskian j_m h_m' - j_m' h_m = i/x^2, to
  //   p(theta) = (i/x^2) sum_m (2m+1) i^m P_m(cos theta) / h_m'(x)
  // with theta measured from the propagation direction. The wave travels
  // opposite to the source direction, so cos theta = -cos_source_ear.
  const double ct = std::clamp(-cos_source_ear, -1.0, 1.0);

  // Spherical Bessel derivative: f_m' = f_{m-1} - (m+1)/x f_m; f_0' = -f_1.
  std::vector<std::complex<double>> coeff(static_cast<std::size_t>(order) + 1);
  std::complex<double> i_pow_m = 1.0;
  for (int m = 0; m <= order; ++m) {
    double jp, yp;
    if (m == 0) {
      jp = -std::sph_bessel(1, x);
      yp = -std::sph_neumann(1, x);
    } else {
      const double ratio = static_cast<double>(m + 1) / x;
      jp = std::sph_bessel(m - 1, x) - ratio * std::sph_bessel(m, x);
      yp = std::sph_neumann(m - 1, x) - ratio * std::sph_neumann(m, x);
    }
    const std::complex<double> hp(jp, yp);
    coeff[static_cast<std::size_t>(m)] = (2.0 * m + 1.0) * i_pow_m / hp;
    i_pow_m *= 1i;
  }

  // Convergence guard: the last coefficients' possible contribution to the
  // normalized pressure (|P_m| <= 1) must be negligible on the ~1 scale of
  // |p|. Triggers when the truncation order is insufficient for this ka.
  const double tail = std::abs(coeff[static_cast<std::size_t>(order)]) / (x * x);
  const double tail_prev =
      order >= 1 ? std::abs(coeff[static_cast<std::size_t>(order - 1)]) / (x * x) : 0.0;
  if (!(tail <= 1e-2) || !(tail_prev <= 5e-2)) {
    throw NumericError("rigid_sphere_pressure: scattering series not converged at order " +
                       std::to_string(order) + " for ka=" + std::to_string(ka) +
                       " (tail " + std::to_string(tail) + ")");
  }

  // Legendre recurrence: m P_m = (2m-1) x P_{m-1} - (m-1) P_{m-2}.
  std::complex<double> sum = coeff[0];
  double p_prev = 1.0;
  double p_curr = ct;
  if (order >= 1) sum += coeff[1] * p_curr;
  for (int m = 2; m <= order; ++m) {
    const double p_next = ((2.0 * m - 1.0) * ct * p_curr - (m - 1.0) * p_prev) / m;
    p_prev = p_curr;
    p_curr = p_next;
    sum += coeff[static_cast<std::size_t>(m)] * p_curr;
  }
  return 1i / (x * x) * sum;
}

} // namespace detail

HrtfSet sphere_hrtf_oracle(double radius_m, const Vec3& ear_direction,
                           const std::vector<Direction>& directions,
                           const std::vector<double>& frequencies_hz,
                           double speed_of_sound, const std::string& ear_label) {
  if (!(radius_m > 0.0)) throw InvalidArgument("sphere_hrtf_oracle: radius must be positive");
  if (!(speed_of_sound > 0.0)) {
    throw InvalidArgument("sphere_hrtf_oracle: speed of sound must be positive");
  }
  if (!(ear_direction.norm() > 0.0)) {
    throw InvalidArgument("sphere_hrtf_oracle: ear direction must be nonzero");
  }
  for (double f : frequencies_hz) {
    if (!(f > 0.0)) throw InvalidArgument("sphere_hrtf_oracle: frequencies must be positive");
  }
  const Vec3 ear = ear_direction.normalized();

  HrtfSet set;
  set.directions = directions;
  set.frequencies_hz = frequencies_hz;
  set.ear = ear_label;
  set.radius_m = radius_m;
  set.values.resize(directions.size() * frequencies_hz.size());

  for (std::size_t fi = 0; fi < frequencies_hz.size(); ++fi) {
    const double ka =
        2.0 * std::numbers::pi * frequencies_hz[fi] / speed_of_sound * radius_m;
    const int order = detail::sphere_series_order(ka);
    for (std::size_t di = 0; di < directions.size(); ++di) {
      const double cos_angle = std::clamp(direction_unit(directions[di]).dot(ear), -1.0, 1.0);
      set.values[di * frequencies_hz.size() + fi] =
          detail::rigid_sphere_pressure(ka, cos_angle, order);
    }
  }
  check_hrtf(set);
  return set;
}

std::vector<Direction> make_az_el_grid(double az_step_deg, double el_step_deg) {
  if (!(az_step_deg > 0.0 && az_step_deg <= 120.0) ||
      !(el_step_deg > 0.0 && el_step_deg <= 90.0)) {
    throw InvalidArgument("make_az_el_grid: steps must be in (0, 120] x (0, 90] degrees");
  }
  std::vector<Direction> grid;
  for (double el = -90.0; el <= 90.0 + 1e-9; el += el_step_deg) {
    const double el_clamped = std::min(el, 90.0);
    if (std::abs(el_clamped) >= 90.0 - 1e-9) {
      grid.push_back({0.0, el_clamped < 0 ? -90.0 : 90.0});
      continue;
    }
    for (double az = 0.0; az < 360.0 - 1e-9; az += az_step_deg) {
      grid.push_back({az, el_clamped});
    }
  }
  return grid;
}

std::string sfrs_csv(const SfrsMap& map) {
  std::string out = "az_deg,el_deg,gain_db\n";
  for (std::size_t i = 0; i < map.directions.size(); ++i) {
    append_g17(out, map.directions[i].az_deg);
    out += ',';
    append_g17(out, map.directions[i].el_deg);
    out += ',';
    append_g17(out, map.gains_db[i]);
    out += '\n';
  }
  return out;
}

std::string correlation_csv(const CorrelationCurve& curve) {
  std::string out = "f_hz,correlation\n";
  for (const auto& [f, r] : curve) {
    append_g17(out, f);
    out += ',';
    if (r) {
      append_g17(out, *r);
    } else {
      out += "undefined";
    }
    out += '\n';
  }
  return out;
}

} // namespace morphoflow
