#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "morphoflow/errors.hpp"
#include "morphoflow/hrtf.hpp"
#include "support/test_utils.hpp"

using namespace morphoflow;
using mftest::TempDir;

namespace {

HrtfSet flat_set(std::complex<double> value = {1.0, 0.0}) {
  HrtfSet set;
  set.directions = {{0, 0}, {90, 0}, {180, 0}, {270, 0}, {0, 60}, {0, -60}};
  set.frequencies_hz = {1000.0, 2000.0, 4000.0};
  set.values.assign(set.directions.size() * set.frequencies_hz.size(), value);
  set.radius_m = 0.0875;
  return set;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string minimal_file_text() {
  return "MORPHOFLOW-HRTF 1\n"
         "ear left\n"
         "radius_m 0.0875\n"
         "directions 4\n"
         "frequencies 1\n"
         "freqs_hz 1000\n"
         "0 0 1 0\n"
         "90 0 0.5 0.5\n"
         "180 0 -1 0\n"
         "270 0 0 -2\n";
}

} // namespace

TEST_CASE("load_hrtf_set: minimal 4-direction single-frequency file") {
  TempDir dir;
  std::ofstream(dir.file("min.hrtf")) << minimal_file_text();
  const HrtfSet set = load_hrtf_set(dir.file("min.hrtf"));
  CHECK(set.directions.size() == 4);
  CHECK(set.frequencies_hz.size() == 1);
  CHECK(set.ear == "left");
  CHECK(set.at(1, 0) == std::complex<double>(0.5, 0.5));
}

TEST_CASE("load_hrtf_set: duplicate directions and non-ascending frequencies rejected") {
  TempDir dir;
  std::string dup = minimal_file_text();
  const auto pos = dup.find("90 0 0.5 0.5");
  dup.replace(pos, 12, "0 0 0.5 0.5 ");
  std::ofstream(dir.file("dup.hrtf")) << dup;
  CHECK_THROWS_AS(load_hrtf_set(dir.file("dup.hrtf")), ParseError);

  std::ofstream(dir.file("freq.hrtf"))
      << "MORPHOFLOW-HRTF 1\near left\nradius_m 0.0875\ndirections 4\nfrequencies 2\n"
         "freqs_hz 2000 1000\n0 0 1 0 1 0\n90 0 1 0 1 0\n180 0 1 0 1 0\n270 0 1 0 1 0\n";
  CHECK_THROWS_AS(load_hrtf_set(dir.file("freq.hrtf")), ParseError);

  CHECK_THROWS_AS(load_hrtf_set(dir.file("missing.hrtf")), IoError);
}

TEST_CASE("hrtf save/load round trip is byte-stable") {
  const HrtfSet set = sphere_hrtf_oracle(0.0875, Vec3(0, 1, 0), flat_set().directions,
                                         {500.0, 1000.0, 5000.0});
  TempDir dir;
  save_hrtf_set(set, dir.file("a.hrtf"));
  const HrtfSet loaded = load_hrtf_set(dir.file("a.hrtf"));
  REQUIRE(loaded.values.size() == set.values.size());
  for (std::size_t i = 0; i < set.values.size(); ++i) CHECK(loaded.values[i] == set.values[i]);
  save_hrtf_set(loaded, dir.file("b.hrtf"));
  CHECK(read_text(dir.file("a.hrtf")) == read_text(dir.file("b.hrtf")));
}

TEST_CASE("sfrs: unit values give 0 dB, tens give 20 dB, interpolation is linear in re/im") {
  SUBCASE("all ones -> 0 dB everywhere") {
    const SfrsMap map = sfrs(flat_set(), 2000.0);
    for (double g : map.gains_db) CHECK(g == 0.0);
  }

  SUBCASE("value 10 at an exact grid frequency -> 20 dB") {
    const SfrsMap map = sfrs(flat_set({10.0, 0.0}), 4000.0);
    for (double g : map.gains_db) CHECK(g == doctest::Approx(20.0).epsilon(1e-14));
  }

  SUBCASE("midpoint between 1 and 3 interpolates to 2 -> ~6.0206 dB") {
    HrtfSet set = flat_set({1.0, 0.0});
    // Set the 4 kHz column to 3+0i; query midway between 2 kHz and 4 kHz.
    for (std::size_t d = 0; d < set.directions.size(); ++d) {
      set.values[d * 3 + 2] = {3.0, 0.0};
    }
    const SfrsMap map = sfrs(set, 3000.0);
    for (double g : map.gains_db) {
      CHECK(g == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-13));
    }
  }

  SUBCASE("out-of-range frequency is an error") {
    CHECK_THROWS_AS(sfrs(flat_set(), 999.0), InvalidArgument);
    CHECK_THROWS_AS(sfrs(flat_set(), 4001.0), InvalidArgument);
  }
}

TEST_CASE("spatial_correlation: exactness, shift invariance, anti-correlation") {
  const HrtfSet oracle = sphere_hrtf_oracle(0.0875, Vec3(0, 1, 0),
                                            make_az_el_grid(45.0, 30.0), {2000.0});
  const SfrsMap a = sfrs(oracle, 2000.0);

  SUBCASE("self-correlation is exactly 1.0") {
    const SfrsMap b = sfrs(oracle, 2000.0);
    const auto r = spatial_correlation(a, b);
    REQUIRE(r.has_value());
    CHECK(*r == 1.0);
  }

  SUBCASE("constant dB offset leaves correlation at 1.0") {
    SfrsMap b = a;
    for (double& g : b.gains_db) g += 7.5;
    const auto r = spatial_correlation(a, b);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("mirrored map is exactly anti-correlated") {
    double mean = 0.0;
    for (double g : a.gains_db) mean += g;
    mean /= static_cast<double>(a.gains_db.size());
    SfrsMap b = a;
    for (double& g : b.gains_db) g = 2.0 * mean - g;
    const auto r = spatial_correlation(a, b);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(-1.0).epsilon(1e-12));
  }

  SUBCASE("symmetry and bounds") {
    SfrsMap b = a;
    for (std::size_t i = 0; i < b.gains_db.size(); ++i) {
      b.gains_db[i] = a.gains_db[(i + 3) % a.gains_db.size()];
    }
    const auto rab = spatial_correlation(a, b);
    const auto rba = spatial_correlation(b, a);
    REQUIRE(rab.has_value());
    CHECK(*rab == *rba);
    CHECK(*rab >= -1.0);
    CHECK(*rab <= 1.0);
  }

  SUBCASE("zero variance yields the undefined signal, not a number") {
    const SfrsMap flat = sfrs(flat_set(), 2000.0);
    const SfrsMap flat2 = flat;
    CHECK_FALSE(spatial_correlation(flat, flat2).has_value());
  }

  SUBCASE("mismatched direction lists are rejected") {
    SfrsMap b = a;
    b.directions[2].az_deg += 1.0;
    CHECK_THROWS_AS(spatial_correlation(a, b), InvalidArgument);
  }

  SUBCASE("uniform weighting flag gives a correlation too") {
    SfrsMap b = a;
    for (double& g : b.gains_db) g = 0.5 * g + 2.0;
    const auto r = spatial_correlation(a, b, CorrelationWeighting::Uniform);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(1.0).epsilon(1e-12)); // positive affine map
  }
}

TEST_CASE("correlation_curve: identical sets are flat 1.0; single frequency works") {
  const std::vector<double> freqs = {500.0, 1000.0, 2000.0, 4000.0};
  const HrtfSet set =
      sphere_hrtf_oracle(0.0875, Vec3(0, 1, 0), make_az_el_grid(60.0, 30.0), freqs);

  const CorrelationCurve curve = correlation_curve(set, set, freqs);
  REQUIRE(curve.size() == freqs.size());
  for (const auto& [f, r] : curve) {
    REQUIRE(r.has_value());
    CHECK(*r == 1.0);
  }

  const CorrelationCurve single = correlation_curve(set, set, {1000.0});
  REQUIRE(single.size() == 1);
  CHECK(single[0].first == 1000.0);
}

TEST_CASE("solid_angle_weights: sums to 4*pi; uniformish grid is near-uniform") {
  const auto grid = make_az_el_grid(45.0, 30.0);
  const auto weights = solid_angle_weights(grid);
  double sum = 0.0;
  for (double w : weights) sum += w;
  CHECK(sum == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-12));

  // The equatorial ring cells of a regular az/el grid all have equal area.
  std::vector<double> equator;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].el_deg == 0.0) equator.push_back(weights[i]);
  }
  REQUIRE(equator.size() == 8);
  for (double w : equator) CHECK(w == doctest::Approx(equator.front()).epsilon(0.02));
}

TEST_CASE("sphere oracle: low-frequency limit approaches 0 dB in every direction") {
  const auto grid = make_az_el_grid(45.0, 45.0);
  const HrtfSet set = sphere_hrtf_oracle(0.0875, Vec3(0, 1, 0), grid, {20.0});
  const SfrsMap map = sfrs(set, 20.0);
  for (double g : map.gains_db) CHECK(std::abs(g) < 0.1);
}

TEST_CASE("sphere oracle: gain depends only on the source/ear angle (axial symmetry)") {
  const Vec3 ear(0, 1, 0);
  // Two directions with the same angle to the ear axis reached differently.
  const std::vector<Direction> dirs = {{0, 0},  {180, 0},  {90, 45}, {90, -45},
                                       {45, 0}, {135, 0}};
  const HrtfSet set = sphere_hrtf_oracle(0.0875, ear, dirs, {3000.0});
  const SfrsMap map = sfrs(set, 3000.0);
  // az 0 and az 180 are both orthogonal pairs with the +y ear: equal gains.
  CHECK(std::abs(map.gains_db[0] - map.gains_db[1]) < 1e-9);
  CHECK(std::abs(map.gains_db[2] - map.gains_db[3]) < 1e-9);
  // az 45 and az 135 are mirror images about the ear axis: equal gains.
  CHECK(std::abs(map.gains_db[4] - map.gains_db[5]) < 1e-9);
}

TEST_CASE("sphere oracle: ipsilateral beats contralateral at ka = 1") {
  const double radius = 0.0875;
  const double c = 343.0;
  const double f = c / (2.0 * std::numbers::pi * radius); // ka = 1
  const std::vector<Direction> dirs = {{90, 0}, {270, 0}, {0, 0}, {180, 0}};
  const HrtfSet set = sphere_hrtf_oracle(radius, Vec3(0, 1, 0), dirs, {f});
  const SfrsMap map = sfrs(set, f);
  CHECK(map.gains_db[0] > map.gains_db[1]); // source at the ear vs opposite
}

TEST_CASE("sphere oracle: reciprocity of the axis angle") {
  const std::vector<Direction> probe = {{30, 10}, {200, -40}, {100, 60}, {320, 0}};
  const Vec3 ear = direction_unit({75, 20});
  const HrtfSet forward = sphere_hrtf_oracle(0.09, ear, probe, {4000.0});
  for (std::size_t i = 0; i < probe.size(); ++i) {
    // Swap roles: listen from the old source direction toward the old ear.
    const HrtfSet swapped =
        sphere_hrtf_oracle(0.09, direction_unit(probe[i]),
                           {{75, 20}, {0, -90}, {0, 90}, {180, 0}}, {4000.0});
    CHECK(std::abs(std::abs(forward.at(i, 0)) - std::abs(swapped.at(0, 0))) < 1e-12);
  }
}

TEST_CASE("sphere oracle: series guard trips when the truncation cannot converge") {
  // ka ~ 160 here; ceil(ka)+12 terms are far from converged at that size.
  CHECK_THROWS_AS(sphere_hrtf_oracle(0.0875, Vec3(0, 1, 0), make_az_el_grid(90.0, 45.0),
                                     {100000.0}),
                  NumericError);
}

TEST_CASE("sphere oracle: input validation") {
  const auto grid = make_az_el_grid(90.0, 45.0);
  CHECK_THROWS_AS(sphere_hrtf_oracle(-1.0, Vec3(0, 1, 0), grid, {100.0}), InvalidArgument);
  CHECK_THROWS_AS(sphere_hrtf_oracle(0.1, Vec3(0, 0, 0), grid, {100.0}), InvalidArgument);
  CHECK_THROWS_AS(sphere_hrtf_oracle(0.1, Vec3(0, 1, 0), grid, {-5.0}), InvalidArgument);
}

TEST_CASE("correlation between two sphere radii decays from ~1 with frequency") {
  const auto grid = make_az_el_grid(30.0, 30.0);
  const std::vector<double> freqs = {100.0, 500.0, 1000.0, 2000.0, 4000.0,
                                     8000.0, 12000.0, 16000.0, 20000.0};
  const HrtfSet small = sphere_hrtf_oracle(0.09, Vec3(0, 1, 0), grid, freqs);
  const HrtfSet big = sphere_hrtf_oracle(0.10, Vec3(0, 1, 0), grid, freqs);
  const CorrelationCurve curve = correlation_curve(small, big, freqs);

  REQUIRE(curve.front().second.has_value());
  CHECK(*curve.front().second > 0.999);
  REQUIRE(curve.back().second.has_value());
  CHECK(*curve.back().second < *curve.front().second);
}

TEST_CASE("csv emitters") {
  SfrsMap map;
  map.directions = {{0, 0}, {90, 0}, {180, 0}, {270, 0}};
  map.gains_db = {0.0, -3.5, 6.25, 1.0};
  map.frequency_hz = 1000.0;
  const std::string csv = sfrs_csv(map);
  CHECK(csv.rfind("az_deg,el_deg,gain_db\n", 0) == 0);
  CHECK(csv.find("90,0,-3.5\n") != std::string::npos);

  CorrelationCurve curve;
  curve.emplace_back(100.0, 0.5);
  curve.emplace_back(200.0, std::nullopt);
  const std::string ccsv = correlation_csv(curve);
  CHECK(ccsv.find("100,0.5\n") != std::string::npos);
  CHECK(ccsv.find("200,undefined\n") != std::string::npos);
}

TEST_CASE("make_az_el_grid: poles collapse to single entries") {
  const auto grid = make_az_el_grid(90.0, 45.0);
  std::size_t poles = 0;
  for (const Direction& d : grid) {
    if (std::abs(d.el_deg) == 90.0) ++poles;
  }
  CHECK(poles == 2);
  // 4 azimuths x 3 interior elevations + 2 poles
  CHECK(grid.size() == 14);
  CHECK_NOTHROW(check_hrtf(sphere_hrtf_oracle(0.1, Vec3(1, 0, 0), grid, {1000.0})));
}
