#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "morphoflow/geometry.hpp"

namespace morphoflow {

/// Direction on the sampling sphere. Azimuth rotates counterclockwise in the
/// horizontal plane from +x toward +y; elevation is measured from the plane.
struct Direction {
  double az_deg = 0.0;
  double el_deg = 0.0;
};

Vec3 direction_unit(const Direction& d);

/// Complex transfer-function values on a (direction x frequency) grid for
/// one ear, normalized by free-field pressure.
struct HrtfSet {
  std::vector<Direction> directions;
  std::vector<double> frequencies_hz; // strictly ascending
  std::vector<std::complex<double>> values; // row-major [direction][frequency]
  std::string ear = "left";
  double radius_m = 0.0;

  std::complex<double> at(std::size_t dir, std::size_t freq) const {
    return values[dir * frequencies_hz.size() + freq];
  }
};

/// Invariants: >= 4 directions, no duplicates (unit vectors within 1e-12),
/// strictly ascending frequencies, finite values. Throws InvalidArgument.
void check_hrtf(const HrtfSet& set);

/// Text grid format:
///
///   MORPHOFLOW-HRTF 1
///   ear <label>
///   radius_m <r>
///   directions <D>
///   frequencies <F>
///   freqs_hz <f1> ... <fF>
///   <az> <el> <re> <im> ... (F re/im pairs)   one row per direction
HrtfSet load_hrtf_set(const std::string& path);
void save_hrtf_set(const HrtfSet& set, const std::string& path);

/// Magnitude gain (dB) over all directions at one frequency.
struct SfrsMap {
  std::vector<Direction> directions;
  std::vector<double> gains_db;
  double frequency_hz = 0.0;
};

/// gain(d) = 20 log10 |H(d, f)|. At a grid frequency the stored value is
/// used directly; otherwise real and imaginary parts are interpolated
/// linearly between the bracketing grid frequencies. f must lie within the
/// set's frequency range.
SfrsMap sfrs(const HrtfSet& set, double frequency_hz);

enum class CorrelationWeighting {
  SolidAngle, // per-direction solid-angle (Voronoi-cell) weights
  Uniform,
};

/// Per-direction solid-angle weights: the area of each direction's Voronoi
/// cell on the unit sphere, estimated by nearest-site assignment over a
/// 65536-point spherical Fibonacci lattice. Deterministic; sums to 4*pi.
std::vector<double> solid_angle_weights(const std::vector<Direction>& directions);

/// Weighted Pearson correlation of the two dB-gain maps. Requires identical
/// direction lists. Returns nothing (undefined) when either map has zero
/// variance. Exactly 1.0 for bit-identical maps; symmetric; in [-1, 1];
/// invariant under per-map dB shifts and positive scalings.
std::optional<double> spatial_correlation(
    const SfrsMap& a, const SfrsMap& b,
    CorrelationWeighting weighting = CorrelationWeighting::SolidAngle);

using CorrelationCurve = std::vector<std::pair<double, std::optional<double>>>;

/// sfrs + spatial_correlation at each requested frequency.
CorrelationCurve correlation_curve(
    const HrtfSet& a, const HrtfSet& b, const std::vector<double>& frequencies_hz,
    CorrelationWeighting weighting = CorrelationWeighting::SolidAngle);

/// Analytic stand-in for an acoustic solver: pressure on a rigid sphere at
/// the surface point nearest `ear_direction`, for a unit plane wave incident
/// from each grid direction, by the classical spherical-harmonic scattering
/// series truncated at order ceil(ka)+12 (with a convergence guard), and
/// normalized by free-field pressure. Throws NumericError if the series has
/// not converged at the truncation order.
HrtfSet sphere_hrtf_oracle(double radius_m, const Vec3& ear_direction,
                           const std::vector<Direction>& directions,
                           const std::vector<double>& frequencies_hz,
                           double speed_of_sound = 343.0,
                           const std::string& ear_label = "left");

/// Regular azimuth/elevation grid; each pole collapses to a single entry.
std::vector<Direction> make_az_el_grid(double az_step_deg, double el_step_deg);

/// "az_deg,el_deg,gain_db" rows with a header line.
std::string sfrs_csv(const SfrsMap& map);

/// "f_hz,correlation" rows with a header line; undefined correlations are
/// written as the literal text `undefined`.
std::string correlation_csv(const CorrelationCurve& curve);

namespace detail {
/// Normalized surface pressure for one incidence. `cos_source_ear` is the
/// cosine of the angle between the direction to the source and the ear
/// point's direction (+1 = source above the ear, -1 = opposite side).
std::complex<double> rigid_sphere_pressure(double ka, double cos_source_ear,
                                           int truncation_order);
int sphere_series_order(double ka);
} // namespace detail

} // namespace morphoflow
