#pragma once

#include <string>

#include "morphoflow/flow.hpp"

namespace morphoflow {

/// Versioned line-based text format:
///
///   MORPHOFLOW-FIELD 1
///   source <label, rest of line>
///   target <label, rest of line>
///   sigma_v <value>
///   gamma <value>
///   n_steps <T>
///   n_controls <N>
///   controls          followed by (T+1)*N "x y z" lines, step-major
///   momenta           followed by T*N "x y z" lines, step-major
///   end
///
/// Values are written with 17 significant digits, so save/load round-trips
/// bit-exactly and saving again reproduces the file byte for byte.
void save_field(const MomentumField& field, const std::string& path);

/// Parses, checks invariants, and verifies self-consistency (re-integration
/// of the stored momenta must reproduce the stored trajectories within
/// 1e-10 relative). Throws IoError / ParseError / NumericError.
MomentumField load_field(const std::string& path);

} // namespace morphoflow
