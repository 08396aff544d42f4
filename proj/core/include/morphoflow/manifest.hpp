#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace morphoflow {

/// FNV-1a 64-bit content hash, used for provenance manifests (integrity
/// bookkeeping, not security).
std::uint64_t fnv1a64_bytes(std::string_view bytes);

/// Hash of a file's contents. Throws IoError.
std::uint64_t fnv1a64_file(const std::string& path);

/// Fixed-width lowercase hex, e.g. "00c0ffee00c0ffee".
std::string hex_u64(std::uint64_t value);

} // namespace morphoflow
