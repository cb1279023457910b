#pragma once

/// Minimal SHA-256 (FIPS 180-4) used for replay-fidelity checks.

#include <cstdint>
#include <string>
#include <string_view>

namespace diffstitch::sha256 {

/// Lowercase hex digest of the input bytes.
std::string hex_digest(std::string_view data);

}  // namespace diffstitch::sha256
