#pragma once

#include <string>

#include "swqt/ensemble.hpp"

namespace swqt {

inline constexpr int kSchemaVersion = 1;

/// Fully resolved run configuration (defaults applied).
struct RunConfig {
    EnsembleConfig ensemble;
    std::string units = "gamma";  // energies/rates quoted in units of gamma or J
    std::string output_dir = ".";
    int record_points = 201;  // jump-scheme record grid size

    /// Canonical JSON echo of the resolved configuration.
    std::string canonical() const;
    /// FNV-1a hash of the canonical form, hex-encoded.
    std::string hash() const;
};

/// Parse and validate a JSON configuration. Unknown keys, type mismatches,
/// missing required keys, and out-of-range values throw std::runtime_error
/// with a path-qualified message. dt is required for the diffusive scheme
/// only; the jump scheme is adaptive.
RunConfig parse_config(const std::string& text);

/// Emit a JSON text that parses back to an identical configuration.
std::string emit_config(const RunConfig& config);

}  // namespace swqt
