#pragma once

// Run configuration (one JSON document per run), deterministic structured
// output, and the CLI subcommand implementations. All floating output uses
// 17 significant digits so doubles round-trip losslessly.

#include <json.hpp>
#include <string>

#include "maslov/flow.hpp"
#include "maslov/scan.hpp"

namespace maslov {

using Json = nlohmann::ordered_json;

/// "%.17g" rendering of a double (fixed across platforms and runs).
std::string format_double(double v);

/// Parse a config document; validates the common sections.
Json load_config(const std::string& path);

/// Apply a `--set key.path=value` override (value parsed as JSON when
/// possible, as a string otherwise).
void apply_override(Json& config, const std::string& assignment);

/// Build the conformal system described by config["system"].
ConformalSystem system_from_config(const Json& config);

/// Tolerances with config["tolerances"] overrides applied.
Tolerances tolerances_from_config(const Json& config);

/// Initial state (length 2d) from config["initial"]["state"].
Vec state_from_config(const Json& config, const ConformalSystem& sys);

/// Initial frame: "zero-section-tangent", "horizontal", "vertical" or an
/// explicit 2d x d matrix.
LagrangianFrame frame_from_config(const Json& config, const ConformalSystem& sys);

/// Worker count: MASLOV_THREADS when set, logical cores otherwise.
int thread_budget();

// Subcommands; each throws ConfigError / Error on failure and writes its
// output file(s) on success.
void cmd_index(const Json& config);
void cmd_asymptotic(const Json& config);
void cmd_scan(const Json& config);
void cmd_twist(const Json& config);

}  // namespace maslov
