#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "sbc/config.hpp"
#include "sbc/tuner.hpp"

namespace sbc {

/// Exit codes shared by every subcommand.
inline constexpr int exit_certified = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_not_certified = 2;

/// Replace sigma_l / lambda by a tuner pre-pass: "median", "lbfgs" or "grid".
TunerReport tune_config(Configuration& config, const std::string& method);

/// Result documents are written with this exact formatting everywhere.
std::string render_json(const nlohmann::json& doc);

/// `sbc <config> [options]` and `sbc serve [--port N]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sbc
