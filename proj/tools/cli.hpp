#pragma once

#include <json.hpp>

#include <ostream>
#include <string>

namespace curvatur {

// Exit codes of the command-line front end.
enum ExitCode { exit_ok = 0, exit_failure = 1, exit_usage = 2, exit_verification = 3 };

// Runs one subcommand. The result document goes to `out` (or --output), log
// lines and the error document to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// JSON text with every number in 17 significant digits.
std::string json_text(const nlohmann::ordered_json& j, int indent = 2);

} // namespace curvatur
