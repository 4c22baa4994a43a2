// Thermoflow command-line front end, callable in-process for tests

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermoflow/io.hpp"

namespace thermoflow::cli {

enum ExitCode : int {
    kOk = 0,
    kValidation = 2,
    kSolvability = 3,
    kNumerical = 4,
};

struct RunOptions {
    bool oracle{false};
    bool timing{true};
};

// Stationary pipeline over every part of a compiled document: flows, entropy, settling
// time, decode and (optionally) the direct oracle.
nlohmann::json run_report(const io::CompiledDocument& doc, const RunOptions& options);

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thermoflow::cli
