// JSON documents: problem files, compiled programs and their pieces
//
// Schemas are described in docs/schemas.md. Every document carries schema_version.
// Parse failures throw InvalidConfig naming the offending field path.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermoflow/compiler.hpp"
#include "thermoflow/physics.hpp"

namespace thermoflow::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum class ProblemKind { Scalar, MatVec, SignedMatVec, RawConfig };

std::string to_string(ProblemKind kind);

struct RunSettings {
    compiler::CompileSettings compile;
    double rel_tol{1e-6};
    std::string policy{"max"};
};

struct Problem {
    ProblemKind kind{ProblemKind::MatVec};
    std::vector<double> a;        // scalar
    std::vector<double> vector;   // b for scalar, matvec and signed_matvec
    Matrix matrix;                // matvec / signed_matvec
    std::vector<compiler::GroupSpec> extra_groups;  // matvec only, optional
    physics::DeviceConfig config;  // raw_config
    RunSettings settings;
};

// One compiled device. Signed problems compile to up to two parts.
struct CompiledPart {
    int sign{1};
    std::vector<std::size_t> rows;  // target row decoded by each mode of group 0 and later groups
    compiler::CompiledProgram program;
};

struct CompiledDocument {
    ProblemKind problem_kind{ProblemKind::MatVec};
    std::size_t rows{0};
    RunSettings settings;
    std::vector<CompiledPart> parts;
    json source;  // the problem document it was compiled from
};

json config_to_json(const physics::DeviceConfig& config);
physics::DeviceConfig config_from_json(const json& doc, const std::string& path = "config");

json settings_to_json(const RunSettings& settings);
RunSettings settings_from_json(const json& doc, const std::string& path = "settings");

json program_to_json(const compiler::CompiledProgram& program);
compiler::CompiledProgram program_from_json(const json& doc, const std::string& path = "program");

Problem problem_from_json(const json& doc);
CompiledDocument compile_problem(const Problem& problem, const json& source);

json compiled_to_json(const CompiledDocument& doc);
CompiledDocument compiled_from_json(const json& doc);

// True when the document is a compiled program rather than a problem file.
bool is_compiled(const json& doc);

// Parses text, reporting line/column of syntax errors as InvalidConfig.
json parse_text(const std::string& text, const std::string& origin);
json read_file(const std::string& path);

std::string content_hash(const json& doc);

}  // namespace thermoflow::io
