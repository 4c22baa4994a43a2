#include "thermoflow/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "thermoflow/errors.hpp"
#include "thermoflow/hash.hpp"

namespace thermoflow::io {

namespace {

const json& field(const json& doc, const std::string& key, const std::string& path) {
    if (!doc.is_object()) throw InvalidConfig("field '" + path + "' must be an object");
    const auto it = doc.find(key);
    if (it == doc.end()) throw InvalidConfig("missing field '" + path + "." + key + "'");
    return *it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw InvalidConfig("field '" + path + "' must be a number");
    return j.get<double>();
}

double number_or(const json& doc, const std::string& key, const std::string& path, double fallback) {
    const auto it = doc.find(key);
    return it == doc.end() ? fallback : number(*it, path + "." + key);
}

std::size_t count(const json& j, const std::string& path) {
    if (!j.is_number_unsigned()) throw InvalidConfig("field '" + path + "' must be a non-negative integer");
    return j.get<std::size_t>();
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) throw InvalidConfig("field '" + path + "' must be a string");
    return j.get<std::string>();
}

std::vector<double> vector_of(const json& j, const std::string& path) {
    if (!j.is_array()) throw InvalidConfig("field '" + path + "' must be an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::size_t> indices_of(const json& j, const std::string& path) {
    if (!j.is_array()) throw InvalidConfig("field '" + path + "' must be an array of indices");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(count(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

Matrix matrix_of(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw InvalidConfig("field '" + path + "' must be a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < j.size(); ++i) {
        rows.push_back(vector_of(j[i], path + "[" + std::to_string(i) + "]"));
        if (rows.back().size() != rows.front().size()) {
            throw InvalidConfig("field '" + path + "[" + std::to_string(i) + "]' has a different length than row 0");
        }
    }
    return Matrix::from_rows(rows);
}

void check_version(const json& doc) {
    const auto& v = field(doc, "schema_version", "$");
    if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
        throw InvalidConfig("field '$.schema_version' must be " + std::to_string(kSchemaVersion));
    }
}

ProblemKind problem_kind_from_string(const std::string& value, const std::string& path) {
    if (value == "scalar") return ProblemKind::Scalar;
    if (value == "matvec") return ProblemKind::MatVec;
    if (value == "signed_matvec") return ProblemKind::SignedMatVec;
    if (value == "raw_config") return ProblemKind::RawConfig;
    throw InvalidConfig("field '" + path + "' has unknown kind '" + value + "'");
}

}  // namespace

std::string to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::Scalar: return "scalar";
        case ProblemKind::MatVec: return "matvec";
        case ProblemKind::SignedMatVec: return "signed_matvec";
        case ProblemKind::RawConfig: return "raw_config";
    }
    return "unknown";
}

json config_to_json(const physics::DeviceConfig& config) {
    json modes = json::array();
    for (const auto& m : config.modes) modes.push_back({{"frequency", m.frequency}, {"group", m.group_id}});
    json reservoirs = json::array();
    for (const auto& r : config.reservoirs) reservoirs.push_back({{"temperature", r.temperature}, {"drain", r.is_drain}});
    return {{"modes", modes}, {"reservoirs", reservoirs}, {"couplings", config.couplings.to_rows()}};
}

physics::DeviceConfig config_from_json(const json& doc, const std::string& path) {
    physics::DeviceConfig config;
    const auto& modes = field(doc, "modes", path);
    if (!modes.is_array()) throw InvalidConfig("field '" + path + ".modes' must be an array");
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const std::string p = path + ".modes[" + std::to_string(k) + "]";
        physics::Mode mode;
        mode.frequency = number(field(modes[k], "frequency", p), p + ".frequency");
        if (const auto it = modes[k].find("group"); it != modes[k].end()) {
            if (!it->is_number_integer()) throw InvalidConfig("field '" + p + ".group' must be an integer");
            mode.group_id = it->get<int>();
        }
        config.modes.push_back(mode);
    }
    const auto& reservoirs = field(doc, "reservoirs", path);
    if (!reservoirs.is_array()) throw InvalidConfig("field '" + path + ".reservoirs' must be an array");
    for (std::size_t j = 0; j < reservoirs.size(); ++j) {
        const std::string p = path + ".reservoirs[" + std::to_string(j) + "]";
        physics::Reservoir r;
        r.temperature = number(field(reservoirs[j], "temperature", p), p + ".temperature");
        if (const auto it = reservoirs[j].find("drain"); it != reservoirs[j].end()) {
            if (!it->is_boolean()) throw InvalidConfig("field '" + p + ".drain' must be a boolean");
            r.is_drain = it->get<bool>();
        } else {
            r.is_drain = j == 0;
        }
        config.reservoirs.push_back(r);
    }
    config.couplings = matrix_of(field(doc, "couplings", path), path + ".couplings");
    config.validate();
    return config;
}

json settings_to_json(const RunSettings& s) {
    return {{"epsilon", s.compile.epsilon},
            {"total_rate", s.compile.total_rate},
            {"base_frequency", s.compile.base_frequency},
            {"group_tol", s.compile.group_tol},
            {"occupancy_floor", s.compile.occupancy_floor},
            {"rel_tol", s.rel_tol},
            {"policy", s.policy}};
}

RunSettings settings_from_json(const json& doc, const std::string& path) {
    RunSettings s;
    if (doc.is_null()) return s;
    if (!doc.is_object()) throw InvalidConfig("field '" + path + "' must be an object");
    static const char* known[] = {"epsilon", "total_rate", "base_frequency", "group_tol",
                                  "occupancy_floor", "rel_tol", "policy"};
    for (const auto& [key, value] : doc.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw InvalidConfig("unknown field '" + path + "." + key + "'");
        }
    }
    s.compile.epsilon = number_or(doc, "epsilon", path, s.compile.epsilon);
    s.compile.total_rate = number_or(doc, "total_rate", path, s.compile.total_rate);
    s.compile.base_frequency = number_or(doc, "base_frequency", path, s.compile.base_frequency);
    s.compile.group_tol = number_or(doc, "group_tol", path, s.compile.group_tol);
    s.compile.occupancy_floor = number_or(doc, "occupancy_floor", path, s.compile.occupancy_floor);
    s.rel_tol = number_or(doc, "rel_tol", path, s.rel_tol);
    if (const auto it = doc.find("policy"); it != doc.end()) s.policy = text(*it, path + ".policy");
    s.compile.validate();
    if (!(s.rel_tol > 0.0 && s.rel_tol < 1.0)) throw InvalidConfig("field '" + path + ".rel_tol' must lie in (0, 1)");
    return s;
}

json program_to_json(const compiler::CompiledProgram& program) {
    json groups = json::array();
    for (const auto& g : program.groups) {
        groups.push_back({{"group_id", g.group_id},
                          {"modes", g.modes},
                          {"base_frequency", g.base_frequency},
                          {"spread", g.spread},
                          {"degenerate", g.degenerate}});
    }
    return {{"kind", compiler::to_string(program.kind)},
            {"drain_ratio", program.drain_ratio},
            {"occupancy_floor", program.occupancy_floor},
            {"group_tol", program.group_tol},
            {"target_shape", {program.target_rows, program.target_cols}},
            {"row_scales", program.row_scales},
            {"groups", groups},
            {"config", config_to_json(program.config)}};
}

compiler::CompiledProgram program_from_json(const json& doc, const std::string& path) {
    compiler::CompiledProgram program;
    try {
        program.kind = compiler::program_kind_from_string(text(field(doc, "kind", path), path + ".kind"));
    } catch (const InvalidConfig& e) {
        throw InvalidConfig("field '" + path + ".kind': " + e.what());
    }
    program.drain_ratio = number(field(doc, "drain_ratio", path), path + ".drain_ratio");
    program.occupancy_floor = number(field(doc, "occupancy_floor", path), path + ".occupancy_floor");
    program.group_tol = number(field(doc, "group_tol", path), path + ".group_tol");
    const auto& shape = field(doc, "target_shape", path);
    if (!shape.is_array() || shape.size() != 2) throw InvalidConfig("field '" + path + ".target_shape' must be [m, n]");
    program.target_rows = count(shape[0], path + ".target_shape[0]");
    program.target_cols = count(shape[1], path + ".target_shape[1]");
    program.row_scales = vector_of(field(doc, "row_scales", path), path + ".row_scales");
    const auto& groups = field(doc, "groups", path);
    if (!groups.is_array()) throw InvalidConfig("field '" + path + ".groups' must be an array");
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const std::string p = path + ".groups[" + std::to_string(g) + "]";
        compiler::ModeGroup group;
        const auto& id = field(groups[g], "group_id", p);
        if (!id.is_number_integer()) throw InvalidConfig("field '" + p + ".group_id' must be an integer");
        group.group_id = id.get<int>();
        group.modes = indices_of(field(groups[g], "modes", p), p + ".modes");
        group.base_frequency = number(field(groups[g], "base_frequency", p), p + ".base_frequency");
        group.spread = number(field(groups[g], "spread", p), p + ".spread");
        const auto& degenerate = field(groups[g], "degenerate", p);
        if (!degenerate.is_boolean()) throw InvalidConfig("field '" + p + ".degenerate' must be a boolean");
        group.degenerate = degenerate.get<bool>();
        program.groups.push_back(std::move(group));
    }
    program.config = config_from_json(field(doc, "config", path), path + ".config");

    const std::size_t modes = program.config.mode_count();
    if (program.kind != compiler::ProgramKind::RawConfig && program.row_scales.size() != modes) {
        throw InvalidConfig("field '" + path + ".row_scales' must have one entry per mode");
    }
    for (const auto& g : program.groups) {
        for (std::size_t m : g.modes) {
            if (m >= modes) throw InvalidConfig("field '" + path + ".groups' references a missing mode");
        }
    }
    return program;
}

Problem problem_from_json(const json& doc) {
    check_version(doc);
    Problem p;
    p.kind = problem_kind_from_string(text(field(doc, "kind", "$"), "$.kind"), "$.kind");
    if (const auto it = doc.find("settings"); it != doc.end()) p.settings = settings_from_json(*it, "$.settings");

    switch (p.kind) {
        case ProblemKind::Scalar:
            p.a = vector_of(field(doc, "a", "$"), "$.a");
            p.vector = vector_of(field(doc, "b", "$"), "$.b");
            if (p.a.size() != p.vector.size()) throw InvalidConfig("fields '$.a' and '$.b' differ in length");
            break;
        case ProblemKind::MatVec:
        case ProblemKind::SignedMatVec:
            p.matrix = matrix_of(field(doc, "matrix", "$"), "$.matrix");
            p.vector = vector_of(field(doc, "vector", "$"), "$.vector");
            if (p.matrix.cols() != p.vector.size()) {
                throw InvalidConfig("field '$.matrix' has " + std::to_string(p.matrix.cols()) +
                                    " columns but '$.vector' has " + std::to_string(p.vector.size()) + " entries");
            }
            if (const auto it = doc.find("groups"); it != doc.end()) {
                if (p.kind != ProblemKind::MatVec) throw InvalidConfig("field '$.groups' is only valid for matvec");
                if (!it->is_array()) throw InvalidConfig("field '$.groups' must be an array");
                for (std::size_t g = 0; g < it->size(); ++g) {
                    const std::string path = "$.groups[" + std::to_string(g) + "]";
                    compiler::GroupSpec spec;
                    spec.matrix = matrix_of(field((*it)[g], "matrix", path), path + ".matrix");
                    spec.base_frequency = number(field((*it)[g], "base_frequency", path), path + ".base_frequency");
                    p.extra_groups.push_back(std::move(spec));
                }
            }
            break;
        case ProblemKind::RawConfig:
            p.config = config_from_json(field(doc, "config", "$"), "$.config");
            break;
    }
    return p;
}

CompiledDocument compile_problem(const Problem& problem, const json& source) {
    CompiledDocument out;
    out.problem_kind = problem.kind;
    out.settings = problem.settings;
    out.source = source;
    const auto& settings = problem.settings.compile;

    const auto all_rows = [](std::size_t m) {
        std::vector<std::size_t> rows(m);
        for (std::size_t i = 0; i < m; ++i) rows[i] = i;
        return rows;
    };

    switch (problem.kind) {
        case ProblemKind::Scalar: {
            auto program = compiler::encode_scalar_product(problem.a, problem.vector, settings);
            out.rows = 1;
            out.parts.push_back({1, {0}, std::move(program)});
            break;
        }
        case ProblemKind::MatVec: {
            std::vector<compiler::GroupSpec> specs{{problem.matrix, settings.base_frequency}};
            specs.insert(specs.end(), problem.extra_groups.begin(), problem.extra_groups.end());
            auto program = compiler::encode_parallel_groups(specs, problem.vector, settings);
            out.rows = program.target_rows;
            out.parts.push_back({1, all_rows(out.rows), std::move(program)});
            break;
        }
        case ProblemKind::SignedMatVec: {
            auto signed_program = compiler::encode_signed_matvec(problem.matrix, problem.vector, settings);
            out.rows = signed_program.rows;
            for (std::size_t i = 0; i < signed_program.parts.size(); ++i) {
                out.parts.push_back({signed_program.signs[i], signed_program.row_maps[i],
                                     std::move(signed_program.parts[i])});
            }
            break;
        }
        case ProblemKind::RawConfig: {
            compiler::CompiledProgram program;
            program.kind = compiler::ProgramKind::RawConfig;
            program.config = problem.config;
            program.drain_ratio = 0.0;
            program.occupancy_floor = settings.occupancy_floor;
            program.group_tol = settings.group_tol;
            program.target_cols = problem.config.reservoir_count() - 1;
            out.parts.push_back({1, {}, std::move(program)});
            break;
        }
    }
    return out;
}

json compiled_to_json(const CompiledDocument& doc) {
    json parts = json::array();
    for (const auto& part : doc.parts) {
        parts.push_back({{"sign", part.sign}, {"rows", part.rows}, {"program", program_to_json(part.program)}});
    }
    return {{"schema_version", kSchemaVersion},
            {"kind", "compiled"},
            {"problem_kind", to_string(doc.problem_kind)},
            {"rows", doc.rows},
            {"settings", settings_to_json(doc.settings)},
            {"parts", parts},
            {"source", doc.source}};
}

CompiledDocument compiled_from_json(const json& doc) {
    check_version(doc);
    if (text(field(doc, "kind", "$"), "$.kind") != "compiled") throw InvalidConfig("field '$.kind' must be 'compiled'");
    CompiledDocument out;
    out.problem_kind = problem_kind_from_string(text(field(doc, "problem_kind", "$"), "$.problem_kind"), "$.problem_kind");
    out.rows = count(field(doc, "rows", "$"), "$.rows");
    out.settings = settings_from_json(field(doc, "settings", "$"), "$.settings");
    const auto& parts = field(doc, "parts", "$");
    if (!parts.is_array() || parts.empty()) throw InvalidConfig("field '$.parts' must be a non-empty array");
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::string p = "$.parts[" + std::to_string(i) + "]";
        CompiledPart part;
        const auto& sign = field(parts[i], "sign", p);
        if (!sign.is_number_integer() || (sign.get<int>() != 1 && sign.get<int>() != -1)) {
            throw InvalidConfig("field '" + p + ".sign' must be 1 or -1");
        }
        part.sign = sign.get<int>();
        part.rows = indices_of(field(parts[i], "rows", p), p + ".rows");
        part.program = program_from_json(field(parts[i], "program", p), p + ".program");
        for (std::size_t r : part.rows) {
            if (r >= out.rows) throw InvalidConfig("field '" + p + ".rows' references a row beyond $.rows");
        }
        out.parts.push_back(std::move(part));
    }
    if (const auto it = doc.find("source"); it != doc.end()) out.source = *it;
    return out;
}

bool is_compiled(const json& doc) {
    const auto it = doc.find("kind");
    return it != doc.end() && it->is_string() && it->get<std::string>() == "compiled";
}

json parse_text(const std::string& content, const std::string& origin) {
    try {
        return json::parse(content);
    } catch (const json::parse_error& e) {
        // Byte offset -> line/column.
        std::size_t line = 1;
        std::size_t column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < content.size(); ++i) {
            if (content[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw InvalidConfig(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": invalid JSON");
    }
}

json read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidConfig("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_text(buffer.str(), path);
}

std::string content_hash(const json& doc) { return hex64(fnv1a(doc.dump())); }

}  // namespace thermoflow::io
