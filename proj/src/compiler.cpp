#include "thermoflow/compiler.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <string>

#include "thermoflow/errors.hpp"

namespace thermoflow::compiler {

namespace {

using physics::bose_occupancy;

void check_inputs(std::span<const double> b) {
    if (b.empty()) throw InvalidConfig("input vector is empty");
    for (std::size_t j = 0; j < b.size(); ++j) {
        if (!std::isfinite(b[j]) || b[j] < 0.0) {
            throw InvalidConfig("input vector entry " + std::to_string(j) + " must be finite and non-negative");
        }
    }
}

std::vector<double> row_sums(const Matrix& matrix, std::size_t expected_cols) {
    if (matrix.rows() == 0) throw InvalidConfig("matrix has no rows");
    if (matrix.cols() != expected_cols) {
        throw InvalidConfig("matrix has " + std::to_string(matrix.cols()) + " columns, input vector has " +
                            std::to_string(expected_cols) + " entries");
    }
    std::vector<double> sums(matrix.rows(), 0.0);
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            const double v = matrix(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                throw InvalidConfig("matrix entry (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") must be finite and non-negative");
            }
            sums[i] += v;
        }
        if (!(sums[i] > 0.0)) throw InvalidConfig("matrix row " + std::to_string(i) + " is all zero");
    }
    return sums;
}

// Group closeness at one trial frequency against the base frequency.
bool close_enough(double trial, double base, std::span<const physics::Reservoir> reservoirs, double tol) {
    for (std::size_t j = 1; j < reservoirs.size(); ++j) {
        const double t = reservoirs[j].temperature;
        const double ref = bose_occupancy(base, t);
        if (std::abs(bose_occupancy(trial, t) - ref) > tol * ref) return false;
    }
    return true;
}

struct Layout {
    std::vector<double> frequencies;
    double spread{0.0};
    bool degenerate{false};
};

// One-sided equispaced layout w_k = w_g (1 + delta_max k/(m-1)), delta_max found by bisection.
Layout lay_out_group(std::size_t count, double base, std::span<const physics::Reservoir> reservoirs,
                     double tol) {
    Layout layout;
    layout.frequencies.assign(count, base);
    if (count == 1) return layout;

    const auto top = [base](double delta) { return base * (1.0 + delta); };
    double lo = 0.0;
    double hi = 2.0 * tol;
    if (close_enough(top(hi), base, reservoirs, tol)) {
        lo = hi;
    } else {
        for (int iter = 0; iter < 200 && hi - lo > 1e-17; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (close_enough(top(mid), base, reservoirs, tol) ? lo : hi) = mid;
        }
    }

    const double step = lo / static_cast<double>(count - 1);
    if (!(lo > 0.0) || base * (1.0 + step) == base) {
        layout.degenerate = true;
        return layout;
    }
    for (std::size_t k = 0; k < count; ++k) {
        layout.frequencies[k] = base * (1.0 + step * static_cast<double>(k));
    }
    layout.spread = lo;
    return layout;
}

CompiledProgram build_program(std::span<const GroupSpec> specs, std::span<const double> b,
                              const CompileSettings& settings, ProgramKind kind) {
    settings.validate();
    check_inputs(b);
    if (specs.empty()) throw InvalidConfig("no groups to compile");
    const std::size_t n = b.size();

    std::vector<std::vector<double>> sums;
    std::size_t total_rows = 0;
    for (const auto& spec : specs) {
        if (!std::isfinite(spec.base_frequency) || !(spec.base_frequency > 0.0)) {
            throw InvalidConfig("group base frequency must be positive");
        }
        sums.push_back(row_sums(spec.matrix, n));
        total_rows += spec.matrix.rows();
    }

    CompiledProgram program;
    program.kind = kind;
    program.drain_ratio = settings.epsilon;
    program.occupancy_floor = settings.occupancy_floor;
    program.group_tol = settings.group_tol;
    program.target_rows = total_rows;
    program.target_cols = n;

    auto& config = program.config;
    config.reservoirs.resize(n + 1);
    config.reservoirs[0] = {physics::kTemperatureFloor, true};
    const double input_frequency = specs.front().base_frequency;
    for (std::size_t j = 0; j < n; ++j) {
        const double target = std::max(b[j], settings.occupancy_floor);
        config.reservoirs[j + 1] = {physics::inverse_temperature(input_frequency, target), false};
    }

    config.couplings = Matrix(total_rows, n + 1);
    std::size_t mode = 0;
    for (std::size_t g = 0; g < specs.size(); ++g) {
        const auto& spec = specs[g];
        const auto layout =
            lay_out_group(spec.matrix.rows(), spec.base_frequency, config.reservoirs, settings.group_tol);

        ModeGroup group;
        group.group_id = static_cast<int>(g);
        group.base_frequency = spec.base_frequency;
        group.spread = layout.spread;
        group.degenerate = layout.degenerate;
        for (std::size_t i = 0; i < spec.matrix.rows(); ++i, ++mode) {
            config.modes.push_back({layout.frequencies[i], group.group_id});
            group.modes.push_back(mode);
            program.row_scales.push_back(sums[g][i]);

            double linked = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double rate = settings.total_rate * (spec.matrix(i, j) / sums[g][i]);
                config.couplings(mode, j + 1) = rate;
                linked += rate;
            }
            config.couplings(mode, 0) = settings.epsilon * linked;
        }
        program.groups.push_back(std::move(group));
    }

    // Groups must be separated by at least 10x the larger intra-group spread.
    for (std::size_t g = 0; g < program.groups.size(); ++g) {
        for (std::size_t h = g + 1; h < program.groups.size(); ++h) {
            const auto& a = program.groups[g];
            const auto& c = program.groups[h];
            const double width = std::max(a.base_frequency * a.spread, c.base_frequency * c.spread);
            const double gap = std::abs(a.base_frequency - c.base_frequency);
            if (!(gap > 0.0) || gap < 10.0 * width) {
                throw InvalidConfig("groups " + std::to_string(g) + " and " + std::to_string(h) +
                                    " overlap in frequency");
            }
        }
    }

    config.validate();
    return program;
}

void check_flows(const CompiledProgram& program, const physics::FlowReport& flows) {
    if (flows.per_channel.rows() != program.config.mode_count() ||
        flows.per_channel.cols() != program.config.reservoir_count()) {
        throw InvalidConfig("flow report shape does not match the compiled program");
    }
}

// Normalised linked weights a^_q = gamma[k][q] / sum_{j>=1} gamma[k][j], q >= 1.
std::vector<double> linked_weights(const physics::DeviceConfig& config, std::size_t mode) {
    const auto row = config.couplings.row(mode);
    const double linked = std::accumulate(row.begin() + 1, row.end(), 0.0);
    std::vector<double> w(row.size() - 1, 0.0);
    if (linked > 0.0) {
        for (std::size_t q = 1; q < row.size(); ++q) w[q - 1] = row[q] / linked;
    }
    return w;
}

const ModeGroup& group_of(const CompiledProgram& program, std::size_t mode) {
    for (const auto& g : program.groups) {
        if (std::find(g.modes.begin(), g.modes.end(), mode) != g.modes.end()) return g;
    }
    throw InvalidConfig("mode " + std::to_string(mode) + " belongs to no group");
}

}  // namespace

void CompileSettings::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 0.01)) throw InvalidConfig("epsilon must lie in (0, 0.01]");
    if (!std::isfinite(total_rate) || !(total_rate > 0.0)) throw InvalidConfig("total_rate must be positive");
    if (!std::isfinite(base_frequency) || !(base_frequency > 0.0)) {
        throw InvalidConfig("base_frequency must be positive");
    }
    if (!(group_tol > 0.0 && group_tol <= 0.1)) throw InvalidConfig("group_tol must lie in (0, 0.1]");
    if (!std::isfinite(occupancy_floor) || !(occupancy_floor > 0.0)) {
        throw InvalidConfig("occupancy_floor must be positive");
    }
}

CompiledProgram encode_scalar_product(std::span<const double> a, std::span<const double> b,
                                      const CompileSettings& settings) {
    if (a.size() != b.size()) throw InvalidConfig("scalar product vectors differ in length");
    Matrix row(1, a.size());
    std::copy(a.begin(), a.end(), row.row(0).begin());
    const GroupSpec spec{row, settings.base_frequency};
    return build_program(std::span(&spec, 1), b, settings, ProgramKind::ScalarProduct);
}

DecodedResult decode_scalar_product(const CompiledProgram& program, const physics::FlowReport& flows) {
    if (program.config.mode_count() != 1) throw InvalidConfig("scalar product program must have one mode");
    return decode_group(program, flows, 0);
}

ErrorTerms encoding_error_terms(const CompiledProgram& program, std::size_t mode_index) {
    const auto& config = program.config;
    if (mode_index >= config.mode_count()) throw InvalidConfig("mode index out of range");
    const auto& group = group_of(program, mode_index);
    const double w = config.modes[mode_index].frequency;
    const auto weights = linked_weights(config, mode_index);

    double at_mode = 0.0;
    double at_base = 0.0;
    for (std::size_t q = 1; q < config.reservoir_count(); ++q) {
        const double t = config.reservoirs[q].temperature;
        at_mode += weights[q - 1] * bose_occupancy(w, t);
        at_base += weights[q - 1] * bose_occupancy(group.base_frequency, t);
    }
    const auto row = config.couplings.row(mode_index);
    const double linked = std::accumulate(row.begin() + 1, row.end(), 0.0);
    const double eps = row[0] / linked;
    const double scale = program.row_scales.at(mode_index);
    const double n_inputs = static_cast<double>(config.reservoir_count() - 1);

    ErrorTerms terms;
    terms.drain_weight = scale * eps / (1.0 + eps) * at_mode;
    terms.drain_occupancy = scale * bose_occupancy(w, config.reservoirs[0].temperature);
    terms.floor = scale * program.occupancy_floor;
    terms.group_spread = w == group.base_frequency ? 0.0 : scale * program.group_tol * at_base;
    terms.rounding = scale * 32.0 * (n_inputs + 4.0) * DBL_EPSILON * std::max(at_mode, at_base);
    return terms;
}

double estimate_encoding_error(const CompiledProgram& program, std::size_t mode_index) {
    return encoding_error_terms(program, mode_index).total();
}

CompiledProgram encode_matvec(const Matrix& matrix, std::span<const double> b, const CompileSettings& settings) {
    const GroupSpec spec{matrix, settings.base_frequency};
    return build_program(std::span(&spec, 1), b, settings, ProgramKind::MatVec);
}

DecodedResult decode_group(const CompiledProgram& program, const physics::FlowReport& flows,
                           std::size_t group_index) {
    check_flows(program, flows);
    if (group_index >= program.groups.size()) throw InvalidConfig("group index out of range");
    const auto& group = program.groups[group_index];
    const auto& config = program.config;

    DecodedResult out;
    for (std::size_t mode : group.modes) {
        const double drain_rate = config.couplings(mode, 0);
        if (!(drain_rate > 0.0)) {
            throw InvalidConfig("mode " + std::to_string(mode) + " has no drain coupling; decode undefined");
        }
        const double flow = flows.per_channel(mode, 0);
        const double value = program.row_scales.at(mode) * (-flow / (config.modes[mode].frequency * drain_rate));
        if (!std::isfinite(value)) throw NumericalError("decoded value is not finite");
        out.values.push_back(value);
        out.raw_flows.push_back(flow);
        out.error_bound.push_back(estimate_encoding_error(program, mode));
    }
    for (std::size_t j = 1; j < config.reservoir_count(); ++j) {
        out.input.push_back(bose_occupancy(group.base_frequency, config.reservoirs[j].temperature));
    }
    return out;
}

DecodedResult decode_matvec(const CompiledProgram& program, const physics::FlowReport& flows) {
    return decode_group(program, flows, 0);
}

CompiledProgram encode_parallel_groups(std::span<const GroupSpec> groups, std::span<const double> b,
                                       const CompileSettings& settings) {
    return build_program(groups, b, settings, ProgramKind::MatVec);
}

std::vector<DecodedResult> parallel_group_products(const CompiledProgram& program,
                                                   const physics::FlowReport& flows) {
    std::vector<DecodedResult> out;
    out.reserve(program.groups.size());
    for (std::size_t g = 0; g < program.groups.size(); ++g) out.push_back(decode_group(program, flows, g));
    return out;
}

SignedSplit split_signed(const Matrix& matrix) {
    SignedSplit split{Matrix(matrix.rows(), matrix.cols()), Matrix(matrix.rows(), matrix.cols())};
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            const double v = matrix(i, j);
            if (!std::isfinite(v)) throw InvalidConfig("matrix entries must be finite");
            if (v > 0.0) split.positive(i, j) = v;
            if (v < 0.0) split.negative(i, j) = -v;
        }
    }
    return split;
}

SignedProgram encode_signed_matvec(const Matrix& matrix, std::span<const double> b,
                                   const CompileSettings& settings) {
    const auto split = split_signed(matrix);
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        const auto p = split.positive.row(i);
        const auto q = split.negative.row(i);
        if (std::all_of(p.begin(), p.end(), [](double v) { return v == 0.0; }) &&
            std::all_of(q.begin(), q.end(), [](double v) { return v == 0.0; })) {
            throw InvalidConfig("matrix row " + std::to_string(i) + " is all zero");
        }
    }

    SignedProgram out;
    out.rows = matrix.rows();
    const auto add_part = [&](const Matrix& part, int sign) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < part.rows(); ++i) {
            const auto r = part.row(i);
            if (std::any_of(r.begin(), r.end(), [](double v) { return v > 0.0; })) rows.push_back(i);
        }
        if (rows.empty()) return;
        Matrix sub(rows.size(), part.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::copy(part.row(rows[i]).begin(), part.row(rows[i]).end(), sub.row(i).begin());
        }
        out.parts.push_back(encode_matvec(sub, b, settings));
        out.row_maps.push_back(std::move(rows));
        out.signs.push_back(sign);
    };
    add_part(split.positive, +1);
    add_part(split.negative, -1);
    return out;
}

DecodedResult decode_signed_matvec(const SignedProgram& program, std::span<const physics::FlowReport> flows) {
    if (flows.size() != program.parts.size()) throw InvalidConfig("one flow report per signed part required");
    DecodedResult out;
    out.values.assign(program.rows, 0.0);
    out.error_bound.assign(program.rows, 0.0);
    out.raw_flows.assign(2 * program.rows, 0.0);
    for (std::size_t p = 0; p < program.parts.size(); ++p) {
        const auto part = decode_matvec(program.parts[p], flows[p]);
        const std::size_t offset = program.signs[p] > 0 ? 0 : program.rows;
        for (std::size_t i = 0; i < part.values.size(); ++i) {
            const std::size_t row = program.row_maps[p][i];
            out.values[row] += program.signs[p] * part.values[i];
            out.error_bound[row] += part.error_bound[i];
            out.raw_flows[offset + row] = part.raw_flows[i];
        }
        if (out.input.empty()) out.input = part.input;
    }
    return out;
}

DecodedResult signed_matvec(const Matrix& matrix, std::span<const double> b, const CompileSettings& settings) {
    const auto program = encode_signed_matvec(matrix, b, settings);
    std::vector<physics::FlowReport> flows;
    for (const auto& part : program.parts) flows.push_back(physics::stationary_flows(part.config));
    return decode_signed_matvec(program, flows);
}

bool groups_within_tolerance(const CompiledProgram& program) {
    const auto& config = program.config;
    for (const auto& group : program.groups) {
        for (std::size_t mode : group.modes) {
            if (!close_enough(config.modes[mode].frequency, group.base_frequency, config.reservoirs,
                              program.group_tol)) {
                return false;
            }
        }
    }
    return true;
}

std::string to_string(ProgramKind kind) {
    switch (kind) {
        case ProgramKind::ScalarProduct: return "scalar";
        case ProgramKind::MatVec: return "matvec";
        case ProgramKind::RawConfig: return "raw_config";
    }
    return "unknown";
}

ProgramKind program_kind_from_string(const std::string& text) {
    if (text == "scalar") return ProgramKind::ScalarProduct;
    if (text == "matvec") return ProgramKind::MatVec;
    if (text == "raw_config") return ProgramKind::RawConfig;
    throw InvalidConfig("unknown program kind '" + text + "'");
}

}  // namespace thermoflow::compiler
