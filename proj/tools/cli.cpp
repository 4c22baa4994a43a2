#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "thermoflow/circuit.hpp"
#include "thermoflow/compiler.hpp"
#include "thermoflow/dynamics.hpp"
#include "thermoflow/errors.hpp"
#include "thermoflow/netlist.hpp"
#include "thermoflow/physics.hpp"

namespace thermoflow::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct GlobalFlags {
    std::uint64_t seed{1};
    bool oracle{false};
    bool no_timing{false};
    std::string output;
};

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw InvalidConfig("cannot write '" + path + "'");
    file << text;
}

io::CompiledDocument load_compiled(const std::string& path) {
    const auto doc = io::read_file(path);
    if (io::is_compiled(doc)) return io::compiled_from_json(doc);
    return io::compile_problem(io::problem_from_json(doc), doc);
}

const io::CompiledPart& pick_part(const io::CompiledDocument& doc, std::size_t index) {
    if (index >= doc.parts.size()) {
        throw InvalidConfig("part " + std::to_string(index) + " does not exist (document has " +
                            std::to_string(doc.parts.size()) + ")");
    }
    return doc.parts[index];
}

void setup_logging(std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err);
    auto logger = std::make_shared<spdlog::logger>("thermoflow", sink);
    logger->set_pattern("[%l] %v");
    const char* env = std::getenv("THERMOFLOW_LOG");
    logger->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    spdlog::set_default_logger(logger);
}

std::vector<double> direct_oracle(const io::CompiledDocument& doc, const std::vector<compiler::DecodedResult>& groups) {
    if (doc.source.is_null()) throw InvalidConfig("--oracle needs the source problem embedded in the compiled file");
    const auto problem = io::problem_from_json(doc.source);
    std::vector<double> out;
    const auto matvec = [&out](const Matrix& m, std::span<const double> v) {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * v[j];
            out.push_back(acc);
        }
    };
    switch (problem.kind) {
        case io::ProblemKind::Scalar: {
            double acc = 0.0;
            for (std::size_t j = 0; j < problem.a.size(); ++j) acc += problem.a[j] * problem.vector[j];
            out.push_back(acc);
            break;
        }
        case io::ProblemKind::MatVec:
            matvec(problem.matrix, problem.vector);
            // Later groups multiply the occupancies re-evaluated at their own base frequency.
            for (std::size_t g = 0; g < problem.extra_groups.size(); ++g) {
                matvec(problem.extra_groups[g].matrix, groups.at(g + 1).input);
            }
            break;
        case io::ProblemKind::SignedMatVec:
            matvec(problem.matrix, problem.vector);
            break;
        case io::ProblemKind::RawConfig:
            break;
    }
    return out;
}

std::vector<std::size_t> parse_sweep(const std::string& spec) {
    const auto dots = spec.find("..");
    if (dots == std::string::npos) throw DomainError("--sweep-n expects LO..HI, got '" + spec + "'");
    std::size_t lo = 0;
    std::size_t hi = 0;
    try {
        lo = std::stoul(spec.substr(0, dots));
        hi = std::stoul(spec.substr(dots + 2));
    } catch (const std::exception&) {
        throw DomainError("--sweep-n expects LO..HI, got '" + spec + "'");
    }
    if (lo == 0 || hi < lo) throw DomainError("--sweep-n needs 1 <= LO <= HI");
    std::vector<std::size_t> counts;
    for (std::size_t n = lo; n <= hi; n *= 2) counts.push_back(n);
    return counts;
}

int cmd_compile(const std::string& input, const GlobalFlags& flags, std::ostream& out, std::ostream& err) {
    const auto source = io::read_file(input);
    const auto doc = io::compile_problem(io::problem_from_json(source), source);
    emit(io::compiled_to_json(doc).dump(2) + "\n", flags.output, out);

    auto& summary = flags.output.empty() ? err : out;
    for (std::size_t i = 0; i < doc.parts.size(); ++i) {
        const auto& program = doc.parts[i].program;
        double spread = 0.0;
        bool degenerate = false;
        for (const auto& g : program.groups) {
            spread = std::max(spread, g.spread);
            degenerate = degenerate || g.degenerate;
        }
        summary << fmt::format("part {} sign={:+d} K={} n+1={} epsilon={} group_spread={}{}\n", i, doc.parts[i].sign,
                               program.config.mode_count(), program.config.reservoir_count(),
                               doc.settings.compile.epsilon, spread, degenerate ? " degenerate_layout" : "");
        if (degenerate) spdlog::warn("part {}: group layout fell back to equal frequencies", i);
    }
    return kOk;
}

int cmd_run(const std::string& input, const GlobalFlags& flags, std::ostream& out) {
    const auto doc = load_compiled(input);
    const auto report = run_report(doc, {flags.oracle, !flags.no_timing});
    emit(report.dump(2) + "\n", flags.output, out);
    return kOk;
}

struct TransientFlags {
    double t_end{40.0};
    std::size_t samples{101};
    double rel_tol{-1.0};
    std::vector<double> initial;
    std::string sweep;
    std::size_t part{0};
};

int cmd_transient(const std::string& input, const TransientFlags& tf, const GlobalFlags& flags, std::ostream& out,
                  std::ostream& err) {
    const auto doc = load_compiled(input);
    const auto& config = pick_part(doc, tf.part).program.config;
    const double rel_tol = tf.rel_tol > 0.0 ? tf.rel_tol : doc.settings.rel_tol;
    auto& summary = flags.output.empty() ? err : out;

    if (!tf.sweep.empty()) {
        const auto counts = parse_sweep(tf.sweep);
        dynamics::SweepSettings settings;
        settings.frequency = config.modes.front().frequency;
        settings.rel_tol = rel_tol;
        settings.seed = flags.seed;
        const auto rows = dynamics::sweep_reservoir_count(counts, settings);
        std::string table = "reservoirs,settling_fixed_total_rate,settling_fixed_link_rate\n";
        for (const auto& row : rows) {
            table += fmt::format("{},{},{}\n", row.reservoirs, row.fixed_total_rate, row.fixed_link_rate);
        }
        emit(table, flags.output, out);
        summary << fmt::format("max_spread_fixed_total_rate={}\n", dynamics::sweep_spread(rows));
        return kOk;
    }

    std::vector<double> initial = tf.initial;
    if (initial.empty()) initial.assign(config.mode_count(), 0.0);
    const auto trace = dynamics::evolve(config, initial, tf.t_end, tf.samples, rel_tol);

    std::string csv = "time";
    for (std::size_t k = 0; k < config.mode_count(); ++k) csv += fmt::format(",n_{}", k);
    for (std::size_t j = 0; j < config.reservoir_count(); ++j) csv += fmt::format(",J_{}", j);
    csv += '\n';
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        csv += fmt::format("{}", trace.times[i]);
        for (double n : trace.occupancies[i]) csv += fmt::format(",{}", n);
        for (double j : trace.flows[i]) csv += fmt::format(",{}", j);
        csv += '\n';
    }
    emit(csv, flags.output, out);
    summary << fmt::format("settling_time={}\n", dynamics::settling_time(config, initial, rel_tol));
    return kOk;
}

int cmd_circuit(const std::string& input, const std::string& policy_text, const std::string& format,
                std::size_t part_index, const GlobalFlags& flags, std::ostream& out, std::ostream& err) {
    const auto doc = load_compiled(input);
    const auto& config = pick_part(doc, part_index).program.config;
    const auto policy = circuit::BarPolicy::parse(policy_text.empty() ? doc.settings.policy : policy_text);
    const auto flows = physics::stationary_flows(config);
    const auto crossbar = circuit::build_crossbar(config, policy);
    const auto text = netlist::export_netlist(crossbar, format);
    emit(text, flags.output, out);

    double max_flow = 0.0;
    for (std::size_t k = 0; k < config.mode_count(); ++k) {
        for (std::size_t j = 0; j < config.reservoir_count(); ++j) {
            max_flow = std::max(max_flow, std::abs(flows.per_channel(k, j)));
        }
    }
    const double analogy = circuit::analogy_residual(config, flows);
    auto& summary = flags.output.empty() ? err : out;
    summary << fmt::format("analogy_residual={}\n", max_flow > 0.0 ? analogy / max_flow : analogy);
    summary << fmt::format("crossbar_residual={}\n", circuit::crossbar_residual(crossbar));
    summary << fmt::format("kirchhoff_residual={}\n", circuit::kirchhoff_residual(circuit::forward_currents(crossbar)));
    summary << fmt::format("negative_resistance_branches={}\n",
                           circuit::count_state(crossbar, circuit::BranchState::NegativeResistance));
    summary << fmt::format("open_branches={}\n", circuit::count_state(crossbar, circuit::BranchState::Open));
    return kOk;
}

// Randomised self-checks of the stationary pipeline.
int cmd_validate_suite(std::size_t trials, const GlobalFlags& flags, std::ostream& out) {
    std::mt19937_64 rng(flags.seed);
    std::uniform_int_distribution<std::size_t> dim(1, 16);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t oracle_fail = 0;
    std::size_t law_fail = 0;
    std::size_t analogy_fail = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t m = dim(rng);
        const std::size_t n = dim(rng);
        Matrix p(m, n);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) p(i, j) = unit(rng) + 1e-3;
        }
        std::vector<double> b(n);
        for (double& v : b) v = 1e-6 + 10.0 * unit(rng);
        const auto program = compiler::encode_matvec(p, b);
        const auto flows = physics::stationary_flows(program.config);
        const auto decoded = compiler::decode_matvec(program, flows);
        for (std::size_t i = 0; i < m; ++i) {
            double direct = 0.0;
            for (std::size_t j = 0; j < n; ++j) direct += p(i, j) * b[j];
            if (std::abs(decoded.values[i] - direct) > decoded.error_bound[i]) ++oracle_fail;
        }
        double total = 0.0;
        double scale = 0.0;
        double entropy_scale = 0.0;
        for (std::size_t j = 0; j < flows.per_reservoir.size(); ++j) {
            total += flows.per_reservoir[j];
            scale += std::abs(flows.per_reservoir[j]);
            entropy_scale += std::abs(flows.per_reservoir[j] / program.config.reservoirs[j].temperature);
        }
        if (std::abs(total) > 1e-12 * scale || flows.entropy_rate < -1e-12 * entropy_scale) ++law_fail;
        double max_flow = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t j = 0; j <= n; ++j) max_flow = std::max(max_flow, std::abs(flows.per_channel(k, j)));
        }
        if (circuit::analogy_residual(program.config, flows) >= 1e-12 * max_flow) ++analogy_fail;
    }
    const auto line = [&out](const char* name, std::size_t failures, std::size_t total) {
        out << fmt::format("{} {}: {}/{} failures\n", failures == 0 ? "PASS" : "FAIL", name, failures, total);
    };
    line("oracle_within_bound", oracle_fail, trials);
    line("conservation_second_law", law_fail, trials);
    line("electrical_analogy", analogy_fail, trials);
    return oracle_fail + law_fail + analogy_fail == 0 ? kOk : kNumerical;
}

int cmd_validate_file(const std::string& input, std::ostream& out) {
    const auto doc = io::read_file(input);
    if (io::is_compiled(doc)) {
        const auto compiled = io::compiled_from_json(doc);
        for (const auto& part : compiled.parts) {
            if (!compiler::groups_within_tolerance(part.program)) {
                throw SolvabilityError("compiled groups violate the closeness tolerance");
            }
        }
        out << fmt::format("ok: compiled {} with {} part(s)\n", io::to_string(compiled.problem_kind),
                           compiled.parts.size());
    } else {
        const auto problem = io::problem_from_json(doc);
        (void)io::compile_problem(problem, doc);
        out << fmt::format("ok: {} problem\n", io::to_string(problem.kind));
    }
    return kOk;
}

}  // namespace

json run_report(const io::CompiledDocument& doc, const RunOptions& options) {
    const auto start = Clock::now();
    json parts = json::array();
    std::vector<double> values(doc.rows, 0.0);
    std::vector<double> bounds(doc.rows, 0.0);
    std::vector<double> raw_flows;
    std::vector<compiler::DecodedResult> first_groups;
    bool degenerate = false;

    double solve_ms = 0.0;
    for (std::size_t p = 0; p < doc.parts.size(); ++p) {
        const auto& part = doc.parts[p];
        const auto& program = part.program;
        const auto& config = program.config;
        const auto solve_start = Clock::now();
        const auto flows = physics::stationary_flows(config);
        solve_ms += elapsed_ms(solve_start);

        const std::vector<double> vacuum(config.mode_count(), 0.0);
        json drain = json::array();
        for (std::size_t k = 0; k < config.mode_count(); ++k) {
            drain.push_back(physics::drain_flow_approx(config, k).discrepancy);
        }
        parts.push_back({{"sign", part.sign},
                         {"config_hash", io::content_hash(io::config_to_json(config))},
                         {"config", io::config_to_json(config)},
                         {"flows", {{"per_channel", flows.per_channel.to_rows()}, {"per_reservoir", flows.per_reservoir}}},
                         {"entropy_rate", flows.entropy_rate},
                         {"settling_time", dynamics::settling_time(config, vacuum, doc.settings.rel_tol)},
                         {"drain_approximation_error", drain}});

        if (program.kind == compiler::ProgramKind::RawConfig) continue;
        const auto groups = compiler::parallel_group_products(program, flows);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            degenerate = degenerate || program.groups[g].degenerate;
            for (std::size_t i = 0; i < groups[g].values.size(); ++i) {
                const std::size_t row = part.rows.at(program.groups[g].modes[i]);
                values[row] += part.sign * groups[g].values[i];
                bounds[row] += groups[g].error_bound[i];
                raw_flows.push_back(groups[g].raw_flows[i]);
            }
        }
        if (p == 0) first_groups = groups;
    }

    json report = {{"schema_version", io::kSchemaVersion},
                   {"kind", "run_report"},
                   {"problem_kind", io::to_string(doc.problem_kind)},
                   {"input_hash", io::content_hash(io::compiled_to_json(doc))},
                   {"settings", io::settings_to_json(doc.settings)},
                   {"parts", parts}};
    if (doc.problem_kind != io::ProblemKind::RawConfig) {
        report["decoded"] = {{"values", values}, {"error_bound", bounds}, {"raw_flows", raw_flows},
                             {"degenerate_layout", degenerate}};
        if (options.oracle) {
            const auto direct = direct_oracle(doc, first_groups);
            std::vector<double> abs_error(direct.size());
            bool within = direct.size() == values.size();
            for (std::size_t i = 0; i < direct.size() && i < values.size(); ++i) {
                abs_error[i] = std::abs(values[i] - direct[i]);
                within = within && abs_error[i] <= bounds[i];
            }
            report["oracle"] = {{"values", direct}, {"abs_error", abs_error}, {"within_bound", within}};
        }
    }
    if (options.timing) report["timing"] = {{"solve_ms", solve_ms}, {"total_ms", elapsed_ms(start)}};
    return report;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    setup_logging(err);

    CLI::App app{"thermoflow: thermodynamic linear-algebra coprocessor simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalFlags flags;
    app.add_option("--seed", flags.seed, "Seed for randomised validation suites");
    app.add_flag("--oracle", flags.oracle, "Compare decoded values against a direct computation");
    app.add_flag("--no-timing", flags.no_timing, "Omit timing metadata (deterministic reports)");
    app.add_option("-o,--output", flags.output, "Write the main output to this path");

    std::string input;
    auto* compile = app.add_subcommand("compile", "Compile a problem file into a device program");
    compile->add_option("input", input, "Problem file (JSON)")->required();

    auto* run_cmd = app.add_subcommand("run", "Stationary pipeline: flows, decode, report");
    run_cmd->add_option("input", input, "Problem or compiled file")->required();

    TransientFlags tf;
    auto* transient = app.add_subcommand("transient", "Relaxation trace (CSV) and settling time");
    transient->add_option("input", input, "Problem or compiled file")->required();
    transient->add_option("--t-end", tf.t_end, "End of the trace")->capture_default_str();
    transient->add_option("--samples", tf.samples, "Number of samples")->capture_default_str();
    transient->add_option("--rel-tol", tf.rel_tol, "Settling tolerance (default: settings.rel_tol)");
    transient->add_option("--initial", tf.initial, "Initial occupancy per mode (default: vacuum)");
    transient->add_option("--sweep-n", tf.sweep, "Settling time against reservoir count, e.g. 2..64");
    transient->add_option("--part", tf.part, "Compiled part to simulate")->capture_default_str();

    std::string policy;
    std::string format = "spice";
    std::size_t circuit_part = 0;
    auto* circuit_cmd = app.add_subcommand("circuit", "Crossbar netlist and analogy residuals");
    circuit_cmd->add_option("input", input, "Problem or compiled file")->required();
    circuit_cmd->add_option("--policy", policy, "Bar potentials: max | fixed:<v> | grouped[:tol]");
    circuit_cmd->add_option("--format", format, "Netlist format")->capture_default_str();
    circuit_cmd->add_option("--part", circuit_part, "Compiled part to map")->capture_default_str();

    std::size_t trials = 200;
    auto* validate = app.add_subcommand("validate", "Validate a file, or run randomised self-checks");
    validate->add_option("input", input, "Problem or compiled file (omit to run the suites)");
    validate->add_option("--trials", trials, "Randomised trials")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    }

    try {
        if (compile->parsed()) return cmd_compile(input, flags, out, err);
        if (run_cmd->parsed()) return cmd_run(input, flags, out);
        if (transient->parsed()) return cmd_transient(input, tf, flags, out, err);
        if (circuit_cmd->parsed()) return cmd_circuit(input, policy, format, circuit_part, flags, out, err);
        if (validate->parsed()) {
            return input.empty() ? cmd_validate_suite(trials, flags, out) : cmd_validate_file(input, out);
        }
    } catch (const SolvabilityError& e) {
        err << "error: " << e.what() << "\n";
        return kSolvability;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << "\n";
        return kNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kNumerical;
    }
    return kValidation;
}

}  // namespace thermoflow::cli
