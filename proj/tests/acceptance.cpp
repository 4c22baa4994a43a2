// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <unistd.h>

#include "support.hpp"
#include "thermoflow/circuit.hpp"
#include "thermoflow/compiler.hpp"
#include "thermoflow/dynamics.hpp"
#include "thermoflow/io.hpp"
#include "thermoflow/physics.hpp"

using namespace thermoflow;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass{true};
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double max_abs(const Matrix& m) {
    double worst = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (double v : m.row(i)) worst = std::max(worst, std::abs(v));
    }
    return worst;
}

std::vector<physics::DeviceConfig> random_configs(std::size_t count) {
    std::mt19937_64 rng(20240601);
    std::vector<physics::DeviceConfig> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(testing::random_config(rng, 8, 32));
    return out;
}

Outcome oracle_equivalence() {
    const auto start = Clock::now();
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> dim(1, 16);
    std::uniform_real_distribution<double> input(1e-6, 10.0);
    std::size_t within = 0;
    std::vector<double> relative;
    const std::size_t trials = 500;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t m = dim(rng);
        const std::size_t n = dim(rng);
        const auto p = testing::random_stochastic(rng, m, n);
        std::vector<double> b(n);
        for (double& v : b) v = input(rng);
        compiler::CompileSettings settings;
        settings.epsilon = 1e-4;
        settings.group_tol = 1e-3;
        const auto program = compiler::encode_matvec(p, b, settings);
        const auto decoded = compiler::decode_matvec(program, physics::stationary_flows(program.config));
        const auto expected = testing::direct_matvec(p, b);
        bool ok = true;
        double err = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double e = std::abs(decoded.values[i] - expected[i]);
            ok = ok && e <= decoded.error_bound[i];
            err = std::max(err, e);
            scale = std::max(scale, std::abs(expected[i]));
        }
        within += ok ? 1 : 0;
        relative.push_back(err / scale);
    }
    std::nth_element(relative.begin(), relative.begin() + relative.size() / 2, relative.end());
    const double median = relative[relative.size() / 2];
    const double elapsed = seconds_since(start);
    return {within == trials && median <= 1e-3 && elapsed < 10.0,
            fmt::format("{}/{} within bound, median relative error {:.3e}, {:.2f} s", within, trials, median, elapsed)};
}

Outcome form_equivalence(const std::vector<physics::DeviceConfig>& configs) {
    const auto start = Clock::now();
    double worst = 0.0;
    for (const auto& config : configs) {
        const auto direct = physics::stationary_flows(config);
        const auto pairwise = physics::stationary_flows_pairwise(config);
        for (std::size_t k = 0; k < config.mode_count(); ++k) {
            const auto occ = physics::reservoir_occupancies(config, k);
            const auto p = physics::coupling_weights(config, k);
            for (std::size_t j = 0; j < config.reservoir_count(); ++j) {
                double terms = 0.0;
                for (std::size_t q = 0; q < occ.size(); ++q) terms += p[q] * std::abs(occ[j] - occ[q]);
                terms *= config.modes[k].frequency * config.couplings(k, j);
                const double scale = std::max(std::abs(direct.per_channel(k, j)), terms);
                if (scale == 0.0) continue;
                worst = std::max(worst, std::abs(direct.per_channel(k, j) - pairwise.per_channel(k, j)) / scale);
            }
        }
    }
    const double elapsed = seconds_since(start);
    return {worst < 1e-12 && elapsed < 5.0,
            fmt::format("{} configs, max relative deviation {:.3e}, {:.2f} s", configs.size(), worst, elapsed)};
}

Outcome conservation_second_law(const std::vector<physics::DeviceConfig>& configs) {
    double worst_sum = 0.0;
    double worst_entropy = 0.0;
    for (const auto& config : configs) {
        const auto flows = physics::stationary_flows(config);
        double total = 0.0;
        double scale = 0.0;
        double entropy_scale = 0.0;
        for (std::size_t j = 0; j < config.reservoir_count(); ++j) {
            total += flows.per_reservoir[j];
            scale += std::abs(flows.per_reservoir[j]);
            entropy_scale += std::abs(flows.per_reservoir[j] / config.reservoirs[j].temperature);
        }
        if (scale > 0.0) worst_sum = std::max(worst_sum, std::abs(total) / scale);
        if (entropy_scale > 0.0) worst_entropy = std::min(worst_entropy, flows.entropy_rate / entropy_scale);
    }
    return {worst_sum < 1e-12 && worst_entropy >= -1e-12,
            fmt::format("max |sum J|/sum|J| {:.3e}, min scaled entropy rate {:.3e}", worst_sum, worst_entropy)};
}

Outcome electrical_analogy(const std::vector<physics::DeviceConfig>& configs) {
    double worst_analogy = 0.0;
    double worst_crossbar = 0.0;
    double worst_policy = 0.0;
    double worst_kirchhoff = 0.0;
    for (const auto& config : configs) {
        const auto flows = physics::stationary_flows(config);
        const double max_flow = max_abs(flows.per_channel);
        if (max_flow > 0.0) {
            worst_analogy = std::max(worst_analogy, circuit::analogy_residual(config, flows) / max_flow);
        }
        const auto xb = circuit::build_crossbar(config);
        worst_crossbar = std::max(worst_crossbar, circuit::crossbar_residual(xb));

        const double top = *std::max_element(xb.bar_potentials.begin(), xb.bar_potentials.end());
        const auto raised = circuit::build_crossbar(config, circuit::BarPolicy::fixed_value(2.0 * top + 1.0));
        worst_crossbar = std::max(worst_crossbar, circuit::crossbar_residual(raised));
        const auto a = circuit::forward_currents(xb);
        const auto b = circuit::forward_currents(raised);
        worst_kirchhoff = std::max({worst_kirchhoff, circuit::kirchhoff_residual(a), circuit::kirchhoff_residual(b)});
        const double scale = max_abs(xb.currents);
        for (std::size_t k = 0; k < a.rows(); ++k) {
            for (std::size_t j = 0; j < a.cols(); ++j) {
                const double d = std::abs(a(k, j) - b(k, j));
                if (scale > 0.0) worst_policy = std::max(worst_policy, d / scale);
            }
        }
    }
    return {worst_analogy < 1e-12 && worst_crossbar < 1e-12 && worst_policy < 1e-12 && worst_kirchhoff < 1e-12,
            fmt::format("analogy {:.3e}, crossbar residual {:.3e}, policy current spread {:.3e}, kirchhoff {:.3e}",
                        worst_analogy, worst_crossbar, worst_policy, worst_kirchhoff)};
}

Outcome settling_independence() {
    const std::vector<std::size_t> counts{2, 4, 8, 16, 32, 64};
    const auto rows = dynamics::sweep_reservoir_count(counts, {});
    const double spread = dynamics::sweep_spread(rows);

    std::mt19937_64 rng(10);
    const auto config = testing::random_config(rng, 6, 24);
    const auto rates = dynamics::relaxation_rates(config);
    const double t_end = 40.0 / *std::min_element(rates.begin(), rates.end());
    const auto stationary = physics::stationary_flows(config);
    std::uniform_real_distribution<double> start(0.0, 50.0);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> initial(config.mode_count());
        for (double& v : initial) v = start(rng);
        const auto flows = dynamics::flows_at(config, dynamics::occupancies_at(config, initial, t_end));
        for (std::size_t j = 0; j < config.reservoir_count(); ++j) {
            double scale = 0.0;
            for (std::size_t k = 0; k < config.mode_count(); ++k) {
                scale += std::abs(stationary.per_channel(k, j));
            }
            const double d = std::abs(flows[j] - stationary.per_reservoir[j]);
            if (scale > 0.0) worst = std::max(worst, d / scale);
        }
    }
    return {spread < 0.01 && worst < 1e-10,
            fmt::format("settling spread {:.3e} over n=2..64, initial-state deviation {:.3e}", spread, worst)};
}

Outcome qfactor_timing() {
    const auto [lo, hi] = dynamics::qfactor_estimate(1e-3, 1e2, 1e4);
    const bool ok = std::abs(std::log10(lo / 1e-10)) <= 1.0 && std::abs(std::log10(hi / 1e-8)) <= 1.0;
    return {ok, fmt::format("tau in [{:.3e}, {:.3e}] s", lo, hi)};
}

Outcome signed_matvec() {
    const std::vector<double> b1{3.0, 1.0};
    const auto r1 = compiler::signed_matvec(Matrix{{1.0, -1.0}}, b1);
    const std::vector<double> b2{2.0, 2.0};
    const auto r2 = compiler::signed_matvec(Matrix{{0.5, -0.5}}, b2);
    const bool ok = std::abs(r1.values[0] - 2.0) <= r1.error_bound[0] && std::abs(r2.values[0]) <= r2.error_bound[0];
    return {ok, fmt::format("[[1,-1]].(3,1) = {} +- {:.2e}; [[0.5,-0.5]].(2,2) = {:.2e} +- {:.2e}", r1.values[0],
                            r1.error_bound[0], r2.values[0], r2.error_bound[0])};
}

std::string run_process(const std::string& command, int& status) {
    std::string out;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) {
        status = -1;
        return out;
    }
    std::array<char, 4096> buffer{};
    std::size_t got = 0;
    while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) out.append(buffer.data(), got);
    status = pclose(pipe);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const auto dir = fs::temp_directory_path() / fmt::format("thermoflow_acceptance_{}", ::getpid());
    fs::create_directories(dir);
    const auto problem = (dir / "matvec.json").string();
    std::ofstream(problem) << R"({"schema_version": 1, "kind": "matvec",
  "matrix": [[0.5, 0.5], [0.2, 0.8]], "vector": [1, 2], "settings": {}})";

    const std::string cli = THERMOFLOW_CLI_PATH;
    int s1 = 0;
    int s2 = 0;
    const auto first = run_process(fmt::format("'{}' --no-timing --oracle run '{}'", cli, problem), s1);
    const auto second = run_process(fmt::format("'{}' --no-timing --oracle run '{}'", cli, problem), s2);
    const bool reports_equal = s1 == 0 && s2 == 0 && !first.empty() && first == second;

    // The 2x2 crossbar fixture as a raw configuration file, exported through the CLI.
    const auto config = testing::two_by_two_config();
    nlohmann::json doc = {{"schema_version", 1},
                          {"kind", "raw_config"},
                          {"settings", nlohmann::json::object()},
                          {"config", io::config_to_json(config)}};
    const auto raw = (dir / "crossbar.json").string();
    std::ofstream(raw) << doc.dump(2);
    int s3 = 0;
    const auto netlist = run_process(fmt::format("'{}' circuit '{}' 2>/dev/null", cli, raw), s3);
    const auto golden = read_file(std::string(THERMOFLOW_GOLDEN_DIR) + "/crossbar_2x2.cir");
    const bool golden_equal = s3 == 0 && !golden.empty() && netlist == golden;
    fs::remove_all(dir);
    return {reports_equal && golden_equal,
            fmt::format("run reports identical: {}, golden netlist identical: {}", reports_equal, golden_equal)};
}

}  // namespace

int main() {
    const auto configs = random_configs(1000);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"form equivalence", [&] { return form_equivalence(configs); }},
        {"conservation and second law", [&] { return conservation_second_law(configs); }},
        {"electrical analogy exactness", [&] { return electrical_analogy(configs); }},
        {"settling-time size independence", settling_independence},
        {"q-factor timing", qfactor_timing},
        {"signed matvec", signed_matvec},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        failures += outcome.pass ? 0 : 1;
        std::cout << fmt::format("{} criterion {}: {} ({})\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                                 criteria[i].first, outcome.detail);
    }
    return failures == 0 ? 0 : 1;
}
