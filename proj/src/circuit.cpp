#include "thermoflow/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "thermoflow/errors.hpp"

namespace thermoflow::circuit {

namespace {

void check_star(const StarCircuit& circuit) {
    if (circuit.resistances.empty() || circuit.resistances.size() != circuit.potentials.size()) {
        throw DomainError("star circuit: resistances and potentials must be non-empty and equal in size");
    }
    if (!circuit.terminals.empty() && circuit.terminals.size() != circuit.resistances.size()) {
        throw DomainError("star circuit: one terminal per wire required");
    }
    if (!circuit.conductances.empty() && circuit.conductances.size() != circuit.resistances.size()) {
        throw DomainError("star circuit: one conductance per wire required");
    }
    for (double r : circuit.resistances) {
        if (!std::isfinite(r) || !(r > 0.0)) throw DomainError("star circuit: resistances must be positive");
    }
}

std::vector<double> conductances_of(const StarCircuit& circuit) {
    if (!circuit.conductances.empty()) return circuit.conductances;
    std::vector<double> g(circuit.resistances.size());
    std::transform(circuit.resistances.begin(), circuit.resistances.end(), g.begin(),
                   [](double r) { return 1.0 / r; });
    return g;
}

}  // namespace

double star_node_potential(const StarCircuit& circuit) {
    check_star(circuit);
    const auto g = conductances_of(circuit);
    return physics::weighted_mean(g, circuit.potentials);
}

std::vector<double> star_currents(const StarCircuit& circuit) {
    check_star(circuit);
    const auto g = conductances_of(circuit);
    const auto centre = physics::weighted_offset(g, circuit.potentials);
    std::vector<double> currents(circuit.resistances.size());
    for (std::size_t j = 0; j < currents.size(); ++j) {
        currents[j] = g[j] * ((circuit.potentials[j] - centre.reference) - centre.offset);
    }
    return currents;
}

StarCircuit oqs_to_star(const physics::DeviceConfig& config, std::size_t mode_index) {
    config.validate();
    const auto occ = physics::reservoir_occupancies(config, mode_index);
    StarCircuit star;
    for (std::size_t j = 0; j < occ.size(); ++j) {
        const double gamma = config.couplings(mode_index, j);
        if (gamma == 0.0) continue;
        star.resistances.push_back(1.0 / gamma);
        star.conductances.push_back(gamma);
        star.potentials.push_back(occ[j]);
        star.terminals.push_back(j);
    }
    return star;
}

std::vector<double> star_currents_by_reservoir(const physics::DeviceConfig& config, std::size_t mode_index) {
    const auto star = oqs_to_star(config, mode_index);
    const auto currents = star_currents(star);
    std::vector<double> out(config.reservoir_count(), 0.0);
    for (std::size_t i = 0; i < currents.size(); ++i) out[star.terminals[i]] = currents[i];
    return out;
}

double analogy_residual(const physics::DeviceConfig& config, const physics::FlowReport& flows) {
    double worst = 0.0;
    for (std::size_t k = 0; k < config.mode_count(); ++k) {
        const auto currents = star_currents_by_reservoir(config, k);
        const double w = config.modes[k].frequency;
        for (std::size_t j = 0; j < currents.size(); ++j) {
            worst = std::max(worst, std::abs(currents[j] * w - flows.per_channel(k, j)));
        }
    }
    return worst;
}

BarPolicy BarPolicy::parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
    const auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw DomainError("bad number '" + s + "' in policy '" + text + "'");
        }
        if (used != s.size() || !std::isfinite(v)) throw DomainError("bad number '" + s + "' in policy '" + text + "'");
        return v;
    };

    if (head == "max" && tail.empty()) return max();
    if (head == "grouped") return tail.empty() ? grouped() : grouped(number(tail));
    if (head == "fixed" && !tail.empty()) {
        BarPolicy policy{Kind::Fixed, {}, 1e-3};
        std::size_t start = 0;
        while (start <= tail.size()) {
            const auto comma = tail.find(',', start);
            policy.fixed.push_back(number(tail.substr(start, comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return policy;
    }
    throw DomainError("unknown bar policy '" + text + "' (expected max, fixed:<v> or grouped)");
}

std::string BarPolicy::to_string() const {
    switch (kind) {
        case Kind::Max: return "max";
        case Kind::Grouped: return "grouped:" + std::to_string(group_tol);
        case Kind::Fixed: {
            std::string out = "fixed:";
            for (std::size_t i = 0; i < fixed.size(); ++i) out += (i ? "," : "") + std::to_string(fixed[i]);
            return out;
        }
    }
    return "unknown";
}

CrossbarCircuit build_crossbar(const physics::DeviceConfig& config, const BarPolicy& policy) {
    const auto flows = physics::stationary_flows(config);
    const std::size_t modes = config.mode_count();
    const std::size_t bars = config.reservoir_count();

    CrossbarCircuit xb;
    xb.conductances = config.couplings;
    xb.node_potentials = Matrix(modes, bars);
    xb.series_resistors = Matrix(modes, bars);
    xb.currents = Matrix(modes, bars);
    xb.states.assign(modes * bars, BranchState::Normal);
    for (std::size_t k = 0; k < modes; ++k) {
        const double w = config.modes[k].frequency;
        xb.frequencies.push_back(w);
        xb.mode_potentials.push_back(physics::weighted_occupancy(config, k));
        const auto occ = physics::reservoir_occupancies(config, k);
        for (std::size_t j = 0; j < bars; ++j) {
            xb.node_potentials(k, j) = occ[j];
            xb.currents(k, j) = flows.per_channel(k, j) / w;
        }
    }

    // Highest connected junction potential on each bar.
    std::vector<double> top(bars, 0.0);
    std::vector<double> bottom(bars, 0.0);
    for (std::size_t j = 0; j < bars; ++j) {
        bool any = false;
        for (std::size_t k = 0; k < modes; ++k) {
            if (config.couplings(k, j) == 0.0) continue;
            const double phi = xb.node_potentials(k, j);
            top[j] = any ? std::max(top[j], phi) : phi;
            bottom[j] = any ? std::min(bottom[j], phi) : phi;
            any = true;
        }
    }

    switch (policy.kind) {
        case BarPolicy::Kind::Max:
            xb.bar_potentials = top;
            break;
        case BarPolicy::Kind::Fixed: {
            if (policy.fixed.size() != 1 && policy.fixed.size() != bars) {
                throw DomainError("fixed policy needs one value or one per bar (" + std::to_string(bars) + ")");
            }
            for (std::size_t j = 0; j < bars; ++j) {
                const double phi_bar = policy.fixed.size() == 1 ? policy.fixed[0] : policy.fixed[j];
                if (phi_bar < top[j]) {
                    throw SolvabilityError("bar " + std::to_string(j) + ": fixed potential " + std::to_string(phi_bar) +
                                           " is below max_k phi = " + std::to_string(top[j]));
                }
                xb.bar_potentials.push_back(phi_bar);
            }
            break;
        }
        case BarPolicy::Kind::Grouped: {
            xb.bar_potentials = top;
            xb.bar_potentials[0] = 0.0;
            const double scale = *std::max_element(top.begin(), top.end());
            if (top[0] > policy.group_tol * scale) {
                throw SolvabilityError("grouped policy: drain junctions are not at zero potential");
            }
            for (std::size_t j = 1; j < bars; ++j) {
                if (top[j] - bottom[j] > policy.group_tol * top[j]) {
                    throw SolvabilityError("grouped policy: bar " + std::to_string(j) +
                                           " potentials differ by more than group_tol");
                }
            }
            break;
        }
    }

    for (std::size_t k = 0; k < modes; ++k) {
        for (std::size_t j = 0; j < bars; ++j) {
            auto& state = xb.states[k * bars + j];
            auto& r = xb.series_resistors(k, j);
            const double current = xb.currents(k, j);
            const double drop = xb.bar_potentials[j] - xb.node_potentials(k, j);
            if (config.couplings(k, j) == 0.0) {
                state = BranchState::Absent;
            } else if (policy.kind == BarPolicy::Kind::Grouped) {
                state = BranchState::PassThrough;
            } else if (drop == 0.0) {
                state = BranchState::PassThrough;
            } else if (current == 0.0) {
                state = BranchState::Open;
            } else {
                r = drop / current;
                state = r > 0.0 ? BranchState::Normal : r == 0.0 ? BranchState::PassThrough : BranchState::NegativeResistance;
            }
        }
    }
    return xb;
}

double crossbar_residual(const CrossbarCircuit& xb) {
    double worst = 0.0;
    for (std::size_t k = 0; k < xb.mode_count(); ++k) {
        for (std::size_t j = 0; j < xb.reservoir_count(); ++j) {
            const auto state = xb.state(k, j);
            const double current = xb.currents(k, j);
            if (state == BranchState::Absent || state == BranchState::Open || current == 0.0) continue;
            const double phi_bar = xb.bar_potentials[j];
            const double residual =
                std::abs(phi_bar - xb.node_potentials(k, j) - current * xb.series_resistors(k, j));
            worst = std::max(worst, phi_bar == 0.0 ? residual : residual / std::abs(phi_bar));
        }
    }
    return worst;
}

Matrix forward_currents(const CrossbarCircuit& xb) {
    Matrix out(xb.mode_count(), xb.reservoir_count());
    for (std::size_t k = 0; k < xb.mode_count(); ++k) {
        for (std::size_t j = 0; j < xb.reservoir_count(); ++j) {
            const auto state = xb.state(k, j);
            if (state == BranchState::Absent || state == BranchState::Open) continue;
            const double chain = xb.series_resistors(k, j) + 1.0 / xb.conductances(k, j);
            if (!std::isfinite(chain) || chain == 0.0) {
                throw NumericalError("forward solve: branch (" + std::to_string(k) + "," + std::to_string(j) +
                                     ") has no finite resistance");
            }
            out(k, j) = (xb.bar_potentials[j] - xb.mode_potentials[k]) / chain;
        }
    }
    return out;
}

double kirchhoff_residual(const Matrix& currents) {
    double worst = 0.0;
    for (std::size_t k = 0; k < currents.rows(); ++k) {
        double sum = 0.0;
        double scale = 0.0;
        for (double i : currents.row(k)) {
            sum += i;
            scale += std::abs(i);
        }
        if (scale > 0.0) worst = std::max(worst, std::abs(sum) / scale);
    }
    return worst;
}

std::size_t count_state(const CrossbarCircuit& xb, BranchState state) {
    return static_cast<std::size_t>(std::count(xb.states.begin(), xb.states.end(), state));
}

std::string to_string(BranchState state) {
    switch (state) {
        case BranchState::Normal: return "normal";
        case BranchState::PassThrough: return "pass_through";
        case BranchState::Open: return "open";
        case BranchState::Absent: return "absent";
        case BranchState::NegativeResistance: return "negative_resistance";
    }
    return "unknown";
}

}  // namespace thermoflow::circuit
