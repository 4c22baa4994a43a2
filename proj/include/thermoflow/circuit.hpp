// Electrical equivalent of the mode/reservoir network
//
// One mode is a star: every reservoir j is a wire with potential phi_j = n_j(w_k, T_j)
// and conductance 1/R_j = gamma[k][j] meeting at a centre node whose potential is the
// conductance-weighted mean of the wire potentials (= n~_k). The wire currents are
// particle currents I_j = J[k][j] / w_k.
//
// All modes together form a crossbar: mode bars b_k, reservoir bars c_j at potential
// Phi_j, and at every crossing a series resistor r[k][j] that drops Phi_j down to
// phi[k][j]:  Phi_j = phi[k][j] + I[k][j] r[k][j].

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "thermoflow/matrix.hpp"
#include "thermoflow/physics.hpp"

namespace thermoflow::circuit {

struct StarCircuit {
    std::vector<double> resistances;  // R_j > 0
    std::vector<double> potentials;   // phi_j
    std::vector<std::size_t> terminals;  // reservoir index of each wire; empty means 0..n
    std::vector<double> conductances;    // exact 1/R_j when known (e.g. gamma); empty means 1/R_j
};

double star_node_potential(const StarCircuit& circuit);
std::vector<double> star_currents(const StarCircuit& circuit);

// Links with gamma[k][j] = 0 are left out (open branch).
StarCircuit oqs_to_star(const physics::DeviceConfig& config, std::size_t mode_index);

// Star currents scattered back to one entry per reservoir (0 for omitted links).
std::vector<double> star_currents_by_reservoir(const physics::DeviceConfig& config, std::size_t mode_index);

// max_{k,j} |I_j w_k - J[k][j]| over every mode's star.
double analogy_residual(const physics::DeviceConfig& config, const physics::FlowReport& flows);

enum class BranchState {
    Normal,              // r > 0
    PassThrough,         // r = 0, junction sits at the bar potential
    Open,                // zero current with phi != Phi; no consistent resistor
    Absent,              // gamma = 0, no link
    NegativeResistance,  // r = (Phi - phi)/I < 0 (current leaves the bar)
};

struct BarPolicy {
    enum class Kind { Max, Fixed, Grouped };
    Kind kind{Kind::Max};
    std::vector<double> fixed;  // Fixed: one value for every bar, or one per bar
    double group_tol{1e-3};     // Grouped: allowed relative spread of phi along a bar

    static BarPolicy max() { return {}; }
    static BarPolicy fixed_value(double value) { return {Kind::Fixed, {value}, 1e-3}; }
    static BarPolicy grouped(double tol = 1e-3) { return {Kind::Grouped, {}, tol}; }
    // "max", "fixed:<v>", "fixed:<v0>,<v1>,...", "grouped" or "grouped:<tol>".
    static BarPolicy parse(const std::string& text);
    std::string to_string() const;
};

struct CrossbarCircuit {
    std::vector<double> frequencies;    // w_k, converts currents back to energy flows
    Matrix conductances;                // K x (n+1), gamma[k][j]
    Matrix node_potentials;             // phi[k][j] = n_j(w_k, T_j)
    std::vector<double> mode_potentials;  // potential of mode bar k (= n~_k)
    std::vector<double> bar_potentials;   // Phi_j
    Matrix series_resistors;            // r[k][j]
    Matrix currents;                    // I[k][j] = J[k][j] / w_k
    std::vector<BranchState> states;    // row-major K x (n+1)

    std::size_t mode_count() const noexcept { return frequencies.size(); }
    std::size_t reservoir_count() const noexcept { return bar_potentials.size(); }
    BranchState state(std::size_t k, std::size_t j) const { return states[k * reservoir_count() + j]; }
};

// Throws SolvabilityError when a fixed potential lies below a connected phi[k][j], or the
// grouped policy is used on modes whose occupancies are not within tolerance.
CrossbarCircuit build_crossbar(const physics::DeviceConfig& config, const BarPolicy& policy = BarPolicy::max());

// max over current-carrying branches of |Phi_j - phi[k][j] - I[k][j] r[k][j]| / |Phi_j|
// (absolute residual when Phi_j = 0).
double crossbar_residual(const CrossbarCircuit& crossbar);

// Branch currents from element values alone: Phi_j through r[k][j] and 1/gamma in series
// down to the mode bar potential.
Matrix forward_currents(const CrossbarCircuit& crossbar);

// max over mode bars of |sum_j I[k][j]| / sum_j |I[k][j]|.
double kirchhoff_residual(const Matrix& currents);

std::size_t count_state(const CrossbarCircuit& crossbar, BranchState state);
std::string to_string(BranchState state);

}  // namespace thermoflow::circuit
