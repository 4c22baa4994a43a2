// Relaxation of mode occupancies towards the stationary state
//
// Model: d<n_k>/dt = sum_j gamma[k][j] (n_j(w_k, T_j) - <n_k>) = Gamma_k (n~_k - <n_k>),
// Gamma_k = sum_j gamma[k][j]. Its unique fixed point <n_k> = n~_k is the stationary
// occupancy behind the stationary flows, so long-time transient flows reproduce them.
// Modes are uncoupled and the equations are scalar and linear, so every trace is
// evaluated in closed form.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "thermoflow/physics.hpp"

namespace thermoflow::dynamics {

// Denominator floor for relative deviations when n~_k = 0.
inline constexpr double kSettlingFloor = 1e-15;

struct TransientTrace {
    std::vector<double> times;
    std::vector<std::vector<double>> occupancies;  // per time, K entries
    std::vector<std::vector<double>> flows;        // per time, n+1 entries
    std::optional<double> settled_at;
};

// Gamma_k for every mode.
std::vector<double> relaxation_rates(const physics::DeviceConfig& config);

// <n_k>(t) for every mode.
std::vector<double> occupancies_at(const physics::DeviceConfig& config, std::span<const double> initial,
                                   double time);

// J_j(t) = sum_k w_k gamma[k][j] (n_j(w_k, T_j) - <n_k>(t)).
std::vector<double> flows_at(const physics::DeviceConfig& config, std::span<const double> occupancies);

// Samples `sample_count` equispaced times on [0, t_end]. settled_at is the settling time
// for rel_tol when it falls inside the window.
TransientTrace evolve(const physics::DeviceConfig& config, std::span<const double> initial, double t_end,
                      std::size_t sample_count, double rel_tol = 1e-6);

// Smallest t with max_k |<n_k>(t) - n~_k| / max(n~_k, floor) <= rel_tol. Zero when
// every mode already satisfies the tolerance.
double settling_time(const physics::DeviceConfig& config, std::span<const double> initial, double rel_tol);

// Resonator relaxation time tau = Q / w with w = 2 pi c / lambda, for Q in [q_low, q_high].
// SI units: wavelength in metres, result in seconds.
std::pair<double, double> qfactor_estimate(double wavelength_m, double q_low, double q_high);

// Settling time against reservoir count for one mode started from the vacuum.
struct SweepRow {
    std::size_t reservoirs{0};         // n (drain not counted)
    double fixed_total_rate{0.0};      // Gamma_k held at total_rate, redistributed over links
    double fixed_link_rate{0.0};       // every link at total_rate / 3, so Gamma_k grows with n
};
struct SweepSettings {
    double frequency{1.0};
    double total_rate{1.0};
    double rel_tol{1e-6};
    double epsilon{1e-4};
    std::uint64_t seed{1};
};
std::vector<SweepRow> sweep_reservoir_count(std::span<const std::size_t> counts, const SweepSettings& settings);

// (max - min) / min over the fixed-total column.
double sweep_spread(std::span<const SweepRow> rows);

}  // namespace thermoflow::dynamics
