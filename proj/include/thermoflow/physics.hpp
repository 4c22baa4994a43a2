// Closed-form thermodynamics of K bosonic modes coupled to n+1 reservoirs
//
// Natural units throughout (hbar = k_B = 1): frequencies and temperatures share a unit
// and occupancies are dimensionless.
//
// Sign convention: J[k][j] > 0 means energy flows from reservoir j into the system
// through mode k. Couplings are always stored as gamma[mode][reservoir], and reservoir 0
// is the cold drain.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "thermoflow/matrix.hpp"

namespace thermoflow::physics {

// Smallest admissible reservoir temperature. Stands in for the idealised T0 -> 0 drain.
inline constexpr double kTemperatureFloor = 1e-9;

// Occupancies below this are flushed to exactly zero.
inline constexpr double kOccupancyFlush = 1e-300;

struct Mode {
    double frequency{1.0};
    int group_id{0};
};

struct Reservoir {
    double temperature{1.0};
    bool is_drain{false};
};

struct DeviceConfig {
    std::vector<Mode> modes;            // K entries
    std::vector<Reservoir> reservoirs;  // n+1 entries, index 0 is the drain
    Matrix couplings;                   // K x (n+1), gamma[mode][reservoir] >= 0

    std::size_t mode_count() const noexcept { return modes.size(); }
    std::size_t reservoir_count() const noexcept { return reservoirs.size(); }

    // Throws InvalidConfig when any structural invariant is broken.
    void validate() const;
};

struct FlowReport {
    Matrix per_channel;                // K x (n+1), J[k][j]
    std::vector<double> per_reservoir; // J[j] = sum_k J[k][j]
    double entropy_rate{0.0};
};

// Result of the cold-drain approximation for one mode.
struct DrainApproximation {
    double approximate{0.0};
    double exact{0.0};
    double discrepancy{0.0};  // |approximate - exact|
};

// 1/(exp(w/T) - 1), evaluated through expm1. Throws DomainError unless w > 0 and T > 0.
double bose_occupancy(double frequency, double temperature);

// Temperature at which a reservoir has the given occupancy: T = w / ln(1 + 1/b).
double inverse_temperature(double frequency, double occupancy);

// Convex combination sum_j w_j v_j / sum_j w_j split as reference + offset, where the
// reference is the most heavily weighted value. lo/hi bound the values with nonzero weight.
// Weights must be non-negative with a positive sum.
struct WeightedOffset {
    double reference{0.0};
    double offset{0.0};
    double lo{0.0};
    double hi{0.0};
};
WeightedOffset weighted_offset(std::span<const double> weights, std::span<const double> values);

// reference + offset clamped into [lo, hi]; equal values are reproduced exactly.
double weighted_mean(std::span<const double> weights, std::span<const double> values);

// Occupancies n_j(w_k, T_j) for one mode, one entry per reservoir.
std::vector<double> reservoir_occupancies(const DeviceConfig& config, std::size_t mode_index);

// p[k][j] = gamma[k][j] / sum_m gamma[k][m].
std::vector<double> coupling_weights(const DeviceConfig& config, std::size_t mode_index);

// n~(w_k) = sum_j p[k][j] n_j(w_k, T_j); the mode's stationary occupancy.
double weighted_occupancy(const DeviceConfig& config, std::size_t mode_index);

// J[k][j] = w_k gamma[k][j] (n_j - n~_k), with per-reservoir totals and entropy rate.
FlowReport stationary_flows(const DeviceConfig& config);

// Same flows through the pairwise form
//   J[k][j] = w_k sum_q gamma[k][j] gamma[k][q] / sum_m gamma[k][m] (n_j - n_q).
FlowReport stationary_flows_pairwise(const DeviceConfig& config);

// J[k][0] ~ -w_k gamma[k][0] sum_{q>=1} p[k][q] n_q, valid when the drain is cold.
DrainApproximation drain_flow_approx(const DeviceConfig& config, std::size_t mode_index);

// sigma = -sum_j J[j] / T_j. Non-negative for any stationary state.
double entropy_production_rate(const DeviceConfig& config, const FlowReport& flows);

}  // namespace thermoflow::physics
