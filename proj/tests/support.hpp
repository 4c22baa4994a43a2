// Random generators and independent oracles shared by the test suites.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "thermoflow/matrix.hpp"
#include "thermoflow/physics.hpp"

namespace thermoflow::testing {

using BigFloat = boost::multiprecision::cpp_dec_float_50;

// 1/(exp(w/T) - 1) evaluated with 50 decimal digits.
inline double reference_occupancy(double frequency, double temperature) {
    const BigFloat x = BigFloat(frequency) / BigFloat(temperature);
    return static_cast<double>(BigFloat(1) / (boost::multiprecision::exp(x) - BigFloat(1)));
}

inline double relative_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Device with one drain at the floor (or occasionally warm), random couplings including
// some zero links, log-uniform temperatures.
inline physics::DeviceConfig random_config(std::mt19937_64& rng, std::size_t max_modes = 8,
                                           std::size_t max_inputs = 32) {
    std::uniform_int_distribution<std::size_t> modes(1, max_modes);
    std::uniform_int_distribution<std::size_t> inputs(1, max_inputs);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    physics::DeviceConfig config;
    const std::size_t k = modes(rng);
    const std::size_t n = inputs(rng);
    for (std::size_t i = 0; i < k; ++i) config.modes.push_back({0.1 + 4.9 * unit(rng), 0});
    const double drain_t = unit(rng) < 0.8 ? physics::kTemperatureFloor : 0.01 + unit(rng);
    config.reservoirs.push_back({drain_t, true});
    for (std::size_t j = 0; j < n; ++j) {
        config.reservoirs.push_back({0.05 * std::pow(1000.0, unit(rng)), false});
    }
    config.couplings = Matrix(k, n + 1);
    for (std::size_t i = 0; i < k; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j <= n; ++j) {
            const double g = unit(rng) < 0.2 ? 0.0 : std::pow(10.0, -3.0 + 3.0 * unit(rng));
            config.couplings(i, j) = g;
            total += g;
        }
        if (total == 0.0) config.couplings(i, n) = 0.5;
    }
    return config;
}

// Row-stochastic m x n matrix with strictly positive entries.
inline Matrix random_stochastic(std::mt19937_64& rng, std::size_t m, std::size_t n) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix p(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            p(i, j) = 1e-3 + unit(rng);
            total += p(i, j);
        }
        for (std::size_t j = 0; j < n; ++j) p(i, j) /= total;
    }
    return p;
}

inline std::vector<double> direct_matvec(const Matrix& p, const std::vector<double>& b) {
    std::vector<double> out(p.rows(), 0.0);
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < p.cols(); ++j) out[i] += p(i, j) * b[j];
    }
    return out;
}

// Config with explicit occupancies (0 maps to the floor temperature).
inline physics::DeviceConfig config_with_occupancies(double frequency, const std::vector<double>& gamma,
                                                     const std::vector<double>& occupancies) {
    physics::DeviceConfig config;
    config.modes = {{frequency, 0}};
    for (std::size_t j = 0; j < occupancies.size(); ++j) {
        const double t = occupancies[j] == 0.0 ? physics::kTemperatureFloor
                                               : frequency / std::log1p(1.0 / occupancies[j]);
        config.reservoirs.push_back({t, j == 0});
    }
    config.couplings = Matrix(1, gamma.size());
    for (std::size_t j = 0; j < gamma.size(); ++j) config.couplings(0, j) = gamma[j];
    return config;
}

// Two modes (w = 1, 2) sharing a floor drain and one reservoir with n(1, T) = 1.
// Mode 1: n~ = 1/2, I = (-1/2, 1/2). Mode 2: n~ = 1/4, I = (-1/8, 1/8).
inline physics::DeviceConfig two_by_two_config() {
    physics::DeviceConfig config;
    config.modes = {{1.0, 0}, {2.0, 0}};
    config.reservoirs = {{physics::kTemperatureFloor, true}, {1.0 / std::log(2.0), false}};
    config.couplings = Matrix{{1.0, 1.0}, {0.5, 1.5}};
    return config;
}

}  // namespace thermoflow::testing
