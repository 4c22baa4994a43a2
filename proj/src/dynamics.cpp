#include "thermoflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "thermoflow/errors.hpp"

namespace thermoflow::dynamics {

namespace {

constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

void check_initial(const physics::DeviceConfig& config, std::span<const double> initial) {
    if (initial.size() != config.mode_count()) {
        throw InvalidConfig("initial occupancies must have one entry per mode (K=" +
                            std::to_string(config.mode_count()) + ")");
    }
    for (double n : initial) {
        if (!std::isfinite(n) || n < 0.0) throw DomainError("initial occupancies must be finite and non-negative");
    }
}

std::vector<double> stationary_occupancies(const physics::DeviceConfig& config) {
    std::vector<double> out(config.mode_count());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = physics::weighted_occupancy(config, k);
    return out;
}

}  // namespace

std::vector<double> relaxation_rates(const physics::DeviceConfig& config) {
    std::vector<double> rates(config.mode_count());
    for (std::size_t k = 0; k < rates.size(); ++k) {
        const auto row = config.couplings.row(k);
        rates[k] = std::accumulate(row.begin(), row.end(), 0.0);
    }
    return rates;
}

std::vector<double> occupancies_at(const physics::DeviceConfig& config, std::span<const double> initial,
                                   double time) {
    config.validate();
    check_initial(config, initial);
    const auto rates = relaxation_rates(config);
    const auto fixed = stationary_occupancies(config);
    std::vector<double> out(config.mode_count());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = fixed[k] + (initial[k] - fixed[k]) * std::exp(-rates[k] * time);
    }
    return out;
}

std::vector<double> flows_at(const physics::DeviceConfig& config, std::span<const double> occupancies) {
    if (occupancies.size() != config.mode_count()) throw InvalidConfig("one occupancy per mode required");
    const std::size_t reservoirs = config.reservoir_count();
    Matrix channel(config.mode_count(), reservoirs);
    for (std::size_t k = 0; k < config.mode_count(); ++k) {
        const double w = config.modes[k].frequency;
        const auto occ = physics::reservoir_occupancies(config, k);
        for (std::size_t j = 0; j < reservoirs; ++j) {
            channel(k, j) = w * config.couplings(k, j) * (occ[j] - occupancies[k]);
        }
    }
    std::vector<double> flows(reservoirs, 0.0);
    for (std::size_t j = 0; j < reservoirs; ++j) {
        for (std::size_t k = 0; k < config.mode_count(); ++k) flows[j] += channel(k, j);
    }
    return flows;
}

TransientTrace evolve(const physics::DeviceConfig& config, std::span<const double> initial, double t_end,
                      std::size_t sample_count, double rel_tol) {
    config.validate();
    check_initial(config, initial);
    if (!std::isfinite(t_end) || !(t_end > 0.0)) throw DomainError("t_end must be positive");
    if (sample_count < 2) throw DomainError("sample_count must be at least 2");

    const auto rates = relaxation_rates(config);
    const auto fixed = stationary_occupancies(config);

    TransientTrace trace;
    trace.times.reserve(sample_count);
    for (std::size_t i = 0; i < sample_count; ++i) {
        const double t = t_end * static_cast<double>(i) / static_cast<double>(sample_count - 1);
        std::vector<double> occ(config.mode_count());
        for (std::size_t k = 0; k < occ.size(); ++k) {
            occ[k] = fixed[k] + (initial[k] - fixed[k]) * std::exp(-rates[k] * t);
        }
        trace.times.push_back(t);
        trace.flows.push_back(flows_at(config, occ));
        trace.occupancies.push_back(std::move(occ));
    }
    const double settle = settling_time(config, initial, rel_tol);
    if (settle <= t_end) trace.settled_at = settle;
    return trace;
}

double settling_time(const physics::DeviceConfig& config, std::span<const double> initial, double rel_tol) {
    config.validate();
    check_initial(config, initial);
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw DomainError("rel_tol must lie in (0, 1)");

    const auto rates = relaxation_rates(config);
    const auto fixed = stationary_occupancies(config);
    double worst = 0.0;
    for (std::size_t k = 0; k < fixed.size(); ++k) {
        const double deviation = std::abs(initial[k] - fixed[k]);
        const double scale = rel_tol * std::max(fixed[k], kSettlingFloor);
        if (deviation <= scale) continue;
        worst = std::max(worst, std::log(deviation / scale) / rates[k]);
    }
    return worst;
}

std::pair<double, double> qfactor_estimate(double wavelength_m, double q_low, double q_high) {
    if (!(wavelength_m > 0.0) || !(q_low > 0.0) || !(q_high > 0.0)) {
        throw DomainError("qfactor_estimate: inputs must be positive");
    }
    if (q_low > q_high) throw DomainError("qfactor_estimate: q_low exceeds q_high");
    const double omega = 2.0 * std::numbers::pi * kSpeedOfLight / wavelength_m;
    return {q_low / omega, q_high / omega};
}

std::vector<SweepRow> sweep_reservoir_count(std::span<const std::size_t> counts, const SweepSettings& settings) {
    std::vector<SweepRow> rows;
    for (std::size_t n : counts) {
        if (n == 0) throw DomainError("sweep needs at least one input reservoir");
        std::mt19937_64 rng(settings.seed + n);
        std::uniform_real_distribution<double> occupancy(0.1, 10.0);
        std::uniform_real_distribution<double> weight(0.1, 1.0);

        physics::DeviceConfig config;
        config.modes = {{settings.frequency, 0}};
        config.reservoirs.push_back({physics::kTemperatureFloor, true});
        for (std::size_t j = 0; j < n; ++j) {
            config.reservoirs.push_back({physics::inverse_temperature(settings.frequency, occupancy(rng)), false});
        }
        std::vector<double> weights(n);
        for (double& w : weights) w = weight(rng);
        const double total = std::accumulate(weights.begin(), weights.end(), 0.0);

        const std::vector<double> vacuum{0.0};
        SweepRow row;
        row.reservoirs = n;

        config.couplings = Matrix(1, n + 1);
        const double linked = settings.total_rate / (1.0 + settings.epsilon);
        config.couplings(0, 0) = settings.epsilon * linked;
        for (std::size_t j = 0; j < n; ++j) config.couplings(0, j + 1) = linked * weights[j] / total;
        row.fixed_total_rate = settling_time(config, vacuum, settings.rel_tol);

        // n = 2 plus the drain matches the fixed-total device.
        for (std::size_t j = 0; j <= n; ++j) config.couplings(0, j) = settings.total_rate / 3.0;
        row.fixed_link_rate = settling_time(config, vacuum, settings.rel_tol);
        rows.push_back(row);
    }
    return rows;
}

double sweep_spread(std::span<const SweepRow> rows) {
    if (rows.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return a.fixed_total_rate < b.fixed_total_rate;
    });
    return (hi->fixed_total_rate - lo->fixed_total_rate) / lo->fixed_total_rate;
}

}  // namespace thermoflow::dynamics
