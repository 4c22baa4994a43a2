#include "thermoflow/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "thermoflow/errors.hpp"

namespace thermoflow::physics {

namespace {

// Occupancy is flushed to zero above this exponent.
constexpr double kMaxExponent = 700.0;

bool positive_finite(double x) noexcept { return std::isfinite(x) && x > 0.0; }

void require_mode(const DeviceConfig& config, std::size_t mode_index) {
    if (mode_index >= config.mode_count()) {
        throw InvalidConfig("mode index " + std::to_string(mode_index) + " out of range (K=" +
                            std::to_string(config.mode_count()) + ")");
    }
}

}  // namespace

void DeviceConfig::validate() const {
    if (modes.empty()) throw InvalidConfig("config has no modes");
    if (reservoirs.empty()) throw InvalidConfig("config has no reservoirs");
    if (couplings.rows() != modes.size() || couplings.cols() != reservoirs.size()) {
        throw InvalidConfig("coupling matrix must be K x (n+1) = " + std::to_string(modes.size()) +
                            " x " + std::to_string(reservoirs.size()));
    }
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (!positive_finite(modes[k].frequency)) {
            throw InvalidConfig("mode " + std::to_string(k) + ": frequency must be positive");
        }
    }
    if (!reservoirs.front().is_drain) throw InvalidConfig("reservoir 0 must be the drain");
    for (std::size_t j = 0; j < reservoirs.size(); ++j) {
        const auto& r = reservoirs[j];
        if (j > 0 && r.is_drain) {
            throw InvalidConfig("reservoir " + std::to_string(j) + ": only reservoir 0 may be the drain");
        }
        if (!std::isfinite(r.temperature) || r.temperature < kTemperatureFloor) {
            throw InvalidConfig("reservoir " + std::to_string(j) + ": temperature below floor " +
                                std::to_string(kTemperatureFloor));
        }
    }
    for (std::size_t k = 0; k < modes.size(); ++k) {
        double total = 0.0;
        for (double g : couplings.row(k)) {
            if (!std::isfinite(g) || g < 0.0) {
                throw InvalidConfig("mode " + std::to_string(k) + ": couplings must be finite and non-negative");
            }
            total += g;
        }
        if (!(total > 0.0)) throw InvalidConfig("mode " + std::to_string(k) + " is isolated (all couplings zero)");
    }
}

double bose_occupancy(double frequency, double temperature) {
    if (!positive_finite(frequency)) throw DomainError("bose_occupancy: frequency must be positive");
    if (!positive_finite(temperature)) throw DomainError("bose_occupancy: temperature must be positive");
    const double x = frequency / temperature;
    if (x > kMaxExponent) return 0.0;
    const double n = 1.0 / std::expm1(x);
    return n < kOccupancyFlush ? 0.0 : n;
}

double inverse_temperature(double frequency, double occupancy) {
    if (!positive_finite(frequency)) throw DomainError("inverse_temperature: frequency must be positive");
    if (!positive_finite(occupancy)) throw DomainError("inverse_temperature: occupancy must be positive");
    return frequency / std::log1p(1.0 / occupancy);
}

WeightedOffset weighted_offset(std::span<const double> weights, std::span<const double> values) {
    if (weights.size() != values.size() || values.empty()) {
        throw DomainError("weighted_mean: size mismatch");
    }
    std::size_t heaviest = 0;
    for (std::size_t j = 1; j < values.size(); ++j) {
        if (weights[j] > weights[heaviest]) heaviest = j;
    }
    WeightedOffset out;
    out.reference = values[heaviest];
    out.lo = out.reference;
    out.hi = out.reference;
    double total = 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (weights[j] == 0.0) continue;
        total += weights[j];
        acc += weights[j] * (values[j] - out.reference);
        out.lo = std::min(out.lo, values[j]);
        out.hi = std::max(out.hi, values[j]);
    }
    if (!(total > 0.0)) throw DomainError("weighted_mean: weights sum to zero");
    out.offset = acc / total;
    return out;
}

double weighted_mean(std::span<const double> weights, std::span<const double> values) {
    const auto w = weighted_offset(weights, values);
    return std::clamp(w.reference + w.offset, w.lo, w.hi);
}

std::vector<double> reservoir_occupancies(const DeviceConfig& config, std::size_t mode_index) {
    require_mode(config, mode_index);
    const double w = config.modes[mode_index].frequency;
    std::vector<double> occ(config.reservoir_count());
    for (std::size_t j = 0; j < occ.size(); ++j) {
        occ[j] = bose_occupancy(w, config.reservoirs[j].temperature);
    }
    return occ;
}

std::vector<double> coupling_weights(const DeviceConfig& config, std::size_t mode_index) {
    require_mode(config, mode_index);
    const auto row = config.couplings.row(mode_index);
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (!(total > 0.0)) {
        throw InvalidConfig("mode " + std::to_string(mode_index) + " is isolated (all couplings zero)");
    }
    std::vector<double> p(row.size());
    std::transform(row.begin(), row.end(), p.begin(), [total](double g) { return g / total; });
    return p;
}

double weighted_occupancy(const DeviceConfig& config, std::size_t mode_index) {
    require_mode(config, mode_index);
    const auto occ = reservoir_occupancies(config, mode_index);
    return weighted_mean(config.couplings.row(mode_index), occ);
}

FlowReport stationary_flows(const DeviceConfig& config) {
    config.validate();
    const std::size_t modes = config.mode_count();
    const std::size_t reservoirs = config.reservoir_count();

    FlowReport report;
    report.per_channel = Matrix(modes, reservoirs);
    report.per_reservoir.assign(reservoirs, 0.0);
    for (std::size_t k = 0; k < modes; ++k) {
        const double w = config.modes[k].frequency;
        const auto occ = reservoir_occupancies(config, k);
        const auto gamma = config.couplings.row(k);
        const auto mean = weighted_offset(gamma, occ);
        for (std::size_t j = 0; j < reservoirs; ++j) {
            report.per_channel(k, j) = w * gamma[j] * ((occ[j] - mean.reference) - mean.offset);
        }
    }
    for (std::size_t j = 0; j < reservoirs; ++j) {
        for (std::size_t k = 0; k < modes; ++k) report.per_reservoir[j] += report.per_channel(k, j);
    }
    report.entropy_rate = entropy_production_rate(config, report);
    return report;
}

FlowReport stationary_flows_pairwise(const DeviceConfig& config) {
    config.validate();
    const std::size_t modes = config.mode_count();
    const std::size_t reservoirs = config.reservoir_count();

    FlowReport report;
    report.per_channel = Matrix(modes, reservoirs);
    report.per_reservoir.assign(reservoirs, 0.0);
    for (std::size_t k = 0; k < modes; ++k) {
        const double w = config.modes[k].frequency;
        const auto occ = reservoir_occupancies(config, k);
        const auto gamma = config.couplings.row(k);
        const double total = std::accumulate(gamma.begin(), gamma.end(), 0.0);
        for (std::size_t j = 0; j < reservoirs; ++j) {
            double acc = 0.0;
            for (std::size_t q = 0; q < reservoirs; ++q) {
                acc += gamma[j] * gamma[q] / total * (occ[j] - occ[q]);
            }
            report.per_channel(k, j) = w * acc;
        }
    }
    for (std::size_t j = 0; j < reservoirs; ++j) {
        for (std::size_t k = 0; k < modes; ++k) report.per_reservoir[j] += report.per_channel(k, j);
    }
    report.entropy_rate = entropy_production_rate(config, report);
    return report;
}

DrainApproximation drain_flow_approx(const DeviceConfig& config, std::size_t mode_index) {
    config.validate();
    require_mode(config, mode_index);
    const double w = config.modes[mode_index].frequency;
    const auto occ = reservoir_occupancies(config, mode_index);
    const auto p = coupling_weights(config, mode_index);
    const double drain_rate = config.couplings(mode_index, 0);

    double dot = 0.0;
    for (std::size_t q = 1; q < occ.size(); ++q) dot += p[q] * occ[q];

    DrainApproximation out;
    out.approximate = -w * drain_rate * dot;
    out.exact = w * drain_rate * (occ[0] - weighted_mean(config.couplings.row(mode_index), occ));
    out.discrepancy = std::abs(out.approximate - out.exact);
    return out;
}

double entropy_production_rate(const DeviceConfig& config, const FlowReport& flows) {
    if (flows.per_reservoir.size() != config.reservoir_count()) {
        throw DomainError("entropy_production_rate: flow report does not match config");
    }
    double sigma = 0.0;
    for (std::size_t j = 0; j < config.reservoir_count(); ++j) {
        const double t = config.reservoirs[j].temperature;
        if (!std::isfinite(t) || t < kTemperatureFloor) {
            throw DomainError("entropy_production_rate: temperature below floor");
        }
        sigma -= flows.per_reservoir[j] / t;
    }
    return sigma;
}

}  // namespace thermoflow::physics
