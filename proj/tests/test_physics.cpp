#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>

#include "support.hpp"
#include "thermoflow/errors.hpp"
#include "thermoflow/physics.hpp"

using namespace thermoflow;
using namespace thermoflow::physics;
using thermoflow::testing::config_with_occupancies;
using thermoflow::testing::random_config;
using thermoflow::testing::reference_occupancy;
using thermoflow::testing::relative_diff;

TEST_CASE("bose_occupancy: exact, suppressed and high-temperature points") {
    CHECK(bose_occupancy(1.0, 1.0 / std::log(2.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(bose_occupancy(1.0, 1e-6) == 0.0);

    // 50-digit value of 1/(exp(0.001) - 1), frozen and re-derived.
    const double frozen = 999.5000833333319444;
    CHECK(reference_occupancy(1.0, 1000.0) == doctest::Approx(frozen).epsilon(1e-16));
    CHECK(relative_diff(bose_occupancy(1.0, 1000.0), frozen) < 1e-14);
}

TEST_CASE("bose_occupancy: agrees with the 50-digit oracle across six decades of w/T") {
    for (double x = 1e-6; x < 600.0; x *= 1.7) {
        const double n = bose_occupancy(x, 1.0);
        const double ref = reference_occupancy(x, 1.0);
        if (ref < kOccupancyFlush) {
            CHECK(n == 0.0);
        } else {
            CHECK(relative_diff(n, ref) < 1e-14);
        }
    }
}

TEST_CASE("bose_occupancy: domain errors") {
    CHECK_THROWS_AS(bose_occupancy(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(bose_occupancy(-1.0, 1.0), DomainError);
    CHECK_THROWS_AS(bose_occupancy(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(bose_occupancy(1.0, std::nan("")), DomainError);
}

TEST_CASE("inverse_temperature: examples and round trip") {
    CHECK(inverse_temperature(1.0, 1.0) == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-15));
    CHECK(inverse_temperature(2.0, 1.0) == doctest::Approx(2.0 / std::log(2.0)).epsilon(1e-15));
    CHECK(inverse_temperature(1.0, 0.01) == doctest::Approx(0.2166790653355316818).epsilon(1e-15));
    CHECK(relative_diff(bose_occupancy(1.0, inverse_temperature(1.0, 0.01)), 0.01) < 1e-12);

    CHECK_THROWS_AS(inverse_temperature(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(inverse_temperature(1.0, -2.0), DomainError);
    CHECK_THROWS_AS(inverse_temperature(0.0, 1.0), DomainError);
}

TEST_CASE("property: occupancy round trip over b in [1e-6, 1e6]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> exponent(-6.0, 6.0);
    std::uniform_real_distribution<double> freq(0.01, 10.0);
    double worst = 0.0;
    for (int i = 0; i < 5000; ++i) {
        const double b = std::pow(10.0, exponent(rng));
        const double w = freq(rng);
        worst = std::max(worst, relative_diff(bose_occupancy(w, inverse_temperature(w, b)), b));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("coupling_weights: normalisation examples") {
    const auto weights_for = [](std::vector<double> gamma) {
        std::vector<double> occ(gamma.size(), 1.0);
        return coupling_weights(config_with_occupancies(1.0, gamma, occ), 0);
    };
    auto p = weights_for({1.0, 1.0});
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);

    p = weights_for({0.0, 3.0, 1.0});
    CHECK(p[0] == 0.0);
    CHECK(p[1] == 0.75);
    CHECK(p[2] == 0.25);

    // Exact rational oracle: (1/10000, 3/10, 7/10) / (10001/10000).
    using boost::multiprecision::cpp_rational;
    const std::vector<cpp_rational> exact{cpp_rational(1, 10000), cpp_rational(3, 10), cpp_rational(7, 10)};
    const cpp_rational sum = exact[0] + exact[1] + exact[2];
    p = weights_for({1e-4, 0.3, 0.7});
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(relative_diff(p[j], static_cast<double>(exact[j] / sum)) < 1e-15);
    }
    CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) <= 1e-15);
}

TEST_CASE("coupling_weights: an all-zero row is an invalid config") {
    auto config = config_with_occupancies(1.0, {1.0, 1.0}, {0.0, 1.0});
    config.couplings(0, 0) = 0.0;
    config.couplings(0, 1) = 0.0;
    CHECK_THROWS_AS(coupling_weights(config, 0), InvalidConfig);
    CHECK_THROWS_AS(config.validate(), InvalidConfig);
}

TEST_CASE("weighted_occupancy: convex combinations") {
    CHECK(weighted_occupancy(config_with_occupancies(1.0, {1.0, 1.0}, {0.2, 0.4}), 0) ==
          doctest::Approx(0.3).epsilon(1e-14));
    CHECK(weighted_occupancy(config_with_occupancies(1.0, {0.1, 0.9}, {0.0, 1.0}), 0) ==
          doctest::Approx(0.9).epsilon(1e-14));

    auto equal = config_with_occupancies(1.5, {0.3, 0.2, 0.5}, {0.0, 1.0, 1.0});
    for (auto& r : equal.reservoirs) r.temperature = 2.0;
    CHECK(weighted_occupancy(equal, 0) == bose_occupancy(1.5, 2.0));
}

TEST_CASE("stationary_flows: worked examples") {
    SUBCASE("equilibrium gives identically zero flows") {
        auto config = config_with_occupancies(1.0, {0.3, 0.2, 0.5}, {0.0, 1.0, 1.0});
        for (auto& r : config.reservoirs) r.temperature = 0.7;
        const auto flows = stationary_flows(config);
        for (std::size_t j = 0; j < 3; ++j) CHECK(flows.per_channel(0, j) == 0.0);
        CHECK(flows.entropy_rate == 0.0);
    }
    SUBCASE("two reservoirs, occupancies (0, 1)") {
        const auto flows = stationary_flows(config_with_occupancies(1.0, {1.0, 1.0}, {0.0, 1.0}));
        CHECK(flows.per_channel(0, 0) == doctest::Approx(-0.5).epsilon(1e-14));
        CHECK(flows.per_channel(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(flows.entropy_rate > 0.0);
    }
    SUBCASE("three reservoirs, w = 2, gamma = (1, 2, 1), occupancies (0, 1, 0.5)") {
        // n~ = (0 + 2 + 0.5)/4 = 0.625; J = 2 gamma (n - n~) = (-1.25, 1.5, -0.25).
        const auto config = config_with_occupancies(2.0, {1.0, 2.0, 1.0}, {0.0, 1.0, 0.5});
        CHECK(weighted_occupancy(config, 0) == doctest::Approx(0.625).epsilon(1e-14));
        const auto flows = stationary_flows(config);
        CHECK(flows.per_channel(0, 0) == doctest::Approx(-1.25).epsilon(1e-14));
        CHECK(flows.per_channel(0, 1) == doctest::Approx(1.5).epsilon(1e-14));
        CHECK(flows.per_channel(0, 2) == doctest::Approx(-0.25).epsilon(1e-14));
        CHECK(std::abs(flows.per_reservoir[0] + flows.per_reservoir[1] + flows.per_reservoir[2]) < 1e-14);
    }
}

TEST_CASE("stationary_flows_pairwise: matches the direct form") {
    const std::vector<std::pair<std::vector<double>, std::vector<double>>> cases{
        {{1.0, 1.0}, {0.0, 1.0}}, {{1.0, 2.0, 1.0}, {0.0, 1.0, 0.5}}, {{0.3, 0.2, 0.5}, {0.0, 2.0, 3.0}}};
    for (const auto& [gamma, occ] : cases) {
        const auto config = config_with_occupancies(2.0, gamma, occ);
        const auto direct = stationary_flows(config);
        const auto pairwise = stationary_flows_pairwise(config);
        for (std::size_t j = 0; j < gamma.size(); ++j) {
            CHECK(pairwise.per_channel(0, j) == doctest::Approx(direct.per_channel(0, j)).epsilon(1e-13));
        }
    }
    // Two-term reduction: J1 = w g1 g2/(g1+g2) (n1 - n2).
    const double g1 = 0.3;
    const double g2 = 1.7;
    const auto config = config_with_occupancies(1.5, {g2, g1}, {0.25, 2.0});
    const auto flows = stationary_flows_pairwise(config);
    const double expected = 1.5 * g1 * g2 / (g1 + g2) * (2.0 - 0.25);
    CHECK(flows.per_channel(0, 1) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("drain_flow_approx: exact limit, worked example and error budget") {
    // Drain occupancy 0: the approximation is exact.
    const auto exact_case = config_with_occupancies(2.0, {1.0, 2.0, 1.0}, {0.0, 1.0, 0.5});
    auto d = drain_flow_approx(exact_case, 0);
    CHECK(d.approximate == doctest::Approx(-1.25).epsilon(1e-14));
    CHECK(d.exact == doctest::Approx(-1.25).epsilon(1e-14));
    CHECK(d.discrepancy < 1e-14);

    // Warm drain n0 = 1e-3 and gamma0/sum = 1e-2. Error budget:
    // exact/(w g0) = n0 (1 - p0) - s, approx/(w g0) = -s, s = sum_{q>=1} p_q n_q.
    const double n0 = 1e-3;
    const auto warm = config_with_occupancies(1.0, {1.0, 49.5, 49.5}, {n0, 1.0, 2.0});
    d = drain_flow_approx(warm, 0);
    const double p0 = 0.01;
    const double s = 0.495 * 1.0 + 0.495 * 2.0;
    const double budget = n0 * (1.0 - p0) / (s - n0 * (1.0 - p0));
    CHECK(d.discrepancy / std::abs(d.exact) == doctest::Approx(budget).epsilon(1e-9));
    CHECK(d.discrepancy / std::abs(d.exact) < 2e-3);
}

TEST_CASE("entropy_production_rate: zero at equilibrium, positive out of it, floor enforced") {
    auto config = config_with_occupancies(1.0, {1.0, 1.0}, {0.0, 1.0});
    const auto flows = stationary_flows(config);
    CHECK(entropy_production_rate(config, flows) > 0.0);

    config.reservoirs[0].temperature = 0.5 * kTemperatureFloor;
    CHECK_THROWS_AS(entropy_production_rate(config, flows), DomainError);
}

TEST_CASE("property: conservation, bounds, sign, form equivalence and second law") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto config = random_config(rng);
        const auto flows = stationary_flows(config);
        const auto pairwise = stationary_flows_pairwise(config);

        double total = 0.0;
        double scale = 0.0;
        double entropy_scale = 0.0;
        for (std::size_t j = 0; j < config.reservoir_count(); ++j) {
            total += flows.per_reservoir[j];
            scale += std::abs(flows.per_reservoir[j]);
            entropy_scale += std::abs(flows.per_reservoir[j] / config.reservoirs[j].temperature);
        }
        REQUIRE(std::abs(total) <= 1e-12 * scale);
        REQUIRE(flows.entropy_rate >= -1e-12 * entropy_scale);

        for (std::size_t k = 0; k < config.mode_count(); ++k) {
            const auto occ = reservoir_occupancies(config, k);
            const double mean = weighted_occupancy(config, k);
            REQUIRE(mean >= *std::min_element(occ.begin(), occ.end()));
            REQUIRE(mean <= *std::max_element(occ.begin(), occ.end()));
            const auto p = coupling_weights(config, k);
            for (std::size_t j = 0; j < occ.size(); ++j) {
                const double j_direct = flows.per_channel(k, j);
                if (j_direct > 0.0) REQUIRE(occ[j] > mean);
                if (j_direct < 0.0) REQUIRE(occ[j] < mean);

                double terms = 0.0;
                for (std::size_t q = 0; q < occ.size(); ++q) terms += p[q] * std::abs(occ[j] - occ[q]);
                terms *= config.modes[k].frequency * config.couplings(k, j);
                const double rel_scale = std::max(std::abs(j_direct), terms);
                REQUIRE(std::abs(j_direct - pairwise.per_channel(k, j)) <= 1e-12 * rel_scale);
            }
        }
    }
}

TEST_CASE("property: scaling one mode's couplings scales its flows and keeps n~") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> factor(0.01, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
        auto config = random_config(rng);
        const auto before = stationary_flows(config);
        const double mean_before = weighted_occupancy(config, 0);
        const double c = factor(rng);
        for (double& g : config.couplings.row(0)) g *= c;
        const auto after = stationary_flows(config);
        CHECK(relative_diff(weighted_occupancy(config, 0), mean_before) < 1e-13);
        for (std::size_t j = 0; j < config.reservoir_count(); ++j) {
            const double expected = c * before.per_channel(0, j);
            CHECK(std::abs(after.per_channel(0, j) - expected) <= 1e-12 * std::abs(c) *
                  (std::abs(before.per_channel(0, j)) + config.modes[0].frequency * config.couplings(0, j) / c *
                   std::abs(mean_before)));
        }
    }
}

TEST_CASE("DeviceConfig::validate rejects structural violations") {
    auto base = config_with_occupancies(1.0, {1.0, 1.0}, {0.0, 1.0});
    auto config = base;
    config.reservoirs[0].is_drain = false;
    CHECK_THROWS_AS(config.validate(), InvalidConfig);

    config = base;
    config.reservoirs[1].is_drain = true;
    CHECK_THROWS_AS(config.validate(), InvalidConfig);

    config = base;
    config.couplings(0, 1) = -1.0;
    CHECK_THROWS_AS(config.validate(), InvalidConfig);

    config = base;
    config.modes[0].frequency = 0.0;
    CHECK_THROWS_AS(config.validate(), InvalidConfig);

    config = base;
    config.reservoirs[1].temperature = 1e-12;
    CHECK_THROWS_AS(config.validate(), InvalidConfig);

    config = base;
    config.couplings = Matrix(1, 3, 1.0);
    CHECK_THROWS_AS(stationary_flows(config), InvalidConfig);
}
