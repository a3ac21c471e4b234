#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mec/association.hpp"
#include "mec/error.hpp"
#include "oracles.hpp"

using namespace mec;
using namespace mec::association;

namespace {

Problem random_problem(std::mt19937_64& rng, std::size_t stations, std::size_t users) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Problem p;
    p.num_stations = stations;
    p.num_users = users;
    p.gamma_min = 0.1;
    for (std::size_t i = 0; i < stations; ++i) p.hit.push_back(0.3 + 0.7 * u(rng));
    for (std::size_t n = 0; n < stations * users; ++n) {
        const double g = std::pow(10.0, 3.0 * u(rng) - 0.5);
        p.sinr.push_back(g);
        p.capacity.push_back(1e6 * std::log2(1.0 + g));
    }
    return p;
}

Problem symmetric_problem() {
    Problem p;
    p.num_stations = 2;
    p.num_users = 4;
    p.gamma_min = 0.1;
    p.hit = {0.7, 0.7};
    for (int n = 0; n < 8; ++n) {
        p.sinr.push_back(3.0);
        p.capacity.push_back(2e6);
    }
    return p;
}

}  // namespace

TEST_CASE("lambert W spot values") {
    CHECK(lambert_w0(0.0) == 0.0);
    CHECK(std::abs(lambert_w0(std::numbers::e) - 1.0) <= 1e-12);
    CHECK(std::abs(lambert_w0(1.0) - 0.567143290409783873) <= 1e-15);
    CHECK(std::abs(lambert_w0(1.0) - oracle::lambert_w0(1.0)) <= 1e-15);
    CHECK_THROWS_AS(lambert_w0(-0.1), DomainError);
}

TEST_CASE("lambert W round trip on a log grid") {
    for (int n = 0; n < 2000; ++n) {
        const double z = std::pow(10.0, -12.0 + 18.0 * n / 1999.0);
        const double w = lambert_w0(z);
        CHECK(std::abs(w * std::exp(w) - z) <= 1e-12 * std::max(1.0, z));
        CHECK(std::abs(w - oracle::lambert_w0(z)) <= 1e-13 * std::max(1.0, w));
    }
}

TEST_CASE("lambert W for exponent arguments beyond double range") {
    for (double lz : {-30.0, 0.0, 5.0, 699.0, 701.0, 1e4, 1e8}) {
        const double w = lambert_w0_exp(lz);
        CHECK(std::abs(w + std::log(w) - lz) <= 1e-12 * std::max(1.0, std::abs(lz)));
    }
}

TEST_CASE("optimal_k examples and stationarity") {
    CHECK(optimal_k(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(optimal_k(std::exp(-0.5), 1.0) == doctest::Approx(0.567143290409783873).epsilon(1e-13));
    CHECK_THROWS_AS(optimal_k(0.0, 1.0), DomainError);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n = 0; n < 500; ++n) {
        const double s = 1e-3 + (1.0 - 1e-3) * u(rng);
        const double nu = -5.0 + 25.0 * u(rng);
        const double k = optimal_k(s, nu);
        CHECK(std::abs(2 * k * std::log(s) - std::log(k) - 1 + nu) <= 1e-9);
        CHECK(2 * std::log(s) - 1 / k < 0.0);
    }
}

TEST_CASE("station dual term is the maximum over k") {
    for (double s : {0.2, 0.6, 1.0})
        for (double nu : {-1.0, 0.5, 3.0}) {
            const double best = station_dual_term(s, nu);
            for (double k = 0.01; k < 30.0; k += 0.01)
                CHECK(k * k * std::log(s) - k * std::log(k) + nu * k <= best + 1e-12);
        }
}

TEST_CASE("associate_user scores") {
    std::vector<double> nu1{0.0};
    CHECK(associate_user(std::vector<double>{5.0}, std::vector<double>{0.1}, 7.0, std::vector<double>{9.0}) == 0);
    CHECK(associate_user(std::vector<double>{2.0, 2.0}, std::vector<double>{1.0, 1.0}, 0.0,
                         std::vector<double>{0.1, 0.2}) == 0);
    CHECK(associate_user(std::vector<double>{2.0, 2.0}, std::vector<double>{1.0, 1.0}, 0.0,
                         std::vector<double>{0.3, 0.2}) == 1);
    const std::vector<double> cap{std::exp(1.0), std::exp(2.0), 1.0};
    const std::vector<double> gam{2.0, 1.0, 3.0};
    CHECK(associate_user(cap, gam, 1.0, std::vector<double>{0, 0, 0}) == 0);
    CHECK(associate_user(std::vector<double>{0.0, 3.0}, std::vector<double>{9.0, 1.0}, 5.0,
                         std::vector<double>{0, 0}) == 1);
    CHECK_THROWS_AS(associate_user(std::vector<double>{0.0}, std::vector<double>{1.0}, 0.0, nu1), Infeasible);
}

TEST_CASE("associate_user is invariant under a common shift of the scores") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n = 0; n < 200; ++n) {
        std::vector<double> cap(4), gam(4), nu(4), shifted(4);
        for (int i = 0; i < 4; ++i) {
            cap[i] = 1.0 + 10 * u(rng);
            gam[i] = u(rng);
            nu[i] = u(rng);
            shifted[i] = nu[i] + 0.75;
        }
        CHECK(associate_user(cap, gam, 0.3, nu) == associate_user(cap, gam, 0.3, shifted));
    }
}

TEST_CASE("subgradient step examples") {
    Problem p;
    p.num_stations = 1;
    p.num_users = 1;
    p.gamma_min = 0.5;
    p.sinr = {0.5};
    p.capacity = {1.0};
    p.hit = {1.0};
    DualState s = DualState::initial(1, 1, 1.0);
    s.mu = {0.3};
    s.nu = {2.0};
    const std::vector<std::size_t> serving{0};
    const std::vector<int> loads{1};
    auto next = subgradient_step(s, p, serving, std::vector<double>{1.0}, loads, 1.0);
    CHECK(next.mu[0] == 0.3);
    CHECK(next.nu[0] == 2.0);
    CHECK(next.t == 1);

    p.sinr = {1.0};
    s.mu = {0.1};
    next = subgradient_step(s, p, serving, std::vector<double>{1.0}, loads, 1.0);
    CHECK(next.mu[0] == 0.0);

    s.step = 0.5;
    next = subgradient_step(s, p, serving, std::vector<double>{2.0}, loads, 1.0);
    CHECK(next.nu[0] == doctest::Approx(1.5));
    CHECK(next.step == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("multipliers stay nonnegative through a solve") {
    std::mt19937_64 rng(8);
    const auto p = random_problem(rng, 3, 6);
    SolverParams params;
    const auto r = solve(p, params);
    for (double m : r.dual.mu) CHECK(m >= 0.0);
    for (double n : r.dual.nu) CHECK(n >= 0.0);
    CHECK(r.iterations >= 1);
    CHECK(r.history.size() == static_cast<std::size_t>(r.iterations));
}

TEST_CASE("single station takes every user") {
    std::mt19937_64 rng(1);
    const auto p = random_problem(rng, 1, 5);
    SolverParams params;
    params.max_iter = 2000;
    const auto r = solve(p, params);
    CHECK(r.loads[0] == 5);
    CHECK(std::isfinite(r.dual_value));
    CHECK(std::abs(r.k[0] - 5.0) < 0.5);
    const auto bf = brute_force(p);
    CHECK(bf.value == doctest::Approx(r.primal_objective).epsilon(1e-14));
}

TEST_CASE("symmetric geometry splits the load evenly") {
    const auto r = solve(symmetric_problem(), SolverParams{});
    CHECK(r.loads[0] + r.loads[1] == 4);
    const auto bf = brute_force(symmetric_problem());
    const auto loads = station_loads(bf.serving, 2);
    CHECK(loads[0] == 2);
    CHECK(loads[1] == 2);
}

TEST_CASE("two stations two users enumerates four assignments") {
    std::mt19937_64 rng(2);
    const auto p = random_problem(rng, 2, 2);
    double best = -1e300;
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
            const std::vector<std::size_t> s{a, b};
            if (p.gamma(a, 0) >= p.gamma_min && p.gamma(b, 1) >= p.gamma_min) best = std::max(best, objective(p, s));
        }
    CHECK(brute_force(p).value == best);
}

TEST_CASE("weak duality and primal gap on random instances") {
    std::mt19937_64 rng(42);
    int close = 0;
    for (int n = 0; n < 30; ++n) {
        const auto p = random_problem(rng, 3, 6);
        const auto r = solve(p, SolverParams{});
        const auto bf = brute_force(p);
        REQUIRE(bf.feasible);
        CHECK(r.dual_value >= bf.value - 1e-8);
        for (const auto& rec : r.history) CHECK(rec.dual_value >= bf.value - 1e-8);
        close += std::abs(r.primal_objective - bf.value) <= 0.05 * std::abs(bf.value);
    }
    CHECK(close >= 27);
}

TEST_CASE("parallel brute force equals the serial reference") {
    std::mt19937_64 rng(77);
    for (int n = 0; n < 10; ++n) {
        const auto p = random_problem(rng, 3, 7);
        const auto a = brute_force(p);
        const auto b = brute_force_serial(p);
        CHECK(a.value == b.value);
        CHECK(a.serving == b.serving);
    }
}

TEST_CASE("brute force guard") {
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(brute_force(random_problem(rng, 5, 10)), GuardError);
}

TEST_CASE("solve is bit-reproducible") {
    std::mt19937_64 r1(5), r2(5);
    const auto a = solve(random_problem(r1, 3, 6), SolverParams{});
    const auto b = solve(random_problem(r2, 3, 6), SolverParams{});
    CHECK(a.serving == b.serving);
    CHECK(a.dual_value == b.dual_value);
    CHECK(a.dual.nu == b.dual.nu);
}

TEST_CASE("solver errors") {
    Problem p;
    p.num_stations = 1;
    p.num_users = 1;
    p.capacity = {0.0};
    p.sinr = {0.0};
    p.hit = {0.0};
    CHECK_THROWS_AS(solve(p, SolverParams{}), Infeasible);
    SolverParams bad;
    bad.max_iter = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidConfig);
}
