#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mec/error.hpp"
#include "mec/model.hpp"

using namespace mec;
using namespace mec::model;

TEST_CASE("generate_scenario is reproducible for a fixed seed") {
    ScenarioConfig cfg;
    const auto a = generate_scenario(cfg, 7);
    const auto b = generate_scenario(cfg, 7);
    CHECK(a.num_stations() == 5);
    CHECK(a.num_users() == 20);
    for (std::size_t j = 0; j < a.num_users(); ++j) {
        CHECK(a.users[j].position.x == b.users[j].position.x);
        CHECK(a.users[j].position.y == b.users[j].position.y);
    }
    for (std::size_t i = 0; i < a.channel.gains().size(); ++i) CHECK(a.channel.gains()[i] == b.channel.gains()[i]);
    for (std::size_t i = 0; i < a.num_stations(); ++i) CHECK(a.stations[i].harvest == b.stations[i].harvest);
}

TEST_CASE("different seeds move the users") {
    ScenarioConfig cfg;
    const auto a = generate_scenario(cfg, 1);
    const auto b = generate_scenario(cfg, 2);
    int moved = 0;
    for (std::size_t j = 0; j < a.num_users(); ++j) moved += a.users[j].position.x != b.users[j].position.x;
    CHECK(moved > 0);
}

TEST_CASE("hotspot layout puts the configured fraction inside the radius") {
    ScenarioConfig cfg;
    cfg.layout = Layout::hotspot;
    cfg.hotspot_fraction = 0.5;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto sc = generate_scenario(cfg, seed);
        int best = 0;
        for (std::size_t i = 1; i < sc.num_stations(); ++i) {
            int inside = 0;
            for (const auto& u : sc.users) inside += distance(u.position, sc.stations[i].position) <= cfg.hotspot_radius;
            best = std::max(best, inside);
        }
        CHECK(best == 10);
    }
}

TEST_CASE("scenario config errors") {
    ScenarioConfig cfg;
    cfg.num_users = 0;
    CHECK_THROWS_AS(generate_scenario(cfg, 1), InvalidConfig);
    cfg = {};
    cfg.num_macro = 0;
    cfg.num_small = 0;
    CHECK_THROWS_AS(generate_scenario(cfg, 1), InvalidConfig);
}

TEST_CASE("stations carry the configured physical values") {
    const auto sc = generate_scenario({}, 3);
    CHECK(sc.stations[0].tier == Tier::macro);
    CHECK(sc.stations[0].p_max == doctest::Approx(19.952623149688797).epsilon(1e-14));
    CHECK(sc.stations[1].p_max == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t i = 1; i < 5; ++i) {
        const double d = distance(sc.stations[i].position, sc.stations[i % 4 + 1].position);
        CHECK(d == doctest::Approx(250.0).epsilon(1e-12));
    }
    for (const auto& s : sc.stations) CHECK(s.harvest >= 0.0);
    // -174 dBm/Hz + 76.02 dB + 5 dB
    CHECK(watts_to_dbm(sc.channel.noise_power()) == doctest::Approx(-174.0 + 10 * std::log10(40e6) + 5.0));
}

TEST_CASE("path-loss law") {
    PathLoss law;
    CHECK(law.linear_gain(1000.0) == doctest::Approx(std::pow(10.0, -12.81)).epsilon(1e-12));
    CHECK(law.linear_gain(200.0) / law.linear_gain(100.0) == doctest::Approx(std::pow(2.0, -3.76)).epsilon(1e-12));
    CHECK(law.linear_gain(0.0) == law.linear_gain(1.0));
    BaseStation bs;
    UserEquipment ue;
    ue.position = {1000.0, 0.0};
    CHECK(channel_gain(law, bs, ue, 1.0) == doctest::Approx(law.linear_gain(1000.0)).epsilon(1e-15));
    CHECK(channel_gain(law, bs, ue, 0.0) > 0.0);
}

TEST_CASE("sinr examples") {
    ChannelState one(1, 1, {1.0}, 1.0);
    std::vector<double> p{1.0};
    CHECK(sinr(0, 0, p, one) == doctest::Approx(1.0));
    ChannelState two(2, 1, {1.0, 1.0}, 1.0);
    std::vector<double> q{1.0, 1.0};
    CHECK(sinr(0, 0, q, two) == doctest::Approx(0.5));
    q[0] = 0.0;
    CHECK(sinr(0, 0, q, two) == 0.0);
}

TEST_CASE("sinr monotonicity and bound") {
    const auto sc = generate_scenario({}, 11);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> p(sc.num_stations());
        for (double& x : p) x = u(rng);
        for (std::size_t i = 0; i < sc.num_stations(); ++i)
            for (std::size_t j = 0; j < sc.num_users(); ++j) {
                const double g = sinr(i, j, p, sc.channel);
                CHECK(g >= 0.0);
                CHECK(g <= p[i] * sc.channel.gain(i, j) / sc.channel.noise_power() * (1 + 1e-12));
                auto up = p;
                up[i] *= 1.5;
                CHECK(sinr(i, j, up, sc.channel) >= g);
                auto loud = p;
                loud[(i + 1) % p.size()] += 0.5;
                CHECK(sinr(i, j, loud, sc.channel) <= g);
            }
    }
}

TEST_CASE("rate examples") {
    CHECK(rate(1.0, 1, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(rate(5.0, 3, 0.0, 1.0) == 0.0);
    CHECK(rate(3.0, 2, 0.5, 40e6) == doctest::Approx(10e6).epsilon(1e-14));
    CHECK_THROWS_AS(rate(1.0, 0, 1.0, 1.0), DomainError);
}

TEST_CASE("rate monotonicity") {
    for (double s : {0.1, 0.5, 0.9}) {
        for (int k = 1; k < 10; ++k) {
            CHECK(rate(2.0, k + 1, s, 1.0) < rate(2.0, k, s, 1.0));
            CHECK(rate(2.0, k, s + 0.05, 1.0) >= rate(2.0, k, s, 1.0));
            CHECK(rate(2.5, k, s, 1.0) >= rate(2.0, k, s, 1.0));
        }
    }
}

TEST_CASE("utility examples") {
    CHECK(utility(1.0) == 0.0);
    CHECK(utility(std::exp(1.0)) == doctest::Approx(1.0));
    CHECK(utility(1e7) == doctest::Approx(16.11809565095832).epsilon(1e-12));
    CHECK_THROWS_AS(utility(0.0), DomainError);
    CHECK_THROWS_AS(utility(-1.0), DomainError);
}

TEST_CASE("channel state validation") {
    CHECK_THROWS_AS(ChannelState(1, 1, {0.0}, 1.0), InvalidConfig);
    CHECK_THROWS_AS(ChannelState(1, 1, {1.0}, 0.0), InvalidConfig);
    CHECK_THROWS_AS(ChannelState(2, 1, {1.0}, 1.0), InvalidConfig);
}
