#include "mec/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mec/error.hpp"

namespace mec::model {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double PathLoss::linear_gain(double d) const {
    d = std::max(d, min_distance);
    const double loss_db = pl0_db + 10.0 * exponent * std::log10(d / ref_distance);
    return std::pow(10.0, -loss_db / 10.0);
}

ChannelState::ChannelState(std::size_t num_stations, std::size_t num_users, std::vector<double> gains,
                           double noise_power)
    : stations_(num_stations), users_(num_users), gains_(std::move(gains)), noise_(noise_power) {
    if (gains_.size() != stations_ * users_) throw InvalidConfig("gain table has wrong size");
    if (!(noise_ > 0.0)) throw InvalidConfig("noise power must be positive");
    for (double g : gains_)
        if (!(g > 0.0)) throw InvalidConfig("channel gains must be positive");
}

void ScenarioConfig::validate() const {
    if (num_macro < 0 || num_small < 0 || num_macro + num_small < 1)
        throw InvalidConfig("scenario needs at least one base station");
    if (num_users < 1) throw InvalidConfig("scenario needs at least one user");
    if (!(area_side > 0.0)) throw InvalidConfig("area_side must be positive");
    if (!(hotspot_fraction >= 0.0 && hotspot_fraction <= 1.0))
        throw InvalidConfig("hotspot_fraction must lie in [0, 1]");
    if (!(hotspot_radius > 0.0)) throw InvalidConfig("hotspot_radius must be positive");
    if (!(bandwidth > 0.0)) throw InvalidConfig("bandwidth must be positive");
    if (macro_cache < 0 || small_cache < 0) throw InvalidConfig("cache sizes must be nonnegative");
    if (macro_harvest_max < 0.0 || small_harvest_max < 0.0)
        throw InvalidConfig("harvest bounds must be nonnegative");
    if (num_files < 1) throw InvalidConfig("catalog needs at least one file");
    if (!(zipf_exponent >= 0.0)) throw InvalidConfig("zipf exponent must be nonnegative");
    if (!(path_loss.min_distance > 0.0 && path_loss.ref_distance > 0.0))
        throw InvalidConfig("path-loss distances must be positive");
}

std::vector<double> Scenario::max_powers() const {
    std::vector<double> p(stations.size());
    std::transform(stations.begin(), stations.end(), p.begin(), [](const BaseStation& s) { return s.p_max; });
    return p;
}

std::vector<double> Scenario::harvests() const {
    std::vector<double> e(stations.size());
    std::transform(stations.begin(), stations.end(), e.begin(), [](const BaseStation& s) { return s.harvest; });
    return e;
}

namespace {

std::vector<Point> small_cell_sites(int count, double spacing) {
    std::vector<Point> sites;
    if (count == 0) return sites;
    // Regular polygon around the macro whose neighbouring vertices are `spacing` apart.
    const double radius = count == 1 ? spacing : spacing / (2.0 * std::sin(std::numbers::pi / count));
    for (int k = 0; k < count; ++k) {
        const double angle = std::numbers::pi / 4.0 + 2.0 * std::numbers::pi * k / count;
        sites.push_back({radius * std::cos(angle), radius * std::sin(angle)});
    }
    return sites;
}

}  // namespace

Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
    config.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Scenario sc;
    sc.seed = seed;
    sc.bandwidth = config.bandwidth;
    sc.catalog.popularity = caching::zipf_popularity(static_cast<std::size_t>(config.num_files),
                                                     config.zipf_exponent);

    int next_id = 0;
    for (int m = 0; m < config.num_macro; ++m) {
        BaseStation bs;
        bs.id = next_id++;
        bs.tier = Tier::macro;
        bs.position = {m * 2.0 * config.inter_site_spacing, 0.0};
        bs.p_max = dbm_to_watts(config.macro_power_dbm);
        bs.cache_size = config.macro_cache;
        bs.static_power = config.macro_static_power;
        sc.stations.push_back(bs);
    }
    for (const Point& site : small_cell_sites(config.num_small, config.inter_site_spacing)) {
        BaseStation bs;
        bs.id = next_id++;
        bs.tier = Tier::small;
        bs.position = site;
        bs.p_max = dbm_to_watts(config.small_power_dbm);
        bs.cache_size = config.small_cache;
        bs.static_power = config.small_static_power;
        sc.stations.push_back(bs);
    }

    const double half = config.area_side / 2.0;
    auto uniform_point = [&] { return Point{-half + config.area_side * unit(rng), -half + config.area_side * unit(rng)}; };

    int hotspot_users = 0;
    Point centre;
    if (config.layout == Layout::hotspot) {
        hotspot_users = static_cast<int>(std::lround(config.hotspot_fraction * config.num_users));
        // Hotspots form around a small station when one exists.
        const std::size_t first_small = static_cast<std::size_t>(config.num_macro);
        const std::size_t pool = config.num_small > 0 ? static_cast<std::size_t>(config.num_small) : sc.stations.size();
        const std::size_t offset = config.num_small > 0 ? first_small : 0;
        std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
        centre = sc.stations[offset + pick(rng)].position;
    }
    for (int j = 0; j < config.num_users; ++j) {
        UserEquipment ue;
        ue.id = j;
        if (j < hotspot_users) {
            const double r = config.hotspot_radius * std::sqrt(unit(rng));
            const double a = 2.0 * std::numbers::pi * unit(rng);
            ue.position = {centre.x + r * std::cos(a), centre.y + r * std::sin(a)};
        } else {
            // Background users stay outside the hotspot disk so the configured fraction is exact.
            do {
                ue.position = uniform_point();
            } while (config.layout == Layout::hotspot && distance(ue.position, centre) <= config.hotspot_radius);
        }
        sc.users.push_back(ue);
    }

    for (BaseStation& bs : sc.stations) {
        const double cap = bs.tier == Tier::macro ? config.macro_harvest_max : config.small_harvest_max;
        bs.harvest = cap * unit(rng);
    }

    std::exponential_distribution<double> fading(1.0);
    std::vector<double> gains(sc.stations.size() * sc.users.size());
    for (std::size_t i = 0; i < sc.stations.size(); ++i)
        for (std::size_t j = 0; j < sc.users.size(); ++j)
            gains[i * sc.users.size() + j] = channel_gain(config.path_loss, sc.stations[i], sc.users[j], fading(rng));

    const double noise_dbm = config.noise_density_dbm + 10.0 * std::log10(config.bandwidth) + config.noise_figure_db;
    sc.channel = ChannelState(sc.stations.size(), sc.users.size(), std::move(gains), dbm_to_watts(noise_dbm));
    return sc;
}

double channel_gain(const PathLoss& law, const BaseStation& station, const UserEquipment& user,
                    double fading_draw) {
    return law.linear_gain(distance(station.position, user.position)) * std::max(fading_draw, law.min_fade);
}

double sinr(std::size_t station, std::size_t user, std::span<const double> powers,
            const ChannelState& channel) {
    double interference = 0.0;
    for (std::size_t k = 0; k < powers.size(); ++k)
        if (k != station) interference += powers[k] * channel.gain(k, user);
    return powers[station] * channel.gain(station, user) / (interference + channel.noise_power());
}

double rate(double sinr, int load, double hit_prob, double bandwidth) {
    if (load < 1) throw DomainError("rate requested from a station with no associated users");
    if (!(hit_prob >= 0.0 && hit_prob <= 1.0)) throw DomainError("hit probability outside [0, 1]");
    if (!(sinr >= 0.0)) throw DomainError("negative SINR");
    return std::pow(hit_prob, load) * (bandwidth / load) * std::log2(1.0 + sinr);
}

double utility(double rate) {
    if (!(rate > 0.0)) throw DomainError("utility is undefined for a nonpositive rate");
    return std::log(rate);
}

}  // namespace mec::model
