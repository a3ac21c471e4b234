#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mec/caching.hpp"

namespace mec::model {

enum class Tier { macro, small };
enum class Layout { uniform, hotspot };

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(Point a, Point b);

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

struct BaseStation {
    int id = 0;
    Tier tier = Tier::small;
    Point position;
    double p_max = 1.0;         // W
    int cache_size = 0;         // files
    double harvest = 0.0;       // W of renewable power in the slot
    double static_power = 0.0;  // W, reported only
};

struct UserEquipment {
    int id = 0;
    Point position;
};

/// Log-distance path loss: gain_dB = -(pl0_db + 10 * exponent * log10(d / ref_distance)).
struct PathLoss {
    double pl0_db = 128.1;
    double exponent = 3.76;
    double ref_distance = 1000.0;  // m
    double min_distance = 1.0;     // m
    double min_fade = 1e-9;

    double linear_gain(double d) const;
};

/// Gains h_ij stored row-major by station: gain(i, j) = gains[i * num_users + j].
class ChannelState {
  public:
    ChannelState() = default;
    ChannelState(std::size_t num_stations, std::size_t num_users, std::vector<double> gains,
                 double noise_power);

    double gain(std::size_t station, std::size_t user) const { return gains_[station * users_ + user]; }
    double noise_power() const { return noise_; }
    std::size_t num_stations() const { return stations_; }
    std::size_t num_users() const { return users_; }
    std::span<const double> gains() const { return gains_; }

  private:
    std::size_t stations_ = 0;
    std::size_t users_ = 0;
    std::vector<double> gains_;
    double noise_ = 1.0;
};

struct ScenarioConfig {
    int num_macro = 1;
    int num_small = 4;
    int num_users = 20;
    double area_side = 500.0;         // m, square centred on the macro station
    double inter_site_spacing = 250.0;  // m between neighbouring small stations
    Layout layout = Layout::uniform;
    double hotspot_fraction = 0.5;
    double hotspot_radius = 40.0;     // m

    double macro_power_dbm = 43.0;
    double small_power_dbm = 30.0;
    int macro_cache = 10;
    int small_cache = 5;
    double macro_harvest_max = 10.0;  // W, harvest drawn uniformly in [0, max]
    double small_harvest_max = 2.0;
    double macro_static_power = 60.0;
    double small_static_power = 1.5;

    double bandwidth = 40e6;            // Hz (2 x 20 MHz)
    double noise_density_dbm = -174.0;  // dBm/Hz
    double noise_figure_db = 5.0;

    PathLoss path_loss;

    int num_files = 20;
    double zipf_exponent = 0.8;

    void validate() const;
};

struct Scenario {
    std::vector<BaseStation> stations;
    std::vector<UserEquipment> users;
    caching::Catalog catalog;
    ChannelState channel;
    double bandwidth = 1.0;
    std::uint64_t seed = 0;

    std::size_t num_stations() const { return stations.size(); }
    std::size_t num_users() const { return users.size(); }
    std::vector<double> max_powers() const;
    std::vector<double> harvests() const;
};

Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed);

double channel_gain(const PathLoss& law, const BaseStation& station, const UserEquipment& user,
                    double fading_draw);

double sinr(std::size_t station, std::size_t user, std::span<const double> powers,
            const ChannelState& channel);

/// Shannon rate scaled by the cache-hit factor hit_prob^load: bits/s.
double rate(double sinr, int load, double hit_prob, double bandwidth);

/// Proportional-fairness utility, natural log of the rate.
double utility(double rate);

}  // namespace mec::model
