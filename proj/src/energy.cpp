#include "mec/energy.hpp"

#include <algorithm>
#include <numeric>

#include "mec/error.hpp"

namespace mec::energy {

double EnergyProfile::inflow(std::size_t station) const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k)
        if (k != station) s += transfer(k, station);
    return s;
}

double EnergyProfile::outflow(std::size_t station) const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k)
        if (k != station) s += transfer(station, k);
    return s;
}

double EnergyProfile::total_grid() const { return std::accumulate(grid.begin(), grid.end(), 0.0); }

std::string to_string(PowerConstraint c) {
    switch (c) {
        case PowerConstraint::budget: return "budget";
        case PowerConstraint::power_range: return "power_range";
        case PowerConstraint::nonnegativity: return "nonnegativity";
        case PowerConstraint::efficiency: return "efficiency";
    }
    return "unknown";
}

std::vector<PowerViolation> check_power_constraints(std::span<const double> powers,
                                                    const EnergyProfile& profile,
                                                    std::span<const double> harvests,
                                                    std::span<const double> caps) {
    const std::size_t n = powers.size();
    if (profile.size() != n || harvests.size() != n || caps.size() != n || profile.shared.size() != n * n)
        throw InvalidConfig("power constraint inputs have mismatched dimensions");
    std::vector<PowerViolation> out;
    if (profile.beta < 0.0 || profile.beta > 1.0)
        out.push_back({0, PowerConstraint::efficiency, profile.beta < 0.0 ? -profile.beta : profile.beta - 1.0});
    for (std::size_t i = 0; i < n; ++i) {
        if (powers[i] < 0.0) out.push_back({i, PowerConstraint::power_range, -powers[i]});
        if (powers[i] > caps[i]) out.push_back({i, PowerConstraint::power_range, powers[i] - caps[i]});
        if (profile.grid[i] < 0.0) out.push_back({i, PowerConstraint::nonnegativity, -profile.grid[i]});
        for (std::size_t k = 0; k < n; ++k) {
            const double e = profile.transfer(i, k);
            if (e < 0.0 || (k == i && e != 0.0))
                out.push_back({i, PowerConstraint::nonnegativity, std::abs(e)});
        }
        const double budget = profile.grid[i] + harvests[i] + profile.beta * profile.inflow(i) - profile.outflow(i);
        if (powers[i] == 0.0) continue;  // a silent station needs no supply
        const double excess = powers[i] - (budget - kStrictMargin);
        // Relative slack keeps rounding in the budget sum from being reported.
        if (excess > 1e-12 * std::max(1.0, std::abs(budget))) out.push_back({i, PowerConstraint::budget, excess});
    }
    return out;
}

namespace {

void check_inputs(std::span<const double> powers, std::span<const double> harvests, double beta) {
    if (powers.size() != harvests.size()) throw InvalidConfig("powers and harvests differ in length");
    if (beta < 0.0 || beta > 1.0) throw InvalidConfig("sharing efficiency must lie in [0, 1]");
    for (std::size_t i = 0; i < powers.size(); ++i)
        if (powers[i] < 0.0 || harvests[i] < 0.0) throw InvalidConfig("powers and harvests must be nonnegative");
}

// Supply still missing after the station's own harvest; negative means surplus.
double need(double power, double harvest) { return power > 0.0 ? power + kStrictMargin - harvest : -harvest; }

}  // namespace

EnergyProfile standalone_grid_power(std::span<const double> powers, std::span<const double> harvests,
                                    double beta, double eta) {
    check_inputs(powers, harvests, beta);
    const std::size_t n = powers.size();
    EnergyProfile prof;
    prof.beta = beta;
    prof.eta = eta;
    prof.shared.assign(n * n, 0.0);
    prof.grid.resize(n);
    for (std::size_t i = 0; i < n; ++i) prof.grid[i] = std::max(0.0, need(powers[i], harvests[i]));
    return prof;
}

EnergyProfile min_grid_power(std::span<const double> powers, std::span<const double> harvests, double beta,
                             double eta) {
    EnergyProfile prof = standalone_grid_power(powers, harvests, beta, eta);
    if (beta == 0.0) return prof;
    const std::size_t n = powers.size();

    // need > 0: deficit to cover; need < 0: surplus that can be shipped.
    std::vector<double> deficit(n, 0.0), surplus(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = need(powers[i], harvests[i]);
        if (d > 0.0) deficit[i] = d;
        else surplus[i] = -d;
    }

    // A delivered watt costs 1/beta shipped watts from any source; match largest pairs first.
    auto largest = [](const std::vector<double>& v) {
        return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    };
    while (true) {
        const std::size_t d = largest(deficit);
        const std::size_t s = largest(surplus);
        if (deficit[d] <= 0.0 || surplus[s] <= 0.0) break;
        const double shipped = std::min(surplus[s], deficit[d] / beta);
        prof.shared[s * n + d] += shipped;
        surplus[s] -= shipped;
        deficit[d] = shipped * beta >= deficit[d] ? 0.0 : deficit[d] - shipped * beta;
    }
    for (std::size_t i = 0; i < n; ++i) prof.grid[i] = deficit[i];
    return prof;
}

double objective_p1(std::span<const double> served_utilities, std::span<const double> grid, double eta) {
    const double u = std::accumulate(served_utilities.begin(), served_utilities.end(), 0.0);
    const double g = std::accumulate(grid.begin(), grid.end(), 0.0);
    return u - eta * g;
}

double energy_saving(double run_grid, std::uint64_t run_scenario, double baseline_grid,
                     std::uint64_t baseline_scenario) {
    if (run_scenario != baseline_scenario) throw InvalidConfig("energy saving compares runs on different scenarios");
    return baseline_grid - run_grid;
}

}  // namespace mec::energy
