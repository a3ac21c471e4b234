#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mec::energy {

/// Strict budget inequality P_i < budget_i is enforced as P_i <= budget_i - kStrictMargin.
inline constexpr double kStrictMargin = 1e-9;  // W

/// Grid draw and inter-station transfers: shared[i * n + k] is the power station i sends to k.
struct EnergyProfile {
    std::vector<double> grid;
    std::vector<double> shared;
    double beta = 0.8;
    double eta = 0.1;

    std::size_t size() const { return grid.size(); }
    double transfer(std::size_t from, std::size_t to) const { return shared[from * grid.size() + to]; }
    double inflow(std::size_t station) const;
    double outflow(std::size_t station) const;
    double total_grid() const;
};

enum class PowerConstraint { budget, power_range, nonnegativity, efficiency };

struct PowerViolation {
    std::size_t station = 0;
    PowerConstraint constraint = PowerConstraint::budget;
    double margin = 0.0;
};

std::string to_string(PowerConstraint c);

std::vector<PowerViolation> check_power_constraints(std::span<const double> powers,
                                                    const EnergyProfile& profile,
                                                    std::span<const double> harvests,
                                                    std::span<const double> caps);

/// Least total grid power meeting every station budget, with harvest surplus shipped at efficiency beta.
EnergyProfile min_grid_power(std::span<const double> powers, std::span<const double> harvests,
                             double beta, double eta = 0.1);

/// Grid draw with sharing disabled: each station covers its own deficit.
EnergyProfile standalone_grid_power(std::span<const double> powers, std::span<const double> harvests,
                                    double beta, double eta = 0.1);

/// sum_j utility of the serving link minus eta * total grid power.
double objective_p1(std::span<const double> served_utilities, std::span<const double> grid, double eta);

/// Grid power the run saves relative to the baseline, in watts.
double energy_saving(double run_grid, std::uint64_t run_scenario, double baseline_grid,
                     std::uint64_t baseline_scenario);

}  // namespace mec::energy
