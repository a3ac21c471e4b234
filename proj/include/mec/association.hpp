#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mec/caching.hpp"
#include "mec/model.hpp"

namespace mec::association {

/// Principal branch of the Lambert W function for z >= 0.
double lambert_w0(double z);

/// W0(exp(log_z)) without forming exp(log_z); usable far beyond the double range of z.
double lambert_w0_exp(double log_z);

/// Maximiser of k^2 ln(s) - k ln(k) + nu k over k > 0.
double optimal_k(double hit_prob, double nu);

/// Value of that maximisation, i.e. the per-station term of the dual function.
double station_dual_term(double hit_prob, double nu);

struct SolverParams {
    int max_iter = 500;
    double step0 = 0.1;       // delta(t) = step0 / sqrt(t)
    double tolerance = 1e-6;  // on the largest multiplier change
    double gamma_min = 0.1;   // linear SINR floor

    void validate() const;
};

struct DualState {
    std::vector<double> mu;  // per user, prices the SINR floor
    std::vector<double> nu;  // per station, prices the load identity
    int t = 0;
    double step = 0.1;

    static DualState initial(std::size_t num_stations, std::size_t num_users, double step0);
};

/// Inputs of the association problem with powers and cache placement already fixed.
/// Tables are row-major by station: value(i, j) = table[i * num_users + j].
struct Problem {
    std::size_t num_stations = 0;
    std::size_t num_users = 0;
    std::vector<double> capacity;  // c_ij = B log2(1 + sinr_ij); 0 marks an unusable link
    std::vector<double> sinr;
    std::vector<double> hit;       // per-station cache-hit probability
    double gamma_min = 0.0;

    double c(std::size_t i, std::size_t j) const { return capacity[i * num_users + j]; }
    double gamma(std::size_t i, std::size_t j) const { return sinr[i * num_users + j]; }

    static Problem build(const model::Scenario& scenario, const caching::CachePolicy& placement,
                         std::span<const double> powers, double gamma_min);
};

std::size_t associate_user(std::span<const double> capacity, std::span<const double> sinr,
                           double mu, std::span<const double> nu);

DualState subgradient_step(const DualState& state, const Problem& problem,
                           std::span<const std::size_t> serving, std::span<const double> k,
                           std::span<const int> loads, double step0);

struct IterationRecord {
    double dual_value = 0.0;
    double max_violation = 0.0;
};

struct AssociationResult {
    std::vector<std::size_t> serving;  // serving[j] = station of user j
    std::vector<int> loads;            // integral k_i = sum_j x_ij
    std::vector<double> k;             // continuous load from the last dual iterate
    DualState dual;
    double dual_value = 0.0;
    double primal_objective = 0.0;
    double max_violation = 0.0;
    int iterations = 0;
    std::vector<IterationRecord> history;

    bool x(std::size_t station, std::size_t user) const { return serving[user] == station; }
};

std::vector<int> station_loads(std::span<const std::size_t> serving, std::size_t num_stations);

/// Sum-utility objective of an integral association with k_i equal to the station loads.
double objective(const Problem& problem, std::span<const std::size_t> serving);

/// Largest violation of the SINR floor or of the load identity k_i = sum_j x_ij.
double max_violation(const Problem& problem, std::span<const std::size_t> serving,
                     std::span<const double> k);

double dual_value(const Problem& problem, const DualState& state);

AssociationResult solve(const Problem& problem, const SolverParams& params);

struct BruteForceResult {
    std::vector<std::size_t> serving;
    double value = 0.0;
    bool feasible = false;  // false when no assignment meets the SINR floor
};

inline constexpr double kBruteForceLimit = 1e6;

/// Exhaustive search over all assignments; OpenMP-parallel.
BruteForceResult brute_force(const Problem& problem);

/// Single-threaded reference for brute_force.
BruteForceResult brute_force_serial(const Problem& problem);

}  // namespace mec::association
