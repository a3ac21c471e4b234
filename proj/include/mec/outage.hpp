#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mec::outage {

inline constexpr int kMaxSources = 10;
inline constexpr int kMaxRelays = 10;

/// N sources, M relays and one destination; every link has Rayleigh fading, so the
/// instantaneous SNR of link ij is exponential with rate 1 / (rho * variance_ij).
struct RelayNetwork {
    int n_sources = 1;
    int n_relays = 0;
    std::vector<double> var_sd;  // per source
    std::vector<double> var_sr;  // row-major by source: var_sr[n * n_relays + m]
    std::vector<double> var_rd;  // per relay
    double rho = 1.0;
    double r0 = 1.0;
    int k_sel = 1;
    int l_sel = 0;

    void validate() const;

    double lambda_sd(int n) const { return 1.0 / (rho * var_sd[static_cast<std::size_t>(n)]); }
    double lambda_sr(int n, int m) const {
        return 1.0 / (rho * var_sr[static_cast<std::size_t>(n * n_relays + m)]);
    }
    double lambda_rd(int m) const { return 1.0 / (rho * var_rd[static_cast<std::size_t>(m)]); }

    /// Network with every variance equal to `variance`.
    static RelayNetwork uniform(int n, int m, int k, int l, double rho, double r0, double variance = 1.0);
};

/// Selected-source set, as a sorted list of source indices.
using SourceSet = std::vector<int>;

double gamma_threshold(double r0);

/// Pr{X_1 > X_2 > ... > X_n} for independent exponentials with the given rates.
double ordered_prob(std::span<const double> rates);

double link_outage(double rate, double gamma_th);

/// Rate of min(selected sources -> relay m, relay m -> destination).
double lambda_given_A(const RelayNetwork& net, const SourceSet& selected, int relay);

/// Probability that exactly eta of the N direct links are out of outage.
double prob_eps_eta(const RelayNetwork& net, int eta);

/// Probability that the K strongest direct links belong exactly to `selected`.
double prob_A(const RelayNetwork& net, const SourceSet& selected);

/// Probability that exactly ell relays are out of outage given the selected sources.
double prob_V_ell_given_A(const RelayNetwork& net, const SourceSet& selected, int ell);

/// Selection-averaged probability that exactly ell relays are out of outage.
double prob_V_ell(const RelayNetwork& net, int ell);

enum class Branch { k_gt_l, k_le_l };

enum class Variant {
    printed,  // product of the direct-link and relay marginals
    joint,    // conditions the relay count on the selected set that produced each eta
};

struct OutageResult {
    double p_out = 0.0;
    Branch branch = Branch::k_gt_l;
    Variant variant = Variant::printed;
    std::vector<double> terms;  // per-eta contributions in summation order
};

OutageResult outage_probability(const RelayNetwork& net, Variant variant = Variant::printed);

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t outages = 0;
};

/// Trials are drawn in fixed-size chunks with per-chunk seeds derived from `seed`,
/// so the estimate does not depend on the number of threads.
inline constexpr std::uint64_t kTrialsPerChunk = 1u << 16;

McEstimate monte_carlo_outage(const RelayNetwork& net, std::uint64_t trials, std::uint64_t seed);

/// Single-threaded reference for monte_carlo_outage; returns identical results.
McEstimate monte_carlo_outage_serial(const RelayNetwork& net, std::uint64_t trials, std::uint64_t seed);

}  // namespace mec::outage

namespace mec::outage {

/// |closed - estimate| <= sigmas * se, with se the larger of the plug-in standard error and
/// the standard error implied by the closed-form value (the plug-in one is zero when no
/// outage is observed).
bool agrees(double closed, const McEstimate& mc, double sigmas = 3.0);

}  // namespace mec::outage
