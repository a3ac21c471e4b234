#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mec/config.hpp"
#include "mec/model.hpp"

namespace mec::harness {

struct RunRecord {
    Method method = Method::fpa;
    std::uint64_t seed = 0;
    int num_users = 0;
    double throughput = 0.0;     // bits/s summed over users
    double objective = 0.0;      // sum of utilities minus eta * grid power
    double grid_power = 0.0;     // W
    double energy_saving = 0.0;  // W saved relative to FPA on the same scenario
    int iterations = 0;
    double max_violation = 0.0;
    std::uint64_t config_fp = 0;
    std::uint64_t scenario_fp = 0;
    std::vector<double> powers;  // transmit powers used, not written to CSV
};

model::Scenario make_scenario(const ExperimentConfig& config, std::uint64_t seed, int num_users);

std::uint64_t scenario_fingerprint(const model::Scenario& scenario);
std::uint64_t run_fingerprint(const ExperimentConfig& config, Method method, std::uint64_t seed,
                              int num_users);

/// Index of the strongest-SINR station for every user.
std::vector<std::size_t> max_sinr_association(const model::Scenario& scenario,
                                              const std::vector<double>& powers);

RunRecord run_fpa(const model::Scenario& scenario, const ExperimentConfig& config);
RunRecord run_rpa(const model::Scenario& scenario, const ExperimentConfig& config, std::uint64_t seed);
RunRecord run_eecmec(const model::Scenario& scenario, const ExperimentConfig& config);

/// Runs one method and fills energy_saving against an FPA run on the same scenario.
RunRecord run_method(Method method, const model::Scenario& scenario, const ExperimentConfig& config,
                     std::uint64_t seed);

struct Stat {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, 0 for a single run
};

struct SummaryRow {
    Method method = Method::fpa;
    int num_users = 0;
    int runs = 0;
    Stat throughput;
    Stat objective;
    Stat grid_power;
    Stat energy_saving;
};

struct SweepResult {
    std::vector<RunRecord> runs;  // ordered by (method, seed, num_users)
    std::vector<SummaryRow> summary;
};

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs);

SweepResult sweep(const ExperimentConfig& config);

void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Writes <prefix>_runs.csv and <prefix>_summary.csv.
void write_sweep(const SweepResult& result, const std::string& prefix);

std::string format_double(double v);

}  // namespace mec::harness
