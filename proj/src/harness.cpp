#include "mec/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <random>

#include "mec/association.hpp"
#include "mec/caching.hpp"
#include "mec/energy.hpp"
#include "mec/error.hpp"

namespace mec::harness {

namespace {

template <class T>
std::uint64_t hash_value(T v, std::uint64_t h) {
    return fnv1a(&v, sizeof v, h);
}

struct Evaluation {
    double throughput = 0.0;
    std::vector<double> utilities;
    double c1_deficit = 0.0;
};

std::vector<int> cache_sizes(const model::Scenario& scenario) {
    std::vector<int> sizes;
    for (const auto& s : scenario.stations) sizes.push_back(s.cache_size);
    return sizes;
}

caching::CachePolicy placement(const model::Scenario& scenario) {
    const auto sizes = cache_sizes(scenario);
    return caching::optimal_policy(scenario.catalog.popularity, sizes);
}

std::vector<double> hit_probabilities(const model::Scenario& scenario, const caching::CachePolicy& policy) {
    std::vector<double> hits;
    for (std::size_t i = 0; i < scenario.num_stations(); ++i)
        hits.push_back(caching::hit_probability(scenario.catalog.popularity, policy.column(i)));
    return hits;
}

Evaluation evaluate(const model::Scenario& scenario, const std::vector<double>& powers,
                    const std::vector<double>& hits, const std::vector<std::size_t>& serving,
                    double gamma_min) {
    Evaluation ev;
    const auto loads = association::station_loads(serving, scenario.num_stations());
    for (std::size_t j = 0; j < serving.size(); ++j) {
        const std::size_t i = serving[j];
        const double g = model::sinr(i, j, powers, scenario.channel);
        const double r = model::rate(g, loads[i], hits[i], scenario.bandwidth);
        ev.throughput += r;
        ev.utilities.push_back(model::utility(r));
        ev.c1_deficit = std::max(ev.c1_deficit, gamma_min - g);
    }
    return ev;
}

RunRecord finish(Method method, const model::Scenario& scenario, const ExperimentConfig& config,
                 std::uint64_t seed, const std::vector<double>& powers, const Evaluation& ev,
                 const energy::EnergyProfile& profile) {
    RunRecord rec;
    rec.powers = powers;
    rec.method = method;
    rec.seed = seed;
    rec.num_users = static_cast<int>(scenario.num_users());
    rec.throughput = ev.throughput;
    rec.grid_power = profile.total_grid();
    rec.objective = energy::objective_p1(ev.utilities, profile.grid, config.eta);
    rec.max_violation = std::max(0.0, ev.c1_deficit);
    rec.config_fp = run_fingerprint(config, method, seed, rec.num_users);
    rec.scenario_fp = scenario_fingerprint(scenario);
    return rec;
}

}  // namespace

model::Scenario make_scenario(const ExperimentConfig& config, std::uint64_t seed, int num_users) {
    model::ScenarioConfig sc = config.scenario;
    sc.num_users = num_users;
    return model::generate_scenario(sc, seed);
}

std::uint64_t scenario_fingerprint(const model::Scenario& scenario) {
    std::uint64_t h = fnv1a(std::string("scenario"));
    for (const auto& s : scenario.stations) {
        h = hash_value(s.position.x, h);
        h = hash_value(s.position.y, h);
        h = hash_value(s.p_max, h);
        h = hash_value(s.cache_size, h);
        h = hash_value(s.harvest, h);
    }
    for (const auto& u : scenario.users) {
        h = hash_value(u.position.x, h);
        h = hash_value(u.position.y, h);
    }
    for (double g : scenario.channel.gains()) h = hash_value(g, h);
    for (double p : scenario.catalog.popularity) h = hash_value(p, h);
    h = hash_value(scenario.channel.noise_power(), h);
    h = hash_value(scenario.bandwidth, h);
    return h;
}

std::uint64_t run_fingerprint(const ExperimentConfig& config, Method method, std::uint64_t seed,
                              int num_users) {
    std::uint64_t h = fnv1a(config.canonical());
    h = fnv1a(to_string(method), h);
    h = hash_value(seed, h);
    return hash_value(num_users, h);
}

std::vector<std::size_t> max_sinr_association(const model::Scenario& scenario,
                                              const std::vector<double>& powers) {
    std::vector<std::size_t> serving(scenario.num_users(), 0);
    for (std::size_t j = 0; j < scenario.num_users(); ++j) {
        double best = -1.0;
        for (std::size_t i = 0; i < scenario.num_stations(); ++i) {
            const double g = model::sinr(i, j, powers, scenario.channel);
            if (g > best) {
                best = g;
                serving[j] = i;
            }
        }
    }
    return serving;
}

RunRecord run_fpa(const model::Scenario& scenario, const ExperimentConfig& config) {
    const auto powers = scenario.max_powers();
    const auto hits = hit_probabilities(scenario, placement(scenario));
    const auto serving = max_sinr_association(scenario, powers);
    const auto ev = evaluate(scenario, powers, hits, serving, config.solver.gamma_min);
    const auto profile = energy::standalone_grid_power(powers, scenario.harvests(), config.beta, config.eta);
    return finish(Method::fpa, scenario, config, scenario.seed, powers, ev, profile);
}

RunRecord run_rpa(const model::Scenario& scenario, const ExperimentConfig& config, std::uint64_t seed) {
    const auto caps = scenario.max_powers();
    const auto hits = hit_probabilities(scenario, placement(scenario));
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(scenario.num_users()), 0x525041u};
    std::mt19937_64 rng(seq);

    std::vector<double> best_powers;
    std::vector<std::size_t> best_serving;
    double best_deficit = 0.0;
    for (int attempt = 0; attempt < config.rpa_retries; ++attempt) {
        std::vector<double> powers(caps.size());
        for (std::size_t i = 0; i < caps.size(); ++i)
            powers[i] = std::uniform_real_distribution<double>(0.0, caps[i])(rng);
        auto serving = max_sinr_association(scenario, powers);
        double deficit = 0.0;
        for (std::size_t j = 0; j < serving.size(); ++j)
            deficit = std::max(deficit, config.solver.gamma_min - model::sinr(serving[j], j, powers, scenario.channel));
        if (best_powers.empty() || deficit < best_deficit) {
            best_powers = std::move(powers);
            best_serving = std::move(serving);
            best_deficit = deficit;
        }
        if (best_deficit <= 0.0) break;
    }
    const auto ev = evaluate(scenario, best_powers, hits, best_serving, config.solver.gamma_min);
    const auto profile =
        energy::standalone_grid_power(best_powers, scenario.harvests(), config.beta, config.eta);
    return finish(Method::rpa, scenario, config, seed, best_powers, ev, profile);
}

RunRecord run_eecmec(const model::Scenario& scenario, const ExperimentConfig& config) {
    auto powers = scenario.max_powers();
    for (double& p : powers) p *= config.eecmec_power_scale;
    const auto policy = placement(scenario);
    const auto hits = hit_probabilities(scenario, policy);
    const auto problem = association::Problem::build(scenario, policy, powers, config.solver.gamma_min);
    const auto result = association::solve(problem, config.solver);
    const auto ev = evaluate(scenario, powers, hits, result.serving, config.solver.gamma_min);
    const auto profile = energy::min_grid_power(powers, scenario.harvests(), config.beta, config.eta);
    RunRecord rec = finish(Method::eecmec, scenario, config, scenario.seed, powers, ev, profile);
    rec.iterations = result.iterations;
    rec.max_violation = result.max_violation;
    return rec;
}

RunRecord run_method(Method method, const model::Scenario& scenario, const ExperimentConfig& config,
                     std::uint64_t seed) {
    RunRecord rec;
    switch (method) {
        case Method::fpa: rec = run_fpa(scenario, config); break;
        case Method::rpa: rec = run_rpa(scenario, config, seed); break;
        case Method::eecmec: rec = run_eecmec(scenario, config); break;
    }
    rec.seed = seed;
    rec.config_fp = run_fingerprint(config, method, seed, rec.num_users);
    const RunRecord base = method == Method::fpa ? rec : run_fpa(scenario, config);
    rec.energy_saving = energy::energy_saving(rec.grid_power, rec.scenario_fp, base.grid_power, base.scenario_fp);
    return rec;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs) {
    std::vector<SummaryRow> rows;
    std::map<std::pair<int, int>, std::size_t> index;
    std::vector<std::vector<const RunRecord*>> groups;
    for (const auto& r : runs) {
        const auto key = std::make_pair(static_cast<int>(r.method), r.num_users);
        auto [it, inserted] = index.emplace(key, groups.size());
        if (inserted) {
            groups.emplace_back();
            SummaryRow row;
            row.method = r.method;
            row.num_users = r.num_users;
            rows.push_back(row);
        }
        groups[it->second].push_back(&r);
    }
    auto stat = [](const std::vector<const RunRecord*>& g, double RunRecord::*field) {
        Stat s;
        for (const auto* r : g) s.mean += r->*field;
        s.mean /= static_cast<double>(g.size());
        if (g.size() > 1) {
            double ss = 0.0;
            for (const auto* r : g) ss += (r->*field - s.mean) * (r->*field - s.mean);
            s.std = std::sqrt(ss / static_cast<double>(g.size() - 1));
        }
        return s;
    };
    for (std::size_t k = 0; k < rows.size(); ++k) {
        rows[k].runs = static_cast<int>(groups[k].size());
        rows[k].throughput = stat(groups[k], &RunRecord::throughput);
        rows[k].objective = stat(groups[k], &RunRecord::objective);
        rows[k].grid_power = stat(groups[k], &RunRecord::grid_power);
        rows[k].energy_saving = stat(groups[k], &RunRecord::energy_saving);
    }
    return rows;
}

SweepResult sweep(const ExperimentConfig& config) {
    config.validate();
    const std::size_t n_seeds = config.seeds.size();
    const std::size_t n_points = config.users.size();
    const std::size_t n_methods = config.methods.size();
    const long tasks = static_cast<long>(n_seeds * n_points);
    std::vector<RunRecord> slots(n_seeds * n_points * n_methods);
    std::vector<std::string> errors(static_cast<std::size_t>(tasks));

#pragma omp parallel for schedule(dynamic)
    for (long t = 0; t < tasks; ++t) {
        const std::size_t s = static_cast<std::size_t>(t) / n_points;
        const std::size_t p = static_cast<std::size_t>(t) % n_points;
        try {
            const auto scenario = make_scenario(config, config.seeds[s], config.users[p]);
            for (std::size_t m = 0; m < n_methods; ++m)
                slots[(m * n_seeds + s) * n_points + p] =
                    run_method(config.methods[m], scenario, config, config.seeds[s]);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(t)] = e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty()) throw Error("sweep run failed: " + e);

    // Order rows by (method, seed, N) as listed in the config.
    SweepResult result;
    result.runs = std::move(slots);
    result.summary = summarize(result.runs);
    return result;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs) {
    out << "# mec-sweep-runs v1\n"
        << "method,seed,num_users,throughput_bps,objective_p1,grid_power_w,energy_saving_w,iterations,"
           "max_violation,config_fp,scenario_fp\n";
    for (const auto& r : runs) {
        out << to_string(r.method) << ',' << r.seed << ',' << r.num_users << ',' << format_double(r.throughput)
            << ',' << format_double(r.objective) << ',' << format_double(r.grid_power) << ','
            << format_double(r.energy_saving) << ',' << r.iterations << ',' << format_double(r.max_violation)
            << ',' << hex(r.config_fp) << ',' << hex(r.scenario_fp) << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "# mec-sweep-summary v1\n"
        << "method,num_users,runs,throughput_mean,throughput_std,objective_mean,objective_std,"
           "grid_power_mean,grid_power_std,energy_saving_mean,energy_saving_std\n";
    for (const auto& r : rows) {
        out << to_string(r.method) << ',' << r.num_users << ',' << r.runs;
        for (const Stat& s : {r.throughput, r.objective, r.grid_power, r.energy_saving})
            out << ',' << format_double(s.mean) << ',' << format_double(s.std);
        out << '\n';
    }
}

void write_sweep(const SweepResult& result, const std::string& prefix) {
    const std::string runs_path = prefix + "_runs.csv";
    const std::string summary_path = prefix + "_summary.csv";
    std::ofstream runs(runs_path);
    if (!runs) throw IoError("cannot write " + runs_path);
    write_runs_csv(runs, result.runs);
    std::ofstream summary(summary_path);
    if (!summary) throw IoError("cannot write " + summary_path);
    write_summary_csv(summary, result.summary);
    if (!runs.flush() || !summary.flush()) throw IoError("write failed for " + prefix);
}

}  // namespace mec::harness
