#include "mec/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mec/error.hpp"

namespace mec::association {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double halley(double w, double z) {
    for (int it = 0; it < 64; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - z;
        const double wp1 = w + 1.0;
        const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if (std::abs(step) <= 1e-16 * (1.0 + std::abs(w))) break;
    }
    return w;
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

double lambert_w0(double z) {
    if (std::isnan(z) || z < 0.0) throw DomainError("lambert_w0 is only defined here for z >= 0");
    if (z == 0.0) return 0.0;
    if (std::isinf(z)) return kInf;
    double w;
    if (z <= std::numbers::e) {
        w = std::log1p(z);
        w = w > 0.0 ? w * (1.0 - std::log1p(w) / (2.0 + w)) : z;
    } else {
        const double l1 = std::log(z);
        const double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }
    return halley(w, z);
}

double lambert_w0_exp(double log_z) {
    if (log_z < 700.0) return lambert_w0(std::exp(log_z));
    // Solve w + ln(w) = log_z by Newton; w is large so the iteration is well conditioned.
    double w = log_z - std::log(log_z);
    for (int it = 0; it < 64; ++it) {
        const double step = (w + std::log(w) - log_z) / (1.0 + 1.0 / w);
        w -= step;
        if (std::abs(step) <= 1e-16 * w) break;
    }
    return w;
}

double optimal_k(double hit_prob, double nu) {
    if (!(hit_prob > 0.0) || hit_prob > 1.0) throw DomainError("optimal_k needs 0 < s <= 1");
    const double a = -2.0 * std::log(hit_prob);
    if (a == 0.0) return std::exp(nu - 1.0);
    return lambert_w0_exp(std::log(a) + nu - 1.0) / a;
}

double station_dual_term(double hit_prob, double nu) {
    if (hit_prob <= 0.0) return 0.0;  // only k = 0 is admissible
    const double k = optimal_k(hit_prob, nu);
    return k * k * std::log(hit_prob) - xlogx(k) + nu * k;
}

void SolverParams::validate() const {
    if (max_iter < 1) throw InvalidConfig("max_iter must be at least 1");
    if (!(tolerance > 0.0)) throw InvalidConfig("tolerance must be positive");
    if (!(step0 > 0.0)) throw InvalidConfig("step0 must be positive");
    if (!(gamma_min >= 0.0)) throw InvalidConfig("gamma_min must be nonnegative");
}

DualState DualState::initial(std::size_t num_stations, std::size_t num_users, double step0) {
    DualState s;
    s.mu.assign(num_users, 0.0);
    s.nu.assign(num_stations, 0.0);
    s.t = 0;
    s.step = step0;
    return s;
}

Problem Problem::build(const model::Scenario& scenario, const caching::CachePolicy& placement,
                       std::span<const double> powers, double gamma_min) {
    Problem p;
    p.num_stations = scenario.num_stations();
    p.num_users = scenario.num_users();
    p.gamma_min = gamma_min;
    p.capacity.resize(p.num_stations * p.num_users);
    p.sinr.resize(p.num_stations * p.num_users);
    p.hit.resize(p.num_stations);
    for (std::size_t i = 0; i < p.num_stations; ++i) {
        p.hit[i] = caching::hit_probability(scenario.catalog.popularity, placement.column(i));
        for (std::size_t j = 0; j < p.num_users; ++j) {
            const double g = model::sinr(i, j, powers, scenario.channel);
            p.sinr[i * p.num_users + j] = g;
            // A station holding no popular content cannot serve anyone.
            p.capacity[i * p.num_users + j] = p.hit[i] > 0.0 ? scenario.bandwidth * std::log2(1.0 + g) : 0.0;
        }
    }
    return p;
}

std::size_t associate_user(std::span<const double> capacity, std::span<const double> sinr, double mu,
                           std::span<const double> nu) {
    std::size_t best = capacity.size();
    double best_score = -kInf;
    for (std::size_t i = 0; i < capacity.size(); ++i) {
        if (!(capacity[i] > 0.0)) continue;
        const double score = std::log(capacity[i]) + mu * sinr[i] - nu[i];
        if (best == capacity.size() || score > best_score) {
            best = i;
            best_score = score;
        }
    }
    if (best == capacity.size()) throw Infeasible("no station can serve this user");
    return best;
}

DualState subgradient_step(const DualState& state, const Problem& problem,
                           std::span<const std::size_t> serving, std::span<const double> k,
                           std::span<const int> loads, double step0) {
    DualState next = state;
    const double delta = state.step;
    for (std::size_t j = 0; j < problem.num_users; ++j) {
        const double served = problem.gamma(serving[j], j);
        next.mu[j] = std::max(0.0, state.mu[j] - delta * (served - problem.gamma_min));
    }
    for (std::size_t i = 0; i < problem.num_stations; ++i)
        next.nu[i] = std::max(0.0, state.nu[i] - delta * (k[i] - loads[i]));
    next.t = state.t + 1;
    next.step = step0 / std::sqrt(static_cast<double>(next.t + 1));
    return next;
}

std::vector<int> station_loads(std::span<const std::size_t> serving, std::size_t num_stations) {
    std::vector<int> loads(num_stations, 0);
    for (std::size_t i : serving) ++loads[i];
    return loads;
}

double objective(const Problem& problem, std::span<const std::size_t> serving) {
    double value = 0.0;
    for (std::size_t j = 0; j < problem.num_users; ++j) value += std::log(problem.c(serving[j], j));
    for (std::size_t i = 0; i < problem.num_stations; ++i) {
        const auto k = static_cast<double>(std::count(serving.begin(), serving.end(), i));
        if (k == 0.0) continue;
        value += k * k * std::log(problem.hit[i]) - k * std::log(k);
    }
    return value;
}

double max_violation(const Problem& problem, std::span<const std::size_t> serving,
                     std::span<const double> k) {
    double worst = 0.0;
    for (std::size_t j = 0; j < problem.num_users; ++j)
        worst = std::max(worst, problem.gamma_min - problem.gamma(serving[j], j));
    const auto loads = station_loads(serving, problem.num_stations);
    for (std::size_t i = 0; i < problem.num_stations; ++i) worst = std::max(worst, std::abs(k[i] - loads[i]));
    return worst;
}

double dual_value(const Problem& problem, const DualState& state) {
    double value = 0.0;
    std::vector<double> cap(problem.num_stations), gam(problem.num_stations);
    for (std::size_t j = 0; j < problem.num_users; ++j) {
        for (std::size_t i = 0; i < problem.num_stations; ++i) {
            cap[i] = problem.c(i, j);
            gam[i] = problem.gamma(i, j);
        }
        const std::size_t i = associate_user(cap, gam, state.mu[j], state.nu);
        value += std::log(cap[i]) + state.mu[j] * gam[i] - state.nu[i] - state.mu[j] * problem.gamma_min;
    }
    for (std::size_t i = 0; i < problem.num_stations; ++i) value += station_dual_term(problem.hit[i], state.nu[i]);
    return value;
}

AssociationResult solve(const Problem& problem, const SolverParams& params) {
    params.validate();
    if (problem.num_stations == 0 || problem.num_users == 0) throw InvalidConfig("empty association problem");
    if (std::none_of(problem.capacity.begin(), problem.capacity.end(), [](double c) { return c > 0.0; }))
        throw Infeasible("no station admits any user");

    AssociationResult out;
    DualState state = DualState::initial(problem.num_stations, problem.num_users, params.step0);
    std::vector<double> cap(problem.num_stations), gam(problem.num_stations);
    std::vector<std::size_t> serving(problem.num_users);
    std::vector<double> k(problem.num_stations);

    for (int it = 1; it <= params.max_iter; ++it) {
        for (std::size_t j = 0; j < problem.num_users; ++j) {
            for (std::size_t i = 0; i < problem.num_stations; ++i) {
                cap[i] = problem.c(i, j);
                gam[i] = problem.gamma(i, j);
            }
            serving[j] = associate_user(cap, gam, state.mu[j], state.nu);
        }
        const auto loads = station_loads(serving, problem.num_stations);
        for (std::size_t i = 0; i < problem.num_stations; ++i)
            k[i] = problem.hit[i] > 0.0 ? optimal_k(problem.hit[i], state.nu[i]) : 0.0;

        const IterationRecord rec{dual_value(problem, state), max_violation(problem, serving, k)};
        out.history.push_back(rec);
        out.serving = serving;
        out.loads = loads;
        out.k = k;
        out.dual = state;
        out.dual_value = rec.dual_value;
        out.max_violation = rec.max_violation;
        out.iterations = it;

        const DualState next = subgradient_step(state, problem, serving, k, loads, params.step0);
        double change = 0.0;
        for (std::size_t j = 0; j < problem.num_users; ++j) change = std::max(change, std::abs(next.mu[j] - state.mu[j]));
        for (std::size_t i = 0; i < problem.num_stations; ++i) change = std::max(change, std::abs(next.nu[i] - state.nu[i]));
        state = next;
        if (change < params.tolerance) break;
    }
    out.primal_objective = objective(problem, out.serving);
    return out;
}

namespace {

struct Candidate {
    double value = -kInf;
    std::size_t index = 0;
    bool found = false;

    void offer(double v, std::size_t idx) {
        if (!found || v > value || (v == value && idx < index)) {
            value = v;
            index = idx;
            found = true;
        }
    }
};

std::size_t assignment_count(const Problem& problem) {
    const double count = std::pow(static_cast<double>(problem.num_stations), static_cast<double>(problem.num_users));
    if (count > kBruteForceLimit) throw GuardError("association instance too large for exhaustive search");
    return static_cast<std::size_t>(std::llround(count));
}

void decode(std::size_t index, std::size_t base, std::span<std::size_t> serving) {
    for (std::size_t& s : serving) {
        s = index % base;
        index /= base;
    }
}

// Value of one assignment, or -inf when it uses an unusable link or breaks the SINR floor.
double evaluate(const Problem& problem, std::span<const std::size_t> serving) {
    for (std::size_t j = 0; j < problem.num_users; ++j) {
        const std::size_t i = serving[j];
        if (!(problem.c(i, j) > 0.0) || problem.gamma(i, j) < problem.gamma_min) return -kInf;
    }
    return objective(problem, serving);
}

BruteForceResult finish(const Problem& problem, const Candidate& best) {
    BruteForceResult r;
    r.serving.resize(problem.num_users);
    decode(best.index, problem.num_stations, r.serving);
    r.feasible = best.found && best.value > -kInf;
    r.value = r.feasible ? best.value : -kInf;
    return r;
}

}  // namespace

BruteForceResult brute_force_serial(const Problem& problem) {
    const std::size_t total = assignment_count(problem);
    Candidate best;
    std::vector<std::size_t> serving(problem.num_users);
    for (std::size_t a = 0; a < total; ++a) {
        decode(a, problem.num_stations, serving);
        const double v = evaluate(problem, serving);
        if (v > -kInf) best.offer(v, a);
    }
    return finish(problem, best);
}

BruteForceResult brute_force(const Problem& problem) {
    const auto total = static_cast<long long>(assignment_count(problem));
    Candidate best;
#pragma omp parallel
    {
        Candidate local;
        std::vector<std::size_t> serving(problem.num_users);
#pragma omp for schedule(static)
        for (long long a = 0; a < total; ++a) {
            decode(static_cast<std::size_t>(a), problem.num_stations, serving);
            const double v = evaluate(problem, serving);
            if (v > -kInf) local.offer(v, static_cast<std::size_t>(a));
        }
#pragma omp critical
        if (local.found) best.offer(local.value, local.index);
    }
    return finish(problem, best);
}

}  // namespace mec::association
