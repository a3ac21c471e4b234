// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mec/association.hpp"
#include "mec/caching.hpp"
#include "mec/cli.hpp"
#include "mec/cpf.hpp"
#include "mec/harness.hpp"
#include "mec/outage.hpp"
#include "oracles.hpp"

using namespace mec;

namespace {

const std::string kData = MEC_DATA_DIR;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome placement_optimality() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int n = 0; n < 200; ++n) {
        const std::size_t f = 1 + rng() % 8;
        const std::size_t l = rng() % (f + 1);
        std::vector<double> p(f);
        double total = 0.0;
        for (double& x : p) total += (x = u(rng));
        for (double& x : p) x /= total;
        const double got = caching::hit_probability(p, caching::optimal_placement(p, l));
        worst = std::max(worst, std::abs(got - oracle::fractional_knapsack(p, static_cast<double>(l))));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-12 && secs < 5.0, fmt("200 instances, max |gap| %.2e, %.3f s", worst, secs)};
}

Outcome lambert_kernel() {
    double worst = 0.0;
    for (int n = 0; n < 10000; ++n) {
        // log grid over [1e-12, 1e6] plus z = 0
        const double z = n == 0 ? 0.0 : std::pow(10.0, -12.0 + 18.0 * (n - 1) / 9998.0);
        const double w = association::lambert_w0(z);
        worst = std::max(worst, std::abs(w * std::exp(w) - z) / std::max(1.0, z));
    }
    const double w0 = association::lambert_w0(0.0);
    const double we = association::lambert_w0(std::numbers::e);
    const bool spots = std::abs(w0) <= 1e-12 && std::abs(we - 1.0) <= 1e-12;
    return {worst <= 1e-12 && spots, fmt("10^4 grid max scaled residual %.2e, W(0)=%g, W(e)-1=%.1e", worst, w0, we - 1.0)};
}

Outcome stationarity() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    bool concave = true;
    for (int n = 0; n < 100; ++n) {
        const double s = std::max(1e-6, u(rng));
        const double nu = -5.0 + 20.0 * u(rng);
        const double k = association::optimal_k(s, nu);
        worst = std::max(worst, std::abs(2 * k * std::log(s) - std::log(k) - 1 + nu));
        concave = concave && 2 * std::log(s) - 1 / k < 0.0;
    }
    return {worst <= 1e-9 && concave, fmt("100 draws, max residual %.2e, concavity %s", worst, concave ? "holds" : "broken")};
}

association::Problem random_problem(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t stations = 2 + rng() % 2;
    const std::size_t users = 3 + rng() % 4;
    association::Problem p;
    p.num_stations = stations;
    p.num_users = users;
    p.gamma_min = 0.1;
    for (std::size_t i = 0; i < stations; ++i) p.hit.push_back(0.3 + 0.7 * u(rng));
    for (std::size_t n = 0; n < stations * users; ++n) {
        const double g = std::pow(10.0, 3.0 * u(rng) - 0.5);
        p.sinr.push_back(g);
        p.capacity.push_back(1e6 * std::log2(1.0 + g));
    }
    return p;
}

Outcome weak_duality() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(50);
    int duality_ok = 0, close = 0, instances = 0;
    double worst_gap = 0.0;
    while (instances < 50) {
        const auto p = random_problem(rng);
        const auto bf = association::brute_force(p);
        if (!bf.feasible) continue;
        ++instances;
        const auto r = association::solve(p, association::SolverParams{});
        duality_ok += r.dual_value >= bf.value - 1e-8;
        const double gap = std::abs(r.primal_objective - bf.value) / std::abs(bf.value);
        worst_gap = std::max(worst_gap, gap);
        close += gap <= 0.05;
    }
    const double secs = seconds_since(t0);
    return {duality_ok == 50 && close >= 45 && secs < 30.0,
            fmt("dual >= optimum on %d/50, within 5%% on %d/50 (worst %.2f%%), %.2f s", duality_ok, close,
                100 * worst_gap, secs)};
}

Outcome subgradient_behavior() {
    harness::ExperimentConfig cfg;
    const auto sc = harness::make_scenario(cfg, cfg.seeds.front(), cfg.scenario.num_users);
    std::vector<int> sizes;
    for (const auto& s : sc.stations) sizes.push_back(s.cache_size);
    const auto policy = caching::optimal_policy(sc.catalog.popularity, sizes);
    const association::SolverParams params = cfg.solver;
    const auto p = association::Problem::build(sc, policy, sc.max_powers(), params.gamma_min);
    const auto r = association::solve(p, params);
    const double first = r.history.front().max_violation;
    const double last = r.history.back().max_violation;
    // The remaining default seeds, reported only.
    std::string others;
    for (std::size_t k = 1; k < cfg.seeds.size(); ++k) {
        const auto sk = harness::make_scenario(cfg, cfg.seeds[k], cfg.scenario.num_users);
        const auto rk = association::solve(association::Problem::build(sk, policy, sk.max_powers(), params.gamma_min), params);
        others += fmt(" %.1f%%", 100 * rk.history.back().max_violation / rk.history.front().max_violation);
    }
    return {last <= 0.1 * first,
            fmt("seed %llu, N=%d: violation %.4g at iteration 1, %.4g at iteration %d (%.1f%%); other seeds:%s",
                static_cast<unsigned long long>(cfg.seeds.front()), cfg.scenario.num_users, first, last,
                r.iterations, 100 * last / first, others.c_str())};
}

Outcome cpf_nose() {
    const auto two = cpf::BusSystem::load(kData + "/twobus.txt");
    auto t0 = Clock::now();
    const auto t2 = cpf::trace_curve(two);
    const double s2 = seconds_since(t0);
    const auto b2 = oracle::loadability_sweep(two);
    const double rel = std::abs(t2.lambda_max() - b2.last_converged) / b2.last_converged;

    const auto five = cpf::BusSystem::load(kData + "/fivebus.txt");
    t0 = Clock::now();
    const auto t5 = cpf::trace_curve(five);
    const double s5 = seconds_since(t0);
    const auto b5 = oracle::loadability_sweep(five);
    const bool bracket = t5.lambda_max() >= b5.last_converged && t5.lambda_max() <= b5.first_diverged + 1e-4;
    return {rel <= 0.01 && bracket && s2 < 1.0 && s5 < 1.0,
            fmt("2-bus lambda_max %.6f vs sweep %.6f (%.1e rel, %.3f s); 5-bus %.6f in [%.6f, %.6f + 1e-4] (%.3f s)",
                t2.lambda_max(), b2.last_converged, rel, s2, t5.lambda_max(), b5.last_converged, b5.first_diverged, s5)};
}

Outcome cpf_jacobian() {
    const auto sys = cpf::BusSystem::load(kData + "/fivebus.txt");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ang(-0.5, 0.5), mag(0.8, 1.1), lam(0.0, 2.0);
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
        cpf::PFState s = cpf::PFState::initial(sys);
        for (std::size_t i : sys.angle_buses()) s.theta(static_cast<Eigen::Index>(i)) = ang(rng);
        for (std::size_t i : sys.magnitude_buses()) s.v(static_cast<Eigen::Index>(i)) = mag(rng);
        s.lambda = lam(rng);
        const Eigen::MatrixXd jac = cpf::jacobian(s, sys);
        const Eigen::VectorXd x = cpf::pack(s, sys);
        const auto m = static_cast<Eigen::Index>(sys.num_equations());
        Eigen::MatrixXd fd(m, m);
        for (Eigen::Index c = 0; c < m; ++c) {
            const double h = 1e-6;
            Eigen::VectorXd xp = x, xm = x;
            xp(c) += h;
            xm(c) -= h;
            fd.col(c) = (cpf::power_mismatch(cpf::unpack(xp, s, sys), sys) - cpf::power_mismatch(cpf::unpack(xm, s, sys), sys)) /
                        (2 * h);
        }
        worst = std::max(worst, (jac - fd).norm() / fd.norm());
    }
    return {worst <= 1e-5, fmt("20 random 5-bus states, max relative error %.2e", worst)};
}

outage::RelayNetwork random_network(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> var(0.2, 2.0);
    const double rhos[] = {1.0, 10.0, 100.0};
    const double rates[] = {0.5, 1.0, 2.0};
    outage::RelayNetwork net;
    net.n_sources = 1 + static_cast<int>(rng() % 5);
    net.n_relays = 1 + static_cast<int>(rng() % 3);
    net.k_sel = 1 + static_cast<int>(rng() % static_cast<unsigned>(net.n_sources));
    net.l_sel = static_cast<int>(rng() % static_cast<unsigned>(net.n_relays + 1));
    net.rho = rhos[rng() % 3];
    net.r0 = rates[rng() % 3];
    for (int n = 0; n < net.n_sources; ++n) net.var_sd.push_back(var(rng));
    for (int n = 0; n < net.n_sources * net.n_relays; ++n) net.var_sr.push_back(var(rng));
    for (int m = 0; m < net.n_relays; ++m) net.var_rd.push_back(var(rng));
    return net;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

Outcome outage_vs_mc() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(25);
    int joint_ok = 0, printed_ok = 0;
    double worst_z = 0.0;
    for (int n = 0; n < 25; ++n) {
        const auto net = random_network(rng);
        const auto mc = outage::monte_carlo_outage(net, 1000000, 1000 + static_cast<std::uint64_t>(n));
        const double joint = outage::outage_probability(net, outage::Variant::joint).p_out;
        const double printed = outage::outage_probability(net, outage::Variant::printed).p_out;
        joint_ok += outage::agrees(joint, mc);
        printed_ok += outage::agrees(printed, mc);
        const double se = std::max(mc.std_error, std::sqrt(joint * (1 - joint) / 1e6));
        if (se > 0) worst_z = std::max(worst_z, std::abs(joint - mc.estimate) / se);
    }
    double iid = 0.0;
    for (int k = 1; k <= 6; ++k)
        iid = std::max(iid, std::abs(outage::ordered_prob(std::vector<double>(static_cast<std::size_t>(k), 1.7)) - 1.0 / factorial(k)));
    const double secs = seconds_since(t0);
    return {joint_ok == 25 && iid <= 1e-12 && secs < 120.0,
            fmt("joint form within 3 se on %d/25 (max %.2f se), printed form on %d/25, iid 1/n! error %.1e, %.1f s",
                joint_ok, worst_z, printed_ok, iid, secs)};
}

Outcome qualitative_shape() {
    harness::ExperimentConfig cfg;
    cfg.metadata = harness::default_metadata();
    const auto res = harness::sweep(cfg);
    auto mean = [&](harness::Method m, int n) {
        for (const auto& row : res.summary)
            if (row.method == m && row.num_users == n) return row.throughput.mean;
        return std::nan("");
    };
    bool thr_ok = true, grid_ok = true;
    std::string detail;
    for (int n : cfg.users) {
        const double e = mean(harness::Method::eecmec, n);
        const double f = mean(harness::Method::fpa, n);
        const double r = mean(harness::Method::rpa, n);
        thr_ok = thr_ok && e >= f && e >= r;
        detail += fmt("N=%d thr Mb/s eecmec %.1f fpa %.1f rpa %.1f; ", n, e / 1e6, f / 1e6, r / 1e6);
    }
    // Grid power compared run by run: sharing is on (beta > 0) and every scenario harvests.
    int grid_runs = 0;
    for (std::size_t i = 0; i < res.runs.size(); ++i) {
        const auto& e = res.runs[i];
        if (e.method != harness::Method::eecmec) continue;
        for (const auto& f : res.runs)
            if (f.method == harness::Method::fpa && f.scenario_fp == e.scenario_fp) {
                grid_ok = grid_ok && e.grid_power <= f.grid_power;
                ++grid_runs;
            }
    }
    detail += fmt("grid power eecmec <= fpa on %s of %d runs", grid_ok ? "all" : "not all", grid_runs);
    return {thr_ok && grid_ok && cfg.beta > 0.0, detail};
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "mec_acceptance";
    fs::create_directories(dir);
    auto run = [](std::vector<std::string> args) {
        args.insert(args.begin(), "mec_cli");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
        return std::make_pair(code, out.str());
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string cfg = kData + "/desk.ini";
    int same = 0, total = 0;
    for (int rep = 0; rep < 2; ++rep) {
        const std::string tag = std::to_string(rep);
        run({"sweep", "--config", cfg, "--out", (dir / ("sweep" + tag)).string()});
        run({"simulate", "--config", cfg, "--method", "eecmec", "--seed", "3", "--out", (dir / ("sim" + tag + ".csv")).string()});
        run({"simulate", "--config", cfg, "--method", "rpa", "--seed", "4", "--out", (dir / ("rpa" + tag + ".csv")).string()});
        run({"cpf", kData + "/fivebus.txt", "--out", (dir / ("cpf" + tag + ".csv")).string()});
        run({"outage", "--n", "4", "--m", "2", "--k", "2", "--l", "1", "--mc", "200000", "--variant", "joint", "--out",
             (dir / ("out" + tag + ".csv")).string()});
    }
    for (const std::string name : {"sweep%_runs.csv", "sweep%_summary.csv", "sim%.csv", "rpa%.csv", "cpf%.csv", "out%.csv"}) {
        std::string a = name, b = name;
        a.replace(a.find('%'), 1, "0");
        b.replace(b.find('%'), 1, "1");
        const std::string ca = slurp(dir / a), cb = slurp(dir / b);
        ++total;
        same += !ca.empty() && ca == cb;
    }
    return {same == total, fmt("%d/%d CSV outputs byte-identical across repeated invocations", same, total)};
}

}  // namespace

int main() {
    report(1, "cache placement optimality", placement_optimality);
    report(2, "Lambert-W kernel", lambert_kernel);
    report(3, "optimal load stationarity", stationarity);
    report(4, "weak duality and primal gap", weak_duality);
    report(5, "subgradient violation decay", subgradient_behavior);
    report(6, "CPF nose accuracy", cpf_nose);
    report(7, "CPF Jacobian", cpf_jacobian);
    report(8, "outage closed form vs Monte-Carlo", outage_vs_mc);
    report(9, "method ordering on the desk scenario", qualitative_shape);
    report(10, "CLI determinism", determinism);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
