#include <benchmark/benchmark.h>

#include <random>

#include "mec/association.hpp"
#include "mec/outage.hpp"

namespace {

mec::outage::RelayNetwork bench_network() {
    mec::outage::RelayNetwork net;
    net.n_sources = 4;
    net.n_relays = 2;
    net.k_sel = 2;
    net.l_sel = 1;
    net.rho = 10.0;
    net.r0 = 1.0;
    net.var_sd = {0.3, 0.5, 0.8, 1.2};
    net.var_sr = {1.0, 0.4, 0.6, 1.5, 0.9, 0.7, 1.1, 0.5};
    net.var_rd = {0.8, 1.3};
    return net;
}

mec::association::Problem bench_problem(std::size_t stations, std::size_t users) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    mec::association::Problem p;
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

void BM_OutageMcSerial(benchmark::State& state) {
    const auto net = bench_network();
    for (auto _ : state)
        benchmark::DoNotOptimize(mec::outage::monte_carlo_outage_serial(net, static_cast<std::uint64_t>(state.range(0)), 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_OutageMcParallel(benchmark::State& state) {
    const auto net = bench_network();
    for (auto _ : state)
        benchmark::DoNotOptimize(mec::outage::monte_carlo_outage(net, static_cast<std::uint64_t>(state.range(0)), 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BruteForceSerial(benchmark::State& state) {
    const auto p = bench_problem(3, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(mec::association::brute_force_serial(p));
}

void BM_BruteForceParallel(benchmark::State& state) {
    const auto p = bench_problem(3, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(mec::association::brute_force(p));
}

}  // namespace

BENCHMARK(BM_OutageMcSerial)->Arg(1 << 18)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OutageMcParallel)->Arg(1 << 18)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BruteForceSerial)->Arg(8)->Arg(11)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BruteForceParallel)->Arg(8)->Arg(11)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
