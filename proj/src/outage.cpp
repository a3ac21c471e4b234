#include "mec/outage.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "mec/error.hpp"

namespace mec::outage {

namespace {

// Neumaier-compensated accumulator.
class Sum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

using Mask = unsigned;

SourceSet to_set(Mask mask) {
    SourceSet s;
    for (int i = 0; mask != 0; ++i, mask >>= 1)
        if (mask & 1u) s.push_back(i);
    return s;
}

Mask to_mask(const SourceSet& set, int n) {
    Mask m = 0;
    for (int i : set) {
        if (i < 0 || i >= n) throw InvalidConfig("selected source index out of range");
        m |= 1u << i;
    }
    return m;
}

// Distribution of the number of successes among independent trials.
std::vector<double> success_count_pmf(std::span<const double> success) {
    std::vector<double> pmf(success.size() + 1, 0.0);
    pmf[0] = 1.0;
    for (std::size_t i = 0; i < success.size(); ++i) {
        for (std::size_t c = i + 1; c > 0; --c) pmf[c] = pmf[c] * (1.0 - success[i]) + pmf[c - 1] * success[i];
        pmf[0] *= 1.0 - success[i];
    }
    return pmf;
}

std::vector<double> direct_rates(const RelayNetwork& net) {
    std::vector<double> r(static_cast<std::size_t>(net.n_sources));
    for (int n = 0; n < net.n_sources; ++n) r[static_cast<std::size_t>(n)] = net.lambda_sd(n);
    return r;
}

std::vector<double> relay_success(const RelayNetwork& net, const SourceSet& selected) {
    const double g = gamma_threshold(net.r0);
    std::vector<double> q(static_cast<std::size_t>(net.n_relays));
    for (int m = 0; m < net.n_relays; ++m)
        q[static_cast<std::size_t>(m)] = 1.0 - link_outage(lambda_given_A(net, selected, m), g);
    return q;
}

// Pr{every source in `low` and `rest` is below g, and every source in `low` beats every one in `rest`}.
double below_and_ordered(std::span<const double> rates, Mask low, Mask rest, double g) {
    if (rest == 0) {
        double p = 1.0;
        for (int c : to_set(low)) p *= -std::expm1(-rates[static_cast<std::size_t>(c)] * g);
        return p;
    }
    auto total = [&](Mask m) {
        double s = 0.0;
        for (int i : to_set(m)) s += rates[static_cast<std::size_t>(i)];
        return s;
    };
    // Integrate the density of max(rest) on [0, g] against prod_c (e^{-l_c y} - e^{-l_c g}),
    // both expanded by inclusion-exclusion.
    Sum sum;
    const int low_count = std::popcount(low);
    for (Mask r = rest; r != 0; r = (r - 1) & rest) {
        const double lr = total(r);
        const int sr = std::popcount(r) + 1;
        for (Mask s = low;; s = (s - 1) & low) {
            const double ls = total(s);
            const double l_fixed = total(low & ~s);
            const int sign = (sr + low_count - std::popcount(s)) % 2 == 0 ? 1 : -1;
            const double integral = -std::expm1(-(lr + ls) * g) / (lr + ls);
            sum.add(sign * lr * std::exp(-l_fixed * g) * integral);
            if (s == 0) break;
        }
    }
    return std::max(0.0, sum.value());
}

void check_sizes(const RelayNetwork& net) {
    if (net.n_sources > kMaxSources || net.n_relays > kMaxRelays)
        throw GuardError("outage enumeration limited to N, M <= 10");
}

}  // namespace

void RelayNetwork::validate() const {
    if (n_sources < 1) throw InvalidConfig("relay network needs at least one source");
    if (n_relays < 0) throw InvalidConfig("relay count must be nonnegative");
    if (k_sel < 1 || k_sel > n_sources) throw InvalidConfig("K must satisfy 1 <= K <= N");
    if (l_sel < 0 || l_sel > n_relays) throw InvalidConfig("L must satisfy 0 <= L <= M");
    if (!(rho > 0.0)) throw InvalidConfig("rho must be positive");
    if (!(r0 >= 0.0)) throw InvalidConfig("target rate must be nonnegative");
    const auto n = static_cast<std::size_t>(n_sources), m = static_cast<std::size_t>(n_relays);
    if (var_sd.size() != n || var_sr.size() != n * m || var_rd.size() != m)
        throw InvalidConfig("variance tables do not match N and M");
    auto positive = [](const std::vector<double>& v) { return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; }); };
    if (!positive(var_sd) || !positive(var_sr) || !positive(var_rd)) throw InvalidConfig("variances must be positive");
}

RelayNetwork RelayNetwork::uniform(int n, int m, int k, int l, double rho, double r0, double variance) {
    RelayNetwork net;
    net.n_sources = n;
    net.n_relays = m;
    net.var_sd.assign(static_cast<std::size_t>(n), variance);
    net.var_sr.assign(static_cast<std::size_t>(n * m), variance);
    net.var_rd.assign(static_cast<std::size_t>(m), variance);
    net.rho = rho;
    net.r0 = r0;
    net.k_sel = k;
    net.l_sel = l;
    return net;
}

double gamma_threshold(double r0) {
    if (!(r0 >= 0.0)) throw DomainError("target rate must be nonnegative");
    return std::exp2(r0) - 1.0;
}

double ordered_prob(std::span<const double> rates) {
    if (rates.empty()) return 1.0;
    double p = 1.0;
    double acc = rates[0];
    for (std::size_t v = 1; v < rates.size(); ++v) {
        acc += rates[v];
        p *= rates[v] / acc;
    }
    return p;
}

double link_outage(double rate, double gamma_th) { return -std::expm1(-rate * gamma_th); }

double lambda_given_A(const RelayNetwork& net, const SourceSet& selected, int relay) {
    if (relay < 0 || relay >= net.n_relays) throw InvalidConfig("relay index " + std::to_string(relay) + " out of range");
    double rate = net.lambda_rd(relay);
    for (int n : selected) rate += net.lambda_sr(n, relay);
    return rate;
}

double prob_eps_eta(const RelayNetwork& net, int eta) {
    if (eta < 0 || eta > net.n_sources) return 0.0;
    const double g = gamma_threshold(net.r0);
    std::vector<double> q(static_cast<std::size_t>(net.n_sources));
    for (int n = 0; n < net.n_sources; ++n) q[static_cast<std::size_t>(n)] = 1.0 - link_outage(net.lambda_sd(n), g);
    return success_count_pmf(q)[static_cast<std::size_t>(eta)];
}

double prob_A(const RelayNetwork& net, const SourceSet& selected) {
    check_sizes(net);
    const Mask a = to_mask(selected, net.n_sources);
    if (std::popcount(a) != net.k_sel) throw InvalidConfig("selected set must contain exactly K sources");
    const auto rates = direct_rates(net);
    SourceSet top = to_set(a);
    SourceSet bottom = to_set(~a & ((1u << net.n_sources) - 1u));
    // Sum the ordering probability over every ranking that puts the selected set first.
    Sum sum;
    std::vector<double> ordered(rates.size());
    do {
        do {
            std::size_t r = 0;
            for (int n : top) ordered[r++] = rates[static_cast<std::size_t>(n)];
            for (int n : bottom) ordered[r++] = rates[static_cast<std::size_t>(n)];
            sum.add(ordered_prob(ordered));
        } while (std::next_permutation(bottom.begin(), bottom.end()));
    } while (std::next_permutation(top.begin(), top.end()));
    return sum.value();
}

double prob_V_ell_given_A(const RelayNetwork& net, const SourceSet& selected, int ell) {
    if (ell < 0 || ell > net.n_relays) return 0.0;
    return success_count_pmf(relay_success(net, selected))[static_cast<std::size_t>(ell)];
}

double prob_V_ell(const RelayNetwork& net, int ell) {
    check_sizes(net);
    Sum sum;
    const Mask all = (1u << net.n_sources) - 1u;
    for (Mask a = 1; a <= all; ++a) {
        if (std::popcount(a) != net.k_sel) continue;
        const SourceSet set = to_set(a);
        sum.add(prob_V_ell_given_A(net, set, ell) * prob_A(net, set));
    }
    return sum.value();
}

namespace {

OutageResult printed_form(const RelayNetwork& net) {
    const int k = net.k_sel, l = net.l_sel;
    OutageResult res;
    res.variant = Variant::printed;
    res.branch = k > l ? Branch::k_gt_l : Branch::k_le_l;
    std::vector<double> v_cdf(static_cast<std::size_t>(l) + 1, 0.0);  // v_cdf[e] = sum_{ell < e} Pr{V_ell}
    for (int e = 1; e <= std::min(l, k); ++e) v_cdf[static_cast<std::size_t>(e)] = v_cdf[static_cast<std::size_t>(e - 1)] + prob_V_ell(net, e - 1);
    Sum total;
    if (k > l) {
        for (int eta = 0; eta <= k - l - 1; ++eta) {
            res.terms.push_back(prob_eps_eta(net, eta));
            total.add(res.terms.back());
        }
    }
    for (int eta = 1; eta <= std::min(k, l); ++eta) {
        res.terms.push_back(prob_eps_eta(net, k - eta) * v_cdf[static_cast<std::size_t>(eta)]);
        total.add(res.terms.back());
    }
    res.p_out = total.value();
    return res;
}

OutageResult joint_form(const RelayNetwork& net) {
    const int k = net.k_sel, l = net.l_sel;
    const double g = gamma_threshold(net.r0);
    const auto rates = direct_rates(net);
    const Mask all = (1u << net.n_sources) - 1u;
    OutageResult res;
    res.variant = Variant::joint;
    res.branch = k > l ? Branch::k_gt_l : Branch::k_le_l;
    std::vector<Sum> per_eta(static_cast<std::size_t>(k));
    for (Mask a = 1; a <= all; ++a) {
        if (std::popcount(a) != k) continue;
        const auto relay_pmf = success_count_pmf(relay_success(net, to_set(a)));
        const Mask rest = all & ~a;
        // t: sources above threshold, necessarily the strongest ones and all inside a.
        for (Mask t = a;; t = (t - 1) & a) {
            const int eta = std::popcount(t);
            if (eta < k) {
                double p = below_and_ordered(rates, a & ~t, rest, g);
                for (int n : to_set(t)) p *= std::exp(-rates[static_cast<std::size_t>(n)] * g);
                const int missing = k - eta;
                double fail = 1.0;
                if (missing <= l) {
                    fail = 0.0;
                    for (int e = 0; e < missing; ++e) fail += relay_pmf[static_cast<std::size_t>(e)];
                }
                per_eta[static_cast<std::size_t>(eta)].add(p * fail);
            }
            if (t == 0) break;
        }
    }
    Sum total;
    for (const Sum& s : per_eta) {
        res.terms.push_back(s.value());
        total.add(s.value());
    }
    res.p_out = total.value();
    return res;
}

}  // namespace

OutageResult outage_probability(const RelayNetwork& net, Variant variant) {
    net.validate();
    check_sizes(net);
    OutageResult res = variant == Variant::printed ? printed_form(net) : joint_form(net);
    constexpr double slack = 1e-12;
    if (!(res.p_out >= -slack && res.p_out <= 1.0 + slack))
        throw Error("outage probability " + std::to_string(res.p_out) + " outside [0, 1]");
    return res;
}

namespace {

std::uint64_t run_chunk(const RelayNetwork& net, std::uint64_t seed, std::uint64_t chunk, std::uint64_t trials) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    std::mt19937_64 rng(seq);
    std::exponential_distribution<double> unit_exp(1.0);

    const double g = gamma_threshold(net.r0);
    const auto n = static_cast<std::size_t>(net.n_sources), m = static_cast<std::size_t>(net.n_relays);
    std::vector<double> mean_sd(n), mean_sr(n * m), mean_rd(m);
    for (std::size_t i = 0; i < n; ++i) mean_sd[i] = net.rho * net.var_sd[i];
    for (std::size_t i = 0; i < n * m; ++i) mean_sr[i] = net.rho * net.var_sr[i];
    for (std::size_t i = 0; i < m; ++i) mean_rd[i] = net.rho * net.var_rd[i];

    std::vector<double> direct(n), sr(n * m), rd(m);
    std::vector<std::size_t> order(n);
    std::uint64_t outages = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < n; ++i) direct[i] = mean_sd[i] * unit_exp(rng);
        for (std::size_t i = 0; i < n * m; ++i) sr[i] = mean_sr[i] * unit_exp(rng);
        for (std::size_t i = 0; i < m; ++i) rd[i] = mean_rd[i] * unit_exp(rng);

        std::iota(order.begin(), order.end(), 0);
        const auto k = static_cast<std::size_t>(net.k_sel);
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                          [&](std::size_t a, std::size_t b) { return direct[a] > direct[b]; });
        int good_sources = 0;
        for (std::size_t r = 0; r < k; ++r) good_sources += direct[order[r]] >= g;
        int good_relays = 0;
        for (std::size_t j = 0; j < m; ++j) {
            double weakest = rd[j];
            for (std::size_t r = 0; r < k; ++r) weakest = std::min(weakest, sr[order[r] * m + j]);
            good_relays += weakest >= g;
        }
        if (good_sources + std::min(good_relays, net.l_sel) < net.k_sel) ++outages;
    }
    return outages;
}

McEstimate summarize(std::uint64_t outages, std::uint64_t trials) {
    McEstimate est;
    est.trials = trials;
    est.outages = outages;
    est.estimate = static_cast<double>(outages) / static_cast<double>(trials);
    est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(trials));
    return est;
}

void check_mc_inputs(const RelayNetwork& net, std::uint64_t trials) {
    net.validate();
    if (trials < 1) throw InvalidConfig("Monte-Carlo needs at least one trial");
}

}  // namespace

McEstimate monte_carlo_outage_serial(const RelayNetwork& net, std::uint64_t trials, std::uint64_t seed) {
    check_mc_inputs(net, trials);
    const std::uint64_t chunks = (trials + kTrialsPerChunk - 1) / kTrialsPerChunk;
    std::uint64_t outages = 0;
    for (std::uint64_t c = 0; c < chunks; ++c)
        outages += run_chunk(net, seed, c, std::min(kTrialsPerChunk, trials - c * kTrialsPerChunk));
    return summarize(outages, trials);
}

McEstimate monte_carlo_outage(const RelayNetwork& net, std::uint64_t trials, std::uint64_t seed) {
    check_mc_inputs(net, trials);
    const auto chunks = static_cast<long long>((trials + kTrialsPerChunk - 1) / kTrialsPerChunk);
    std::uint64_t outages = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : outages)
    for (long long c = 0; c < chunks; ++c) {
        const auto chunk = static_cast<std::uint64_t>(c);
        outages += run_chunk(net, seed, chunk, std::min(kTrialsPerChunk, trials - chunk * kTrialsPerChunk));
    }
    return summarize(outages, trials);
}

}  // namespace mec::outage

namespace mec::outage {

bool agrees(double closed, const McEstimate& mc, double sigmas) {
    const double p = std::clamp(closed, 0.0, 1.0);
    const double null_se = std::sqrt(p * (1.0 - p) / static_cast<double>(mc.trials));
    return std::abs(closed - mc.estimate) <= sigmas * std::max(mc.std_error, null_se);
}

}  // namespace mec::outage
