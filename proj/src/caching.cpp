#include "mec/caching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mec/error.hpp"

namespace mec::caching {

void Catalog::validate() const {
    if (popularity.empty()) throw InvalidConfig("catalog must contain at least one file");
    double total = 0.0;
    for (double p : popularity) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidConfig("popularity outside [0, 1]");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidConfig("popularity does not sum to one");
}

std::vector<double> CachePolicy::column(std::size_t station) const {
    std::vector<double> col(files_);
    for (std::size_t f = 0; f < files_; ++f) col[f] = at(f, station);
    return col;
}

void CachePolicy::set_column(std::size_t station, std::span<const double> column) {
    for (std::size_t f = 0; f < files_; ++f) at(f, station) = column[f];
}

std::vector<double> zipf_popularity(std::size_t num_files, double exponent) {
    if (num_files == 0) throw InvalidConfig("zipf catalog needs at least one file");
    if (!(exponent >= 0.0)) throw InvalidConfig("zipf exponent must be nonnegative");
    std::vector<double> p(num_files);
    for (std::size_t f = 0; f < num_files; ++f) p[f] = std::pow(static_cast<double>(f + 1), -exponent);
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= total;
    return p;
}

std::vector<double> optimal_placement(std::span<const double> popularity, std::size_t cache_size) {
    std::vector<std::size_t> order(popularity.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return popularity[a] > popularity[b]; });
    std::vector<double> q(popularity.size(), 0.0);
    const std::size_t n = std::min(cache_size, popularity.size());
    for (std::size_t r = 0; r < n; ++r) q[order[r]] = 1.0;
    return q;
}

CachePolicy optimal_policy(std::span<const double> popularity, std::span<const int> cache_sizes) {
    CachePolicy policy(popularity.size(), cache_sizes.size());
    for (std::size_t i = 0; i < cache_sizes.size(); ++i) {
        const auto size = static_cast<std::size_t>(std::max(cache_sizes[i], 0));
        policy.set_column(i, optimal_placement(popularity, size));
    }
    return policy;
}

double hit_probability(std::span<const double> popularity, std::span<const double> column) {
    double s = 0.0;
    for (std::size_t f = 0; f < popularity.size(); ++f) s += popularity[f] * column[f];
    return std::clamp(s, 0.0, 1.0);
}

std::vector<Violation> validate_policy(const CachePolicy& policy, std::span<const int> cache_sizes,
                                       double tolerance) {
    std::vector<Violation> out;
    for (std::size_t i = 0; i < policy.num_stations(); ++i) {
        double used = 0.0;
        for (std::size_t f = 0; f < policy.num_files(); ++f) {
            const double q = policy.at(f, i);
            used += q;
            if (q < -tolerance) out.push_back({i, f, Constraint::probability_range, -q});
            if (q > 1.0 + tolerance) out.push_back({i, f, Constraint::probability_range, q - 1.0});
        }
        const double cap = i < cache_sizes.size() ? cache_sizes[i] : 0.0;
        if (used > cap + tolerance) out.push_back({i, 0, Constraint::capacity, used - cap});
    }
    return out;
}

std::string to_string(Constraint c) {
    return c == Constraint::capacity ? "capacity" : "probability_range";
}

}  // namespace mec::caching
