#pragma once

#include <span>
#include <string>
#include <vector>

namespace mec::caching {

/// Request distribution over the content catalog; popularity sums to one.
struct Catalog {
    std::vector<double> popularity;

    std::size_t num_files() const { return popularity.size(); }
    void validate() const;
};

/// Caching probabilities q(f, i), stored dense and row-major by file.
class CachePolicy {
  public:
    CachePolicy() = default;
    CachePolicy(std::size_t num_files, std::size_t num_stations)
        : files_(num_files), stations_(num_stations), q_(num_files * num_stations, 0.0) {}

    double& at(std::size_t file, std::size_t station) { return q_[file * stations_ + station]; }
    double at(std::size_t file, std::size_t station) const { return q_[file * stations_ + station]; }

    std::size_t num_files() const { return files_; }
    std::size_t num_stations() const { return stations_; }

    std::vector<double> column(std::size_t station) const;
    void set_column(std::size_t station, std::span<const double> column);

  private:
    std::size_t files_ = 0;
    std::size_t stations_ = 0;
    std::vector<double> q_;
};

enum class Constraint { capacity, probability_range };

struct Violation {
    std::size_t station = 0;
    std::size_t file = 0;  // meaningful for probability_range only
    Constraint constraint = Constraint::capacity;
    double margin = 0.0;   // amount by which the bound is exceeded
};

std::vector<double> zipf_popularity(std::size_t num_files, double exponent);

/// Top-L placement: caches the cache_size most popular files (ties by lower file id).
std::vector<double> optimal_placement(std::span<const double> popularity, std::size_t cache_size);

CachePolicy optimal_policy(std::span<const double> popularity, std::span<const int> cache_sizes);

double hit_probability(std::span<const double> popularity, std::span<const double> column);

std::vector<Violation> validate_policy(const CachePolicy& policy, std::span<const int> cache_sizes,
                                       double tolerance = 1e-12);

std::string to_string(Constraint c);

}  // namespace mec::caching
