#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mec/association.hpp"
#include "mec/model.hpp"

namespace mec::harness {

enum class Method { fpa, rpa, eecmec };

std::string to_string(Method m);
Method parse_method(const std::string& s);

/// Everything an experiment needs; every field has a default so an empty file is valid.
struct ExperimentConfig {
    model::ScenarioConfig scenario;
    double beta = 0.8;  // sharing efficiency
    double eta = 0.1;   // grid-power weight in the objective
    association::SolverParams solver;

    std::vector<Method> methods{Method::fpa, Method::rpa, Method::eecmec};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::vector<int> users{10, 20, 30};
    std::string output = "sweep";
    int rpa_retries = 20;
    double eecmec_power_scale = 1.0;

    /// Simulation-table rows that no equation consumes; carried for provenance.
    std::map<std::string, std::string> metadata;

    void validate() const;

    /// Stable text form of the resolved configuration, used for fingerprints. The output path is left out.
    std::string canonical() const;
};

std::map<std::string, std::string> default_metadata();

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Writes a config file with every key at its default value.
void write_default_config(std::ostream& out);

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t hash = 14695981039346656037ull);
std::uint64_t fnv1a(const std::string& s, std::uint64_t hash = 14695981039346656037ull);

}  // namespace mec::harness
