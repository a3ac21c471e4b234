#include "mec/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "mec/error.hpp"

namespace mec::harness {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw InvalidConfig("config key '" + key + "': cannot parse '" + text + "'");
    return value;
}

std::string format(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class T>
std::string format_int(T v) {
    return std::to_string(v);
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + f(v[i]);
    return out;
}

struct Field {
    std::string section;
    std::string key;
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;
};

std::vector<Field> fields(ExperimentConfig& c) {
    std::vector<Field> f;
    auto real = [&f](std::string sec, std::string key, double& ref) {
        const std::string name = sec + "." + key;
        f.push_back({sec, key, [&ref, name](const std::string& s) { ref = parse_number<double>(name, s); },
                     [&ref] { return format(ref); }});
    };
    auto integer = [&f](std::string sec, std::string key, int& ref) {
        const std::string name = sec + "." + key;
        f.push_back({sec, key, [&ref, name](const std::string& s) { ref = parse_number<int>(name, s); },
                     [&ref] { return format_int(ref); }});
    };
    model::ScenarioConfig& s = c.scenario;
    integer("scenario", "num_macro", s.num_macro);
    integer("scenario", "num_small", s.num_small);
    integer("scenario", "num_users", s.num_users);
    real("scenario", "area_side", s.area_side);
    real("scenario", "inter_site_spacing", s.inter_site_spacing);
    f.push_back({"scenario", "layout",
                 [&s](const std::string& v) {
                     const std::string t = trim(v);
                     if (t == "uniform") s.layout = model::Layout::uniform;
                     else if (t == "hotspot") s.layout = model::Layout::hotspot;
                     else throw InvalidConfig("scenario.layout must be uniform or hotspot");
                 },
                 [&s] { return std::string(s.layout == model::Layout::uniform ? "uniform" : "hotspot"); }});
    real("scenario", "hotspot_fraction", s.hotspot_fraction);
    real("scenario", "hotspot_radius", s.hotspot_radius);
    real("scenario", "macro_power_dbm", s.macro_power_dbm);
    real("scenario", "small_power_dbm", s.small_power_dbm);
    integer("scenario", "macro_cache", s.macro_cache);
    integer("scenario", "small_cache", s.small_cache);
    real("scenario", "macro_harvest_max", s.macro_harvest_max);
    real("scenario", "small_harvest_max", s.small_harvest_max);
    real("scenario", "macro_static_power", s.macro_static_power);
    real("scenario", "small_static_power", s.small_static_power);
    real("scenario", "bandwidth_hz", s.bandwidth);
    real("scenario", "noise_density_dbm", s.noise_density_dbm);
    real("scenario", "noise_figure_db", s.noise_figure_db);
    real("pathloss", "pl0_db", s.path_loss.pl0_db);
    real("pathloss", "exponent", s.path_loss.exponent);
    real("pathloss", "ref_distance", s.path_loss.ref_distance);
    real("pathloss", "min_distance", s.path_loss.min_distance);
    real("pathloss", "min_fade", s.path_loss.min_fade);
    integer("catalog", "num_files", s.num_files);
    real("catalog", "zipf_exponent", s.zipf_exponent);
    real("energy", "beta", c.beta);
    real("energy", "eta", c.eta);
    integer("solver", "max_iter", c.solver.max_iter);
    real("solver", "step0", c.solver.step0);
    real("solver", "tolerance", c.solver.tolerance);
    real("solver", "gamma_min", c.solver.gamma_min);
    f.push_back({"experiment", "methods",
                 [&c](const std::string& v) {
                     c.methods.clear();
                     for (const auto& m : split(v)) c.methods.push_back(parse_method(m));
                 },
                 [&c] { return join(c.methods, [](Method m) { return to_string(m); }); }});
    f.push_back({"experiment", "seeds",
                 [&c](const std::string& v) {
                     c.seeds.clear();
                     for (const auto& x : split(v)) c.seeds.push_back(parse_number<std::uint64_t>("experiment.seeds", x));
                 },
                 [&c] { return join(c.seeds, [](std::uint64_t x) { return std::to_string(x); }); }});
    f.push_back({"experiment", "users",
                 [&c](const std::string& v) {
                     c.users.clear();
                     for (const auto& x : split(v)) c.users.push_back(parse_number<int>("experiment.users", x));
                 },
                 [&c] { return join(c.users, [](int x) { return std::to_string(x); }); }});
    f.push_back({"experiment", "output", [&c](const std::string& v) { c.output = trim(v); }, [&c] { return c.output; }});
    integer("experiment", "rpa_retries", c.rpa_retries);
    real("experiment", "eecmec_power_scale", c.eecmec_power_scale);
    return f;
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::fpa: return "fpa";
        case Method::rpa: return "rpa";
        case Method::eecmec: return "eecmec";
    }
    return "unknown";
}

Method parse_method(const std::string& s) {
    if (s == "fpa") return Method::fpa;
    if (s == "rpa") return Method::rpa;
    if (s == "eecmec") return Method::eecmec;
    throw InvalidConfig("unknown method '" + s + "' (expected fpa, rpa or eecmec)");
}

std::map<std::string, std::string> default_metadata() {
    return {
        {"hetnet_configuration", "Multi-Rat HetNet (NGMN), 802.11"},
        {"small_cell_distribution", "uniform (U) and hotspot (Hs)"},
        {"power_backoff_db", "3"},
        {"c_h", "1"},
        {"hopping_method", "Synthesized frequency hopping"},
        {"blocking_probability", "0.4"},
        {"scheduler", "Fair"},
        {"l_margin_dbm", "13"},
        {"backhaul_frequency_ghz", "6"},
        {"weighting_factor_max", "0.95"},
        {"session_duration", "1.5"},
        {"handover_costs", "6.4 & 10 & 0.5"},
    };
}

void ExperimentConfig::validate() const {
    scenario.validate();
    solver.validate();
    if (beta < 0.0 || beta > 1.0) throw InvalidConfig("energy.beta must lie in [0, 1]");
    if (!(eta >= 0.0)) throw InvalidConfig("energy.eta must be nonnegative");
    if (methods.empty()) throw InvalidConfig("experiment.methods is empty");
    if (seeds.empty()) throw InvalidConfig("experiment.seeds needs at least one seed");
    if (users.empty()) throw InvalidConfig("experiment.users is empty");
    for (int n : users)
        if (n < 1) throw InvalidConfig("experiment.users entries must be positive");
    if (scenario.macro_cache < 1 || scenario.small_cache < 1)
        throw InvalidConfig("experiments need every station to cache at least one file");
    if (rpa_retries < 1) throw InvalidConfig("experiment.rpa_retries must be at least 1");
    if (!(eecmec_power_scale > 0.0 && eecmec_power_scale <= 1.0))
        throw InvalidConfig("experiment.eecmec_power_scale must lie in (0, 1]");
}

std::string ExperimentConfig::canonical() const {
    ExperimentConfig copy = *this;
    std::string out;
    for (const Field& f : fields(copy))
        if (f.key != "output") out += f.section + "." + f.key + "=" + f.get() + "\n";
    for (const auto& [k, v] : metadata) out += "table1." + k + "=" + v + "\n";
    return out;
}

ExperimentConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw InvalidConfig(std::string("config syntax: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.metadata = default_metadata();
    auto registry = fields(cfg);
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw InvalidConfig("config key '" + section + "' outside a section");
        if (section == "table1") {
            for (const auto& [key, value] : body) cfg.metadata[key] = trim(value.data());
            continue;
        }
        for (const auto& [key, value] : body) {
            const auto it = std::find_if(registry.begin(), registry.end(),
                                         [&](const Field& f) { return f.section == section && f.key == key; });
            if (it == registry.end()) throw InvalidConfig("unknown config key '" + section + "." + key + "'");
            it->set(value.data());
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    return parse_config(in);
}

void write_default_config(std::ostream& out) {
    ExperimentConfig cfg;
    cfg.metadata = default_metadata();
    std::string section;
    for (const Field& f : fields(cfg)) {
        if (f.section != section) {
            out << (section.empty() ? "" : "\n") << "[" << f.section << "]\n";
            section = f.section;
        }
        out << f.key << " = " << f.get() << "\n";
    }
    out << "\n# Simulation-table rows unused by equations, kept for provenance.\n[table1]\n";
    for (const auto& [k, v] : cfg.metadata) out << k << " = " << v << "\n";
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t hash) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 1099511628211ull;
    }
    return hash;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t hash) { return fnv1a(s.data(), s.size(), hash); }

}  // namespace mec::harness
