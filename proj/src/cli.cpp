#include "mec/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>

#include "mec/cpf.hpp"
#include "mec/error.hpp"
#include "mec/harness.hpp"
#include "mec/outage.hpp"

namespace mec::cli {

namespace {

constexpr int kUsageError = 2;

harness::ExperimentConfig resolve_config(const std::string& path) {
    if (path.empty()) {
        harness::ExperimentConfig cfg;
        cfg.metadata = harness::default_metadata();
        return cfg;
    }
    return harness::load_config(path);
}

// Runs `body` with either the named file or `fallback` as its stream.
void with_output(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
    if (path.empty() || path == "-") {
        body(fallback);
        return;
    }
    std::ofstream file(path);
    if (!file) throw IoError("cannot write " + path);
    body(file);
    if (!file.flush()) throw IoError("write failed for " + path);
}

std::vector<double> broadcast(const std::vector<double>& values, std::size_t size, const std::string& name) {
    if (values.size() == size) return values;
    if (values.size() == 1) return std::vector<double>(size, values.front());
    throw InvalidConfig(name + " needs 1 or " + std::to_string(size) + " values");
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cache-enabled energy-cooperative MEC simulator and solver toolkit", "mec_cli"};
    app.require_subcommand(1);

    // simulate
    std::string sim_config, sim_out, sim_method = "eecmec";
    std::uint64_t sim_seed = 1;
    int sim_users = 0;
    auto* simulate = app.add_subcommand("simulate", "One run of a method on one scenario; prints a runs CSV");
    simulate->add_option("--config", sim_config, "Config file (defaults when omitted)");
    simulate->add_option("--method", sim_method, "fpa, rpa or eecmec")->check(CLI::IsMember({"fpa", "rpa", "eecmec"}));
    simulate->add_option("--seed", sim_seed, "Scenario seed");
    simulate->add_option("--users", sim_users, "User count (defaults to scenario.num_users)");
    simulate->add_option("--out", sim_out, "Output CSV path (stdout when omitted)");

    // sweep
    std::string sweep_config, sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Methods x seeds x user counts; writes runs and summary CSVs");
    sweep->add_option("--config", sweep_config, "Config file (defaults when omitted)");
    sweep->add_option("--out", sweep_out, "Output prefix (overrides experiment.output)");

    // cpf
    std::string cpf_file, cpf_out;
    cpf::TraceOptions cpf_opts;
    auto* cpf_cmd = app.add_subcommand("cpf", "Trace the lambda-V curve of a bus system; prints CSV");
    cpf_cmd->add_option("bus-file", cpf_file, "Bus-system file")->required()->check(CLI::ExistingFile);
    cpf_cmd->add_option("--sigma0", cpf_opts.sigma0, "Initial continuation step")->check(CLI::PositiveNumber);
    cpf_cmd->add_option("--max-points", cpf_opts.max_points, "Point budget")->check(CLI::PositiveNumber);
    cpf_cmd->add_option("--stop-fraction", cpf_opts.stop_fraction, "Stop below this share of lambda_max")
        ->check(CLI::Range(0.0, 1.0));
    cpf_cmd->add_option("--out", cpf_out, "Output CSV path (stdout when omitted)");

    // outage
    int n = 3, m = 2, k = 2, l = 1;
    double rho = 10.0, r0 = 1.0;
    std::vector<double> var_sd{1.0}, var_sr{1.0}, var_rd{1.0};
    std::string variant_name = "printed", outage_out;
    std::uint64_t mc_trials = 0, mc_seed = 1;
    auto* outage_cmd = app.add_subcommand("outage", "Closed-form outage probability, optionally against Monte-Carlo");
    outage_cmd->add_option("--n", n, "Sources")->check(CLI::PositiveNumber);
    outage_cmd->add_option("--m", m, "Relays")->check(CLI::NonNegativeNumber);
    outage_cmd->add_option("--k", k, "Selected sources")->check(CLI::PositiveNumber);
    outage_cmd->add_option("--l", l, "Selected relays")->check(CLI::NonNegativeNumber);
    outage_cmd->add_option("--rho", rho, "Transmit SNR")->check(CLI::PositiveNumber);
    outage_cmd->add_option("--r0", r0, "Target rate, bits/s/Hz")->check(CLI::PositiveNumber);
    outage_cmd->add_option("--var-sd", var_sd, "Source-destination variances (one or n values)")->delimiter(',');
    outage_cmd->add_option("--var-sr", var_sr, "Source-relay variances (one or n*m values)")->delimiter(',');
    outage_cmd->add_option("--var-rd", var_rd, "Relay-destination variances (one or m values)")->delimiter(',');
    outage_cmd->add_option("--variant", variant_name, "printed or joint")->check(CLI::IsMember({"printed", "joint"}));
    outage_cmd->add_option("--mc", mc_trials, "Monte-Carlo trials (0 disables)");
    outage_cmd->add_option("--seed", mc_seed, "Monte-Carlo seed");
    outage_cmd->add_option("--out", outage_out, "Also write a one-row CSV here");

    // validate-config
    std::string check_file;
    auto* validate = app.add_subcommand("validate-config", "Parse and validate a config file");
    validate->add_option("file", check_file, "Config file")->required()->check(CLI::ExistingFile);

    // default-config
    std::string default_out;
    auto* defaults = app.add_subcommand("default-config", "Print a config file holding every default");
    defaults->add_option("--out", default_out, "Output path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        return kUsageError;
    }

    try {
        if (*simulate) {
            auto cfg = resolve_config(sim_config);
            const int users = sim_users > 0 ? sim_users : cfg.scenario.num_users;
            const auto method = harness::parse_method(sim_method);
            const auto scenario = harness::make_scenario(cfg, sim_seed, users);
            const auto rec = harness::run_method(method, scenario, cfg, sim_seed);
            with_output(sim_out, out, [&](std::ostream& os) { harness::write_runs_csv(os, {rec}); });
        } else if (*sweep) {
            auto cfg = resolve_config(sweep_config);
            if (!sweep_out.empty()) cfg.output = sweep_out;
            const auto result = harness::sweep(cfg);
            harness::write_sweep(result, cfg.output);
            out << "wrote " << result.runs.size() << " runs to " << cfg.output << "_runs.csv\n"
                << "wrote " << result.summary.size() << " summary rows to " << cfg.output << "_summary.csv\n";
        } else if (*cpf_cmd) {
            const auto system = cpf::BusSystem::load(cpf_file);
            const auto trace = cpf::trace_curve(system, cpf_opts);
            with_output(cpf_out, out, [&](std::ostream& os) { cpf::write_trace_csv(os, trace, system); });
            err << "lambda_max " << harness::format_double(trace.lambda_max()) << " after " << trace.points.size()
                << " points\n";
        } else if (*outage_cmd) {
            outage::RelayNetwork net;
            net.n_sources = n;
            net.n_relays = m;
            net.k_sel = k;
            net.l_sel = l;
            net.rho = rho;
            net.r0 = r0;
            net.var_sd = broadcast(var_sd, static_cast<std::size_t>(n), "--var-sd");
            net.var_sr = broadcast(var_sr, static_cast<std::size_t>(n * m), "--var-sr");
            net.var_rd = broadcast(var_rd, static_cast<std::size_t>(m), "--var-rd");
            net.validate();
            const auto variant = variant_name == "joint" ? outage::Variant::joint : outage::Variant::printed;
            const auto closed = outage::outage_probability(net, variant);
            out << "closed_form " << harness::format_double(closed.p_out) << " (" << variant_name << ")\n";
            std::string csv_row = variant_name + "," + harness::format_double(closed.p_out);
            bool pass = true;
            if (mc_trials > 0) {
                const auto mc = outage::monte_carlo_outage(net, mc_trials, mc_seed);
                pass = outage::agrees(closed.p_out, mc);
                out << "monte_carlo " << harness::format_double(mc.estimate) << " over " << mc.trials << " trials\n"
                    << "std_error " << harness::format_double(mc.std_error) << "\n"
                    << (pass ? "PASS" : "FAIL") << " |closed - mc| <= 3 std_error\n";
                csv_row += "," + std::to_string(mc.trials) + "," + harness::format_double(mc.estimate) + "," +
                           harness::format_double(mc.std_error) + "," + (pass ? "pass" : "fail");
            } else {
                csv_row += ",0,,,";
            }
            if (!outage_out.empty())
                with_output(outage_out, out, [&](std::ostream& os) {
                    os << "# mec-outage v1\nvariant,p_closed,mc_trials,p_mc,std_error,check\n" << csv_row << "\n";
                });
            return pass ? 0 : 1;
        } else if (*validate) {
            const auto cfg = harness::load_config(check_file);
            char fp[17];
            std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(harness::fnv1a(cfg.canonical())));
            out << "ok " << check_file << " fingerprint " << fp << "\n";
        } else if (*defaults) {
            with_output(default_out, out, [](std::ostream& os) { harness::write_default_config(os); });
        }
    } catch (const InvalidConfig& e) {
        err << "mec_cli: invalid configuration: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "mec_cli: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace mec::cli
