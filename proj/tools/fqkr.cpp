// fqkr command-line tool: evolve, coeffs, effective, analyze, preset, keys.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fqkr/cli.hpp"

namespace {

using namespace fqkr;
using namespace fqkr::cli;

struct CommonFlags {
    std::optional<std::string> config_file;
    std::optional<std::string> output;
    std::string label;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_physics_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_file, "flat key = value config file");
    cmd->add_option("--output", f.output, "output root (default: $FQKR_OUTPUT_ROOT or ./fqkr_out)");
    cmd->add_option("--label", f.label, "output subdirectory name");
    auto flag = [&](const char* name, const char* key, const char* help) {
        cmd->add_option_function<std::string>(
            name, [&f, key](const std::string& v) { f.overrides.emplace_back(key, v); }, help);
    };
    flag("--seed", "seed", "random sequence seed");
    flag("--tau", "tau", "kick period tau");
    flag("--k1", "k1", "kick amplitude K1");
    flag("--k2", "k2", "kick amplitude K2");
    flag("--l0", "l0", "initial momentum / window center");
    flag("--basis", "basis", "basis size R (even; 0 = automatic)");
    flag("--steps", "steps", "number of kicks");
    flag("--log-policy", "log_policy", "every_step | fibonacci_instants | log_spaced:<ppd>");
    flag("--kind", "kind", "fibonacci | biperiodic | random | constant");
    flag("--initial", "initial", "gaussian | momentum");
    flag("--eta-branch", "eta_branch", "mean | even | odd");
    flag("--delta-source", "delta_source", "recursion_limit | printed");
}

RunConfig build_config(const CommonFlags& f, RunConfig c, bool record_overrides) {
    if (f.config_file) {
        for (const auto& [k, v] : parse_config_text(read_file(*f.config_file))) {
            apply_key(c, k, v);
            if (record_overrides) c.overridden.push_back(k + "=" + v);
        }
    }
    for (const auto& [k, v] : f.overrides) {
        apply_key(c, k, v);
        if (record_overrides) c.overridden.push_back(k + "=" + v);
    }
    c.label = f.label;
    return c;
}

void print_result(const JobResult& r) {
    std::cout << r.directory.string() << (r.ok ? "" : "  (incomplete, see report.json)") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kicked-rotor dynamics under binary kick sequences"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    CommonFlags evolve_flags;
    auto* evolve = app.add_subcommand("evolve", "run one trajectory and write trace.csv, report.json, manifest.json");
    add_physics_flags(evolve, evolve_flags);

    CommonFlags coeff_flags;
    std::uint64_t n_max = 10'946;
    std::string at = "stroboscopic";
    std::uint64_t every = 1;
    auto* coeffs = app.add_subcommand("coeffs", "exact expansion coefficients along the Fibonacci word");
    coeffs->add_option("--config", coeff_flags.config_file, "config file");
    coeffs->add_option("--output", coeff_flags.output, "output root");
    coeffs->add_option("--label", coeff_flags.label, "output subdirectory name");
    coeffs->add_option("--n-max", n_max, "last index")->check(CLI::PositiveNumber);
    coeffs->add_option("--at", at, "stroboscopic | fibonacci")->check(CLI::IsMember({"stroboscopic", "fibonacci"}));
    coeffs->add_option("--every", every, "stride of stroboscopic rows")->check(CLI::PositiveNumber);

    CommonFlags eff_flags;
    auto* effective = app.add_subcommand("effective", "spectrum and plateau estimate of the effective Fibonacci Hamiltonian");
    add_physics_flags(effective, eff_flags);

    std::vector<std::string> trace_files;
    std::optional<double> fit_min, fit_max, plateau_ref;
    std::optional<std::string> summary_path;
    auto* analyze = app.add_subcommand("analyze", "regime reports from trace CSV files");
    analyze->add_option("traces", trace_files, "trace.csv files")->required();
    analyze->add_option("--n-min", fit_min, "fit window start");
    analyze->add_option("--n-max", fit_max, "fit window end");
    analyze->add_option("--plateau-ref", plateau_ref, "plateau reference for crossover detection");
    analyze->add_option("--summary", summary_path, "write a CSV summary table here");

    CommonFlags preset_flags;
    std::string preset_name;
    unsigned jobs = 0;
    auto* preset = app.add_subcommand("preset", "run a figure preset");
    preset->add_option("name", preset_name, "preset name")->required()->check(CLI::IsMember(preset_names()));
    preset->add_option("--jobs", jobs, "parallel trajectories (default: hardware threads)");
    add_physics_flags(preset, preset_flags);

    auto* keys = app.add_subcommand("keys", "print the configuration key reference (markdown)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (evolve->parsed()) {
            auto c = build_config(evolve_flags, RunConfig{}, false);
            c.command = "evolve";
            print_result(run_job(c, output_root(evolve_flags.output)));
        } else if (coeffs->parsed()) {
            auto c = build_config(coeff_flags, RunConfig{}, false);
            c.command = "coeffs";
            if (coeffs->count("--n-max")) c.coeff_n_max = n_max;
            if (coeffs->count("--at")) c.coeff_at = at;
            if (coeffs->count("--every")) c.coeff_every = every;
            print_result(run_job(c, output_root(coeff_flags.output)));
        } else if (effective->parsed()) {
            auto c = build_config(eff_flags, RunConfig{}, false);
            c.command = "effective";
            const auto r = run_job(c, output_root(eff_flags.output));
            print_result(r);
            std::cout << "plateau_estimate " << r.report["plateau_estimate"].get<double>() << "\n";
        } else if (analyze->parsed()) {
            RegimeOptions opt;
            if (fit_min) opt.n_min = *fit_min;
            if (fit_max) opt.n_max = *fit_max;
            opt.plateau_ref = plateau_ref;
            std::vector<std::pair<std::string, json>> reports;
            for (const auto& f : trace_files) reports.emplace_back(f, analyze_trace(load_trace_csv(f), opt));
            json all = json::object();
            for (const auto& [name, r] : reports) all[name] = r;
            std::cout << all.dump(2) << "\n";
            if (summary_path) write_file_atomic(*summary_path, summary_csv(reports));
        } else if (preset->parsed()) {
            auto list = preset_jobs(preset_name);
            for (auto& c : list) {
                const std::string command = c.command;
                c = build_config(preset_flags, c, true);
                c.command = command;
            }
            const auto root = output_root(preset_flags.output) / preset_name;
            for (const auto& r : run_jobs(list, root, jobs)) print_result(r);
        } else if (keys->parsed()) {
            std::cout << config_reference_markdown();
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
