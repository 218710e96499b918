#pragma once

// Run configuration, figure presets and the command implementations behind the
// fqkr tool. Kept in the library so the commands are testable without a process.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fqkr/analysis.hpp"
#include "fqkr/effham.hpp"
#include "fqkr/evolve.hpp"
#include "fqkr/io.hpp"
#include "fqkr/version.hpp"

namespace fqkr::cli {

enum class InitialKind { gaussian, momentum };

struct RunConfig {
    std::string command = "evolve";  // evolve | coeffs | effective
    std::string preset;
    std::string label;
    SequenceKind kind = SequenceKind::fibonacci;
    double k1 = 10.0;
    double k2 = 12.0;
    std::uint64_t seed = 0;
    double tau = 0.01;
    long l0 = 0;
    long basis = 0;  // 0 picks suggest_basis_size
    long steps = 10'000;
    std::string log_policy = "log_spaced:24";
    InitialKind initial = InitialKind::gaussian;
    std::string coeff_at = "stroboscopic";
    std::uint64_t coeff_n_max = 10'946;
    std::uint64_t coeff_every = 1;
    std::string eta_branch = "mean";
    std::string delta_source = "recursion_limit";
    std::vector<std::string> overridden;  // keys set by the user on top of a preset
};

struct KeyDoc {
    const char* key;
    const char* values;
    const char* description;
};

inline const std::vector<KeyDoc>& config_keys() {
    static const std::vector<KeyDoc> keys = {
        {"command", "evolve | coeffs | effective", "what a config file runs (presets set this per job)"},
        {"kind", "fibonacci | biperiodic | random | constant", "kick sequence rule"},
        {"k1", "real", "kick amplitude K1 (used where the word has K1; the only amplitude for constant)"},
        {"k2", "real", "kick amplitude K2"},
        {"seed", "unsigned integer", "seed of the random kick stream"},
        {"tau", "real > 0", "dimensionless kick period T/I"},
        {"l0", "integer", "initial momentum / window center"},
        {"basis", "even integer, 0 = automatic", "number of momentum states R"},
        {"steps", "integer >= 1", "number of kicks"},
        {"log_policy", "every_step | fibonacci_instants | log_spaced:<points per decade>", "sampling instants"},
        {"initial", "gaussian | momentum", "Gaussian exp(-(l-l0)^2) or the eigenstate |l0>"},
        {"coeff_at", "stroboscopic | fibonacci", "rows emitted by coeffs"},
        {"coeff_n_max", "integer >= 1", "last index of the coefficient table"},
        {"coeff_every", "integer >= 1", "stride of stroboscopic coefficient rows"},
        {"eta_branch", "mean | even | odd", "eta coefficients used for the effective Fibonacci Hamiltonian"},
        {"delta_source", "recursion_limit | printed", "saturated delta: +1/(2G^3) or -1/G^3"},
    };
    return keys;
}

inline std::string config_reference_markdown() {
    std::string out = "# fqkr configuration keys\n\n"
                      "Config files hold one `key = value` per line; `#` starts a comment.\n"
                      "Command-line flags override file values.\n\n"
                      "| key | values | meaning |\n|---|---|---|\n";
    for (const auto& k : config_keys())
        out += std::string("| `") + k.key + "` | " + k.values + " | " + k.description + " |\n";
    return out;
}

namespace detail {

inline double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::logic_error&) {
        throw UsageError("bad value for key '" + key + "': '" + v + "' is not a number");
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::logic_error&) {
        throw UsageError("bad value for key '" + key + "': '" + v + "' is not an integer");
    }
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Sets one key; throws UsageError naming the key on unknown keys or bad values.
inline void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
    using detail::parse_int;
    using detail::parse_real;
    if (key == "command") {
        if (value != "evolve" && value != "coeffs" && value != "effective")
            throw UsageError("bad value for key 'command': '" + value + "'");
        c.command = value;
    } else if (key == "kind") {
        try {
            c.kind = sequence_kind_from_string(value);
        } catch (const UsageError&) {
            throw UsageError("bad value for key 'kind': '" + value + "'");
        }
    } else if (key == "k1") {
        c.k1 = parse_real(key, value);
    } else if (key == "k2") {
        c.k2 = parse_real(key, value);
    } else if (key == "seed") {
        const auto s = parse_int(key, value);
        if (s < 0) throw UsageError("bad value for key 'seed': must be non-negative");
        c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "tau") {
        c.tau = parse_real(key, value);
        if (!(c.tau > 0.0)) throw UsageError("bad value for key 'tau': must be positive");
    } else if (key == "l0") {
        c.l0 = parse_int(key, value);
    } else if (key == "basis") {
        c.basis = parse_int(key, value);
        if (c.basis < 0 || c.basis % 2 != 0) throw UsageError("bad value for key 'basis': must be even and >= 0");
    } else if (key == "steps") {
        c.steps = parse_int(key, value);
        if (c.steps < 1) throw UsageError("bad value for key 'steps': must be >= 1");
    } else if (key == "log_policy") {
        try {
            (void)log_policy_from_string(value);
        } catch (const UsageError&) {
            throw UsageError("bad value for key 'log_policy': '" + value + "'");
        }
        c.log_policy = value;
    } else if (key == "initial") {
        if (value == "gaussian") c.initial = InitialKind::gaussian;
        else if (value == "momentum") c.initial = InitialKind::momentum;
        else throw UsageError("bad value for key 'initial': '" + value + "'");
    } else if (key == "coeff_at") {
        if (value != "stroboscopic" && value != "fibonacci")
            throw UsageError("bad value for key 'coeff_at': '" + value + "'");
        c.coeff_at = value;
    } else if (key == "coeff_n_max") {
        const auto n = parse_int(key, value);
        if (n < 1) throw UsageError("bad value for key 'coeff_n_max': must be >= 1");
        c.coeff_n_max = static_cast<std::uint64_t>(n);
    } else if (key == "coeff_every") {
        const auto n = parse_int(key, value);
        if (n < 1) throw UsageError("bad value for key 'coeff_every': must be >= 1");
        c.coeff_every = static_cast<std::uint64_t>(n);
    } else if (key == "eta_branch") {
        if (value != "mean" && value != "even" && value != "odd")
            throw UsageError("bad value for key 'eta_branch': '" + value + "'");
        c.eta_branch = value;
    } else if (key == "delta_source") {
        if (value != "recursion_limit" && value != "printed")
            throw UsageError("bad value for key 'delta_source': '" + value + "'");
        c.delta_source = value;
    } else {
        throw UsageError("unknown config key '" + key + "'");
    }
}

/// Parses `key = value` lines.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        auto key = detail::trim(line.substr(0, eq));
        auto value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

inline json config_to_json(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    j["preset"] = c.preset;
    j["label"] = c.label;
    j["kind"] = std::string(to_string(c.kind));
    j["k1"] = c.k1;
    j["k2"] = c.k2;
    j["seed"] = c.seed;
    j["tau"] = c.tau;
    j["l0"] = c.l0;
    j["basis"] = c.basis;
    j["steps"] = c.steps;
    j["log_policy"] = c.log_policy;
    j["initial"] = c.initial == InitialKind::gaussian ? "gaussian" : "momentum";
    j["coeff_at"] = c.coeff_at;
    j["coeff_n_max"] = c.coeff_n_max;
    j["coeff_every"] = c.coeff_every;
    j["eta_branch"] = c.eta_branch;
    j["delta_source"] = c.delta_source;
    return j;
}

inline long resolved_basis(const RunConfig& c) {
    if (c.basis > 0) return c.basis;
    return suggest_basis_size(std::max(std::abs(c.k1), std::abs(c.k2)), c.steps);
}

inline json base_manifest(const RunConfig& c) {
    json m;
    m["tool"] = "fqkr";
    m["version"] = kVersion;
    m["config"] = config_to_json(c);
    m["config"]["basis_resolved"] = resolved_basis(c);
    m["overrides"] = c.overridden;
    m["prng"] = {{"algorithm", std::string(kRandomAlgorithm)}, {"seed", c.seed}};
    m["conventions"] = {
        {"sampling", "<l^2> of psi_N = U_N...U_1 psi_0, i.e. just before kick N+1; N starts at 1"},
        {"kick_order", "U_N = exp(-i l^2 tau/2) exp(-i K_N cos theta), K_1 is the first kick"},
        {"angle_grid", "unpadded, R points"},
        {"regular_scales_constant", 1.0},
        {"eta_for_effective_hamiltonian", c.eta_branch},
        {"delta_for_effective_hamiltonian", c.delta_source},
    };
    return m;
}

inline std::filesystem::path output_root(const std::optional<std::string>& flag) {
    if (flag && !flag->empty()) return *flag;
    if (const char* env = std::getenv("FQKR_OUTPUT_ROOT"); env && *env) return env;
    return "fqkr_out";
}

inline std::string default_label(const RunConfig& c) {
    std::ostringstream s;
    if (c.command == "coeffs") {
        s << "coeffs_" << c.coeff_at << "_n" << c.coeff_n_max;
    } else if (c.command == "effective") {
        s << "effective_tau" << c.tau << "_k" << c.k1 << "_" << c.k2 << "_R" << resolved_basis(c);
    } else {
        s << to_string(c.kind) << "_tau" << c.tau << "_k" << c.k1 << "_" << c.k2 << "_l" << c.l0;
        if (c.kind == SequenceKind::random) s << "_seed" << c.seed;
    }
    return s.str();
}

struct JobResult {
    std::filesystem::path directory;
    json manifest;
    json report;
    bool ok = true;
};

inline EvolutionConfig evolution_config(const RunConfig& c) {
    EvolutionConfig e;
    e.tau = c.tau;
    e.spec = {c.kind, c.k1, c.k2, c.seed};
    e.window = BasisWindow(c.l0, resolved_basis(c));
    e.n_steps = c.steps;
    e.log_policy = log_policy_from_string(c.log_policy);
    return e;
}

inline RotorState initial_state(const RunConfig& c, const BasisWindow& w) {
    return c.initial == InitialKind::gaussian ? gaussian_state(w, c.l0) : momentum_eigenstate(w, c.l0);
}

/// evolve: trace.csv, report.json, manifest.json in `dir`.
inline JobResult run_evolve(const RunConfig& c, const std::filesystem::path& dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = evolution_config(c);
    auto manifest = base_manifest(c);
    const auto hash = manifest_hash(manifest);
    auto trace = run_trajectory(cfg, initial_state(c, cfg.window));

    json report;
    report["manifest_hash"] = hash;
    report["sequence_checksum"] = hex64(trace.sequence_checksum);
    report["complete"] = trace.complete;
    report["failed_step"] = trace.failed_step ? json(*trace.failed_step) : json(nullptr);
    report["failure"] = trace.failure;
    report["steps_done"] = trace.steps_done;
    report["max_norm_drift"] = trace.max_norm_drift;
    report["samples"] = trace.samples.size();
    try {
        report["regime"] = to_json(classify(trace));
    } catch (const FitError& e) {
        report["regime"] = nullptr;
        report["regime_error"] = e.what();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest = finalize_manifest(std::move(manifest), wall);

    write_file_atomic(dir / "trace.csv", trace_csv(trace, hash));
    write_file_atomic(dir / "report.json", report.dump(2) + "\n");
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    return {dir, manifest, report, trace.complete};
}

/// coeffs: coeffs.csv and manifest.json.
inline JobResult run_coeffs(const RunConfig& c, const std::filesystem::path& dir) {
    const auto t0 = std::chrono::steady_clock::now();
    auto manifest = base_manifest(c);
    const auto hash = manifest_hash(manifest);
    const auto at = c.coeff_at == "fibonacci" ? CoeffInstants::fibonacci : CoeffInstants::stroboscopic;
    const auto table = coefficient_table(c.coeff_n_max, at, hash, c.coeff_every);
    manifest = finalize_manifest(std::move(manifest),
                                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    write_file_atomic(dir / "coeffs.csv", table);
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    return {dir, manifest, json::object(), true};
}

inline FibonacciOptions fibonacci_options(const RunConfig& c) {
    FibonacciOptions o;
    o.eta = c.eta_branch == "even" ? EtaBranch::even : c.eta_branch == "odd" ? EtaBranch::odd : EtaBranch::mean;
    o.delta = c.delta_source == "printed" ? DeltaSource::printed : DeltaSource::recursion_limit;
    return o;
}

/// Spectral summary of the effective Fibonacci Hamiltonian.
inline json spectral_summary(const RunConfig& c, const FibonacciPropagator& fp, const std::string& hash) {
    json j;
    j["manifest_hash"] = hash;
    j["config"] = config_to_json(c);
    j["window"] = {{"l_min", fp.spectrum.window.l_min()}, {"l_max", fp.spectrum.window.l_max()}};
    j["coefficients"] = [&] {
        const auto g = saturated_coefficients(fp.options);
        return json{{"alpha", g.alpha}, {"beta", g.beta}, {"delta", g.delta}, {"eta1", g.eta1}, {"eta2", g.eta2},
                    {"eta_branch", to_string(fp.options.eta)}, {"delta_source", to_string(fp.options.delta)}};
    }();
    std::vector<double> phases(static_cast<std::size_t>(fp.spectrum.energies.size()));
    const auto ph = fp.spectrum.eigenphases();
    for (Eigen::Index i = 0; i < ph.size(); ++i) phases[i] = ph(i);
    j["eigenphases"] = phases;
    json metrics = json::array();
    for (const auto& m : localization_profile(fp.spectrum)) {
        metrics.push_back({{"peak_l", m.peak_l},
                           {"ipr", m.ipr},
                           {"tail_slope", m.tail_slope ? json(*m.tail_slope) : json(nullptr)}});
    }
    j["eigenvectors"] = std::move(metrics);
    j["plateau_estimate"] = plateau_estimate(fp.spectrum, c.l0);
    const auto scales = regular_qkr_scales(std::max(c.k1, c.k2), c.tau);
    j["regular_scales"] = {{"localization_length", scales.localization_length},
                           {"heisenberg_time", scales.heisenberg_time},
                           {"note", "order of magnitude, proportionality constants set to 1"}};
    return j;
}

/// effective: spectral.json and manifest.json.
inline JobResult run_effective(const RunConfig& c, const std::filesystem::path& dir) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig rc = c;
    if (rc.basis == 0) rc.basis = 1024;
    auto manifest = base_manifest(rc);
    const auto hash = manifest_hash(manifest);
    const BasisWindow w(0, rc.basis);
    const auto fp = fibonacci_propagator(rc.k1, rc.k2, rc.tau, w, fibonacci_options(rc));
    auto summary = spectral_summary(rc, fp, hash);
    manifest = finalize_manifest(std::move(manifest),
                                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    write_file_atomic(dir / "spectral.json", summary.dump(2) + "\n");
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    return {dir, manifest, summary, true};
}

inline JobResult run_job(const RunConfig& c, const std::filesystem::path& root) {
    const auto dir = root / (c.label.empty() ? default_label(c) : c.label);
    if (c.command == "coeffs") return run_coeffs(c, dir);
    if (c.command == "effective") return run_effective(c, dir);
    return run_evolve(c, dir);
}

// ---------------------------------------------------------------------------
// Presets

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"fig1a", "fig1b", "fig2a", "fig2b",
                                                   "fig3",  "figA3", "figB4", "figC5"};
    return names;
}

/// Jobs of a preset. Physics parameters follow the figure captions; sizes of
/// the momentum window are chosen per regime.
inline std::vector<RunConfig> preset_jobs(const std::string& name) {
    std::vector<RunConfig> jobs;
    RunConfig base;
    base.preset = name;
    base.k1 = 10.0;
    base.k2 = 12.0;
    base.l0 = 0;
    auto trace = [&](SequenceKind kind, double tau, long steps, long basis, InitialKind init, long l0 = 0) {
        RunConfig c = base;
        c.kind = kind;
        c.tau = tau;
        c.steps = steps;
        c.basis = basis;
        c.initial = init;
        c.l0 = l0;
        jobs.push_back(c);
    };
    if (name == "fig1a") {
        for (double tau : {0.01, 0.05, 0.5, 1.0, 5.0})
            trace(SequenceKind::fibonacci, tau, 10'000, tau >= 0.5 ? 16384 : 4096, InitialKind::momentum);
    } else if (name == "fig1b") {
        for (double tau : {0.01, 0.02, 0.05})
            trace(SequenceKind::fibonacci, tau, 1'000'000, 8192, InitialKind::momentum);
    } else if (name == "fig2a" || name == "fig2b") {
        RunConfig c = base;
        c.command = "coeffs";
        c.coeff_at = name == "fig2a" ? "stroboscopic" : "fibonacci";
        c.coeff_n_max = name == "fig2a" ? fibonacci_instant(20) : fibonacci_instant(30);
        jobs.push_back(c);
    } else if (name == "fig3") {
        RunConfig c = base;
        c.command = "effective";
        c.tau = 0.01;
        c.basis = 1024;
        jobs.push_back(c);
    } else if (name == "figA3") {
        base.k1 = base.k2 = 15.0;
        for (double tau : {0.1, 1.0, 5.0})
            trace(SequenceKind::constant, tau, 10'000, 8192, InitialKind::momentum);
    } else if (name == "figB4") {
        for (double tau : {0.01, 1.0, 5.0}) {
            trace(SequenceKind::biperiodic, tau, 10'000, tau >= 1.0 ? 16384 : 4096, InitialKind::momentum);
            trace(SequenceKind::random, tau, 10'000, tau >= 1.0 ? 16384 : 4096, InitialKind::momentum);
        }
    } else if (name == "figC5") {
        for (long l0 : {0L, 100L, 200L})
            trace(SequenceKind::fibonacci, 0.01, 100'000, 2048, InitialKind::gaussian, l0);
    } else {
        throw UsageError("unknown preset '" + name + "'");
    }
    return jobs;
}

/// Runs independent jobs concurrently; each job writes its own directory.
inline std::vector<JobResult> run_jobs(const std::vector<RunConfig>& jobs, const std::filesystem::path& root,
                                       unsigned max_parallel = std::thread::hardware_concurrency()) {
    if (max_parallel == 0) max_parallel = 1;
    std::vector<JobResult> results(jobs.size());
    std::size_t next = 0;
    while (next < jobs.size()) {
        std::vector<std::future<JobResult>> batch;
        for (unsigned k = 0; k < max_parallel && next < jobs.size(); ++k, ++next)
            batch.push_back(std::async(std::launch::async, [&, i = next] { return run_job(jobs[i], root); }));
        const std::size_t start = next - batch.size();
        for (std::size_t k = 0; k < batch.size(); ++k) results[start + k] = batch[k].get();
    }
    return results;
}

/// analyze: regime report per trace; with several traces also a CSV summary.
inline json analyze_trace(const LoadedTrace& t, const RegimeOptions& opt) {
    json j = to_json(classify(std::span<const EnergySample>(t.samples), opt));
    j["manifest_hash"] = t.manifest_hash;
    j["complete"] = t.complete;
    return j;
}

inline std::string summary_csv(const std::vector<std::pair<std::string, json>>& reports) {
    std::string out = "trace,slope,slope_stderr,plateau_mean,plateau_low,plateau_high,crossover_step,verdict\n";
    for (const auto& [name, r] : reports) {
        out += name + "," + format_double(r["slope"].get<double>()) + "," +
               format_double(r["slope_stderr"].get<double>()) + "," +
               format_double(r["plateau_mean"].get<double>()) + "," +
               format_double(r["plateau_band"][0].get<double>()) + "," +
               format_double(r["plateau_band"][1].get<double>()) + "," +
               (r["crossover_step"].is_null() ? std::string() : std::to_string(r["crossover_step"].get<long>())) +
               "," + r["verdict"].get<std::string>() + "\n";
    }
    return out;
}

}  // namespace fqkr::cli
