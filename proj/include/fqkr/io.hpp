#pragma once

// File formats: trace and coefficient CSVs, JSON reports, run manifests.
//
// Every data file carries the hash of the manifest of the run that produced it:
// CSVs as a leading "# manifest_hash=<hex>" line, JSON as a "manifest_hash" key.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fqkr/analysis.hpp"
#include "fqkr/bchcoeff.hpp"
#include "fqkr/errors.hpp"
#include "fqkr/evolve.hpp"

namespace fqkr {

using json = nlohmann::json;

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Shortest round-trip decimal for a double; to_chars ignores the locale.
inline std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// Writes via a sibling temp file and rename, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Manifest

/// The manifest hash covers everything except wall time, so identical
/// configurations produce identical hashes and identical data files.
inline std::string manifest_hash(const json& manifest) {
    json copy = manifest;
    copy.erase("wall_time_s");
    copy.erase("manifest_hash");
    return hex64(fnv1a64(copy.dump()));
}

inline json finalize_manifest(json manifest, double wall_time_s) {
    manifest["manifest_hash"] = manifest_hash(manifest);
    manifest["wall_time_s"] = wall_time_s;
    return manifest;
}

// ---------------------------------------------------------------------------
// Trace CSV: N,l2_mean,is_fibonacci_instant

inline std::string trace_csv(const EnergyTrace& t, const std::string& hash) {
    std::string out = "# manifest_hash=" + hash + "\n";
    out += "N,l2_mean,is_fibonacci_instant\n";
    for (const auto& s : t.samples) {
        out += std::to_string(s.n);
        out += ',';
        out += format_double(s.energy);
        out += is_fibonacci_instant(static_cast<std::uint64_t>(s.n)) ? ",1\n" : ",0\n";
    }
    if (!t.complete) out += "# incomplete: " + t.failure + "\n";
    return out;
}

struct LoadedTrace {
    std::string manifest_hash;
    std::vector<EnergySample> samples;
    bool complete = true;
};

/// Parses a trace CSV. Traces without a manifest hash line are rejected.
inline LoadedTrace parse_trace_csv(const std::string& text) {
    LoadedTrace t;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            constexpr std::string_view key = "# manifest_hash=";
            if (line.rfind(key, 0) == 0) t.manifest_hash = line.substr(key.size());
            if (line.rfind("# incomplete", 0) == 0) t.complete = false;
            continue;
        }
        if (!header) {
            if (line.rfind("N,l2_mean", 0) != 0) throw IntegrityError("trace CSV: missing header row");
            header = true;
            continue;
        }
        const auto c1 = line.find(',');
        if (c1 == std::string::npos) throw IntegrityError("trace CSV: malformed row " + std::to_string(lineno));
        const auto c2 = line.find(',', c1 + 1);
        try {
            EnergySample s{std::stol(line.substr(0, c1)),
                           std::stod(line.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1))};
            if (!t.samples.empty() && s.n <= t.samples.back().n)
                throw IntegrityError("trace CSV: N not strictly increasing at row " + std::to_string(lineno));
            t.samples.push_back(s);
        } catch (const std::logic_error&) {
            throw IntegrityError("trace CSV: malformed row " + std::to_string(lineno));
        }
    }
    if (t.manifest_hash.empty()) throw IntegrityError("trace CSV has no manifest hash; refusing to analyze");
    if (!header) throw IntegrityError("trace CSV: missing header row");
    return t;
}

inline LoadedTrace load_trace_csv(const std::filesystem::path& path) { return parse_trace_csv(read_file(path)); }

// ---------------------------------------------------------------------------
// Coefficient CSV

inline std::string coefficient_csv_header() {
    return "n,alpha,beta,delta,eta1,eta2,alpha_n,beta_n,delta_n,eta1_n,eta2_n,is_fibonacci_instant\n";
}

inline std::string coefficient_csv_row(const CoefficientState& c) {
    const auto necs = normalized(c);
    std::string row = std::to_string(c.n);
    for (const Rational* q : {&c.alpha, &c.beta, &c.delta, &c.eta1, &c.eta2}) {
        row += ',';
        row += q->get_str();
    }
    for (double d : {necs.alpha, necs.beta, necs.delta, necs.eta1, necs.eta2}) {
        row += ',';
        row += format_double(d);
    }
    row += is_fibonacci_instant(c.n) ? ",1\n" : ",0\n";
    return row;
}

enum class CoeffInstants { stroboscopic, fibonacci };

/// Upper bound on n for coefficient tables; the rationals stay small (they lie
/// in Z/12 with magnitude O(n^3)) but the table is produced step by step.
inline constexpr std::uint64_t kMaxCoefficientIndex = 100'000'000ULL;

inline std::string coefficient_table(std::uint64_t n_max, CoeffInstants at, const std::string& hash,
                                     std::uint64_t every = 1) {
    if (n_max < 1) throw DomainError("n_max must be >= 1");
    if (n_max > kMaxCoefficientIndex)
        throw ResourceError("n_max " + std::to_string(n_max) + " exceeds the coefficient table bound " +
                            std::to_string(kMaxCoefficientIndex));
    if (every < 1) every = 1;
    std::string out = "# manifest_hash=" + hash + "\n" + coefficient_csv_header();
    for_each_recursion(n_max, [&](const CoefficientState& c) {
        const bool keep = at == CoeffInstants::fibonacci ? is_fibonacci_instant(c.n) : (c.n % every == 0 || c.n == n_max);
        if (keep) out += coefficient_csv_row(c);
    });
    return out;
}

// ---------------------------------------------------------------------------
// JSON reports

inline json to_json(const RegimeReport& r) {
    json j;
    j["slope"] = r.slope;
    j["slope_stderr"] = r.slope_stderr;
    j["fit_window"] = {r.fit_n_min, r.fit_n_max};
    j["plateau_mean"] = r.plateau_mean;
    j["plateau_band"] = {r.plateau_low, r.plateau_high};
    j["plateau_ref"] = r.plateau_ref;
    j["crossover_step"] = r.crossover_step ? json(*r.crossover_step) : json(nullptr);
    j["verdict"] = to_string(r.verdict);
    return j;
}

}  // namespace fqkr
