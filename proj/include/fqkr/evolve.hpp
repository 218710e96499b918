#pragma once

// Stroboscopic split-step evolution of the kicked rotor.
//
// One period applies exp(-i K_N cos theta) pointwise on an R-point angle grid,
// reached by an unpadded DFT of the momentum window, then the free phase
// exp(-i l^2 tau / 2) in momentum space. The DFT pair is an exact unitary change
// of basis, so every step is exactly unitary on the truncated space.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "fqkr/errors.hpp"
#include "fqkr/hilbert.hpp"
#include "fqkr/kickseq.hpp"

namespace fqkr {

namespace detail {

// Planner calls are not thread-safe in FFTW; execution is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (!data) throw ResourceError("fftw_malloc failed");
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    cplx* data;
};

struct FftwPlan {
    fftw_plan plan = nullptr;
    FftwPlan(int n, cplx* buf, int sign) {
        std::lock_guard lock(fftw_planner_mutex());
        auto* p = reinterpret_cast<fftw_complex*>(buf);
        // ESTIMATE keeps the plan (and therefore the rounding) identical run to run.
        plan = fftw_plan_dft_1d(n, p, p, sign, FFTW_ESTIMATE);
        if (!plan) throw ResourceError("fftw plan creation failed");
    }
    ~FftwPlan() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
};

}  // namespace detail

/// Per-trajectory propagator. Owns its FFT plans and phase tables; not shareable
/// across threads, but independent instances run concurrently.
class SplitStepPropagator {
public:
    SplitStepPropagator(BasisWindow window, double tau)
        : window_(window),
          tau_(tau),
          buffer_(static_cast<std::size_t>(window.size)),
          to_angle_(static_cast<int>(window.size), buffer_.data, FFTW_BACKWARD),
          to_momentum_(static_cast<int>(window.size), buffer_.data, FFTW_FORWARD),
          free_phase_(static_cast<std::size_t>(window.size)),
          free_phase_inv_(static_cast<std::size_t>(window.size)) {
        if (!(tau >= 0.0) || !std::isfinite(tau)) throw DomainError("tau must be finite and >= 0");
        for (long i = 0; i < window.size; ++i) {
            const double l = static_cast<double>(window.momentum(i));
            const double phase = 0.5 * tau * l * l;
            free_phase_[i] = std::polar(1.0, -phase);
            free_phase_inv_[i] = std::conj(free_phase_[i]);
        }
    }

    const BasisWindow& window() const { return window_; }
    double tau() const { return tau_; }

    /// exp(-i l^2 tau/2) exp(-i K cos theta).
    void step(RotorState& s, double kick) {
        check(s);
        apply_kick(s, kick, false);
        apply_free(s, free_phase_);
    }

    /// Inverse of step: conjugate phases in reverse order.
    void step_inverse(RotorState& s, double kick) {
        check(s);
        apply_free(s, free_phase_inv_);
        apply_kick(s, kick, true);
    }

    void kick_only(RotorState& s, double kick) {
        check(s);
        apply_kick(s, kick, false);
    }

private:
    void check(const RotorState& s) const {
        if (!(s.window == window_)) throw UsageError("state window does not match propagator");
    }

    const std::vector<cplx>& kick_phase(double kick, bool inverse) {
        auto key = std::make_pair(kick, inverse);
        auto it = kick_cache_.find(key);
        if (it != kick_cache_.end()) return it->second;
        std::vector<cplx> ph(static_cast<std::size_t>(window_.size));
        const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(window_.size);
        const double sign = inverse ? 1.0 : -1.0;
        for (long j = 0; j < window_.size; ++j)
            ph[j] = std::polar(1.0, sign * kick * std::cos(dtheta * static_cast<double>(j)));
        return kick_cache_.emplace(key, std::move(ph)).first->second;
    }

    void apply_kick(RotorState& s, double kick, bool inverse) {
        if (kick == 0.0) return;
        const auto& ph = kick_phase(kick, inverse);
        const long n = window_.size;
        std::copy(s.amplitudes.data(), s.amplitudes.data() + n, buffer_.data);
        fftw_execute(to_angle_.plan);
        for (long j = 0; j < n; ++j) buffer_.data[j] *= ph[j];
        fftw_execute(to_momentum_.plan);
        const double scale = 1.0 / static_cast<double>(n);
        for (long k = 0; k < n; ++k) s.amplitudes(k) = buffer_.data[k] * scale;
    }

    static void apply_free(RotorState& s, const std::vector<cplx>& ph) {
        for (long k = 0; k < s.window.size; ++k) s.amplitudes(k) *= ph[k];
    }

    BasisWindow window_;
    double tau_;
    detail::FftwBuffer buffer_;
    detail::FftwPlan to_angle_;
    detail::FftwPlan to_momentum_;
    std::vector<cplx> free_phase_;
    std::vector<cplx> free_phase_inv_;
    std::map<std::pair<double, bool>, std::vector<cplx>> kick_cache_;
};

/// Single period on a copy of the state.
inline RotorState step(RotorState s, double kick, double tau) {
    SplitStepPropagator prop(s.window, tau);
    prop.step(s, kick);
    return s;
}

// ---------------------------------------------------------------------------

enum class LogKind { every_step, fibonacci_instants, log_spaced };

struct LogPolicy {
    LogKind kind = LogKind::log_spaced;
    int points_per_decade = 24;

    static LogPolicy every_step() { return {LogKind::every_step, 0}; }
    static LogPolicy fibonacci_instants() { return {LogKind::fibonacci_instants, 0}; }
    static LogPolicy log_spaced(int ppd = 24) { return {LogKind::log_spaced, ppd}; }
};

inline std::string to_string(const LogPolicy& p) {
    switch (p.kind) {
        case LogKind::every_step: return "every_step";
        case LogKind::fibonacci_instants: return "fibonacci_instants";
        case LogKind::log_spaced: return "log_spaced:" + std::to_string(p.points_per_decade);
    }
    return "?";
}

inline LogPolicy log_policy_from_string(const std::string& s) {
    if (s == "every_step") return LogPolicy::every_step();
    if (s == "fibonacci_instants" || s == "fibonacci") return LogPolicy::fibonacci_instants();
    if (s == "log_spaced") return LogPolicy::log_spaced();
    if (s.rfind("log_spaced:", 0) == 0) {
        int ppd = 0;
        try {
            ppd = std::stoi(s.substr(11));
        } catch (const std::exception&) {
            throw UsageError("bad log policy '" + s + "'");
        }
        if (ppd < 1) throw UsageError("log_spaced needs at least 1 point per decade");
        return LogPolicy::log_spaced(ppd);
    }
    throw UsageError("unknown log policy '" + s + "'");
}

/// Sorted step indices (1..n_steps) at which the energy is recorded. The last
/// step is always included.
inline std::vector<long> sample_instants(const LogPolicy& policy, long n_steps) {
    std::vector<long> out;
    switch (policy.kind) {
        case LogKind::every_step:
            out.resize(static_cast<std::size_t>(n_steps));
            for (long i = 0; i < n_steps; ++i) out[i] = i + 1;
            return out;
        case LogKind::fibonacci_instants:
            for (int m = 1;; ++m) {
                const auto f = static_cast<long>(fibonacci_instant(m));
                if (f > n_steps) break;
                out.push_back(f);
            }
            break;
        case LogKind::log_spaced: {
            const double decades = std::log10(static_cast<double>(n_steps));
            const long count = static_cast<long>(std::floor(decades * policy.points_per_decade));
            for (long k = 0; k <= count; ++k) {
                auto n = std::lround(std::pow(10.0, static_cast<double>(k) / policy.points_per_decade));
                n = std::clamp(n, 1L, n_steps);
                if (out.empty() || n > out.back()) out.push_back(n);
            }
            break;
        }
    }
    if (out.empty() || out.back() != n_steps) out.push_back(n_steps);
    return out;
}

struct EvolutionConfig {
    double tau = 1.0;
    KickSequenceSpec spec;
    BasisWindow window{0, 1024};
    long n_steps = 1000;
    LogPolicy log_policy = LogPolicy::log_spaced();
    double leakage_threshold = 1e-8;
    double leakage_fraction = 0.05;

    void validate() const {
        if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("tau must be positive");
        if (n_steps < 1) throw DomainError("n_steps must be >= 1");
        spec.validate();
    }
};

struct EnergySample {
    long n;
    double energy;
};

struct EnergyTrace {
    std::vector<EnergySample> samples;
    EvolutionConfig config;
    std::uint64_t sequence_checksum = 0;
    bool complete = true;
    std::optional<long> failed_step;
    std::string failure;
    double max_norm_drift = 0.0;
    long steps_done = 0;
};

/// Throws TruncationError when too much probability sits near the window edges.
inline void check_edge_leakage(const RotorState& s, long step_index, double threshold = 1e-8,
                               double fraction = 0.05) {
    const double p = edge_probability(s, fraction);
    if (p > threshold) {
        char msg[160];
        std::snprintf(msg, sizeof msg, "edge leakage %.3g at step %ld exceeds %.3g; increase the basis size", p,
                      step_index, threshold);
        throw TruncationError(msg, step_index, p);
    }
}

/// Applies kicks first..last (inclusive) of the sequence to the state.
inline void propagate(SplitStepPropagator& prop, RotorState& s, const KickSequenceSpec& spec,
                      long first, long last) {
    for (long n = first; n <= last; ++n) prop.step(s, kick_amplitude(static_cast<std::uint64_t>(n), spec));
}

/// Runs N = 1..n_steps and records <l^2> of psi_N = U_N ... U_1 psi_0, i.e. the
/// state just before kick N+1. A truncation failure ends the run early with the
/// partial trace and the failing step recorded.
inline EnergyTrace run_trajectory(const EvolutionConfig& config, RotorState state) {
    config.validate();
    if (!(state.window == config.window)) throw UsageError("initial state window does not match config");
    check_edge_leakage(state, 0, config.leakage_threshold, config.leakage_fraction);

    EnergyTrace trace;
    trace.config = config;
    trace.sequence_checksum = sequence_checksum(static_cast<std::uint64_t>(config.n_steps), config.spec);

    SplitStepPropagator prop(config.window, config.tau);
    const auto instants = sample_instants(config.log_policy, config.n_steps);
    trace.samples.reserve(instants.size());
    std::size_t next = 0;
    try {
        for (long n = 1; n <= config.n_steps; ++n) {
            prop.step(state, kick_amplitude(static_cast<std::uint64_t>(n), config.spec));
            check_edge_leakage(state, n, config.leakage_threshold, config.leakage_fraction);
            trace.steps_done = n;
            if (next < instants.size() && instants[next] == n) {
                trace.max_norm_drift = std::max(trace.max_norm_drift, std::abs(state.norm() - 1.0));
                trace.samples.push_back({n, kinetic_energy(state)});
                ++next;
            }
        }
    } catch (const TruncationError& e) {
        trace.complete = false;
        trace.failed_step = e.step;
        trace.failure = e.what();
    }
    trace.max_norm_drift = std::max(trace.max_norm_drift, std::abs(state.norm() - 1.0));
    return trace;
}

/// Power-of-two basis size for a run expected to diffuse: half-width of eight
/// standard deviations of the quasilinear estimate <l^2> ~ K^2 N / 2, plus 256.
/// Momentum changes by K sin(theta) per kick whatever tau is, so this bounds
/// the spread in the diffusive regime and overestimates it in localized ones.
inline long suggest_basis_size(double k_max, long n_steps, long minimum = 512) {
    const double sigma = std::sqrt(0.5 * k_max * k_max * static_cast<double>(n_steps));
    const double need = 2.0 * (8.0 * sigma + 256.0);
    long r = minimum;
    while (static_cast<double>(r) < need) r *= 2;
    return r;
}

}  // namespace fqkr
