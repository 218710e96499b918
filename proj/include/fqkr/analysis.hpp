#pragma once

// Regime classification of kinetic-energy traces: log-log growth fits and
// detection of the plateau-to-diffusion crossover.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fqkr/errors.hpp"
#include "fqkr/evolve.hpp"

namespace fqkr {

struct FitError : NumericError {
    using NumericError::NumericError;
};

struct GrowthFit {
    double slope;
    double stderr_;
    double intercept;
    int points;
};

/// Least-squares fit of log E against log N over samples with n_min <= N <= n_max.
inline GrowthFit fit_growth(std::span<const EnergySample> samples, double n_min, double n_max) {
    std::vector<double> x, y;
    for (const auto& s : samples) {
        const auto n = static_cast<double>(s.n);
        if (n < n_min || n > n_max) continue;
        if (!(s.energy > 0.0)) throw FitError("fit_growth needs strictly positive energies");
        x.push_back(std::log(n));
        y.push_back(std::log(s.energy));
    }
    const auto k = static_cast<int>(x.size());
    if (k < 10)
        throw FitError("fit_growth needs at least 10 samples in [" + std::to_string(n_min) + ", " +
                       std::to_string(n_max) + "], found " + std::to_string(k));
    double mx = 0, my = 0;
    for (int i = 0; i < k; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < k; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw FitError("fit_growth: all samples share one N");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ssr = 0;
    for (int i = 0; i < k; ++i) {
        const double r = y[i] - intercept - slope * x[i];
        ssr += r * r;
    }
    return {slope, std::sqrt(ssr / (k - 2) / sxx), intercept, k};
}

inline GrowthFit fit_growth(const EnergyTrace& t, double n_min, double n_max) {
    return fit_growth(std::span<const EnergySample>(t.samples), n_min, n_max);
}

struct CrossoverOptions {
    double factor = 3.0;     // trailing median must exceed factor * plateau_ref
    double min_slope = 0.5;  // and the trailing-window log-log slope must exceed this
    int window = 9;          // logged points per trailing window
};

namespace detail {

inline double median(std::vector<double> v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
    }
    return m;
}

inline double window_slope(std::span<const EnergySample> w) {
    double mx = 0, my = 0;
    const auto k = static_cast<double>(w.size());
    for (const auto& s : w) {
        mx += std::log(static_cast<double>(s.n));
        my += std::log(std::max(s.energy, 1e-300));
    }
    mx /= k;
    my /= k;
    double sxx = 0, sxy = 0;
    for (const auto& s : w) {
        const double dx = std::log(static_cast<double>(s.n)) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(std::max(s.energy, 1e-300)) - my);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace detail

/// Onset of sustained growth above a plateau. The detector triggers at the first
/// logged point whose trailing window has median > factor * plateau_ref and
/// slope > min_slope, then reports the earliest logged N from which the
/// trailing slope stayed above min_slope without interruption up to the trigger.
inline std::optional<long> detect_crossover(std::span<const EnergySample> samples, double plateau_ref,
                                            const CrossoverOptions& opt = {}) {
    const auto w = static_cast<std::size_t>(opt.window);
    if (samples.size() < w || w < 3) return std::nullopt;
    if (samples.front().n <= 0 ||
        static_cast<double>(samples.back().n) < 1000.0 * static_cast<double>(samples.front().n))
        throw DomainError("detect_crossover needs a trace spanning at least 3 decades");

    std::vector<double> slope(samples.size(), 0.0);
    std::vector<bool> rising(samples.size(), false);
    for (std::size_t i = w - 1; i < samples.size(); ++i) {
        const auto win = samples.subspan(i + 1 - w, w);
        slope[i] = detail::window_slope(win);
        rising[i] = slope[i] > opt.min_slope;
        if (!rising[i]) continue;
        std::vector<double> e;
        e.reserve(w);
        for (const auto& s : win) e.push_back(s.energy);
        if (detail::median(std::move(e)) > opt.factor * plateau_ref) {
            std::size_t onset = i;
            while (onset > w - 1 && rising[onset - 1]) --onset;
            return samples[onset].n;
        }
    }
    return std::nullopt;
}

inline std::optional<long> detect_crossover(const EnergyTrace& t, double plateau_ref,
                                            const CrossoverOptions& opt = {}) {
    return detect_crossover(std::span<const EnergySample>(t.samples), plateau_ref, opt);
}

enum class Verdict { localized, diffusive, crossover, indeterminate };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::localized: return "localized";
        case Verdict::diffusive: return "diffusive";
        case Verdict::crossover: return "crossover";
        case Verdict::indeterminate: return "indeterminate";
    }
    return "?";
}

struct RegimeOptions {
    double n_min = 0;  // fit window; 0 picks the last two decades of the trace
    double n_max = 0;
    std::optional<double> plateau_ref;  // default: median energy over N in [10, 100]
    double localized_max_slope = 0.15;
    double diffusive_slope = 1.0;
    double diffusive_tolerance = 0.2;
    CrossoverOptions crossover;
};

struct RegimeReport {
    double slope = 0;
    double slope_stderr = 0;
    double fit_n_min = 0, fit_n_max = 0;
    double plateau_mean = 0;
    double plateau_low = 0, plateau_high = 0;
    double plateau_ref = 0;
    std::optional<long> crossover_step;
    Verdict verdict = Verdict::indeterminate;
};

inline RegimeReport classify(std::span<const EnergySample> samples, const RegimeOptions& opt = {}) {
    if (samples.empty()) throw FitError("empty trace");
    RegimeReport r;
    const auto last = static_cast<double>(samples.back().n);
    r.fit_n_max = opt.n_max > 0 ? opt.n_max : last;
    r.fit_n_min = opt.n_min > 0 ? opt.n_min : std::max(1.0, r.fit_n_max / 100.0);
    const auto fit = fit_growth(samples, r.fit_n_min, r.fit_n_max);
    r.slope = fit.slope;
    r.slope_stderr = fit.stderr_;

    long double sum = 0;
    int count = 0;
    r.plateau_low = std::numeric_limits<double>::infinity();
    r.plateau_high = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        const auto n = static_cast<double>(s.n);
        if (n < r.fit_n_min || n > r.fit_n_max) continue;
        sum += s.energy;
        ++count;
        r.plateau_low = std::min(r.plateau_low, s.energy);
        r.plateau_high = std::max(r.plateau_high, s.energy);
    }
    r.plateau_mean = static_cast<double>(sum / count);

    if (opt.plateau_ref) {
        r.plateau_ref = *opt.plateau_ref;
    } else {
        std::vector<double> early;
        for (const auto& s : samples)
            if (s.n >= 10 && s.n <= 100) early.push_back(s.energy);
        r.plateau_ref = early.empty() ? samples.front().energy : detail::median(std::move(early));
    }
    if (static_cast<double>(samples.back().n) >= 1000.0 * static_cast<double>(samples.front().n))
        r.crossover_step = detect_crossover(samples, r.plateau_ref, opt.crossover);

    // A crossover needs a non-rising stretch before the onset; a trace that rises
    // from its first full window is diffusive or indeterminate.
    const auto first_window_n = samples[std::min<std::size_t>(samples.size(), opt.crossover.window) - 1].n;
    if (r.crossover_step && *r.crossover_step > first_window_n)
        r.verdict = Verdict::crossover;
    else if (std::abs(r.slope - opt.diffusive_slope) <= opt.diffusive_tolerance)
        r.verdict = Verdict::diffusive;
    else if (r.slope <= opt.localized_max_slope)
        r.verdict = Verdict::localized;
    return r;
}

inline RegimeReport classify(const EnergyTrace& t, const RegimeOptions& opt = {}) {
    return classify(std::span<const EnergySample>(t.samples), opt);
}

}  // namespace fqkr
