#pragma once

// Binary kick sequences: the golden-mean Fibonacci word, bi-periodic,
// Bernoulli-random and constant drives.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "fqkr/errors.hpp"

namespace fqkr {

enum class SequenceKind { fibonacci, biperiodic, random, constant };

enum class Kick : std::uint8_t { K1, K2 };

inline std::string_view to_string(SequenceKind k) {
    switch (k) {
        case SequenceKind::fibonacci: return "fibonacci";
        case SequenceKind::biperiodic: return "biperiodic";
        case SequenceKind::random: return "random";
        case SequenceKind::constant: return "constant";
    }
    return "?";
}

inline SequenceKind sequence_kind_from_string(std::string_view s) {
    if (s == "fibonacci") return SequenceKind::fibonacci;
    if (s == "biperiodic") return SequenceKind::biperiodic;
    if (s == "random") return SequenceKind::random;
    if (s == "constant") return SequenceKind::constant;
    throw UsageError("unknown sequence kind '" + std::string(s) + "'");
}

/// Identifier of the random-kind bit generator, written into run manifests.
inline constexpr std::string_view kRandomAlgorithm = "splitmix64-counter/top-bit";

struct KickSequenceSpec {
    SequenceKind kind = SequenceKind::fibonacci;
    double k1 = 10.0;
    double k2 = 12.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!std::isfinite(k1) || (kind != SequenceKind::constant && !std::isfinite(k2)))
            throw DomainError("kick amplitudes must be finite");
    }
};

namespace detail {

// Largest n for which 5 n^2 fits in 64 bits.
inline constexpr std::uint64_t kMaxBeattyIndex = 1'900'000'000ULL;

inline std::uint64_t isqrt(std::uint64_t x) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(x)));
    while (r > 0 && r * r > x) --r;
    while ((r + 1) * (r + 1) <= x) ++r;
    return r;
}

inline void check_beatty_range(std::uint64_t n) {
    if (n > kMaxBeattyIndex)
        throw DomainError("index " + std::to_string(n) + " exceeds exact floor range");
}

inline std::uint64_t splitmix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// floor(n G) with G the golden mean, exact. n sqrt5 is irrational for n > 0,
/// so floor(n + n sqrt5) = n + isqrt(5 n^2) and halving commutes with floor.
inline std::uint64_t floor_n_golden(std::uint64_t n) {
    detail::check_beatty_range(n);
    return (n + detail::isqrt(5 * n * n)) / 2;
}

/// floor(n G / (1 + G)) = floor(n / G), exact.
inline std::uint64_t floor_n_over_golden(std::uint64_t n) {
    detail::check_beatty_range(n);
    if (n == 0) return 0;
    return (detail::isqrt(5 * n * n) - n) / 2;
}

/// floor(n / (1 + G)) = floor(n / G^2), exact.
inline std::uint64_t floor_n_over_golden_sq(std::uint64_t n) {
    detail::check_beatty_range(n);
    if (n == 0) return 0;
    // 3n - n sqrt5 lies strictly between 3n - isqrt(5n^2) - 1 and 3n - isqrt(5n^2).
    return (3 * n - detail::isqrt(5 * n * n) - 1) / 2;
}

/// Generating function of the Fibonacci word, floor((n+1)G) - floor(nG), in {1, 2}.
inline int gamma(std::uint64_t n) {
    if (n == 0) throw DomainError("gamma is defined for n >= 1");
    detail::check_beatty_range(n + 1);
    return static_cast<int>(floor_n_golden(n + 1) - floor_n_golden(n));
}

inline Kick fibonacci_kick(std::uint64_t n) { return gamma(n) == 2 ? Kick::K1 : Kick::K2; }

/// Kick label at stroboscopic index n >= 1.
inline Kick kick_label(std::uint64_t n, const KickSequenceSpec& spec) {
    if (n == 0) throw DomainError("kick index starts at 1");
    switch (spec.kind) {
        case SequenceKind::fibonacci: return fibonacci_kick(n);
        case SequenceKind::biperiodic: return n % 2 == 0 ? Kick::K1 : Kick::K2;
        case SequenceKind::random: {
            auto bits = detail::splitmix64(spec.seed + n * 0x9E3779B97F4A7C15ULL);
            return (bits >> 63) ? Kick::K1 : Kick::K2;
        }
        case SequenceKind::constant: return Kick::K1;
    }
    return Kick::K1;
}

inline double kick_amplitude(std::uint64_t n, const KickSequenceSpec& spec) {
    return kick_label(n, spec) == Kick::K1 ? spec.k1 : spec.k2;
}

/// Fibonacci instants F(1)=1, F(2)=2, F(m)=F(m-1)+F(m-2).
inline std::uint64_t fibonacci_instant(int m) {
    if (m < 1) throw DomainError("Fibonacci index starts at 1");
    std::uint64_t a = 1, b = 2;  // F(1), F(2)
    if (m == 1) return a;
    for (int i = 3; i <= m; ++i) {
        if (b > std::numeric_limits<std::uint64_t>::max() - a)
            throw DomainError("F(" + std::to_string(m) + ") overflows 64 bits");
        std::uint64_t c = a + b;
        a = b;
        b = c;
    }
    return b;
}

/// Largest m with F(m) <= n, or 0 when n == 0.
inline int fibonacci_index_floor(std::uint64_t n) {
    int m = 0;
    for (std::uint64_t a = 1, b = 2; a <= n; ++m) {
        std::uint64_t c = a + b;
        a = b;
        b = c;
    }
    return m;
}

inline bool is_fibonacci_instant(std::uint64_t n) {
    return n >= 1 && fibonacci_instant(fibonacci_index_floor(n)) == n;
}

/// Labels of the first n kicks.
inline std::vector<Kick> kick_labels(std::uint64_t n, const KickSequenceSpec& spec) {
    std::vector<Kick> out;
    out.reserve(n);
    for (std::uint64_t i = 1; i <= n; ++i) out.push_back(kick_label(i, spec));
    return out;
}

/// First F(m) labels of the Fibonacci word.
inline std::vector<Kick> sequence_prefix(int m, const KickSequenceSpec& spec) {
    if (spec.kind != SequenceKind::fibonacci)
        throw UsageError("sequence_prefix requires a fibonacci sequence");
    return kick_labels(fibonacci_instant(m), spec);
}

/// Substitution-built word S_m = S_{m-1} S_{m-2}, S_1 = K1, S_2 = K1 K2.
inline std::vector<Kick> substitution_word(int m) {
    if (m < 1) throw DomainError("Fibonacci index starts at 1");
    std::vector<Kick> prev{Kick::K1};
    std::vector<Kick> cur{Kick::K1, Kick::K2};
    if (m == 1) return prev;
    for (int i = 3; i <= m; ++i) {
        std::vector<Kick> next = cur;
        next.insert(next.end(), prev.begin(), prev.end());
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

/// FNV-1a over the first min(n, 1e5) kick labels.
inline std::uint64_t sequence_checksum(std::uint64_t n, const KickSequenceSpec& spec) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const std::uint64_t count = n < 100'000 ? n : 100'000;
    for (std::uint64_t i = 1; i <= count; ++i) {
        h ^= kick_label(i, spec) == Kick::K1 ? 1u : 2u;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace fqkr
