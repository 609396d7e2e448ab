#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "causeway/common.hpp"

namespace causeway {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Mixes a parent seed with a sequence of keys. Every random stream in the
/// project is derived this way from the single top-level seed, so streams are
/// independent of evaluation order and thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) {
    return splitmix64(seed ^ splitmix64(key + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
    return derive_seed(seed, fnv1a(name));
}

template <typename... Keys>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t first, std::uint64_t second, Keys... rest) {
    return derive_seed(derive_seed(seed, first), second, rest...);
}

/// Counter-based generator: the n-th draw is a pure function of (key, n).
/// Distribution transforms are written out here rather than taken from
/// <random> so that streams are bit-stable across standard libraries.
class Stream {
public:
    explicit Stream(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() { return splitmix64(key_ ^ splitmix64(counter_++)); }

    /// Uniform in (0, 1).
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    /// Standard logistic draw (heavier tails than the normal).
    double logistic() {
        const double u = uniform();
        return std::log(u / (1.0 - u));
    }

    /// Index in [0, n).
    std::size_t below(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    /// Poisson via inversion for small means, normal approximation above 60.
    int poisson(double mean);

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

inline int Stream::poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 60.0) {
        const double draw = std::round(normal(mean, std::sqrt(mean)));
        return draw < 0.0 ? 0 : static_cast<int>(draw);
    }
    const double limit = std::exp(-mean);
    double product = uniform();
    int count = 0;
    while (product > limit) {
        product *= uniform();
        ++count;
    }
    return count;
}

}  // namespace causeway
