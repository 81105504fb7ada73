#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace relmart {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// A named, seeded random stream. Distinct (master_seed, stream_id) pairs give
/// statistically independent output; the same pair reproduces bit-identically.
/// fork(i) derives per-path child streams without string churn.
struct RngStream {
    std::uint64_t master_seed = 0;
    std::string stream_id;
    std::uint64_t key = 0;

    RngStream() = default;
    RngStream(std::uint64_t seed, std::string_view id)
        : master_seed(seed), stream_id(id) {
        key = detail::splitmix64(seed ^ detail::splitmix64(detail::fnv1a64(id)));
    }

    RngStream fork(std::uint64_t index) const {
        RngStream child = *this;
        child.key = detail::splitmix64(key ^ detail::splitmix64(index + 0x5851f42d4c957f2dULL));
        return child;
    }

    std::mt19937_64 engine() const { return std::mt19937_64(key); }
};

/// Standard normal sampler (Marsaglia polar method). Deterministic given the
/// stream; the distributional contract is the only thing callers rely on.
class GaussianSampler {
public:
    explicit GaussianSampler(const RngStream& stream) : eng_(stream.engine()) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform_pm1();
            v = uniform_pm1();
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    /// Uniform in (0, 1).
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    double uniform_pm1() { return 2.0 * uniform() - 1.0; }

    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace relmart
