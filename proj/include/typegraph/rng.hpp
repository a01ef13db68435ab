#ifndef TYPEGRAPH_RNG_HPP
#define TYPEGRAPH_RNG_HPP

#include <cstdint>
#include <string>

namespace typegraph {

// Deterministic, platform-independent randomness. All random choices in the
// project derive from splitmix64 streams keyed by (seed, purpose string) so
// that values do not depend on creation order.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // warm up so nearby seeds decorrelate
        splitmix64(state_);
        splitmix64(state_);
    }

    Rng(std::uint64_t seed, const std::string& stream) : Rng(seed ^ fnv1a(stream)) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0, 1).
    double next_double() { return double(next_u64() >> 11) * (1.0 / 9007199254740992.0); }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return n ? next_u64() % n : 0; }

    /// Fisher-Yates shuffle.
    template <typename Vec>
    void shuffle(Vec& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace typegraph

#endif
