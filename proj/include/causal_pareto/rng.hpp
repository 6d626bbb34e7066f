#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace cpareto {

// splitmix64: one u64 of state, used both to derive seeds and as the
// per-stream generator for Monte-Carlo sampling. All randomness in the
// project flows through explicitly derived streams so that results are
// reproducible byte-for-byte regardless of evaluation order or thread count.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_str(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t mix_part(std::uint64_t acc, std::uint64_t part) {
    std::uint64_t s = acc ^ (part + 0x9e3779b97f4a7c15ULL + (acc << 6) + (acc >> 2));
    return splitmix64(s);
}

inline std::uint64_t mix_part(std::uint64_t acc, std::string_view part) {
    return mix_part(acc, hash_str(part));
}

inline std::uint64_t derive_seed(std::uint64_t master) { return mix_part(master, std::uint64_t{0x5eedULL}); }

// Counter-based stream splitting: derive_seed(master, "eval", i) and friends.
template <typename Part, typename... Rest>
std::uint64_t derive_seed(std::uint64_t master, Part part, Rest... rest) {
    if constexpr (sizeof...(rest) == 0)
        return mix_part(master, part);
    else
        return derive_seed(mix_part(master, part), rest...);
}

// Deterministic scalar random stream. Distribution transforms are written
// out by hand (instead of <random> distributions) so that sampled values do
// not depend on the standard library implementation.
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    double gaussian() {
        // Box-Muller; u1 in (0,1] so log() is safe.
        double u1 = 1.0 - next_double();
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    double truncated_gaussian(double mean, double stddev, double lo, double hi) {
        for (int tries = 0; tries < 1000000; ++tries) {
            double v = gaussian(mean, stddev);
            if (v >= lo && v <= hi) return v;
        }
        throw std::runtime_error("truncated_gaussian: acceptance region too small");
    }

    bool bernoulli(double p) { return next_double() < p; }

  private:
    std::uint64_t state_;
};

}  // namespace cpareto
