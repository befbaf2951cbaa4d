#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gplab {

/*
 * Deterministic RNG plumbing.  Every independent sampling unit (a path, a
 * sample, a sweep point) gets its own stream derived from (root seed, unit
 * index) via splitmix64 mixing, so results are bit-identical for any thread
 * partitioning and for reruns with the same seed.
 */

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t unit) {
    return splitmix64(root ^ splitmix64(unit + 0x51ed2701a9b3c5f7ULL));
}

/* mt19937_64 with explicitly coded uniform/normal draws (no reliance on
 * library distribution internals, which keeps streams stable). */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // in (0, 1)
        const std::uint64_t u = eng_();
        return (static_cast<double>(u >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {  // Box-Muller, one value per call (cached partner)
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    std::uint64_t next_u64() { return eng_(); }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gplab
