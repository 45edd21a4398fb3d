#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace diffnet {

/// splitmix64 mixing step; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Folds `index` into `seed`, giving a new seed that is decorrelated from
/// both inputs. Chaining derive_seed() calls builds hierarchical streams
/// (master -> run -> node -> source) without any cross-stream coupling.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL + splitmix64(index + 0x632BE59BD9B4E019ULL)));
}

/// Identifiers of the independent randomness sources attached to one node
/// within one realization. Keeping sources separate guarantees that, e.g.,
/// disabling perturbations does not shift the regressor or noise draws.
enum class RandomSource : std::uint64_t {
    regressor = 0,
    noise = 1,
    perturbation = 2,
    tracking_state = 3,
    tracking_observation = 4,
    placement = 5,
};

/// Seedable PRNG stream: mt19937_64 plus Gaussian sampling via Box-Muller.
/// Each stream owns its state; streams derived with distinct (run, node,
/// source) triples are independent.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    RngStream(std::uint64_t seed, std::uint64_t run, std::uint64_t node, RandomSource source)
        : engine_(derive_seed(derive_seed(derive_seed(seed, run), node),
                              static_cast<std::uint64_t>(source))) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal draw (Box–Muller, cached spare).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * M_PI * u2);
        has_spare_ = true;
        return mag * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace diffnet
