#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace faceattr {

/// Seeded random source with a platform-independent output sequence.
///
/// std::mt19937_64 has a fully specified sequence, but the standard
/// distributions do not, so every conversion to a real or bounded integer is
/// done here by hand. All randomness in a run flows from one seed through
/// named substreams ("split", "init", "dropout", ...).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent stream derived from `seed` and a stream name.
    static Rng substream(std::uint64_t seed, std::string_view name);

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n);

    /// Standard normal (Box-Muller, one value per call).
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

std::uint64_t fnv1a64(std::string_view text);

} // namespace faceattr
