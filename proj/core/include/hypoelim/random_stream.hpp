#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hypoelim {

/// A seeded pseudo-random stream. Streams are cheap to construct and are
/// never shared across threads; every concurrent trial owns its own.
class RandomStream {
public:
    using engine_type = std::mt19937_64;

    explicit RandomStream(std::uint64_t seed) : engine_(mix(seed)) {}

    /// Stream for a position in a counter space, e.g. (master, algorithm,
    /// delta index, trial). Distinct coordinate tuples give unrelated seeds.
    static RandomStream derive(std::uint64_t master,
                               std::initializer_list<std::uint64_t> coordinates) {
        return RandomStream(derive_seed(master, coordinates));
    }
    static std::uint64_t derive_seed(std::uint64_t master,
                                     std::initializer_list<std::uint64_t> coordinates) noexcept;

    engine_type& engine() noexcept { return engine_; }

    double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    /// splitmix64 finalizer.
    static std::uint64_t mix(std::uint64_t x) noexcept;

private:
    engine_type engine_;
};

}  // namespace hypoelim
