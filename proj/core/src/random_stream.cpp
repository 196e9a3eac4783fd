#include "hypoelim/random_stream.hpp"

namespace hypoelim {

std::uint64_t RandomStream::mix(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t RandomStream::derive_seed(std::uint64_t master,
                                       std::initializer_list<std::uint64_t> coordinates) noexcept {
    // Chain each coordinate through the mixer so (a, b) and (b, a) differ.
    std::uint64_t state = mix(master);
    for (std::uint64_t c : coordinates) state = mix(state ^ mix(c + 0x632BE59BD9B4E019ULL));
    return state;
}

}  // namespace hypoelim
