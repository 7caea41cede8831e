#include "poolseq/random.hpp"

#include <cmath>
#include <random>

namespace poolseq {

double RandomStream::exponential(double rate)
{
    return -std::log(uniform_open0()) / rate;
}

std::uint64_t RandomStream::below(std::uint64_t n)
{
    if (n <= 1) return 0;
    // Lemire's multiply-shift with rejection.
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
        std::uint64_t threshold = (0 - n) % n;
        while (lo < threshold) {
            m = static_cast<unsigned __int128>((*this)()) * n;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t RandomStream::poisson(double mean)
{
    if (!(mean > 0.0)) return 0;
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(*this);
}

}  // namespace poolseq
