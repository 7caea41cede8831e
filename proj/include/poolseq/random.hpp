#pragma once

#include <cstdint>
#include <limits>

namespace poolseq {

enum class Role : std::uint64_t {
    positions = 1,
    alleles = 2,
    reads = 3,
    noise = 4,
    tiebreak = 5,
    denoise = 6,
    chain = 7,
    span = 8,
    truth = 9,
    aux = 10,
};

inline constexpr std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based stream: output k is a pure function of (seed, trial, role, k),
// so results never depend on which worker ran a trial.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed, std::uint64_t trial = 0, std::uint64_t role = 0)
        : key_(mix64(mix64(mix64(seed) ^ (trial + 0x9e3779b97f4a7c15ULL)) ^ (role * 0xd1b54a32d192ed03ULL)))
    {
    }
    RandomStream(std::uint64_t seed, std::uint64_t trial, Role role)
        : RandomStream(seed, trial, static_cast<std::uint64_t>(role))
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        ++counter_;
        return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    // Independent child stream; does not advance this one.
    RandomStream split(std::uint64_t role) const
    {
        RandomStream child(0);
        child.key_ = mix64(key_ ^ mix64(role + 0x632be59bd9b4e019ULL));
        return child;
    }
    RandomStream split(Role role) const { return split(static_cast<std::uint64_t>(role)); }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
    // Uniform on (0, 1].
    double uniform_open0() { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

    double exponential(double rate);
    std::uint64_t below(std::uint64_t n);
    bool bernoulli(double prob) { return uniform() < prob; }
    std::uint64_t poisson(double mean);

    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace poolseq
