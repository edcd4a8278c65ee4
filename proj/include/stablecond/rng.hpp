#pragma once
#include <cstdint>
#include <random>

namespace stablecond {

// One independent stream per (master seed, stream id). The variates are built from raw
// 64-bit words here rather than with <random> distributions, whose output is
// implementation-defined.
class Rng {
public:
    Rng(std::uint64_t master, std::uint64_t stream);

    std::uint64_t next_u64() { return eng_(); }
    double uniform();  // open (0,1)
    double normal();
    double exponential();

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t entropy_seed();

}  // namespace stablecond
