#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace mmsk {

// Seedable random source used by every stochastic operation.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Uniform and Poisson variates are derived from raw engine words by
// the routines below (not by <random> distributions, whose algorithms are
// implementation defined), so a given seed reproduces across compilers and
// platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform();

    // Uniform on (0, 1], realised as 1 - uniform().
    double uniform_open_closed() { return 1.0 - uniform(); }

    // Unbiased integer in [0, n). Requires n > 0.
    std::uint64_t below(std::uint64_t n);

    // Poisson variate: sequential-search inversion for mean < 30, Hormann's
    // PTRS transformed rejection otherwise.
    std::int64_t poisson(double mean);

    double normal();

private:
    std::mt19937_64 engine_;
};

// SplitMix64 finaliser applied to (master, stream); used to give every trial,
// mixture or component its own independent stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Independent Poisson draws with the given means (all >= 0). The result holds
// integer values stored as doubles so it can feed linear algebra directly.
Eigen::VectorXd sample_poisson(const Eigen::VectorXd& means, Rng& rng);

}  // namespace mmsk
