#pragma once

#include <cstdint>
#include <random>

namespace focalcount {

// splitmix64 finalizer; used to derive independent per-index seeds from one run seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// mt19937_64 with hand-rolled variate mappings. The std:: distributions are not
// pinned by the standard, so every float draw here goes through fixed formulas
// to keep streams identical for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0,1)
    double uniform();
    // uniform in (0,1], safe as a log argument
    double uniform_open();
    double uniform_in(double lo, double hi);
    // unbounded index draw for shuffles and choices, [0, n)
    std::size_t index(std::size_t n);
    // standard normal via Box-Muller
    double normal();
    // Gamma(alpha, 1) via Marsaglia-Tsang; alpha > 0
    double gamma(double alpha);

private:
    std::mt19937_64 engine_;
};

} // namespace focalcount
