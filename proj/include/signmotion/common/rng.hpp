#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace signmotion {

// Seeded generator with distribution helpers whose output depends only on
// the engine stream (the std:: distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, n) by rejection; n > 0.
    std::uint64_t uniform_index(std::uint64_t n);

    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform01();

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller, one value per call.
    double normal();

    std::string state() const;
    void restore(const std::string& state);

private:
    std::mt19937_64 engine_;
};

// Derive an independent stream seed from a base seed and a tag sequence.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace signmotion
