#include "signmotion/common/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "signmotion/common/error.hpp"

namespace signmotion {

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    require(n > 0, ErrorCode::invalid_argument, "uniform_index: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
}

double Rng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string Rng::state() const {
    std::ostringstream out;
    out << engine_;
    return out.str();
}

void Rng::restore(const std::string& state) {
    std::istringstream in(state);
    in >> engine_;
    require(!in.fail(), ErrorCode::format, "rng state: unparsable");
}

namespace {
std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = splitmix(base);
    h = splitmix(h ^ a);
    h = splitmix(h ^ b);
    return splitmix(h ^ c);
}

}  // namespace signmotion
