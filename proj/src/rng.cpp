#include "semslam/rng.hpp"

#include <cmath>

namespace semslam {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;
constexpr double kPi = 3.141592653589793238462643383279502884;
}  // namespace

std::uint64_t CounterRng::mix(std::uint64_t state) {
    // splitmix64 finalizer; exact integer arithmetic, platform independent.
    state += kGolden;
    state = (state ^ (state >> 30)) * 0xbf58476d1ce4e5b9ull;
    state = (state ^ (state >> 27)) * 0x94d049bb133111ebull;
    return state ^ (state >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b) {
    std::uint64_t key = mix(seed);
    key = mix(key ^ stream);
    key = mix(key ^ a);
    key = mix(key ^ b);
    key_ = key;
}

std::uint64_t CounterRng::next_u64() {
    return mix(key_ + kGolden * ++counter_);
}

double CounterRng::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_normal() {
    const double u1 = 1.0 - next_uniform();  // (0, 1], keeps log finite
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace semslam
