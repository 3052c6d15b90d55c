#pragma once

#include <cstdint>

namespace semslam {

/// Counter-based deterministic generator. Draws are a pure function of
/// (seed, stream tag, indices), so distinct noise streams can be changed
/// independently: altering the misclassification rate never perturbs the
/// geometric noise draws of the same dataset.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t a = 0, std::uint64_t b = 0);

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double next_uniform();
    /// Standard normal via Box-Muller (consumes two uniforms).
    double next_normal();

    static std::uint64_t mix(std::uint64_t state);

  private:
    std::uint64_t key_;
    std::uint64_t counter_{0};
};

/// Stream tags for the simulator's independent noise streams.
namespace rng_stream {
inline constexpr std::uint64_t kWorldLandmark = 0x9d3f1c6a55e01u;
inline constexpr std::uint64_t kOdometry = 0x51ab3d77020c2u;
inline constexpr std::uint64_t kDetectionGeometry = 0xe6017b9f31a43u;
inline constexpr std::uint64_t kDetectionClass = 0x7c44a1d98bb04u;
}  // namespace rng_stream

}  // namespace semslam
