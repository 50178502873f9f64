#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace tsf {

// xoshiro256** seeded through splitmix64. Hand-rolled so that streams are
// reproducible across standard libraries and platforms; std:: distributions
// are implementation-defined and would break cross-platform determinism.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next();

    // Uniform in [0, 1), 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via the polar method (second draw cached).
    double gaussian();

    // Uniform integer in [0, n).
    std::size_t uniform_index(std::size_t n);

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::array<std::uint64_t, 4> s_{};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Stream ids used to derive independent substreams from one experiment seed.
namespace streams {
inline constexpr std::uint64_t kParamInit = 0x01;
inline constexpr std::uint64_t kValSplit = 0x02;
inline constexpr std::uint64_t kEpochShuffleBase = 0x1000;  // + epoch
inline constexpr std::uint64_t kControls = 0x03;
inline constexpr std::uint64_t kWindows = 0x04;
inline constexpr std::uint64_t kNoiseBase = 0x2000;  // + std index
}  // namespace streams

}  // namespace tsf
