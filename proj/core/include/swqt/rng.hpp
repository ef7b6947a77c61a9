#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "swqt/quaternion.hpp"

namespace swqt {

/// SplitMix64 finalizer; used to mix (seed, trajectory_index) into an engine
/// seed so trajectory i's stream is derivable without generating 0..i-1.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-addressed per-trajectory random stream. Streams with distinct
/// (seed, trajectory_index) are independent; identical parameters reproduce
/// identical draws within one build. Identifier for run metadata: rng_id().
class NoiseStream {
  public:
    NoiseStream(std::uint64_t seed, std::uint64_t trajectory_index)
        : seed_(seed),
          trajectory_index_(trajectory_index),
          engine_(splitmix64(splitmix64(seed) ^
                             splitmix64(trajectory_index + 0x6a09e667f3bcc909ULL))) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t trajectory_index() const { return trajectory_index_; }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

    /// Complex Wiener increments dZ_i = sqrt(dt/2) (xi_1 + i xi_2) drawn in
    /// site order (channel = site index; all consumers must draw the full
    /// vector per step to stay aligned on shared-noise comparisons).
    Eigen::VectorXcd complex_wiener(int n, double dt) {
        Eigen::VectorXcd dz(n);
        const double amp = std::sqrt(0.5 * dt);
        for (int i = 0; i < n; ++i) {
            const double re = normal();
            const double im = normal();
            dz(i) = amp * Complex(re, im);
        }
        return dz;
    }

    static const char* rng_id() { return "splitmix64(seed,traj)->mt19937_64/std-normal"; }

  private:
    std::uint64_t seed_;
    std::uint64_t trajectory_index_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace swqt
