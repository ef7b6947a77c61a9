#pragma once

#include <array>
#include <atomic>

#include "swqt/model.hpp"
#include "swqt/wick.hpp"

namespace swqt {

/// SWQT variational state: per-site comoving frames plus Gaussian second
/// moments. First moments are implicit zeros between steps. norm_log tracks
/// log(Lambda) along quantum-jump no-jump stretches, 0 otherwise.
struct GaussianTrajectoryState {
    FrameField frames;
    GaussianMoments moments;
    double time = 0.0;
    double norm_log = 0.0;

    int size() const { return int(frames.size()); }
};

/// Counts reads of v_ii below -1e-8, clamped to 0 (see clamped_vii).
extern std::atomic<long> g_negative_vii_warnings;

double clamped_vii(const GaussianTrajectoryState& state, int site);

/// Product state of spins aligned with the given unit directions: frames
/// rotate z onto each direction along a geodesic, u = v = 0.
GaussianTrajectoryState init_product_state(const std::vector<std::array<double, 3>>& directions);

/// <sigma^axis_site> = M[2][axis] (1 - 2 v_ii); axis 0,1,2 = x,y,z.
double magnetization(const GaussianTrajectoryState& state, int site, int axis);

/// X^2 = sum_{i != j} <sigma^x_i sigma^x_j> / (N(N-1)) via the Wick engine.
double correlation_X2(const GaussianTrajectoryState& state);

/// epsilon = (1/Ns) sum_i <b+_i b_i> = (2/N) sum_i v_ii at s = 1/2.
double spin_wave_density(const GaussianTrajectoryState& state);

}  // namespace swqt
