#include "swqt/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swqt {

std::atomic<long> g_negative_vii_warnings{0};

double clamped_vii(const GaussianTrajectoryState& state, int site) {
    const double raw = state.moments.v(site, site).real();
    if (raw < -1e-8) ++g_negative_vii_warnings;
    return raw < 0.0 ? 0.0 : raw;
}

GaussianTrajectoryState init_product_state(
    const std::vector<std::array<double, 3>>& directions) {
    const int n = int(directions.size());
    GaussianTrajectoryState state;
    state.moments = GaussianMoments::zero(n);
    state.frames.reserve(n);
    for (const auto& d : directions) {
        const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        if (len < 1e-12)
            throw std::invalid_argument("init_product_state: zero-length direction");
        const double nx = d[0] / len, ny = d[1] / len, nz = d[2] / len;
        // Geodesic rotation taking z onto the direction: axis z x n, angle
        // arccos(n_z). The frame quaternion is passive, so the active map
        // sending z to n is to_rotation_matrix(Q) applied along row 2; the
        // quaternion built here satisfies M[2] = n.
        const double angle = std::acos(std::clamp(nz, -1.0, 1.0));
        double ax = -ny, ay = nx;  // z x n ... sign fixed below
        const double alen = std::hypot(ax, ay);
        if (alen < 1e-12) {
            if (nz > 0.0) {
                state.frames.push_back(Quaternion::identity());
            } else {
                state.frames.push_back(Quaternion{0.0, 1.0, 0.0, 0.0});  // pi about x
            }
            continue;
        }
        ax /= alen;
        ay /= alen;
        // Inverse (passive) rotation: row 2 of to_rotation_matrix(Q) must
        // equal the direction vector.
        const double c = std::cos(0.5 * angle), s = -std::sin(0.5 * angle);
        state.frames.push_back(Quaternion{c, s * ax, s * ay, 0.0});
    }
    return state;
}

double magnetization(const GaussianTrajectoryState& state, int site, int axis) {
    const Mat3 m = to_rotation_matrix(state.frames[site]);
    const double vii = clamped_vii(state, site);
    return m[2][axis] * (1.0 - 2.0 * vii);
}

double correlation_X2(const GaussianTrajectoryState& state) {
    const int n = state.size();
    if (n < 2) throw std::invalid_argument("correlation_X2: need N >= 2");
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        OperatorPolynomial xi = comoving_spin_polynomial(i, 0, state.frames[i]);
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            OperatorPolynomial xj = comoving_spin_polynomial(j, 0, state.frames[j]);
            acc += gaussian_expectation(multiply(xi, xj), state.moments).real();
        }
    }
    return acc / (double(n) * double(n - 1));
}

double spin_wave_density(const GaussianTrajectoryState& state) {
    const int n = state.size();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += clamped_vii(state, i);
    return 2.0 * acc / double(n);
}

}  // namespace swqt
