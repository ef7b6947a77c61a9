#pragma once

#include <Eigen/Dense>
#include <vector>

#include "swqt/model.hpp"

namespace swqt::meanfield {

using Bloch = Eigen::Vector3d;

/// Factorized-ansatz Bloch equations: precession around the self-consistent
/// field plus local decay (coherence rate 2 gamma, population rate 4 gamma in
/// the amplitude-2 lowering convention; halved rates otherwise).
Bloch rhs(const Bloch& m, const ModelSpec& spec);

/// Analytic 3x3 Jacobian of rhs.
Eigen::Matrix3d jacobian(const Bloch& m, const ModelSpec& spec);

struct FixedPoint {
    Bloch m;
    bool stable;
    double residual;
};

/// All real fixed points from a 26-direction multi-start Newton search,
/// deduplicated to 1e-8; stability from Jacobian eigenvalues.
std::vector<FixedPoint> steady_states(const ModelSpec& spec);

/// Critical dissipation of the symmetric branch (drive-aligned fixed point)
/// from the linearization: largest gamma where an eigenvalue crosses zero.
/// Returns 0 when the symmetric branch never destabilizes on (0, gamma_max].
double critical_gamma(const ModelSpec& spec, double gamma_max);

struct BranchPoint {
    double h;
    Bloch m;
    bool stable;
};

struct Continuation {
    std::vector<BranchPoint> points;
    std::vector<double> fold_h;  // drive values of detected folds
    bool stalled = false;
};

/// Pseudo-arclength continuation of the fixed-point branch in h, starting
/// from a converged fixed point at h_start, traced over [h_min, h_max].
/// Folds are flagged by sign changes of the drive component of the tangent.
Continuation continue_in_h(const ModelSpec& spec, double h_start, double h_min, double h_max,
                           double initial_step = 0.01);

}  // namespace swqt::meanfield
