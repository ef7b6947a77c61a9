#pragma once

#include <Eigen/Dense>

#include "swqt/gaussian_state.hpp"
#include "swqt/model.hpp"

// Reference evaluation of the trajectory increments by brute-force operator
// algebra: superoperators are applied literally as polynomial products and
// every expectation goes through the recursive Wick engine. Exponentially
// slower than the compiled path; intended for small-N cross checks.
namespace swqt::oracle {

struct HetIncrements {
    Eigen::VectorXcd dbeta;
    Eigen::MatrixXcd du, dv;
    Eigen::VectorXd dbeta_sq;
};

HetIncrements het_increments(const ModelSpec& spec, const CouplingMatrix& cm,
                             const GaussianTrajectoryState& state, const Eigen::VectorXcd& dZ,
                             double dt);

struct QjRhs {
    Eigen::VectorXcd bdot;
    Eigen::MatrixXcd udot, vdot;
    double loglambda_dot;
};

QjRhs qjump_rhs(const ModelSpec& spec, const CouplingMatrix& cm,
                const GaussianTrajectoryState& state);

struct JumpMoments {
    Eigen::VectorXcd beta;
    Eigen::MatrixXcd u, v;
    double rate;
};

JumpMoments jump_moments(const ModelSpec& spec, const CouplingMatrix& cm,
                         const GaussianTrajectoryState& state, int channel);

}  // namespace swqt::oracle
