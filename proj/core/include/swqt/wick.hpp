#pragma once

#include <Eigen/Dense>

#include "swqt/poly.hpp"

namespace swqt {

/// Second moments of a zero-mean Gaussian bosonic state:
/// u_ij = <b_i b_j> (symmetric), v_ij = <b^dag_i b_j> (Hermitian).
struct GaussianMoments {
    Eigen::MatrixXcd u;
    Eigen::MatrixXcd v;

    static GaussianMoments zero(int n) {
        return {Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd::Zero(n, n)};
    }

    int size() const { return int(u.rows()); }
};

/// Ordered two-point function <a b> in the state m:
/// <b_i b_j> = u_ij, <b+_i b+_j> = conj(u_ij), <b+_i b_j> = v_ij,
/// <b_i b+_j> = delta_ij + v_ji.
Complex contract(const LadderFactor& a, const LadderFactor& b, const GaussianMoments& m);

/// Recursive ordered Wick evaluation of <p> in the zero-mean Gaussian state m.
Complex gaussian_expectation(const OperatorPolynomial& p, const GaussianMoments& m);

}  // namespace swqt
