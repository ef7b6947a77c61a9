#pragma once

#include <Eigen/Dense>
#include <vector>

#include "swqt/gaussian_state.hpp"

namespace swqt {

/// Time series of the standard observables along one trajectory (or one
/// deterministic reference solution). Magnetization matrices are
/// (n_records x n_sites); x2 and eps are per record. eps is only meaningful
/// for spin-wave trajectories and is zero for exact references.
struct ObservableSeries {
    std::vector<double> time;
    Eigen::MatrixXd mx, my, mz;
    Eigen::VectorXd x2, eps;
    long jump_count = 0;
    std::vector<double> jump_times;

    int rows() const { return int(time.size()); }

    void allocate(int n_records, int n_sites) {
        time.assign(n_records, 0.0);
        mx.setZero(n_records, n_sites);
        my.setZero(n_records, n_sites);
        mz.setZero(n_records, n_sites);
        x2.setZero(n_records);
        eps.setZero(n_records);
    }
};

/// Fill record row r of the series from a spin-wave trajectory state.
void record_state(ObservableSeries& out, int r, const GaussianTrajectoryState& state);

}  // namespace swqt
