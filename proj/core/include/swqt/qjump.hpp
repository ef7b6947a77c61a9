#pragma once

#include <atomic>
#include <vector>

#include "swqt/increments.hpp"
#include "swqt/rk45.hpp"
#include "swqt/rng.hpp"
#include "swqt/series.hpp"

namespace swqt {

struct QJumpOptions {
    double ode_rtol = 1e-8;
    double ode_atol = 1e-10;
    double t_final = 1.0;
    std::vector<double> record_grid;  // strictly increasing, within [0, t_final]
    double event_rtol = 1e-8;         // relative tolerance for jump-time location
};

/// Uniform record grid over [0, t_final] with n_records points.
std::vector<double> uniform_grid(double t_final, int n_records);

/// Counts post-jump realignment rotations with angle > pi/2 (trustworthiness
/// flag for the small-fluctuation expansion around a jump).
extern std::atomic<long> g_large_jump_rotation_warnings;

/// Piecewise-deterministic (quantum-jump) driver: adaptive no-jump evolution
/// of frames and second moments with the waiting-time algorithm, punctuated
/// by channel jumps.
class QJumpIntegrator {
  public:
    explicit QJumpIntegrator(const ModelSpec& spec);

    const ModelSpec& spec() const { return spec_; }
    const CouplingMatrix& coupling() const { return cm_; }

    /// Packed ODE state: [quaternions (4n) | Re u, Im u (2n^2) |
    /// Re v, Im v (2n^2) | log Lambda].
    Eigen::VectorXd pack(const GaussianTrajectoryState& state) const;
    GaussianTrajectoryState unpack(const Eigen::VectorXd& y, double t) const;
    int loglambda_index() const;

    /// Deterministic no-jump right-hand side on the packed state.
    void rhs(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) const;

    /// Jump-channel rates at the current state.
    Eigen::VectorXd rates(const GaussianTrajectoryState& state) const;

    /// Channel from a uniform draw, probability proportional to the rates.
    static int select_channel(const Eigen::VectorXd& rates, double u01);

    /// Apply the channel-k jump in place: replace second moments by the
    /// post-jump cumulants, realign every frame by the finite rotation
    /// removing the post-jump first moments, then reset site k (decoupled
    /// row/column, frame flipped to the south pole) and log Lambda.
    void apply_jump(GaussianTrajectoryState& state, int k) const;

    /// Full trajectory with waiting-time jump sampling; records on the grid
    /// via dense interpolation of the no-jump solution.
    ObservableSeries run(GaussianTrajectoryState state, const QJumpOptions& opt,
                         NoiseStream& noise) const;

  private:
    ModelSpec spec_;
    CouplingMatrix cm_;
    QJumpWorkspace ws_;
};

}  // namespace swqt
