#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "swqt/heterodyne.hpp"
#include "swqt/model.hpp"
#include "swqt/qjump.hpp"
#include "swqt/rng.hpp"
#include "swqt/series.hpp"

namespace swqt::exact {

/// Dense many-body reference kernels on the 2^N-dimensional Hilbert space.
/// Basis: bit i of the index is 1 when site i points up along lab z. No
/// operator matrices are materialized; everything acts through bit kernels.
class SpinSystem {
  public:
    explicit SpinSystem(const ModelSpec& spec, int max_sites = 16);

    const ModelSpec& spec() const { return spec_; }
    int sites() const { return n_; }
    long dim() const { return dim_; }
    /// Lowering amplitude a in L_i = sqrt(gamma) a |down><up|_i.
    double lower_amp() const { return amp_; }

    Eigen::VectorXcd product_state(const std::vector<std::array<double, 3>>& directions) const;

    /// out = H in.
    void apply_hamiltonian(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
    /// out = sigma^axis_site in (axis 0,1,2 = x,y,z).
    void apply_sigma(int site, int axis, const Eigen::VectorXcd& in,
                     Eigen::VectorXcd& out) const;
    /// out = |down><up|_site in (no amplitude).
    void apply_lower(int site, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
    /// out = H_eff in = (H - i/2 sum_k L+_k L_k) in.
    void apply_effective(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

    double expect_sigma(const Eigen::VectorXcd& psi, int site, int axis) const;
    /// X^2 = sum_{i != j} <sx_i sx_j> / (N(N-1)).
    double correlation_x2(const Eigen::VectorXcd& psi) const;
    /// Jump rates r_k = ||L_k psi||^2 / ||psi||^2.
    Eigen::VectorXd jump_rates(const Eigen::VectorXcd& psi) const;
    /// Diagonal of sum_k L+_k L_k per basis state.
    const Eigen::VectorXd& decay_profile() const { return decay_diag_; }

    void fill_record(ObservableSeries& out, int row, double t,
                     const Eigen::VectorXcd& psi) const;

    // Density-matrix versions (rho as dim x dim matrix).
    void lindblad_rhs(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& drho) const;
    double expect_sigma(const Eigen::MatrixXcd& rho, int site, int axis) const;
    double correlation_x2(const Eigen::MatrixXcd& rho) const;

  private:
    ModelSpec spec_;
    CouplingMatrix cm_;
    int n_;
    long dim_;
    double amp_;
    Eigen::VectorXd diag_;        // diagonal Hamiltonian part
    Eigen::VectorXd decay_diag_;  // sum_k rate * [bit k up] per basis state
    bool drive_offdiag_;          // drive along x (flips) vs z (diagonal)
    bool inter_offdiag_;          // interaction along x (double flips) vs z
};

/// Deterministic master-equation solution from a product state, recorded on
/// the grid; adaptive integration (default rtol 1e-9). N <= 8.
ObservableSeries lindblad_evolve(const ModelSpec& spec,
                                 const std::vector<std::array<double, 3>>& directions,
                                 const std::vector<double>& grid, double rtol = 1e-9,
                                 double atol = 1e-12);

/// Normalized diffusive trajectory (Euler-Maruyama plus renormalization)
/// sharing the NoiseStream draw order with the spin-wave heterodyne driver:
/// one complex Wiener vector per step, channel = site index.
ObservableSeries sse_trajectory(const ModelSpec& spec,
                                const std::vector<std::array<double, 3>>& directions,
                                const HeterodyneOptions& opt, NoiseStream& noise);

/// Exact jump (Monte Carlo wave function) trajectory with the waiting-time
/// algorithm; records on opt.record_grid via dense interpolation. N <= 16.
ObservableSeries mcwf_trajectory(const ModelSpec& spec,
                                 const std::vector<std::array<double, 3>>& directions,
                                 const QJumpOptions& opt, NoiseStream& noise);

}  // namespace swqt::exact
