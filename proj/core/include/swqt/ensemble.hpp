#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "swqt/heterodyne.hpp"
#include "swqt/qjump.hpp"
#include "swqt/stats.hpp"

namespace swqt {

enum class Unraveling { heterodyne, qjump };

struct EnsembleConfig {
    ModelSpec spec;
    Unraveling scheme = Unraveling::heterodyne;
    HeterodyneOptions het;
    QJumpOptions qj;
    std::vector<std::array<double, 3>> init_directions;  // empty: all up
    int n_traj = 16;
    std::uint64_t seed = 1;
    int workers = 1;
    /// Records with t >= sample_start contribute raw site-averaged m^x
    /// samples (histograms / symmetry tests); default 0.5 t_final.
    double sample_start = -1.0;
};

/// Observable column order in ensemble summaries.
enum ObsIndex { OBS_MX = 0, OBS_MY = 1, OBS_MZ = 2, OBS_X2 = 3, OBS_EPS = 4, OBS_COUNT = 5 };

struct EnsembleRecord {
    std::vector<double> time;
    Eigen::MatrixXd mean;  // (n_records x OBS_COUNT)
    Eigen::MatrixXd sem;   // (n_records x OBS_COUNT)
    /// Per-trajectory site-averaged series, (n_traj x n_records) per
    /// observable; rows of aborted trajectories are dropped.
    std::array<Eigen::MatrixXd, OBS_COUNT> per_traj;
    std::vector<double> mx_samples;  // all records with t >= sample_start
    long total_jumps = 0;
    int n_traj_done = 0;
    int n_aborted = 0;
};

/// Run n_traj independent trajectories (deterministic for fixed seed and
/// n_traj regardless of worker count), with fixed-order pairwise reduction.
/// Trajectories that abort are excluded and counted; more than 1% aborts
/// fails the run.
EnsembleRecord run_ensemble(const EnsembleConfig& config);

struct SteadyEstimate {
    double mean;
    double error;
    double tau;  // autocorrelation time of the in-window series (record units)
    bool window_warning;  // window shorter than 10 tau
};

/// Time-and-trajectory average over records with t in [t_a, t_b]. The error
/// combines independent trajectories only; the in-window time correlation is
/// diagnosed through a blocking analysis of the trajectory-mean series.
SteadyEstimate steady_state_estimate(const EnsembleRecord& record, int obs, double t_a,
                                     double t_b);

/// Normalized late-time m^x histogram plus Sarle bimodality coefficient.
struct MxHistogram {
    stats::Histogram hist;
    double bimodality;
};
MxHistogram histogram_mx(const EnsembleRecord& record, int bins);

}  // namespace swqt
