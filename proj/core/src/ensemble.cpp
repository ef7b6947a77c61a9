#include "swqt/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace swqt {

namespace {

struct TrajResult {
    bool ok = false;
    Eigen::MatrixXd obs;  // (n_records x OBS_COUNT), site-averaged
    long jumps = 0;
};

TrajResult run_one(const EnsembleConfig& cfg, const HeterodyneIntegrator* het,
                   const QJumpIntegrator* qj, int traj_index) {
    TrajResult res;
    const int n = cfg.spec.lattice.N;
    std::vector<std::array<double, 3>> dirs = cfg.init_directions;
    if (dirs.empty()) dirs.assign(n, {0.0, 0.0, 1.0});
    NoiseStream noise(cfg.seed, std::uint64_t(traj_index));
    ObservableSeries ser;
    try {
        if (cfg.scheme == Unraveling::heterodyne)
            ser = het->run(init_product_state(dirs), cfg.het, noise);
        else
            ser = qj->run(init_product_state(dirs), cfg.qj, noise);
    } catch (const std::exception&) {
        return res;
    }
    const int nr = ser.rows();
    res.obs.resize(nr, OBS_COUNT);
    for (int r = 0; r < nr; ++r) {
        res.obs(r, OBS_MX) = ser.mx.row(r).mean();
        res.obs(r, OBS_MY) = ser.my.row(r).mean();
        res.obs(r, OBS_MZ) = ser.mz.row(r).mean();
        res.obs(r, OBS_X2) = ser.x2(r);
        res.obs(r, OBS_EPS) = ser.eps(r);
    }
    res.jumps = ser.jump_count;
    res.ok = true;
    return res;
}

}  // namespace

EnsembleRecord run_ensemble(const EnsembleConfig& cfg) {
    const HeterodyneIntegrator het(cfg.spec);
    const QJumpIntegrator qj(cfg.spec);

    // Record time grid.
    std::vector<double> grid;
    if (cfg.scheme == Unraveling::heterodyne) {
        const long n_steps = std::lround(cfg.het.t_final / cfg.het.dt);
        const int every = std::max(1, cfg.het.record_every);
        for (long s = 0; s <= n_steps; s += every) grid.push_back(double(s) * cfg.het.dt);
    } else {
        grid = cfg.qj.record_grid;
    }
    const int nr = int(grid.size());

    std::vector<TrajResult> results(cfg.n_traj);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= cfg.n_traj) return;
            results[i] = run_one(cfg, &het, &qj, i);
        }
    };
    const int n_workers = std::max(1, cfg.workers);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    EnsembleRecord rec;
    rec.time = grid;
    std::vector<int> good;
    for (int i = 0; i < cfg.n_traj; ++i)
        if (results[i].ok)
            good.push_back(i);
        else
            ++rec.n_aborted;
    rec.n_traj_done = int(good.size());
    if (rec.n_aborted > 0 && double(rec.n_aborted) > 0.01 * double(cfg.n_traj))
        throw std::runtime_error("ensemble: more than 1% of trajectories aborted (" +
                                 std::to_string(rec.n_aborted) + "/" +
                                 std::to_string(cfg.n_traj) + ")");
    if (good.empty()) throw std::runtime_error("ensemble: no successful trajectories");

    const int nt = rec.n_traj_done;
    for (int o = 0; o < OBS_COUNT; ++o) rec.per_traj[o].resize(nt, nr);
    for (int gi = 0; gi < nt; ++gi) {
        const TrajResult& tr = results[good[gi]];
        rec.total_jumps += tr.jumps;
        for (int o = 0; o < OBS_COUNT; ++o) rec.per_traj[o].row(gi) = tr.obs.col(o).transpose();
    }

    rec.mean.resize(nr, OBS_COUNT);
    rec.sem.resize(nr, OBS_COUNT);
    std::vector<double> col(nt);
    for (int o = 0; o < OBS_COUNT; ++o)
        for (int r = 0; r < nr; ++r) {
            for (int gi = 0; gi < nt; ++gi) col[gi] = rec.per_traj[o](gi, r);
            rec.mean(r, o) = stats::mean(col);
            rec.sem(r, o) = nt >= 2 ? stats::sem(col) : 0.0;
        }

    const double sample_start = cfg.sample_start >= 0.0
                                    ? cfg.sample_start
                                    : 0.5 * (grid.empty() ? 0.0 : grid.back());
    for (int r = 0; r < nr; ++r) {
        if (grid[r] < sample_start) continue;
        for (int gi = 0; gi < nt; ++gi) rec.mx_samples.push_back(rec.per_traj[OBS_MX](gi, r));
    }
    return rec;
}

SteadyEstimate steady_state_estimate(const EnsembleRecord& rec, int obs, double t_a,
                                     double t_b) {
    if (t_b < t_a) throw std::invalid_argument("steady_state_estimate: bad window");
    std::vector<int> rows;
    for (int r = 0; r < int(rec.time.size()); ++r)
        if (rec.time[r] >= t_a && rec.time[r] <= t_b) rows.push_back(r);
    if (rows.size() < 2) throw std::invalid_argument("steady_state_estimate: empty window");

    const int nt = int(rec.per_traj[obs].rows());
    // Per-trajectory window means are independent samples.
    std::vector<double> traj_means(nt);
    for (int gi = 0; gi < nt; ++gi) {
        double acc = 0.0;
        for (int r : rows) acc += rec.per_traj[obs](gi, r);
        traj_means[gi] = acc / double(rows.size());
    }

    // Time correlation of the ensemble-mean series inside the window.
    std::vector<double> mean_series(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) mean_series[k] = rec.mean(rows[k], obs);
    double tau = 0.5;
    if (rows.size() >= 8) tau = stats::blocked_error(mean_series).tau;

    SteadyEstimate est;
    est.mean = stats::mean(traj_means);
    est.error = nt >= 2 ? stats::sem(traj_means) : 0.0;
    est.tau = tau;
    est.window_warning = double(rows.size()) < 10.0 * tau;
    return est;
}

MxHistogram histogram_mx(const EnsembleRecord& rec, int bins) {
    if (rec.mx_samples.empty())
        throw std::invalid_argument("histogram_mx: no late-time samples recorded");
    return {stats::histogram(rec.mx_samples, bins), stats::sarle_bimodality(rec.mx_samples)};
}

}  // namespace swqt
