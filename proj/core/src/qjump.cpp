#include "swqt/qjump.hpp"

#include <cmath>
#include <limits>

namespace swqt {

std::atomic<long> g_large_jump_rotation_warnings{0};

std::vector<double> uniform_grid(double t_final, int n_records) {
    std::vector<double> g(n_records);
    for (int i = 0; i < n_records; ++i) g[i] = t_final * double(i) / double(n_records - 1);
    return g;
}

QJumpIntegrator::QJumpIntegrator(const ModelSpec& spec)
    : spec_(spec),
      cm_(coupling_matrix(spec.lattice, spec.alpha, spec.J)),
      ws_(spec) {}

int QJumpIntegrator::loglambda_index() const {
    const int n = spec_.lattice.N;
    return 4 * n + 4 * n * n;
}

Eigen::VectorXd QJumpIntegrator::pack(const GaussianTrajectoryState& state) const {
    const int n = state.size();
    Eigen::VectorXd y(4 * n + 4 * n * n + 1);
    for (int i = 0; i < n; ++i) {
        const Quaternion& q = state.frames[i];
        y(4 * i) = q.r;
        y(4 * i + 1) = q.x;
        y(4 * i + 2) = q.y;
        y(4 * i + 3) = q.z;
    }
    const int n2 = n * n;
    int off = 4 * n;
    Eigen::Map<Eigen::MatrixXd>(y.data() + off, n, n) = state.moments.u.real();
    Eigen::Map<Eigen::MatrixXd>(y.data() + off + n2, n, n) = state.moments.u.imag();
    Eigen::Map<Eigen::MatrixXd>(y.data() + off + 2 * n2, n, n) = state.moments.v.real();
    Eigen::Map<Eigen::MatrixXd>(y.data() + off + 3 * n2, n, n) = state.moments.v.imag();
    y(off + 4 * n2) = state.norm_log;
    return y;
}

GaussianTrajectoryState QJumpIntegrator::unpack(const Eigen::VectorXd& y, double t) const {
    const int n = spec_.lattice.N;
    GaussianTrajectoryState state;
    state.frames.resize(n);
    for (int i = 0; i < n; ++i)
        state.frames[i] =
            Quaternion{y(4 * i), y(4 * i + 1), y(4 * i + 2), y(4 * i + 3)}.normalized();
    const int n2 = n * n;
    const int off = 4 * n;
    state.moments = GaussianMoments::zero(n);
    state.moments.u.real() = Eigen::Map<const Eigen::MatrixXd>(y.data() + off, n, n);
    state.moments.u.imag() = Eigen::Map<const Eigen::MatrixXd>(y.data() + off + n2, n, n);
    state.moments.v.real() = Eigen::Map<const Eigen::MatrixXd>(y.data() + off + 2 * n2, n, n);
    state.moments.v.imag() = Eigen::Map<const Eigen::MatrixXd>(y.data() + off + 3 * n2, n, n);
    state.norm_log = y(off + 4 * n2);
    state.time = t;
    return state;
}

void QJumpIntegrator::rhs(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) const {
    const GaussianTrajectoryState state = unpack(y, t);
    const StepContext c = make_step_context(spec_, cm_, state.frames, state.moments);
    const QJumpWorkspace::Rhs r = ws_.rhs(c);

    const int n = state.size();
    dydt.resize(y.size());
    const double tilde = std::sqrt(2.0 / spec_.s);
    for (int i = 0; i < n; ++i) {
        // Continuous realignment: q_i' = A q_i with the pure quaternion
        // A = (0, Im(bdot~)/2, -Re(bdot~)/2, 0).
        const Complex bt = tilde * r.bdot(i);
        const Quaternion a{0.0, 0.5 * bt.imag(), -0.5 * bt.real(), 0.0};
        const Quaternion qd = quat_mul(a, state.frames[i]);
        dydt(4 * i) = qd.r;
        dydt(4 * i + 1) = qd.x;
        dydt(4 * i + 2) = qd.y;
        dydt(4 * i + 3) = qd.z;
    }
    const int n2 = n * n;
    const int off = 4 * n;
    Eigen::Map<Eigen::MatrixXd>(dydt.data() + off, n, n) = r.udot.real();
    Eigen::Map<Eigen::MatrixXd>(dydt.data() + off + n2, n, n) = r.udot.imag();
    Eigen::Map<Eigen::MatrixXd>(dydt.data() + off + 2 * n2, n, n) = r.vdot.real();
    Eigen::Map<Eigen::MatrixXd>(dydt.data() + off + 3 * n2, n, n) = r.vdot.imag();
    dydt(off + 4 * n2) = r.loglambda_dot;
}

Eigen::VectorXd QJumpIntegrator::rates(const GaussianTrajectoryState& state) const {
    const StepContext c = make_step_context(spec_, cm_, state.frames, state.moments);
    return ws_.rates(c);
}

int QJumpIntegrator::select_channel(const Eigen::VectorXd& rates, double u01) {
    const double total = rates.sum();
    double acc = 0.0;
    for (int k = 0; k < rates.size(); ++k) {
        acc += rates(k);
        if (u01 * total < acc) return k;
    }
    return int(rates.size()) - 1;
}

void QJumpIntegrator::apply_jump(GaussianTrajectoryState& state, int k) const {
    const StepContext c = make_step_context(spec_, cm_, state.frames, state.moments);
    const QJumpWorkspace::JumpMoments m = ws_.jump_moments(c, k);

    state.moments.u = m.u;
    state.moments.v = m.v;

    const double tilde = std::sqrt(2.0 / spec_.s);
    for (int i = 0; i < state.size(); ++i) {
        if (std::abs(m.beta(i)) * tilde > M_PI / 2.0) ++g_large_jump_rotation_warnings;
        state.frames[i] = quat_mul(align_rotation(m.beta(i), spec_.s), state.frames[i]).normalized();
    }

    // Site k collapses to its comoving south pole, decoupled from the rest.
    state.moments.u.row(k).setZero();
    state.moments.u.col(k).setZero();
    state.moments.v.row(k).setZero();
    state.moments.v.col(k).setZero();
    state.frames[k] = Quaternion{0.0, 1.0, 0.0, 0.0};
    state.norm_log = 0.0;
}

ObservableSeries QJumpIntegrator::run(GaussianTrajectoryState state, const QJumpOptions& opt,
                                      NoiseStream& noise) const {
    const std::vector<double>& grid = opt.record_grid;
    ObservableSeries out;
    out.allocate(int(grid.size()), state.size());

    OdeOptions oo;
    oo.rtol = opt.ode_rtol;
    oo.atol = opt.ode_atol;

    auto f = [this](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { rhs(t, y, dy); };

    const int lidx = loglambda_index();
    state.norm_log = 0.0;
    double log_r = std::log(std::max(noise.uniform(), std::numeric_limits<double>::min()));

    std::size_t g = 0;
    while (g < grid.size() && grid[g] <= state.time) record_state(out, int(g++), state);

    Dopri5<Eigen::VectorXd> ode(f, state.time, pack(state), oo);
    while (ode.time() < opt.t_final) {
        if (!ode.advance(opt.t_final)) break;
        double t_stop = ode.time();
        bool jumped = false;
        if (ode.state()(lidx) < log_r) {
            const double lr = log_r;
            t_stop = locate_crossing(
                ode, [lidx, lr](const Eigen::VectorXd& y) { return y(lidx) - lr; },
                opt.event_rtol);
            jumped = true;
        }
        while (g < grid.size() && grid[g] <= t_stop) {
            const GaussianTrajectoryState rec = unpack(ode.dense(grid[g]), grid[g]);
            record_state(out, int(g++), rec);
        }
        if (jumped) {
            state = unpack(ode.dense(t_stop), t_stop);
            const Eigen::VectorXd rk = rates(state);
            const int k = select_channel(rk, noise.uniform());
            apply_jump(state, k);
            ++out.jump_count;
            out.jump_times.push_back(t_stop);
            log_r = std::log(std::max(noise.uniform(), std::numeric_limits<double>::min()));
            ode.reset(t_stop, pack(state));
        }
    }
    // Record any grid point at exactly t_final that floating point left behind.
    if (g < grid.size()) {
        const GaussianTrajectoryState fin = unpack(ode.state(), ode.time());
        while (g < grid.size()) record_state(out, int(g++), fin);
    }
    return out;
}

}  // namespace swqt
