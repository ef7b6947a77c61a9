#include "swqt/heterodyne.hpp"

#include <cmath>

namespace swqt {

void record_state(ObservableSeries& out, int r, const GaussianTrajectoryState& state) {
    const int n = state.size();
    out.time[r] = state.time;
    for (int i = 0; i < n; ++i) {
        out.mx(r, i) = magnetization(state, i, 0);
        out.my(r, i) = magnetization(state, i, 1);
        out.mz(r, i) = magnetization(state, i, 2);
    }
    out.x2(r) = n >= 2 ? correlation_X2(state) : 0.0;
    out.eps(r) = spin_wave_density(state);
}

HeterodyneIntegrator::HeterodyneIntegrator(const ModelSpec& spec)
    : spec_(spec),
      cm_(coupling_matrix(spec.lattice, spec.alpha, spec.J)),
      ws_(spec) {}

void HeterodyneIntegrator::step(GaussianTrajectoryState& state, NoiseStream& noise,
                                double dt) const {
    const int n = state.size();
    const StepContext c = make_step_context(spec_, cm_, state.frames, state.moments);
    const Eigen::VectorXcd dZ = noise.complex_wiener(n, dt);
    const HeterodyneWorkspace::Increments inc = ws_.compute(c, dZ, dt);

    for (int i = 0; i < n; ++i)
        if (std::abs(inc.dbeta(i)) > 0.5)
            throw StepRejectedError("heterodyne: first-moment increment |dbeta| > 0.5 at t = " +
                                    std::to_string(state.time) + "; reduce dt");

    state.moments.u += inc.du;
    state.moments.v += inc.dv;
    state.moments.u = ((state.moments.u + state.moments.u.transpose()) / 2.0).eval();
    state.moments.v = ((state.moments.v + state.moments.v.adjoint()) / 2.0).eval();

    for (int i = 0; i < n; ++i)
        state.frames[i] =
            infinitesimal_frame_update(state.frames[i], inc.dbeta(i), inc.dbeta_sq(i), spec_.s);
    state.time += dt;
}

ObservableSeries HeterodyneIntegrator::run(GaussianTrajectoryState state,
                                           const HeterodyneOptions& opt,
                                           NoiseStream& noise) const {
    const long n_steps = std::lround(opt.t_final / opt.dt);
    const int every = std::max(1, opt.record_every);
    const int n_records = int(n_steps / every) + 1;

    ObservableSeries out;
    out.allocate(n_records, state.size());
    record_state(out, 0, state);
    int r = 1;
    for (long s = 1; s <= n_steps; ++s) {
        advance(state, noise, opt.dt, 0);
        if (s % every == 0) record_state(out, r++, state);
    }
    return out;
}

void HeterodyneIntegrator::advance(GaussianTrajectoryState& state, NoiseStream& noise,
                                   double dt, int depth) const {
    try {
        step(state, noise, dt);
    } catch (const StepRejectedError&) {
        // Transient stiffness (rare near-pole excursions of the moments) is
        // resolved by refining the interval with fresh noise increments; the
        // rejected state is untouched, so refinement restarts cleanly. Two
        // levels (64x smaller steps) suffice in practice; beyond that the
        // trajectory is treated as genuinely lost.
        if (depth >= 2) throw;
        for (int k = 0; k < 8; ++k) advance(state, noise, dt / 8.0, depth + 1);
    }
}

}  // namespace swqt
