#include <benchmark/benchmark.h>

#include <random>

#include "swqt/increments.hpp"

using namespace swqt;

namespace {

struct Setup {
    ModelSpec spec;
    CouplingMatrix cm{Eigen::MatrixXd(), alpha_infinity, 0.0};
    GaussianTrajectoryState state;

    explicit Setup(int L) {
        spec.variant = ModelVariant::I_z_xx;
        spec.lattice = Lattice(L);
        spec.alpha = Alpha{1.0};
        spec.h = 1.0;
        spec.J = 1.0;
        spec.gamma = 0.6;
        cm = coupling_matrix(spec.lattice, spec.alpha, spec.J);
        std::mt19937_64 rng(1);
        std::normal_distribution<double> g;
        const int n = spec.lattice.N;
        state.frames.assign(size_t(n), Quaternion::identity());
        state.moments = GaussianMoments::zero(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                state.moments.u(i, j) = 0.05 * Complex(g(rng), g(rng));
                state.moments.v(i, j) = 0.05 * Complex(g(rng), g(rng));
            }
        state.moments.u = ((state.moments.u + state.moments.u.transpose()) / 2.0).eval();
        state.moments.v = ((state.moments.v + state.moments.v.adjoint()) / 2.0).eval();
    }
};

void bench_heterodyne_step(benchmark::State& bs) {
    Setup s(int(bs.range(0)));
    const HeterodyneWorkspace ws(s.spec);
    const int n = s.spec.lattice.N;
    Eigen::VectorXcd dZ = Eigen::VectorXcd::Constant(n, Complex(1e-3, 1e-3));
    for (auto _ : bs) {
        const auto ctx = make_step_context(s.spec, s.cm, s.state.frames, s.state.moments);
        auto inc = ws.compute(ctx, dZ, 1e-3);
        benchmark::DoNotOptimize(inc.du.data());
    }
}

void bench_qjump_rhs(benchmark::State& bs) {
    Setup s(int(bs.range(0)));
    const QJumpWorkspace ws(s.spec);
    for (auto _ : bs) {
        const auto ctx = make_step_context(s.spec, s.cm, s.state.frames, s.state.moments);
        auto rhs = ws.rhs(ctx);
        benchmark::DoNotOptimize(rhs.udot.data());
    }
}

}  // namespace

BENCHMARK(bench_heterodyne_step)->Arg(2)->Arg(4)->Arg(6)->Arg(8);
BENCHMARK(bench_qjump_rhs)->Arg(2)->Arg(4)->Arg(6);

BENCHMARK_MAIN();
