#include <doctest.h>

#include <random>

#include "swqt/increments.hpp"
#include "swqt/increments_oracle.hpp"

using namespace swqt;

namespace {

struct Fixture {
    ModelSpec spec;
    CouplingMatrix cm;
    GaussianTrajectoryState state;

    Fixture(ModelVariant variant, Alpha alpha, std::mt19937_64& rng)
        : cm(Eigen::MatrixXd(), alpha, 0.0) {
        std::normal_distribution<double> g;
        spec.variant = variant;
        spec.lattice = Lattice(2);
        spec.alpha = alpha;
        spec.h = 0.9;
        spec.J = 1.3;
        spec.gamma = 0.45;
        cm = coupling_matrix(spec.lattice, alpha, spec.J);

        const int n = spec.lattice.N;
        state.frames.resize(size_t(n));
        for (auto& q : state.frames)
            q = Quaternion{g(rng), g(rng), g(rng), g(rng)}.normalized();
        state.moments = GaussianMoments::zero(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                state.moments.u(i, j) = 0.15 * Complex(g(rng), g(rng));
                state.moments.v(i, j) = 0.15 * Complex(g(rng), g(rng));
            }
        state.moments.u = ((state.moments.u + state.moments.u.transpose()) / 2.0).eval();
        state.moments.v = ((state.moments.v + state.moments.v.adjoint()) / 2.0).eval();
    }

    StepContext ctx() const { return make_step_context(spec, cm, state.frames, state.moments); }
};

double rel_err(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).cwiseAbs().maxCoeff() / (1.0 + b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("compiled heterodyne increments equal brute-force operator algebra") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g;
    for (ModelVariant variant : {ModelVariant::I_z_xx, ModelVariant::II_x_zz}) {
        for (Alpha alpha : std::array<Alpha, 2>{Alpha{1.0}, Alpha{}}) {
            Fixture f(variant, alpha, rng);
            const int n = f.spec.lattice.N;
            Eigen::VectorXcd dZ(n);
            const double dt = 1e-3;
            for (int k = 0; k < n; ++k)
                dZ(k) = std::sqrt(dt / 2.0) * Complex(g(rng), g(rng));

            const HeterodyneWorkspace ws(f.spec);
            const auto fast = ws.compute(f.ctx(), dZ, dt);
            const auto ref = oracle::het_increments(f.spec, f.cm, f.state, dZ, dt);

            CHECK(rel_err(fast.dbeta, ref.dbeta) < 1e-10);
            CHECK(rel_err(fast.du, ref.du) < 1e-10);
            CHECK(rel_err(fast.dv, ref.dv) < 1e-10);
            CHECK((fast.dbeta_sq - ref.dbeta_sq).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("compiled quantum-jump flow equals brute-force operator algebra") {
    std::mt19937_64 rng(1234);
    for (ModelVariant variant : {ModelVariant::I_z_xx, ModelVariant::II_x_zz}) {
        Fixture f(variant, alpha_infinity, rng);
        const QJumpWorkspace ws(f.spec);
        const auto ctx = f.ctx();
        const auto fast = ws.rhs(ctx);
        const auto ref = oracle::qjump_rhs(f.spec, f.cm, f.state);

        CHECK(rel_err(fast.bdot, ref.bdot) < 1e-10);
        CHECK(rel_err(fast.udot, ref.udot) < 1e-10);
        CHECK(rel_err(fast.vdot, ref.vdot) < 1e-10);
        CHECK(fast.loglambda_dot == doctest::Approx(ref.loglambda_dot).epsilon(1e-10));

        for (int k = 0; k < f.spec.lattice.N; ++k) {
            const auto jf = ws.jump_moments(ctx, k);
            const auto jr = oracle::jump_moments(f.spec, f.cm, f.state, k);
            CHECK(jf.rate == doctest::Approx(jr.rate).epsilon(1e-10));
            CHECK(rel_err(jf.beta, jr.beta) < 1e-10);
            CHECK(rel_err(jf.u, jr.u) < 1e-10);
            CHECK(rel_err(jf.v, jr.v) < 1e-10);
        }
    }
}

TEST_CASE("moment symmetries are preserved by the compiled flows") {
    std::mt19937_64 rng(5);
    Fixture f(ModelVariant::I_z_xx, Alpha{2.0}, rng);
    const QJumpWorkspace ws(f.spec);
    const auto rhs = ws.rhs(f.ctx());
    CHECK((rhs.udot - rhs.udot.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rhs.vdot - rhs.vdot.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}

// ---------------------------------------------------------------------------
// Truncated-Fock-space oracle for the Gaussian (Wick) expectation engine:
// build |psi> ~ exp(1/2 sum A_ij b+_i b+_j)|0> in a two-mode number basis,
// read off the second moments, and compare ordered ladder-monomial
// expectations against the direct Fock-space matrix elements.
namespace {

constexpr int kFockModes = 2;
constexpr int kFockCutoff = 20;
constexpr long kFockDim = long(kFockCutoff) * kFockCutoff;

long fock_index(int n0, int n1) { return n0 * kFockCutoff + n1; }

// result = b_site |in> (or b+_site for dagger), truncation-dropping.
Eigen::VectorXcd fock_apply(const Eigen::VectorXcd& in, int site, bool dagger) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(kFockDim);
    for (int n0 = 0; n0 < kFockCutoff; ++n0)
        for (int n1 = 0; n1 < kFockCutoff; ++n1) {
            const Complex c = in(fock_index(n0, n1));
            if (c == Complex(0)) continue;
            int occ[kFockModes] = {n0, n1};
            if (dagger) {
                if (occ[site] + 1 >= kFockCutoff) continue;
                const double amp = std::sqrt(double(occ[site] + 1));
                occ[site] += 1;
                out(fock_index(occ[0], occ[1])) += amp * c;
            } else {
                if (occ[site] == 0) continue;
                const double amp = std::sqrt(double(occ[site]));
                occ[site] -= 1;
                out(fock_index(occ[0], occ[1])) += amp * c;
            }
        }
    return out;
}

Eigen::VectorXcd fock_exp_quadratic(const Eigen::Matrix2cd& A) {
    // exp(Q)|0> by Taylor series, Q = 1/2 sum A_ij b+_i b+_j.
    auto apply_q = [&A](const Eigen::VectorXcd& v) {
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(kFockDim);
        for (int i = 0; i < kFockModes; ++i)
            for (int j = 0; j < kFockModes; ++j)
                out += 0.5 * A(i, j) * fock_apply(fock_apply(v, j, true), i, true);
        return out;
    };
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(kFockDim);
    psi(0) = 1.0;
    Eigen::VectorXcd term = psi;
    for (int k = 1; k < 60; ++k) {
        term = (apply_q(term) / double(k)).eval();
        psi += term;
        if (term.norm() < 1e-18) break;
    }
    return psi / psi.norm();
}

Complex fock_expectation(const Eigen::VectorXcd& psi, const std::vector<LadderFactor>& ops) {
    Eigen::VectorXcd v = psi;
    for (auto it = ops.rbegin(); it != ops.rend(); ++it)
        v = fock_apply(v, it->site, it->dagger);
    return psi.dot(v);
}

}  // namespace

TEST_CASE("Wick expectations match a truncated Fock-space oracle") {
    std::mt19937_64 rng(2026);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 3; ++rep) {
        Eigen::Matrix2cd A;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) A(i, j) = 0.1 * Complex(g(rng), g(rng));
        A = ((A + A.transpose()) / 2.0).eval();
        const Eigen::VectorXcd psi = fock_exp_quadratic(A);

        GaussianMoments m = GaussianMoments::zero(kFockModes);
        for (int i = 0; i < kFockModes; ++i)
            for (int j = 0; j < kFockModes; ++j) {
                m.u(i, j) = fock_expectation(psi, {{i, false}, {j, false}});
                m.v(i, j) = fock_expectation(psi, {{i, true}, {j, false}});
            }

        // First moments vanish for an even-parity state; the engine's
        // zero-mean assumption holds exactly.
        for (int i = 0; i < kFockModes; ++i)
            CHECK(std::abs(fock_expectation(psi, {{i, false}})) < 1e-12);

        std::uniform_int_distribution<int> site(0, kFockModes - 1);
        std::uniform_int_distribution<int> coin(0, 1);
        for (int deg = 1; deg <= 6; ++deg) {
            for (int trial = 0; trial < 8; ++trial) {
                std::vector<LadderFactor> ops;
                for (int k = 0; k < deg; ++k) ops.push_back({site(rng), coin(rng) == 1});
                OperatorPolynomial poly{{{Complex(1.0), ops}}};
                const Complex wick = gaussian_expectation(poly, m);
                const Complex direct = fock_expectation(psi, ops);
                CHECK(std::abs(wick - direct) < 1e-8);
            }
        }
    }
}
