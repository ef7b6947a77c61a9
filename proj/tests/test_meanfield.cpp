#include <doctest.h>

#include <cmath>

#include "swqt/meanfield.hpp"

using namespace swqt;
using meanfield::Bloch;

namespace {

ModelSpec make_spec(ModelVariant variant, double h, double J, double gamma) {
    ModelSpec spec;
    spec.variant = variant;
    spec.h = h;
    spec.J = J;
    spec.gamma = gamma;
    spec.lattice = Lattice(2);
    spec.alpha = alpha_infinity;
    return spec;
}

}  // namespace

TEST_CASE("pure decay: J = 0 flows to the south pole") {
    const ModelSpec spec = make_spec(ModelVariant::I_z_xx, 0.7, 0.0, 0.4);
    const auto fps = meanfield::steady_states(spec);
    REQUIRE(fps.size() == 1);
    CHECK((fps[0].m - Bloch(0, 0, -1)).norm() < 1e-9);
    CHECK(fps[0].stable);
    // Jacobian agrees with a finite-difference check.
    const Bloch m(0.2, -0.3, 0.4);
    const Eigen::Matrix3d jac = meanfield::jacobian(m, spec);
    const double eps = 1e-7;
    for (int j = 0; j < 3; ++j) {
        Bloch mp = m, mm = m;
        mp(j) += eps;
        mm(j) -= eps;
        const Bloch col = (meanfield::rhs(mp, spec) - meanfield::rhs(mm, spec)) / (2 * eps);
        CHECK((jac.col(j) - col).norm() < 1e-6);
    }
}

TEST_CASE("sign-flip equivariance of the transverse components") {
    const ModelSpec spec = make_spec(ModelVariant::I_z_xx, 0.9, 1.2, 0.3);
    const Bloch m(0.31, -0.12, -0.55);
    const Bloch a = meanfield::rhs(m, spec);
    const Bloch b = meanfield::rhs(Bloch(-m(0), -m(1), m(2)), spec);
    CHECK(b(0) == doctest::Approx(-a(0)).epsilon(1e-12));
    CHECK(b(1) == doctest::Approx(-a(1)).epsilon(1e-12));
    CHECK(b(2) == doctest::Approx(a(2)).epsilon(1e-12));
}

TEST_CASE("symmetric-branch instability threshold is the analytic root") {
    // gamma_c(h) = sqrt(h (2J - h)); at h = J this is exactly J.
    const double J = 1.0;
    for (double h : {0.4, 0.7, 1.0, 1.6}) {
        ModelSpec spec = make_spec(ModelVariant::I_z_xx, h, J, 0.1);
        const double gc = meanfield::critical_gamma(spec, 3.0);
        const double expected = std::sqrt(h * (2.0 * J - h));
        CHECK(gc == doctest::Approx(expected).epsilon(1e-6));
    }
    ModelSpec at_hj = make_spec(ModelVariant::I_z_xx, J, J, 0.1);
    CHECK(std::abs(meanfield::critical_gamma(at_hj, 3.0) - J) < 1e-6);
}

TEST_CASE("ordered phase: two stable sign-related fixed points") {
    const double J = 1.0, h = 1.0;
    ModelSpec spec = make_spec(ModelVariant::I_z_xx, h, J, 0.5);  // gamma < gamma_c = 1
    const auto fps = meanfield::steady_states(spec);
    std::vector<Bloch> stable;
    int symmetric_unstable = 0;
    for (const auto& fp : fps) {
        CHECK(fp.residual < 1e-10);
        if (fp.stable) stable.push_back(fp.m);
        else if (std::abs(fp.m(0)) < 1e-8) ++symmetric_unstable;
    }
    REQUIRE(stable.size() == 2);
    CHECK(stable[0](0) == doctest::Approx(-stable[1](0)).epsilon(1e-7));
    CHECK(stable[0](1) == doctest::Approx(-stable[1](1)).epsilon(1e-7));
    CHECK(stable[0](2) == doctest::Approx(stable[1](2)).epsilon(1e-7));
    CHECK(std::abs(stable[0](0)) > 1e-3);
    CHECK(symmetric_unstable == 1);

    // Above gamma_c the only fixed point is the symmetric one.
    spec.gamma = 1.4;
    const auto fps2 = meanfield::steady_states(spec);
    REQUIRE(fps2.size() == 1);
    CHECK(std::abs(fps2[0].m(0)) < 1e-9);
    CHECK(std::abs(fps2[0].m(1)) < 1e-9);
    CHECK(fps2[0].stable);
}

TEST_CASE("stability labels match long-time integration") {
    ModelSpec spec = make_spec(ModelVariant::I_z_xx, 1.0, 1.0, 0.5);
    const auto fps = meanfield::steady_states(spec);
    for (const auto& fp : fps) {
        if (!fp.stable) continue;
        // Forward Euler from a perturbed start must return to the fixed point.
        Bloch m = fp.m + Bloch(1e-3, -5e-4, 8e-4);
        const double dt = 1e-3;
        for (int s = 0; s < 200000; ++s) m += dt * meanfield::rhs(m, spec);
        CHECK((m - fp.m).norm() < 1e-6);
    }
}

TEST_CASE("bistable region of the transverse-drive model") {
    // J = 7 gamma: three branches for roughly 7.2 <= h/gamma <= 10.
    const double gamma = 1.0;
    ModelSpec spec = make_spec(ModelVariant::II_x_zz, 0.0, 7.0 * gamma, gamma);

    const auto cont = meanfield::continue_in_h(spec, 14.0, 2.0, 15.0, 0.02);
    REQUIRE(!cont.stalled);
    REQUIRE(cont.fold_h.size() == 2);
    const double fold_hi = std::max(cont.fold_h[0], cont.fold_h[1]);
    const double fold_lo = std::min(cont.fold_h[0], cont.fold_h[1]);
    CHECK(std::abs(fold_hi - 10.0) < 0.2);
    CHECK(std::abs(fold_lo - 7.2) < 0.2);

    // Inside the bistable window the multi-start search finds 3 fixed points,
    // with the middle branch unstable.
    spec.h = 8.5;
    const auto fps = meanfield::steady_states(spec);
    CHECK(fps.size() == 3);
    int n_stable = 0;
    for (const auto& fp : fps) n_stable += fp.stable ? 1 : 0;
    CHECK(n_stable == 2);
}
