#include "swqt/meanfield.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace swqt::meanfield {

namespace {

Bloch axis_vec(int axis) {
    Bloch e = Bloch::Zero();
    e(axis) = 1.0;
    return e;
}

double decay_rate(const ModelSpec& spec) {
    const double a = spec.sigma_convention == SigmaConvention::paper ? 2.0 : 1.0;
    return spec.gamma * a * a;
}

Bloch field(const Bloch& m, const ModelSpec& spec) {
    const Bloch n1 = axis_vec(spec.drive_axis());
    const Bloch n2 = axis_vec(spec.interaction_axis());
    return spec.h * n1 + spec.interaction_sign() * 2.0 * spec.J * m.dot(n2) * n2;
}

}  // namespace

Bloch rhs(const Bloch& m, const ModelSpec& spec) {
    const double g = decay_rate(spec);
    Bloch out = 2.0 * field(m, spec).cross(m);
    out(0) -= 0.5 * g * m(0);
    out(1) -= 0.5 * g * m(1);
    out(2) -= g * (1.0 + m(2));
    return out;
}

Eigen::Matrix3d jacobian(const Bloch& m, const ModelSpec& spec) {
    const double g = decay_rate(spec);
    const Bloch n2 = axis_vec(spec.interaction_axis());
    const Bloch c = field(m, spec);
    Eigen::Matrix3d jac;
    for (int j = 0; j < 3; ++j) {
        const Bloch dc = spec.interaction_sign() * 2.0 * spec.J * n2(j) * n2;
        jac.col(j) = 2.0 * (c.cross(axis_vec(j)) + dc.cross(m));
    }
    jac(0, 0) -= 0.5 * g;
    jac(1, 1) -= 0.5 * g;
    jac(2, 2) -= g;
    return jac;
}

namespace {

bool newton(Bloch& m, const ModelSpec& spec) {
    for (int it = 0; it < 200; ++it) {
        const Bloch f = rhs(m, spec);
        if (f.norm() < 1e-13) return true;
        const Eigen::Matrix3d jac = jacobian(m, spec);
        const Bloch dm = jac.fullPivLu().solve(-f);
        double step = 1.0;
        // Backtracking line search on |rhs|.
        for (int ls = 0; ls < 30; ++ls) {
            const Bloch trial = m + step * dm;
            if (rhs(trial, spec).norm() < f.norm() || step < 1e-10) {
                m = trial;
                break;
            }
            step *= 0.5;
        }
        if (m.norm() > 10.0) return false;
    }
    return rhs(m, spec).norm() < 1e-10;
}

bool is_stable(const Bloch& m, const ModelSpec& spec) {
    const Eigen::Matrix3d jac = jacobian(m, spec);
    return Eigen::EigenSolver<Eigen::Matrix3d>(jac).eigenvalues().real().maxCoeff() < 0.0;
}

}  // namespace

std::vector<FixedPoint> steady_states(const ModelSpec& spec) {
    std::vector<FixedPoint> found;
    for (int ix = -1; ix <= 1; ++ix)
        for (int iy = -1; iy <= 1; ++iy)
            for (int iz = -1; iz <= 1; ++iz) {
                Bloch m{double(ix), double(iy), double(iz)};
                if (m.norm() > 0.0) m *= 0.9 / m.norm();
                else m = Bloch(0.0, 0.0, -0.5);
                if (!newton(m, spec)) continue;
                if (m.norm() > 1.0 + 1e-6) continue;
                bool dup = false;
                for (const auto& fp : found)
                    if ((fp.m - m).norm() < 1e-8) dup = true;
                if (dup) continue;
                found.push_back({m, is_stable(m, spec), rhs(m, spec).norm()});
            }
    return found;
}

double critical_gamma(const ModelSpec& spec, double gamma_max) {
    // Symmetric branch: the drive-aligned fixed point m = (0, 0, -1), exact
    // for Model I at every gamma. Largest zero crossing of the leading
    // linearization eigenvalue on (0, gamma_max].
    auto lead = [&spec](double gamma) {
        ModelSpec s = spec;
        s.gamma = gamma;
        const Bloch m(0.0, 0.0, -1.0);
        return Eigen::EigenSolver<Eigen::Matrix3d>(jacobian(m, s))
            .eigenvalues()
            .real()
            .maxCoeff();
    };
    const int n_scan = 400;
    double lo = -1.0, hi = -1.0;
    for (int i = n_scan; i >= 1; --i) {
        const double g1 = gamma_max * double(i) / n_scan;
        const double g0 = gamma_max * double(i - 1) / n_scan;
        if (lead(g1) < 0.0 && lead(std::max(g0, 1e-12)) > 0.0) {
            lo = std::max(g0, 1e-12);
            hi = g1;
            break;
        }
    }
    if (lo < 0.0) return 0.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (lead(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Continuation continue_in_h(const ModelSpec& spec, double h_start, double h_min, double h_max,
                           double initial_step) {
    Continuation result;

    ModelSpec s = spec;
    s.h = h_start;
    Bloch m(0.0, 0.0, -1.0);
    if (!newton(m, s)) {
        // fall back to the most stable multi-start solution
        auto fps = steady_states(s);
        if (fps.empty()) {
            result.stalled = true;
            return result;
        }
        m = fps.front().m;
    }

    auto tangent = [&](const Bloch& mm, const ModelSpec& ss) {
        // Null vector of the 3x4 matrix [J_m | dF/dh].
        Eigen::Matrix<double, 3, 4> a;
        a.block<3, 3>(0, 0) = jacobian(mm, ss);
        const Bloch n1 = axis_vec(ss.drive_axis());
        a.col(3) = 2.0 * n1.cross(mm);
        Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(a, Eigen::ComputeFullV);
        return Eigen::Vector4d(svd.matrixV().col(3));
    };

    Eigen::Vector4d x;
    x << m, s.h;
    Eigen::Vector4d t = tangent(m, s);
    // Trace toward the far end of the window so the whole S-curve is covered.
    const bool decreasing = h_start > 0.5 * (h_min + h_max);
    if ((t(3) < 0.0) != decreasing) t = -t;

    result.points.push_back({s.h, m, is_stable(m, s)});

    double ds = initial_step;
    const double ds_min = 1e-7, ds_max = 8.0 * initial_step;
    int steps = 0;
    while (steps++ < 20000) {
        const Eigen::Vector4d x_pred = x + ds * t;
        Eigen::Vector4d xc = x_pred;
        bool ok = false;
        for (int it = 0; it < 50; ++it) {
            ModelSpec sc = spec;
            sc.h = xc(3);
            const Bloch mc = xc.head<3>();
            const Bloch f = rhs(mc, sc);
            const double con = t.dot(xc - x) - ds;
            if (f.norm() < 1e-11 && std::abs(con) < 1e-11) {
                ok = true;
                break;
            }
            Eigen::Matrix4d big;
            big.block<3, 3>(0, 0) = jacobian(mc, sc);
            const Bloch n1 = axis_vec(sc.drive_axis());
            big.block<3, 1>(0, 3) = 2.0 * n1.cross(mc);
            big.row(3) = t.transpose();
            Eigen::Vector4d rhs4;
            rhs4 << -f, -con;
            xc += big.fullPivLu().solve(rhs4);
        }
        if (!ok) {
            ds *= 0.5;
            if (ds < ds_min) {
                result.stalled = true;
                break;
            }
            continue;
        }
        ModelSpec sc = spec;
        sc.h = xc(3);
        Eigen::Vector4d t_new = tangent(xc.head<3>(), sc);
        if (t_new.dot(t) < 0.0) t_new = -t_new;
        if (t_new(3) * t(3) < 0.0)
            result.fold_h.push_back(0.5 * (x(3) + xc(3)));  // tangent turned in h
        x = xc;
        t = t_new;
        result.points.push_back({x(3), x.head<3>(), is_stable(x.head<3>(), sc)});
        ds = std::min(ds * 1.3, ds_max);
        if (x(3) < h_min || x(3) > h_max) break;
    }
    return result;
}

}  // namespace swqt::meanfield
