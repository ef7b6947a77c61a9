#include "swqt/exact.hpp"

#include <cmath>
#include <stdexcept>

#include "swqt/rk45.hpp"

namespace swqt::exact {

namespace {
constexpr Complex kI{0.0, 1.0};
}

SpinSystem::SpinSystem(const ModelSpec& spec, int max_sites)
    : spec_(spec),
      cm_(coupling_matrix(spec.lattice, spec.alpha, spec.J)),
      n_(spec.lattice.N),
      dim_(1L << spec.lattice.N),
      amp_(spec.sigma_convention == SigmaConvention::paper ? 2.0 : 1.0) {
    if (n_ > max_sites) throw std::invalid_argument("exact: system too large");

    drive_offdiag_ = spec_.drive_axis() == 0;
    inter_offdiag_ = spec_.interaction_axis() == 0;

    const double z = spec_.interaction_sign();
    diag_.setZero(dim_);
    decay_diag_.setZero(dim_);
    const double rate = spec_.gamma * amp_ * amp_;
    for (long m = 0; m < dim_; ++m) {
        double e = 0.0;
        if (!drive_offdiag_)
            for (int i = 0; i < n_; ++i) e += spec_.h * ((m >> i) & 1 ? 1.0 : -1.0);
        if (!inter_offdiag_)
            for (int i = 0; i < n_; ++i) {
                const double zi = (m >> i) & 1 ? 1.0 : -1.0;
                for (int j = i + 1; j < n_; ++j) {
                    const double zj = (m >> j) & 1 ? 1.0 : -1.0;
                    e += 2.0 * z * cm_.J(i, j) * zi * zj;
                }
            }
        diag_(m) = e;
        for (int k = 0; k < n_; ++k)
            if ((m >> k) & 1) decay_diag_(m) += rate;
    }
}

Eigen::VectorXcd SpinSystem::product_state(
    const std::vector<std::array<double, 3>>& directions) const {
    if (int(directions.size()) != n_)
        throw std::invalid_argument("exact: one direction per site required");
    std::vector<Complex> up(n_), down(n_);
    for (int i = 0; i < n_; ++i) {
        const auto& d = directions[i];
        const double norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        const double theta = std::acos(d[2] / norm);
        const double phi = std::atan2(d[1], d[0]);
        up[i] = std::cos(theta / 2.0);
        down[i] = std::exp(kI * phi) * std::sin(theta / 2.0);
    }
    Eigen::VectorXcd psi(dim_);
    for (long m = 0; m < dim_; ++m) {
        Complex a = 1.0;
        for (int i = 0; i < n_; ++i) a *= ((m >> i) & 1) ? up[i] : down[i];
        psi(m) = a;
    }
    return psi;
}

void SpinSystem::apply_hamiltonian(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    out.resize(dim_);
    out.array() = diag_.array().cast<Complex>() * in.array();
    if (drive_offdiag_)
        for (int i = 0; i < n_; ++i) {
            const long bit = 1L << i;
            for (long m = 0; m < dim_; ++m) out(m) += spec_.h * in(m ^ bit);
        }
    if (inter_offdiag_) {
        const double z = spec_.interaction_sign();
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) {
                const double c = 2.0 * z * cm_.J(i, j);
                if (c == 0.0) continue;
                const long mask = (1L << i) | (1L << j);
                for (long m = 0; m < dim_; ++m) out(m) += c * in(m ^ mask);
            }
    }
}

void SpinSystem::apply_sigma(int site, int axis, const Eigen::VectorXcd& in,
                             Eigen::VectorXcd& out) const {
    const long bit = 1L << site;
    out.resize(dim_);
    if (axis == 0) {
        for (long m = 0; m < dim_; ++m) out(m) = in(m ^ bit);
    } else if (axis == 1) {
        for (long m = 0; m < dim_; ++m) out(m) = (m & bit) ? -kI * in(m ^ bit) : kI * in(m ^ bit);
    } else {
        for (long m = 0; m < dim_; ++m) out(m) = (m & bit) ? in(m) : -in(m);
    }
}

void SpinSystem::apply_lower(int site, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    const long bit = 1L << site;
    out.setZero(dim_);
    for (long m = 0; m < dim_; ++m)
        if (!(m & bit)) out(m) = in(m | bit);
}

void SpinSystem::apply_effective(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    apply_hamiltonian(in, out);
    out.array() -= (0.5 * kI) * decay_diag_.array().cast<Complex>() * in.array();
}

double SpinSystem::expect_sigma(const Eigen::VectorXcd& psi, int site, int axis) const {
    const long bit = 1L << site;
    Complex acc = 0.0;
    if (axis == 0) {
        for (long m = 0; m < dim_; ++m) acc += std::conj(psi(m)) * psi(m ^ bit);
    } else if (axis == 1) {
        for (long m = 0; m < dim_; ++m)
            acc += std::conj(psi(m)) * ((m & bit) ? -kI : kI) * psi(m ^ bit);
    } else {
        for (long m = 0; m < dim_; ++m)
            acc += std::conj(psi(m)) * ((m & bit) ? psi(m) : -psi(m));
    }
    return acc.real() / psi.squaredNorm();
}

double SpinSystem::correlation_x2(const Eigen::VectorXcd& psi) const {
    if (n_ < 2) return 0.0;
    double total = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) {
            const long mask = (1L << i) | (1L << j);
            Complex acc = 0.0;
            for (long m = 0; m < dim_; ++m) acc += std::conj(psi(m)) * psi(m ^ mask);
            total += 2.0 * acc.real();
        }
    return total / (psi.squaredNorm() * double(n_) * double(n_ - 1));
}

Eigen::VectorXd SpinSystem::jump_rates(const Eigen::VectorXcd& psi) const {
    const double rate = spec_.gamma * amp_ * amp_;
    Eigen::VectorXd r(n_);
    const double nrm = psi.squaredNorm();
    for (int k = 0; k < n_; ++k) {
        const long bit = 1L << k;
        double acc = 0.0;
        for (long m = 0; m < dim_; ++m)
            if (m & bit) acc += std::norm(psi(m));
        r(k) = rate * acc / nrm;
    }
    return r;
}

void SpinSystem::fill_record(ObservableSeries& out, int row, double t,
                             const Eigen::VectorXcd& psi) const {
    out.time[row] = t;
    for (int i = 0; i < n_; ++i) {
        out.mx(row, i) = expect_sigma(psi, i, 0);
        out.my(row, i) = expect_sigma(psi, i, 1);
        out.mz(row, i) = expect_sigma(psi, i, 2);
    }
    out.x2(row) = correlation_x2(psi);
}

void SpinSystem::lindblad_rhs(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& drho) const {
    Eigen::MatrixXcd hr(dim_, dim_);
    Eigen::VectorXcd col(dim_), out(dim_);
    for (long c = 0; c < dim_; ++c) {
        col = rho.col(c);
        apply_hamiltonian(col, out);
        hr.col(c) = out;
    }
    drho = -kI * (hr - hr.adjoint());

    const double rate = spec_.gamma * amp_ * amp_;
    for (int k = 0; k < n_; ++k) {
        const long bit = 1L << k;
        for (long m = 0; m < dim_; ++m) {
            if (!(m & bit)) continue;
            for (long nn = 0; nn < dim_; ++nn) {
                if (!(nn & bit)) continue;
                drho(m ^ bit, nn ^ bit) += rate * rho(m, nn);
            }
        }
    }
    drho.noalias() -= 0.5 * (decay_diag_.asDiagonal() * rho).eval();
    drho.noalias() -= 0.5 * (rho * decay_diag_.asDiagonal()).eval();
}

double SpinSystem::expect_sigma(const Eigen::MatrixXcd& rho, int site, int axis) const {
    const long bit = 1L << site;
    Complex acc = 0.0;
    if (axis == 0) {
        for (long m = 0; m < dim_; ++m) acc += rho(m ^ bit, m);
    } else if (axis == 1) {
        // <m|sigma_y rho|m> summed: sigma_y row m picks m^bit with phase.
        for (long m = 0; m < dim_; ++m) acc += ((m & bit) ? -kI : kI) * rho(m ^ bit, m);
    } else {
        for (long m = 0; m < dim_; ++m) acc += ((m & bit) ? 1.0 : -1.0) * rho(m, m);
    }
    return acc.real();
}

double SpinSystem::correlation_x2(const Eigen::MatrixXcd& rho) const {
    if (n_ < 2) return 0.0;
    double total = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) {
            const long mask = (1L << i) | (1L << j);
            Complex acc = 0.0;
            for (long m = 0; m < dim_; ++m) acc += rho(m ^ mask, m);
            total += 2.0 * acc.real();
        }
    return total / (double(n_) * double(n_ - 1));
}

ObservableSeries lindblad_evolve(const ModelSpec& spec,
                                 const std::vector<std::array<double, 3>>& directions,
                                 const std::vector<double>& grid, double rtol, double atol) {
    SpinSystem sys(spec, 8);
    const long d = sys.dim();
    const Eigen::VectorXcd psi0 = sys.product_state(directions);
    Eigen::MatrixXcd rho0 = psi0 * psi0.adjoint() / psi0.squaredNorm();

    auto f = [&sys, d](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        const Eigen::Map<const Eigen::MatrixXcd> rho(y.data(), d, d);
        dy.resize(d * d);
        Eigen::Map<Eigen::MatrixXcd> drho(dy.data(), d, d);
        Eigen::MatrixXcd tmp(d, d);
        sys.lindblad_rhs(rho, tmp);
        drho = tmp;
    };

    OdeOptions oo;
    oo.rtol = rtol;
    oo.atol = atol;
    Eigen::VectorXcd y0 = Eigen::Map<Eigen::VectorXcd>(rho0.data(), d * d);
    Dopri5<Eigen::VectorXcd> ode(f, grid.front(), y0, oo);

    ObservableSeries out;
    out.allocate(int(grid.size()), sys.sites());
    auto record = [&](int row, double t, const Eigen::VectorXcd& y) {
        const Eigen::MatrixXcd rho = Eigen::Map<const Eigen::MatrixXcd>(y.data(), d, d);
        out.time[row] = t;
        for (int i = 0; i < sys.sites(); ++i) {
            out.mx(row, i) = sys.expect_sigma(rho, i, 0);
            out.my(row, i) = sys.expect_sigma(rho, i, 1);
            out.mz(row, i) = sys.expect_sigma(rho, i, 2);
        }
        out.x2(row) = sys.correlation_x2(rho);
    };

    std::size_t g = 0;
    while (g < grid.size() && grid[g] <= ode.time()) {
        record(int(g), grid[g], ode.state());
        ++g;
    }
    const double t_final = grid.back();
    while (g < grid.size() && ode.advance(t_final)) {
        while (g < grid.size() && grid[g] <= ode.time()) {
            const Eigen::VectorXcd y = ode.dense(grid[g]);
            record(int(g), grid[g], y);
            ++g;
        }
    }
    while (g < grid.size()) {
        record(int(g), ode.time(), ode.state());
        ++g;
    }
    return out;
}

ObservableSeries sse_trajectory(const ModelSpec& spec,
                                const std::vector<std::array<double, 3>>& directions,
                                const HeterodyneOptions& opt, NoiseStream& noise) {
    SpinSystem sys(spec, 12);
    const long d = sys.dim();
    const int n = sys.sites();
    const double lamp = std::sqrt(spec.gamma) * sys.lower_amp();

    Eigen::VectorXcd psi = sys.product_state(directions);
    psi.normalize();

    const long n_steps = std::lround(opt.t_final / opt.dt);
    const int every = std::max(1, opt.record_every);
    ObservableSeries out;
    out.allocate(int(n_steps / every) + 1, n);
    sys.fill_record(out, 0, 0.0, psi);

    Eigen::VectorXcd hpsi(d), lpsi(d), dpsi(d);
    int row = 1;
    for (long s = 1; s <= n_steps; ++s) {
        const Eigen::VectorXcd dZ = noise.complex_wiener(n, opt.dt);
        sys.apply_hamiltonian(psi, hpsi);
        dpsi = -kI * opt.dt * hpsi;
        for (int k = 0; k < n; ++k) {
            sys.apply_lower(k, psi, lpsi);
            lpsi *= lamp;
            const Complex lk = psi.dot(lpsi);  // <psi|L_k|psi>
            dpsi += opt.dt * (std::conj(lk) * lpsi - 0.5 * std::norm(lk) * psi);
            dpsi += std::conj(dZ(k)) * (lpsi - lk * psi);
        }
        // -1/2 sum_k L+_k L_k psi dt (diagonal decay part).
        dpsi.array() -= 0.5 * opt.dt * sys.decay_profile().array().cast<Complex>() * psi.array();
        psi += dpsi;
        psi.normalize();
        if (s % every == 0) sys.fill_record(out, row++, double(s) * opt.dt, psi);
    }
    return out;
}

ObservableSeries mcwf_trajectory(const ModelSpec& spec,
                                 const std::vector<std::array<double, 3>>& directions,
                                 const QJumpOptions& opt, NoiseStream& noise) {
    SpinSystem sys(spec, 16);
    const long d = sys.dim();
    const int n = sys.sites();
    Eigen::VectorXcd psi = sys.product_state(directions);
    psi.normalize();

    OdeOptions oo;
    oo.rtol = opt.ode_rtol;
    oo.atol = opt.ode_atol;

    const std::vector<double>& grid = opt.record_grid;
    ObservableSeries out;
    out.allocate(int(grid.size()), n);

    auto srhs = [&sys, d](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy.resize(d);
        sys.apply_effective(y, dy);
        dy *= -kI;
    };

    double r = std::max(noise.uniform(), 1e-300);
    Dopri5<Eigen::VectorXcd> ode(srhs, 0.0, psi, oo);

    std::size_t g = 0;
    while (g < grid.size() && grid[g] <= 0.0) sys.fill_record(out, int(g++), grid[g], psi);

    while (ode.time() < opt.t_final) {
        if (!ode.advance(opt.t_final)) break;
        double t_stop = ode.time();
        bool jumped = false;
        if (ode.state().squaredNorm() < r) {
            const double rr = r;
            t_stop = locate_crossing(
                ode, [rr](const Eigen::VectorXcd& y) { return y.squaredNorm() - rr; },
                opt.event_rtol);
            jumped = true;
        }
        while (g < grid.size() && grid[g] <= t_stop) {
            const Eigen::VectorXcd y = ode.dense(grid[g]);
            sys.fill_record(out, int(g++), grid[g], y);
        }
        if (jumped) {
            Eigen::VectorXcd y = ode.dense(t_stop);
            const Eigen::VectorXd rates = sys.jump_rates(y);
            const int k = QJumpIntegrator::select_channel(rates, noise.uniform());
            Eigen::VectorXcd ly(d);
            sys.apply_lower(k, y, ly);
            ly.normalize();
            ++out.jump_count;
            out.jump_times.push_back(t_stop);
            r = std::max(noise.uniform(), 1e-300);
            ode.reset(t_stop, ly);
        }
    }
    if (g < grid.size()) {
        const Eigen::VectorXcd& y = ode.state();
        while (g < grid.size()) sys.fill_record(out, int(g++), ode.time(), y);
    }
    return out;
}

}  // namespace swqt::exact
