#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace swqt {

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_init = 0.0;  // 0: choose from the first derivative
    double h_max = 0.0;   // 0: no cap
    int max_steps = 50'000'000;
};

/// Embedded Dormand-Prince 5(4) integrator with 5th-order dense output.
/// Vec is an Eigen vector type (real or complex); error norms use cwiseAbs.
template <typename Vec>
class Dopri5 {
  public:
    using Rhs = std::function<void(double, const Vec&, Vec&)>;

    Dopri5(Rhs f, double t0, Vec y0, OdeOptions opt)
        : f_(std::move(f)), opt_(opt), t_(t0), y_(std::move(y0)) {
        k1_ = y_;
        f_(t_, y_, k1_);
        h_ = opt_.h_init > 0 ? opt_.h_init : initial_step();
        if (opt_.h_max > 0) h_ = std::min(h_, opt_.h_max);
    }

    double time() const { return t_; }
    double prev_time() const { return t_prev_; }
    const Vec& state() const { return y_; }
    const Vec& derivative() const { return k1_; }

    /// One accepted adaptive step, capped so t never exceeds t_limit.
    /// Returns false when t_limit was already reached.
    bool advance(double t_limit) {
        if (t_ >= t_limit * (1.0 - 1e-15) || t_limit - t_ < 1e-14 * std::abs(t_limit)) return false;
        int attempts = 0;
        for (;;) {
            if (++steps_ > opt_.max_steps) throw std::runtime_error("ode: step limit exceeded");
            double h = std::min(h_, t_limit - t_);
            if (opt_.h_max > 0) h = std::min(h, opt_.h_max);
            const double err = try_step(h);
            if (err <= 1.0) {
                accept(h);
                const double fac =
                    std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
                h_ = h * fac;
                return true;
            }
            h_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
            if (h_ < 1e-14 * std::max(1.0, std::abs(t_)))
                throw std::runtime_error("ode: step size underflow");
            if (++attempts > 200) throw std::runtime_error("ode: too many rejected steps");
        }
    }

    /// Dense evaluation inside the last accepted step [prev_time, time].
    Vec dense(double t) const {
        const double th = (t - t_prev_) / h_last_;
        const double th1 = 1.0 - th;
        return rcont1_ + th * (rcont2_ + th1 * (rcont3_ + th * (rcont4_ + th1 * rcont5_)));
    }

    /// Reset the integrator state (used after event localization / jumps).
    void reset(double t, Vec y) {
        t_ = t_prev_ = t;
        y_ = std::move(y);
        f_(t_, y_, k1_);
    }

  private:
    double initial_step() const {
        const double d0 = y_.cwiseAbs().maxCoeff();
        const double d1 = k1_.cwiseAbs().maxCoeff();
        double h = (d1 > 1e-12) ? 0.01 * (opt_.atol + opt_.rtol * d0) / (opt_.rtol * d1 + 1e-300)
                                : 1e-6;
        return std::clamp(h, 1e-10, 1.0);
    }

    // Returns the scaled error norm of a trial step of size h.
    double try_step(double h) {
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                                a75 = -2187.0 / 6784, a76 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        Vec tmp = y_ + h * (a21 * k1_);
        f_(t_ + h / 5, tmp, k2_);
        tmp = y_ + h * (a31 * k1_ + a32 * k2_);
        f_(t_ + 3 * h / 10, tmp, k3_);
        tmp = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        f_(t_ + 4 * h / 5, tmp, k4_);
        tmp = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        f_(t_ + 8 * h / 9, tmp, k5_);
        tmp = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        f_(t_ + h, tmp, k6_);
        ynew_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
        f_(t_ + h, ynew_, k7_);

        const Vec errv = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
        const auto scale = (opt_.atol +
                            opt_.rtol * y_.cwiseAbs().cwiseMax(ynew_.cwiseAbs()).array())
                               .matrix();
        const double n = std::sqrt(
            (errv.cwiseAbs().array() / scale.array()).square().sum() / double(errv.size()));
        return n;
    }

    void accept(double h) {
        static constexpr double d1 = -12715105075.0 / 11282082432.0;
        static constexpr double d3 = 87487479700.0 / 32700410799.0;
        static constexpr double d4 = -10690763975.0 / 1880347072.0;
        static constexpr double d5 = 701980252875.0 / 199316789632.0;
        static constexpr double d6 = -1453857185.0 / 822651844.0;
        static constexpr double d7 = 69997945.0 / 29380423.0;

        rcont1_ = y_;
        rcont2_ = ynew_ - y_;
        rcont3_ = h * k1_ - rcont2_;
        rcont4_ = rcont2_ - h * k7_ - rcont3_;
        rcont5_ = h * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);

        t_prev_ = t_;
        t_ += h;
        h_last_ = h;
        y_.swap(ynew_);
        k1_.swap(k7_);  // first-same-as-last
    }

    Rhs f_;
    OdeOptions opt_;
    double t_ = 0.0, t_prev_ = 0.0;
    double h_ = 1e-6, h_last_ = 0.0;
    long steps_ = 0;
    Vec y_, ynew_;
    Vec k1_, k2_, k3_, k4_, k5_, k6_, k7_;
    Vec rcont1_, rcont2_, rcont3_, rcont4_, rcont5_;
};

/// Locate the time in the last accepted step where scalar(dense(t)) crosses
/// zero, assuming scalar(prev_time) >= 0 > scalar(time). Bisection to
/// relative tolerance rtol in time.
template <typename Vec, typename Scalar>
double locate_crossing(const Dopri5<Vec>& ode, Scalar&& scalar, double rtol) {
    double lo = ode.prev_time(), hi = ode.time();
    for (int it = 0; it < 200 && (hi - lo) > rtol * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (scalar(ode.dense(mid)) >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace swqt
