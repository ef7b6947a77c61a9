#include "swqt/fss.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace swqt::fss {

void ScalingDataset::validate() const {
    std::map<int, int> per_size;
    for (const auto& p : points) {
        if (!(p.err > 0.0)) throw std::invalid_argument("scaling data: err must be > 0");
        ++per_size[p.L];
    }
    if (per_size.size() < 3)
        throw std::invalid_argument("scaling data: need >= 3 distinct sizes");
    for (const auto& [L, n] : per_size)
        if (n < 5)
            throw std::invalid_argument("scaling data: need >= 5 points per size (L = " +
                                        std::to_string(L) + ")");
}

namespace {

struct Rescaled {
    double x, y, sigma;
    int L;
};

std::vector<Rescaled> rescale(const CollapseParams& p, const ScalingDataset& data,
                              double x_max) {
    std::vector<Rescaled> out;
    for (const auto& pt : data.points) {
        const double lx = std::pow(double(pt.L), 1.0 / p.nu);
        const double ly = std::pow(double(pt.L), 2.0 * p.beta / p.nu);
        const double x = (pt.gamma - p.gamma_c) * lx / data.J;
        if (std::abs(x) > x_max) continue;
        out.push_back({x, pt.x2 * ly, pt.err * ly, pt.L});
    }
    return out;
}

}  // namespace

double collapse_objective(const CollapseParams& p, const ScalingDataset& data, double x_max) {
    if (!(p.nu > 0.0)) throw std::invalid_argument("collapse_objective: nu must be > 0");
    const std::vector<Rescaled> pts = rescale(p, data, x_max);

    // Per-size curves, sorted in the rescaled coordinate.
    std::map<int, std::vector<Rescaled>> curves;
    for (const auto& q : pts) curves[q.L].push_back(q);
    if (curves.size() < 2)
        throw std::runtime_error("collapse_objective: fewer than two sizes overlap in range");
    for (auto& [L, c] : curves)
        std::sort(c.begin(), c.end(),
                  [](const Rescaled& a, const Rescaled& b) { return a.x < b.x; });

    // Each point is compared against the master-curve estimate obtained by
    // linearly interpolating every *other* size's curve at its abscissa and
    // combining the interpolants with inverse-variance weights. Residuals
    // are then normalized by the error-weighted spread of the rescaled data,
    // which makes the objective scale-invariant and exactly zero for a
    // perfect collapse regardless of the quoted error bars.
    double num = 0.0, den = 0.0;
    double sw = 0.0, swy = 0.0, swyy = 0.0;
    int used = 0;
    for (const auto& q : pts) {
        double ww = 0.0, wy = 0.0;
        for (const auto& [L, c] : curves) {
            if (L == q.L) continue;
            if (q.x < c.front().x || q.x > c.back().x) continue;
            auto hi = std::lower_bound(c.begin(), c.end(), q.x,
                                       [](const Rescaled& a, double x) { return a.x < x; });
            double yi, vi;
            long j = (hi - c.begin()) - 1;  // three-node window around the bracket
            j = std::clamp(j, 0L, long(c.size()) - 3);
            const bool distinct = c.size() >= 3 && c[j].x < c[j + 1].x &&
                                  c[j + 1].x < c[j + 2].x;
            if (distinct) {
                // Quadratic Lagrange interpolation: exact at the nodes and
                // with far smaller curvature bias than a linear bracket.
                yi = 0.0;
                vi = 0.0;
                for (int a = 0; a < 3; ++a) {
                    double l = 1.0;
                    for (int b = 0; b < 3; ++b)
                        if (b != a) l *= (q.x - c[j + b].x) / (c[j + a].x - c[j + b].x);
                    yi += l * c[j + a].y;
                    vi += l * l * c[j + a].sigma * c[j + a].sigma;
                }
            } else {
                const Rescaled& b = (hi == c.end()) ? c.back() : *hi;
                const Rescaled& a = (hi == c.begin()) ? *hi : *(hi - 1);
                const double dx = b.x - a.x;
                const double t = dx > 0.0 ? (q.x - a.x) / dx : 0.0;
                yi = (1.0 - t) * a.y + t * b.y;
                vi = (1.0 - t) * (1.0 - t) * a.sigma * a.sigma + t * t * b.sigma * b.sigma;
            }
            const double w = 1.0 / std::max(vi, 1e-300);
            ww += w;
            wy += w * yi;
        }
        if (ww == 0.0) continue;
        const double yhat = wy / ww;
        const double var_yhat = 1.0 / ww;
        const double w_q = 1.0 / (q.sigma * q.sigma + var_yhat);
        num += w_q * (q.y - yhat) * (q.y - yhat);
        den += w_q;
        const double ws = 1.0 / (q.sigma * q.sigma);
        sw += ws;
        swy += ws * q.y;
        swyy += ws * q.y * q.y;
        ++used;
    }
    if (used == 0) throw std::runtime_error("collapse_objective: no usable points");
    const double ybar = swy / sw;
    const double scale2 = std::max(swyy / sw - ybar * ybar, 1e-300);
    return (num / den) / scale2;
}

std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> start, double scale, int max_evals,
                                double ftol) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> simplex(n + 1, start);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i < n; ++i)
        simplex[i + 1][i] += scale * (std::abs(start[i]) > 1e-8 ? std::abs(start[i]) : 1.0);
    int evals = 0;
    for (std::size_t i = 0; i <= n; ++i) fv[i] = (++evals, f(simplex[i]));

    auto order = [&] {
        std::vector<std::size_t> idx(n + 1);
        for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&fv](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> s2;
        std::vector<double> f2;
        for (std::size_t i : idx) {
            s2.push_back(simplex[i]);
            f2.push_back(fv[i]);
        }
        simplex.swap(s2);
        fv.swap(f2);
    };

    while (evals < max_evals) {
        order();
        if (std::abs(fv[n] - fv[0]) < ftol * (std::abs(fv[0]) + ftol)) break;
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / double(n);
        auto combine = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j)
                p[j] = centroid[j] + t * (simplex[n][j] - centroid[j]);
            return p;
        };
        const std::vector<double> xr = combine(-1.0);
        const double fr = (++evals, f(xr));
        if (fr < fv[0]) {
            const std::vector<double> xe = combine(-2.0);
            const double fe = (++evals, f(xe));
            if (fe < fr) {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            simplex[n] = xr;
            fv[n] = fr;
        } else {
            const std::vector<double> xc = combine(fr < fv[n] ? -0.5 : 0.5);
            const double fc = (++evals, f(xc));
            if (fc < std::min(fr, fv[n])) {
                simplex[n] = xc;
                fv[n] = fc;
            } else {  // shrink toward the best vertex
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j)
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    fv[i] = (++evals, f(simplex[i]));
                }
            }
        }
    }
    order();
    return simplex[0];
}

namespace {

double safe_objective(const std::vector<double>& v, const ScalingDataset& data, double x_max) {
    const CollapseParams p{v[0], v[1], v[2]};
    if (!(p.nu > 0.05) || p.nu > 50.0 || !(p.beta > -5.0) || p.beta > 5.0) return 1e100;
    try {
        return collapse_objective(p, data, x_max);
    } catch (const std::exception&) {
        return 1e100;
    }
}

}  // namespace

FitResult fit_collapse(const ScalingDataset& data, const CollapseParams& init, int bootstrap_n,
                       std::uint64_t seed, double x_max) {
    data.validate();
    auto obj = [&data, x_max](const std::vector<double>& v) {
        return safe_objective(v, data, x_max);
    };

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);

    std::vector<double> best;
    double best_f = 1e300;
    for (int s = 0; s < 7; ++s) {
        std::vector<double> start{init.gamma_c, init.beta, init.nu};
        if (s > 0)
            for (double& x : start) x *= 1.0 + jitter(rng);
        const std::vector<double> v = nelder_mead(obj, start, 0.15, 4000);
        const double fv = obj(v);
        if (fv < best_f) {
            best_f = fv;
            best = v;
        }
    }

    FitResult res;
    res.value = {best[0], best[1], best[2]};
    res.objective = best_f;
    res.converged = best_f < 1e99;

    // Bootstrap: resample points with replacement, refit from the optimum.
    std::vector<double> bs_g, bs_b, bs_n;
    std::uniform_int_distribution<std::size_t> pick(0, data.points.size() - 1);
    for (int rep = 0; rep < bootstrap_n; ++rep) {
        ScalingDataset boot;
        boot.J = data.J;
        for (std::size_t i = 0; i < data.points.size(); ++i)
            boot.points.push_back(data.points[pick(rng)]);
        auto bobj = [&boot, x_max](const std::vector<double>& v) {
            return safe_objective(v, boot, x_max);
        };
        const std::vector<double> v = nelder_mead(bobj, best, 0.05, 1500);
        if (bobj(v) > 1e99) continue;
        bs_g.push_back(v[0]);
        bs_b.push_back(v[1]);
        bs_n.push_back(v[2]);
    }
    auto sdev = [](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        double m = 0.0;
        for (double x : v) m += x;
        m /= double(v.size());
        double acc = 0.0;
        for (double x : v) acc += (x - m) * (x - m);
        return std::sqrt(acc / double(v.size() - 1));
    };
    res.error = {sdev(bs_g), sdev(bs_b), sdev(bs_n)};
    return res;
}

}  // namespace swqt::fss
