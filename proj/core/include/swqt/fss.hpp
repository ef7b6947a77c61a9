#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace swqt::fss {

struct ScalingPoint {
    int L;         // linear system size
    double gamma;  // dissipation
    double x2;     // order-parameter correlator
    double err;    // standard error, > 0
};

struct ScalingDataset {
    std::vector<ScalingPoint> points;
    double J = 1.0;  // coupling used to non-dimensionalize the scaling variable

    void validate() const;  // >= 3 sizes, >= 5 gammas per size, err > 0
};

struct CollapseParams {
    double gamma_c;
    double beta;
    double nu;
};

/// Data-collapse cost: rescale every point to (x, y) =
/// ((gamma - gamma_c) L^{1/nu} / J, x2 L^{2 beta / nu}) and measure the
/// error-weighted squared deviation of each point from a leave-one-size-out
/// local linear regression through the other sizes' points. Only points with
/// |x| <= x_max enter. Throws when fewer than two sizes overlap in range.
double collapse_objective(const CollapseParams& p, const ScalingDataset& data,
                          double x_max = 3.0);

struct FitResult {
    CollapseParams value;
    CollapseParams error;  // bootstrap standard deviations
    double objective;
    bool converged;
};

/// Multi-start Nelder-Mead minimization of the collapse objective plus
/// bootstrap (resampled points) errors; deterministic for a fixed seed.
FitResult fit_collapse(const ScalingDataset& data, const CollapseParams& init,
                       int bootstrap_n, std::uint64_t seed, double x_max = 3.0);

/// Generic Nelder-Mead simplex minimizer (derivative-free), exposed for
/// reuse and testing. Returns the best vertex.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> start, double scale, int max_evals,
                                double ftol = 1e-10);

}  // namespace swqt::fss
