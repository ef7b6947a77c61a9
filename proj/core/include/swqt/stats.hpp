#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace swqt::stats {

/// Pairwise (cascade) summation; deterministic fixed-order reduction.
double pairwise_sum(const double* data, std::size_t n);
double pairwise_sum(const std::vector<double>& v);

double mean(const std::vector<double>& v);
/// Sample standard error of the mean (independent samples).
double sem(const std::vector<double>& v);

/// Sarle's bimodality coefficient (g1^2 + 1) / (g2 + 3(n-1)^2/((n-2)(n-3)))
/// with g1 the sample skewness and g2 the excess kurtosis. The uniform
/// distribution sits at the 5/9 benchmark; larger suggests bimodality.
double sarle_bimodality(const std::vector<double>& v);

struct Histogram {
    std::vector<double> edges;    // bins + 1
    std::vector<double> density;  // normalized to unit integral
};
Histogram histogram(const std::vector<double>& v, int bins);
Histogram histogram(const std::vector<double>& v, int bins, double lo, double hi);

/// Two-sided Kolmogorov-Smirnov p-value (asymptotic) for one sample against
/// a CDF, and for two samples.
double ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);
double ks_2sample(std::vector<double> a, std::vector<double> b);

struct BlockedError {
    double mean;
    double error;  // blocked standard error of the mean
    double tau;    // estimated integrated autocorrelation time (in samples)
};

/// Blocking analysis of a stationary correlated series: the reported error is
/// the plateau of the blocked standard error over doubling block lengths, and
/// tau the implied autocorrelation time.
BlockedError blocked_error(const std::vector<double>& series);

}  // namespace swqt::stats
