#include "swqt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swqt::stats {

double pairwise_sum(const double* data, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 8) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += data[i];
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

double mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean: empty sample");
    return pairwise_sum(v) / double(v.size());
}

double sem(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 2) throw std::invalid_argument("sem: need at least two samples");
    const double m = mean(v);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (v[i] - m) * (v[i] - m);
    return std::sqrt(pairwise_sum(sq) / double(n - 1) / double(n));
}

double sarle_bimodality(const std::vector<double>& v) {
    const double n = double(v.size());
    if (v.size() < 4) throw std::invalid_argument("sarle_bimodality: need >= 4 samples");
    const double m = mean(v);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double g1 = m3 / std::pow(m2, 1.5);
    const double g2 = m4 / (m2 * m2) - 3.0;
    return (g1 * g1 + 1.0) / (g2 + 3.0 * (n - 1) * (n - 1) / ((n - 2) * (n - 3)));
}

Histogram histogram(const std::vector<double>& v, int bins, double lo, double hi) {
    if (bins < 1 || !(hi > lo)) throw std::invalid_argument("histogram: bad bins/range");
    Histogram h;
    h.edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b) h.edges[b] = lo + (hi - lo) * double(b) / bins;
    h.density.assign(bins, 0.0);
    for (double x : v) {
        int b = int((x - lo) / (hi - lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        h.density[b] += 1.0;
    }
    const double w = (hi - lo) / bins;
    for (double& d : h.density) d /= double(v.size()) * w;
    return h;
}

Histogram histogram(const std::vector<double>& v, int bins) {
    if (v.empty()) throw std::invalid_argument("histogram: empty sample");
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double pad = 1e-12 + 1e-9 * std::abs(*hi - *lo);
    return histogram(v, bins, *lo - pad, *hi + pad);
}

namespace {

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1}
// exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-12) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

double ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - double(i) / n));
        d = std::max(d, std::abs(double(i + 1) / n - f));
    }
    const double sn = std::sqrt(n);
    return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
}

double ks_2sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    const double ne = double(a.size()) * double(b.size()) / double(a.size() + b.size());
    const double sn = std::sqrt(ne);
    return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
}

BlockedError blocked_error(const std::vector<double>& series) {
    const std::size_t n = series.size();
    if (n < 8) throw std::invalid_argument("blocked_error: series too short");
    const double m = mean(series);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (series[i] - m) * (series[i] - m);
    const double var0 = pairwise_sum(sq) / double(n - 1);
    const double naive = std::sqrt(var0 / double(n));

    std::vector<double> blocks = series;
    double best = naive;
    while (blocks.size() >= 8) {
        // merge pairs
        std::vector<double> next(blocks.size() / 2);
        for (std::size_t i = 0; i < next.size(); ++i)
            next[i] = 0.5 * (blocks[2 * i] + blocks[2 * i + 1]);
        blocks.swap(next);
        const std::size_t nb = blocks.size();
        const double mb = mean(blocks);
        double vb = 0.0;
        for (double x : blocks) vb += (x - mb) * (x - mb);
        vb /= double(nb - 1);
        best = std::max(best, std::sqrt(vb / double(nb)));
    }
    const double tau = 0.5 * (best * best) / (naive * naive);
    return {m, best, tau};
}

}  // namespace swqt::stats
