#include "swqt/lattice.hpp"

#include <cmath>

namespace swqt {

double min_image_distance(int L, std::pair<int, int> ri, std::pair<int, int> rj) {
    auto check = [L](std::pair<int, int> r) {
        if (r.first < 1 || r.first > L || r.second < 1 || r.second > L)
            throw std::invalid_argument("min_image_distance: position out of range");
    };
    check(ri);
    check(rj);
    double acc = 0.0;
    const int d[2] = {std::abs(ri.first - rj.first), std::abs(ri.second - rj.second)};
    for (int a : d) {
        const int m = std::min(a, L - a);
        acc += double(m) * double(m);
    }
    return std::sqrt(acc);
}

namespace {

// Number of sites at the minimal nonzero distance (the alpha -> infinity
// coordination count): 4 for L >= 3, 2 for L = 2.
int coordination(const Lattice& lat) {
    int count = 0;
    for (int j = 1; j < lat.N; ++j) {
        const double d = min_image_distance(lat.L, lat.position(0), lat.position(j));
        if (std::abs(d - 1.0) < 1e-12) ++count;
    }
    return count;
}

}  // namespace

double kac_norm(int L, Alpha alpha) {
    if (L < 2) throw std::invalid_argument("kac_norm: L must be >= 2");
    Lattice lat(L);
    if (!alpha.has_value()) return double(coordination(lat));
    if (*alpha < 0.0) throw std::invalid_argument("kac_norm: alpha must be >= 0");
    double acc = 0.0;
    for (int i = 0; i < lat.N; ++i)
        for (int j = 0; j < lat.N; ++j) {
            if (i == j) continue;
            const double d = min_image_distance(L, lat.position(i), lat.position(j));
            acc += std::pow(d, -*alpha);
        }
    return acc / double(lat.N);
}

CouplingMatrix coupling_matrix(const Lattice& lat, Alpha alpha, double J) {
    if (lat.N == 1) return CouplingMatrix{Eigen::MatrixXd::Zero(1, 1), alpha, J};
    const double norm = kac_norm(lat.L, alpha);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(lat.N, lat.N);
    for (int i = 0; i < lat.N; ++i)
        for (int j = 0; j < lat.N; ++j) {
            if (i == j) continue;
            const double d = min_image_distance(lat.L, lat.position(i), lat.position(j));
            if (!alpha.has_value()) {
                if (std::abs(d - 1.0) < 1e-12) m(i, j) = J / norm;
            } else {
                m(i, j) = J / norm * std::pow(d, -*alpha);
            }
        }
    return CouplingMatrix{std::move(m), alpha, J};
}

}  // namespace swqt
