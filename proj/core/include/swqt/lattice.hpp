#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace swqt {

/// Periodic L x L square lattice. Site index i maps to the position
/// (1 + i % L, 1 + i / L).
struct Lattice {
    int L;
    int N;

    explicit Lattice(int linear_size) : L(linear_size), N(linear_size * linear_size) {
        if (linear_size < 1) throw std::invalid_argument("lattice: L must be >= 1");
    }

    std::pair<int, int> position(int i) const { return {1 + i % L, 1 + i / L}; }

    int site(int rx, int ry) const { return (rx - 1) + (ry - 1) * L; }
};

/// Interaction exponent; nullopt encodes alpha = infinity (nearest neighbor).
using Alpha = std::optional<double>;
inline constexpr std::nullopt_t alpha_infinity = std::nullopt;

/// Euclidean distance under minimum-image periodic boundary conditions.
double min_image_distance(int L, std::pair<int, int> ri, std::pair<int, int> rj);

/// Kac normalization N_alpha = (1/N) sum_{i != j} |r_i - r_j|^-alpha.
/// For alpha = infinity returns the nearest-neighbor coordination count.
double kac_norm(int L, Alpha alpha);

/// Kac-normalized coupling matrix J_ij = (J / N_alpha) |r_i - r_j|^-alpha,
/// zero diagonal; alpha = infinity gives J/4 on nearest-neighbor pairs (L >= 3).
struct CouplingMatrix {
    Eigen::MatrixXd J;
    Alpha alpha;
    double scale;  // overall J: each row sums to this
};

CouplingMatrix coupling_matrix(const Lattice& lat, Alpha alpha, double J);

}  // namespace swqt
