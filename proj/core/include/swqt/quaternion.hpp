#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace swqt {

using Complex = std::complex<double>;

/// Unit quaternion (q_r, q_x, q_y, q_z) encoding a rotation of angle theta
/// about axis n via (cos(theta/2), n sin(theta/2)). The identity is (1,0,0,0).
struct Quaternion {
    double r = 1.0, x = 0.0, y = 0.0, z = 0.0;

    static Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }

    double norm() const { return std::sqrt(r * r + x * x + y * y + z * z); }

    Quaternion normalized() const {
        const double n = norm();
        return {r / n, x / n, y / n, z / n};
    }

    Quaternion conjugate() const { return {r, -x, -y, -z}; }
};

/// Hamilton product a*b; composition of rotations (a after b).
Quaternion quat_mul(const Quaternion& a, const Quaternion& b);

/// 3x3 rotation matrix of the quaternion, row-major; M[a][b] with rows
/// indexed by the rotated (tilde) axes: s~_a = sum_b M[a][b] s_b.
using Mat3 = std::array<std::array<double, 3>, 3>;
Mat3 to_rotation_matrix(const Quaternion& q);

/// sin(x)/x with a Taylor branch below kSincTaylorThreshold.
inline constexpr double kSincTaylorThreshold = 1e-4;
double sinc(double x);

/// Alignment rotation R(beta) removing a first moment beta acquired in the
/// comoving frame: axis in the x~y~ plane, angle |beta~| with
/// beta~ = beta*sqrt(2/s). Approaches the identity as beta -> 0.
Quaternion align_rotation(Complex beta, double s);

/// One transport update Q <- normalize((1 + dA) Q) with
/// dA = (-|dbeta~|^2/8, Im(dbeta~)/2, -Re(dbeta~)/2, 0). The caller passes
/// the Ito-reduced value of |dbeta~|^2 (noise squares already replaced by dt
/// terms) through dbeta_sq.
Quaternion infinitesimal_frame_update(const Quaternion& q, Complex dbeta,
                                      double dbeta_sq, double s);

}  // namespace swqt
