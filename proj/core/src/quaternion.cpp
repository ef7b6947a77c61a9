#include "swqt/quaternion.hpp"

namespace swqt {

Quaternion quat_mul(const Quaternion& a, const Quaternion& b) {
    return {a.r * b.r - a.x * b.x - a.y * b.y - a.z * b.z,
            a.r * b.x + a.x * b.r + a.y * b.z - a.z * b.y,
            a.r * b.y - a.x * b.z + a.y * b.r + a.z * b.x,
            a.r * b.z + a.x * b.y - a.y * b.x + a.z * b.r};
}

Mat3 to_rotation_matrix(const Quaternion& q) {
    const double r = q.r, x = q.x, y = q.y, z = q.z;
    Mat3 m;
    m[0] = {r * r + x * x - y * y - z * z, 2 * (x * y - r * z), 2 * (x * z + r * y)};
    m[1] = {2 * (x * y + r * z), r * r - x * x + y * y - z * z, 2 * (y * z - r * x)};
    m[2] = {2 * (x * z - r * y), 2 * (y * z + r * x), r * r - x * x - y * y + z * z};
    return m;
}

double sinc(double x) {
    if (std::abs(x) < kSincTaylorThreshold) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

Quaternion align_rotation(Complex beta, double s) {
    const Complex bt = beta * std::sqrt(2.0 / s);
    const double a = std::abs(bt);
    const double half_sinc = 0.5 * sinc(0.5 * a);
    return Quaternion{std::cos(0.5 * a), bt.imag() * half_sinc,
                      -bt.real() * half_sinc, 0.0};
}

Quaternion infinitesimal_frame_update(const Quaternion& q, Complex dbeta,
                                      double dbeta_sq, double s) {
    const double scale = std::sqrt(2.0 / s);
    const Complex dbt = dbeta * scale;
    const double dbt_sq = dbeta_sq * scale * scale;
    const Quaternion da{1.0 - dbt_sq / 8.0, 0.5 * dbt.imag(), -0.5 * dbt.real(), 0.0};
    return quat_mul(da, q).normalized();
}

}  // namespace swqt
