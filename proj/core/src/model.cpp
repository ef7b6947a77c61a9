#include "swqt/model.hpp"

#include <cmath>
#include <stdexcept>

namespace swqt {

namespace {

const Complex kI{0.0, 1.0};

OperatorPolynomial sigma_tilde_plus(int site) {
    // 2(1 - b^dag b) b = 2b - 2 b^dag b b
    OperatorPolynomial p;
    p.terms.push_back({2.0, {{site, false}}});
    p.terms.push_back({-2.0, {{site, true}, {site, false}, {site, false}}});
    return p;
}

OperatorPolynomial sigma_tilde_minus(int site) {
    // 2 b^dag (1 - b^dag b) = 2b^dag - 2 b^dag b^dag b
    OperatorPolynomial p;
    p.terms.push_back({2.0, {{site, true}}});
    p.terms.push_back({-2.0, {{site, true}, {site, true}, {site, false}}});
    return p;
}

}  // namespace

OperatorPolynomial comoving_sigma_tilde(int site, int axis) {
    OperatorPolynomial p;
    switch (axis) {
        case 0: {
            p = sigma_tilde_plus(site);
            p += sigma_tilde_minus(site);
            p *= 0.5;
            return p;
        }
        case 1: {
            p = sigma_tilde_plus(site);
            OperatorPolynomial m = sigma_tilde_minus(site);
            m *= -1.0;
            p += m;
            p *= 1.0 / (2.0 * kI);
            return p;
        }
        case 2: {
            p.terms.push_back({1.0, {}});
            p.terms.push_back({-2.0, {{site, true}, {site, false}}});
            return p;
        }
        default:
            throw std::invalid_argument("comoving_sigma_tilde: axis must be 0, 1 or 2");
    }
}

OperatorPolynomial comoving_spin_polynomial(int site, int axis, const Quaternion& q) {
    const Mat3 m = to_rotation_matrix(q);
    OperatorPolynomial out;
    for (int a = 0; a < 3; ++a) {
        if (std::abs(m[a][axis]) < kTermPruneTolerance) continue;
        OperatorPolynomial p = comoving_sigma_tilde(site, a);
        p *= m[a][axis];
        out += p;
    }
    return simplified(out);
}

OperatorPolynomial hamiltonian_polynomial(const ModelSpec& spec, const CouplingMatrix& cm,
                                          const FrameField& frames) {
    const int n = spec.lattice.N;
    if (int(frames.size()) != n)
        throw std::invalid_argument("hamiltonian_polynomial: frames size mismatch");
    OperatorPolynomial h;
    for (int i = 0; i < n; ++i) {
        OperatorPolynomial drive = comoving_spin_polynomial(i, spec.drive_axis(), frames[i]);
        drive *= spec.h;
        h += drive;
    }
    const double sign = spec.interaction_sign();
    for (int i = 0; i < n; ++i) {
        OperatorPolynomial ai = comoving_spin_polynomial(i, spec.interaction_axis(), frames[i]);
        for (int j = i + 1; j < n; ++j) {
            const double jij = cm.J(i, j);
            if (jij == 0.0) continue;
            OperatorPolynomial aj =
                comoving_spin_polynomial(j, spec.interaction_axis(), frames[j]);
            OperatorPolynomial pair = multiply(ai, aj);
            pair *= sign * 2.0 * jij;  // both (i,j) orderings
            h += pair;
        }
    }
    return simplified(h);
}

OperatorPolynomial jump_polynomial(int site, const ModelSpec& spec, const Quaternion& q) {
    OperatorPolynomial sx = comoving_spin_polynomial(site, 0, q);
    OperatorPolynomial sy = comoving_spin_polynomial(site, 1, q);
    sy *= -kI;
    sx += sy;
    double amp = std::sqrt(spec.gamma);
    if (spec.sigma_convention == SigmaConvention::half) amp *= 0.5;
    sx *= amp;
    return simplified(sx);
}

}  // namespace swqt
