#include "swqt/wick.hpp"

namespace swqt {

Complex contract(const LadderFactor& a, const LadderFactor& b, const GaussianMoments& m) {
    if (!a.dagger && !b.dagger) return m.u(a.site, b.site);
    if (a.dagger && b.dagger) return std::conj(m.u(a.site, b.site));
    if (a.dagger && !b.dagger) return m.v(a.site, b.site);
    // <b_i b+_j> = delta_ij + v_ji
    Complex val = m.v(b.site, a.site);
    if (a.site == b.site) val += 1.0;
    return val;
}

namespace {

Complex wick(const std::vector<LadderFactor>& f, std::vector<char>& used, size_t first,
             size_t remaining, const GaussianMoments& m) {
    if (remaining == 0) return 1.0;
    while (used[first]) ++first;
    Complex acc = 0.0;
    used[first] = 1;
    for (size_t j = first + 1; j < f.size(); ++j) {
        if (used[j]) continue;
        const Complex c = contract(f[first], f[j], m);
        if (c == 0.0) continue;
        used[j] = 1;
        acc += c * wick(f, used, first + 1, remaining - 2, m);
        used[j] = 0;
    }
    used[first] = 0;
    return acc;
}

}  // namespace

Complex gaussian_expectation(const OperatorPolynomial& p, const GaussianMoments& m) {
    Complex acc = 0.0;
    for (const auto& t : p.terms) {
        if (t.factors.empty()) {
            acc += t.coeff;
            continue;
        }
        if (t.factors.size() % 2 != 0) continue;  // odd moments vanish at zero mean
        std::vector<char> used(t.factors.size(), 0);
        acc += t.coeff * wick(t.factors, used, 0, t.factors.size(), m);
    }
    return acc;
}

}  // namespace swqt
