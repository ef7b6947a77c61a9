#include "swqt/poly.hpp"

#include <algorithm>
#include <map>

namespace swqt {

OperatorPolynomial& OperatorPolynomial::operator+=(const OperatorPolynomial& other) {
    terms.insert(terms.end(), other.terms.begin(), other.terms.end());
    return *this;
}

OperatorPolynomial& OperatorPolynomial::operator*=(Complex c) {
    for (auto& t : terms) t.coeff *= c;
    return *this;
}

OperatorPolynomial multiply(const OperatorPolynomial& p1, const OperatorPolynomial& p2) {
    OperatorPolynomial out;
    out.terms.reserve(p1.terms.size() * p2.terms.size());
    for (const auto& a : p1.terms)
        for (const auto& b : p2.terms) {
            OperatorPolynomial::Term t;
            t.coeff = a.coeff * b.coeff;
            t.factors = a.factors;
            t.factors.insert(t.factors.end(), b.factors.begin(), b.factors.end());
            out.terms.push_back(std::move(t));
        }
    return out;
}

OperatorPolynomial adjoint(const OperatorPolynomial& p) {
    OperatorPolynomial out;
    out.terms.reserve(p.terms.size());
    for (const auto& t : p.terms) {
        OperatorPolynomial::Term a;
        a.coeff = std::conj(t.coeff);
        a.factors.assign(t.factors.rbegin(), t.factors.rend());
        for (auto& f : a.factors) f.dagger = !f.dagger;
        out.terms.push_back(std::move(a));
    }
    return out;
}

OperatorPolynomial simplified(const OperatorPolynomial& p) {
    std::map<std::vector<std::pair<int, bool>>, Complex> merged;
    for (const auto& t : p.terms) {
        std::vector<std::pair<int, bool>> key;
        key.reserve(t.factors.size());
        for (const auto& f : t.factors) key.emplace_back(f.site, f.dagger);
        merged[key] += t.coeff;
    }
    OperatorPolynomial out;
    for (const auto& [key, c] : merged) {
        if (std::abs(c) < kTermPruneTolerance) continue;
        OperatorPolynomial::Term t;
        t.coeff = c;
        for (const auto& [site, dag] : key) t.factors.push_back({site, dag});
        out.terms.push_back(std::move(t));
    }
    return out;
}

namespace {

OperatorPolynomial derivative_impl(const OperatorPolynomial& p, int site, bool dagger) {
    OperatorPolynomial out;
    for (const auto& t : p.terms) {
        for (size_t k = 0; k < t.factors.size(); ++k) {
            if (t.factors[k].site != site || t.factors[k].dagger != dagger) continue;
            OperatorPolynomial::Term d;
            d.coeff = t.coeff;
            d.factors = t.factors;
            d.factors.erase(d.factors.begin() + long(k));
            out.terms.push_back(std::move(d));
        }
    }
    return out;
}

}  // namespace

OperatorPolynomial derivative_dag(const OperatorPolynomial& p, int site) {
    return derivative_impl(p, site, true);
}

OperatorPolynomial derivative(const OperatorPolynomial& p, int site) {
    return derivative_impl(p, site, false);
}

}  // namespace swqt
