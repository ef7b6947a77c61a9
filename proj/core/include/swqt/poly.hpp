#pragma once

#include <complex>
#include <vector>

namespace swqt {

using Complex = std::complex<double>;

/// One bosonic ladder operator b_site (dagger = false) or b^dag_site.
struct LadderFactor {
    int site;
    bool dagger;

    bool operator==(const LadderFactor&) const = default;
};

/// Sum of coefficient-weighted ordered monomials in ladder operators.
/// Factor order is significant; no normal ordering is ever applied.
struct OperatorPolynomial {
    struct Term {
        Complex coeff;
        std::vector<LadderFactor> factors;
    };
    std::vector<Term> terms;

    static OperatorPolynomial constant(Complex c) {
        return OperatorPolynomial{{{c, {}}}};
    }

    OperatorPolynomial& operator+=(const OperatorPolynomial& other);
    OperatorPolynomial& operator*=(Complex c);
};

inline constexpr double kTermPruneTolerance = 1e-14;

/// Term-by-term concatenation of factor sequences; no reordering.
OperatorPolynomial multiply(const OperatorPolynomial& p1, const OperatorPolynomial& p2);

/// Reverse factors, toggle daggers, conjugate coefficients.
OperatorPolynomial adjoint(const OperatorPolynomial& p);

/// Merge identical factor sequences and drop |coeff| < kTermPruneTolerance.
OperatorPolynomial simplified(const OperatorPolynomial& p);

/// In-place derivative with respect to b^dag_site: for every matching factor
/// occurrence, remove it keeping positions of the rest. Satisfies
/// [b_site, P] = dP/d(b^dag_site).
OperatorPolynomial derivative_dag(const OperatorPolynomial& p, int site);

/// In-place derivative with respect to b_site; [b^dag_site, P] = -dP/d(b_site).
OperatorPolynomial derivative(const OperatorPolynomial& p, int site);

}  // namespace swqt
