#pragma once

#include <complex>
#include <utility>
#include <vector>

namespace swqt::symwick {

using Complex = std::complex<double>;

// Abstract site labels used in compiled contraction formulas.
// K: summed channel site; M, N: output row/column sites; J: coupling partner.
inline constexpr int LBL_K = 0;
inline constexpr int LBL_M = 1;
inline constexpr int LBL_N = 2;
inline constexpr int LBL_J = 3;

/// Reference into a runtime per-site coefficient table: coeff[array](site, index).
struct CoeffRef {
    int array;
    int index;
    bool conj;

    auto operator<=>(const CoeffRef&) const = default;
};

/// Single-site symbolic polynomial: sum of (prefactor * coeff-refs * word),
/// where word is the ordered dagger pattern of ladder factors at the site.
struct SymPoly {
    struct Term {
        Complex pre;
        std::vector<CoeffRef> refs;
        std::vector<bool> word;  // true = dagger
    };
    std::vector<Term> terms;

    /// Monomial basis e0..e5 = 1, b, b+, b+b, b+bb, b+b+b with coefficients
    /// referenced from the given runtime array.
    static SymPoly base(int array);
    /// A single bare ladder factor with unit coefficient.
    static SymPoly bare(bool dagger);
};

SymPoly sym_adjoint(const SymPoly& p);
SymPoly sym_deriv_dag(const SymPoly& p);  // d/d(b+), in-place factor removal
SymPoly sym_deriv(const SymPoly& p);      // d/d(b)

// Two-point factor types. U and UBAR are symmetric in (a,b); V is ordered:
// V(a,b) = <b+_a b_b> = v_ab.
inline constexpr int PT_U = 0;
inline constexpr int PT_UBAR = 1;
inline constexpr int PT_V = 2;

struct PairFactor {
    int type;
    int a, b;  // labels

    auto operator<=>(const PairFactor&) const = default;
};

struct LabeledRef {
    CoeffRef ref;
    int label;

    auto operator<=>(const LabeledRef&) const = default;
};

/// One contraction formula term: pre * prod(refs) * prod(pair factors),
/// contributing only where every delta label equality holds.
struct CompiledTerm {
    Complex pre;
    std::vector<LabeledRef> refs;
    std::vector<PairFactor> pairs;
    std::vector<std::pair<int, int>> deltas;  // label pairs, first < second
};

struct Block {
    SymPoly poly;
    int label;
};

/// Ordered Wick expansion of <prod blocks> for a zero-mean Gaussian state,
/// fully symbolic; identical terms are merged and negligible ones dropped.
std::vector<CompiledTerm> expand(const std::vector<Block>& blocks, Complex prefactor);

}  // namespace swqt::symwick
