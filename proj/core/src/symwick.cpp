#include "swqt/symwick.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace swqt::symwick {

namespace {
constexpr double kPrune = 1e-14;
}

SymPoly SymPoly::base(int array) {
    static const std::vector<std::vector<bool>> words = {
        {}, {false}, {true}, {true, false}, {true, false, false}, {true, true, false}};
    SymPoly p;
    for (int i = 0; i < 6; ++i)
        p.terms.push_back({Complex(1.0, 0.0), {CoeffRef{array, i, false}}, words[i]});
    return p;
}

SymPoly SymPoly::bare(bool dagger) {
    SymPoly p;
    p.terms.push_back({Complex(1.0, 0.0), {}, {dagger}});
    return p;
}

SymPoly sym_adjoint(const SymPoly& p) {
    SymPoly out;
    for (const auto& t : p.terms) {
        SymPoly::Term nt;
        nt.pre = std::conj(t.pre);
        nt.refs = t.refs;
        for (auto& r : nt.refs) r.conj = !r.conj;
        nt.word.assign(t.word.rbegin(), t.word.rend());
        for (auto&& f : nt.word) f = !f;
        out.terms.push_back(std::move(nt));
    }
    return out;
}

namespace {

SymPoly deriv_impl(const SymPoly& p, bool wrt_dagger) {
    SymPoly out;
    for (const auto& t : p.terms) {
        for (std::size_t i = 0; i < t.word.size(); ++i) {
            if (t.word[i] != wrt_dagger) continue;
            SymPoly::Term nt;
            nt.pre = t.pre;
            nt.refs = t.refs;
            nt.word = t.word;
            nt.word.erase(nt.word.begin() + static_cast<std::ptrdiff_t>(i));
            out.terms.push_back(std::move(nt));
        }
    }
    return out;
}

struct Factor {
    int label;
    bool dagger;
};

struct Builder {
    Complex pre;
    std::vector<LabeledRef> refs;
    std::vector<PairFactor> pairs;
    std::vector<std::pair<int, int>> deltas;
    std::vector<CompiledTerm>* out;

    void emit() {
        CompiledTerm t{pre, refs, pairs, deltas};
        std::sort(t.refs.begin(), t.refs.end());
        std::sort(t.pairs.begin(), t.pairs.end());
        std::sort(t.deltas.begin(), t.deltas.end());
        out->push_back(std::move(t));
    }

    void recurse(std::vector<Factor>& f, std::vector<bool>& used, std::size_t first) {
        while (first < f.size() && used[first]) ++first;
        if (first == f.size()) {
            emit();
            return;
        }
        used[first] = true;
        for (std::size_t j = first + 1; j < f.size(); ++j) {
            if (used[j]) continue;
            used[j] = true;
            const Factor a = f[first];
            const Factor b = f[j];
            auto push_pair = [&](int type, int la, int lb) {
                if (type != PT_V && la > lb) std::swap(la, lb);
                pairs.push_back({type, la, lb});
                recurse(f, used, first + 1);
                pairs.pop_back();
            };
            if (!a.dagger && !b.dagger) {
                push_pair(PT_U, a.label, b.label);
            } else if (a.dagger && b.dagger) {
                push_pair(PT_UBAR, a.label, b.label);
            } else if (a.dagger && !b.dagger) {
                push_pair(PT_V, a.label, b.label);
            } else {
                // <b_a b+_b> = delta_ab + v_ba: two branches.
                push_pair(PT_V, b.label, a.label);
                if (a.label == b.label) {
                    recurse(f, used, first + 1);
                } else {
                    deltas.emplace_back(std::min(a.label, b.label), std::max(a.label, b.label));
                    recurse(f, used, first + 1);
                    deltas.pop_back();
                }
            }
            used[j] = false;
        }
        used[first] = false;
    }
};

}  // namespace

SymPoly sym_deriv_dag(const SymPoly& p) { return deriv_impl(p, true); }
SymPoly sym_deriv(const SymPoly& p) { return deriv_impl(p, false); }

std::vector<CompiledTerm> expand(const std::vector<Block>& blocks, Complex prefactor) {
    std::vector<CompiledTerm> raw;
    for (const auto& b : blocks)
        if (b.poly.terms.empty()) return {};

    // Cartesian product over block terms, then all pairings of each monomial.
    std::vector<std::size_t> pick(blocks.size(), 0);
    for (;;) {
        Complex pre = prefactor;
        std::vector<LabeledRef> refs;
        std::vector<Factor> factors;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const auto& t = blocks[b].poly.terms[pick[b]];
            pre *= t.pre;
            for (const auto& r : t.refs) refs.push_back({r, blocks[b].label});
            for (bool d : t.word) factors.push_back({blocks[b].label, d});
        }
        if (factors.size() % 2 == 0 && std::abs(pre) > kPrune) {
            Builder bl{pre, std::move(refs), {}, {}, &raw};
            std::vector<bool> used(factors.size(), false);
            bl.recurse(factors, used, 0);
        }
        // advance multi-index
        std::size_t b = 0;
        for (; b < blocks.size(); ++b) {
            if (++pick[b] < blocks[b].poly.terms.size()) break;
            pick[b] = 0;
        }
        if (b == blocks.size()) break;
    }

    // Merge identical structures.
    std::map<std::tuple<std::vector<LabeledRef>, std::vector<PairFactor>,
                        std::vector<std::pair<int, int>>>,
             Complex>
        merged;
    for (auto& t : raw)
        merged[{std::move(t.refs), std::move(t.pairs), std::move(t.deltas)}] += t.pre;

    std::vector<CompiledTerm> out;
    for (auto& [key, pre] : merged) {
        if (std::abs(pre) <= kPrune) continue;
        out.push_back({pre, std::get<0>(key), std::get<1>(key), std::get<2>(key)});
    }
    return out;
}

}  // namespace swqt::symwick
