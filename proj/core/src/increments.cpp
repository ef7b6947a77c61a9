#include "swqt/increments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace swqt {

using symwick::Block;
using symwick::CompiledTerm;
using symwick::LBL_J;
using symwick::LBL_K;
using symwick::LBL_M;
using symwick::LBL_N;
using symwick::PT_U;
using symwick::PT_UBAR;
using symwick::PT_V;
using symwick::SymPoly;

namespace {

// Normalized view of a compiled term: delta equalities merged into
// representative labels, per-label scalar data split off.
struct NormView {
    std::array<int, 4> rep{};
    std::array<detail::SiteScalar, 4> scal;
    struct Cross {
        int type;
        int a, b;  // representative labels, V oriented a -> row of v
    };
    std::vector<Cross> cross;

    bool merged(int la, int lb) const { return rep[size_t(la)] == rep[size_t(lb)]; }
};

NormView normalize(const CompiledTerm& t) {
    NormView v;
    for (int l = 0; l < 4; ++l) v.rep[size_t(l)] = l;
    // Deltas are sorted pairs; iterate to fixpoint (at most 3 deltas).
    for (int pass = 0; pass < 3; ++pass)
        for (auto [a, b] : t.deltas) {
            const int ra = v.rep[size_t(a)], rb = v.rep[size_t(b)];
            const int r = std::min(ra, rb);
            for (int l = 0; l < 4; ++l)
                if (v.rep[size_t(l)] == ra || v.rep[size_t(l)] == rb) v.rep[size_t(l)] = r;
        }
    for (const auto& lr : t.refs) v.scal[size_t(v.rep[size_t(lr.label)])].refs.push_back(lr.ref);
    for (const auto& p : t.pairs) {
        const int ra = v.rep[size_t(p.a)], rb = v.rep[size_t(p.b)];
        if (ra == rb)
            v.scal[size_t(ra)].local.push_back(p.type);
        else
            v.cross.push_back({p.type, ra, rb});
    }
    for (auto& s : v.scal) {
        std::sort(s.refs.begin(), s.refs.end());
        std::sort(s.local.begin(), s.local.end());
    }
    return v;
}

// Oriented selector for a cross factor read at (row, col) sites bound to the
// given labels.
int oriented(const NormView::Cross& c, int row_label) {
    switch (c.type) {
        case PT_U:
            return OT_U;
        case PT_UBAR:
            return OT_UBAR;
        default:
            return c.a == row_label ? OT_VF : OT_VR;
    }
}

[[noreturn]] void bad_term(const char* where) {
    throw std::logic_error(std::string("symwick classification failed in ") + where);
}

const Eigen::MatrixXcd& bmat(const StepContext& c, int t) { return c.B[size_t(t)]; }

// sigma~ monomial coefficients in the basis 1, b, b+, b+b, b+bb, b+b+b.
constexpr Complex kI{0.0, 1.0};
const std::array<std::array<Complex, 6>, 3> kSigmaTilde = {{
    {Complex(0), Complex(1), Complex(1), Complex(0), Complex(-1), Complex(-1)},
    {Complex(0), -kI, kI, Complex(0), kI, -kI},
    {Complex(1), Complex(0), Complex(0), Complex(-2), Complex(0), Complex(0)},
}};

}  // namespace

StepContext make_step_context(const ModelSpec& model, const CouplingMatrix& coupling,
                              const FrameField& frames, const GaussianMoments& moments) {
    const int n = int(frames.size());
    StepContext c;
    c.n = n;
    c.B[OT_U] = moments.u;
    c.B[OT_UBAR] = moments.u.conjugate();
    c.B[OT_VF] = moments.v;
    c.B[OT_VR] = moments.v.transpose();
    c.J = &coupling.J;
    for (auto& m : c.coeff) m.setZero(n, 6);

    const double amp =
        std::sqrt(model.gamma) * (model.sigma_convention == SigmaConvention::half ? 0.5 : 1.0);
    for (int i = 0; i < n; ++i) {
        const Mat3 M = to_rotation_matrix(frames[size_t(i)]);
        std::array<std::array<Complex, 6>, 3> lab{};  // lab sigma^{x,y,z} coefficients
        for (int axis = 0; axis < 3; ++axis)
            for (int a = 0; a < 3; ++a)
                for (int e = 0; e < 6; ++e)
                    lab[size_t(axis)][size_t(e)] +=
                        M[size_t(a)][size_t(axis)] * kSigmaTilde[size_t(a)][size_t(e)];
        for (int e = 0; e < 6; ++e) {
            c.coeff[ARR_L](i, e) = amp * (lab[0][size_t(e)] - kI * lab[1][size_t(e)]);
            c.coeff[ARR_S](i, e) = lab[size_t(model.drive_axis())][size_t(e)];
            c.coeff[ARR_A](i, e) = lab[size_t(model.interaction_axis())][size_t(e)];
        }
    }
    return c;
}

namespace detail {

Complex SiteScalar::eval(const StepContext& c, int site) const {
    Complex z(1.0, 0.0);
    for (const auto& r : refs) {
        const Complex x = c.coeff[size_t(r.array)](site, r.index);
        z *= r.conj ? std::conj(x) : x;
    }
    for (int t : local) {
        switch (t) {
            case PT_U:
                z *= c.B[OT_U](site, site);
                break;
            case PT_UBAR:
                z *= c.B[OT_UBAR](site, site);
                break;
            default:
                z *= c.B[OT_VF](site, site);
                break;
        }
    }
    return z;
}

int ScalarPool::intern(SiteScalar s) {
    auto key = std::make_pair(s.refs, s.local);
    auto [it, inserted] = index_.try_emplace(std::move(key), int(exprs_.size()));
    if (inserted) exprs_.push_back(std::move(s));
    return it->second;
}

Eigen::MatrixXcd ScalarPool::eval(const StepContext& c) const {
    Eigen::MatrixXcd out(c.n, exprs_.size());
    for (int e = 0; e < int(exprs_.size()); ++e)
        for (int i = 0; i < c.n; ++i) out(i, e) = exprs_[size_t(e)].eval(c, i);
    return out;
}

Eigen::VectorXcd ScalarPool::eval_site(const StepContext& c, int site) const {
    Eigen::VectorXcd out(exprs_.size());
    for (int e = 0; e < int(exprs_.size()); ++e) out(e) = exprs_[size_t(e)].eval(c, site);
    return out;
}

const Eigen::MatrixXcd& HadamardCache::get(const std::vector<int>& types) {
    auto it = cache_.find(types);
    if (it != cache_.end()) return it->second;
    Eigen::MatrixXcd m = c_.J->cast<Complex>();
    for (int t : types) m = m.cwiseProduct(bmat(c_, t));
    return cache_.emplace(types, std::move(m)).first->second;
}

}  // namespace detail

// ---------------------------------------------------------------------------

void LocalVecProgram::add(const std::vector<Block>& blocks, Complex pre) {
    for (const auto& t : symwick::expand(blocks, pre)) {
        NormView v = normalize(t);
        if (!v.cross.empty() || !t.deltas.empty()) bad_term("LocalVecProgram");
        terms_.push_back({t.pre, pool_.intern(std::move(v.scal[LBL_M]))});
    }
}

void LocalVecProgram::eval(const StepContext& c, Eigen::VectorXcd& out) const {
    const Eigen::MatrixXcd S = pool_.eval(c);
    for (const auto& t : terms_) out += t.pre * S.col(t.c);
}

void HamVecProgram::add(const std::vector<Block>& blocks, Complex pre) {
    for (const auto& t : symwick::expand(blocks, pre)) {
        NormView v = normalize(t);
        if (v.merged(LBL_M, LBL_J)) continue;  // J_mm = 0
        Term nt{t.pre, pool_.intern(std::move(v.scal[LBL_M])), pool_.intern(std::move(v.scal[LBL_J])), {}};
        for (const auto& cr : v.cross) nt.mj.push_back(oriented(cr, LBL_M));
        std::sort(nt.mj.begin(), nt.mj.end());
        terms_.push_back(std::move(nt));
    }
}

void HamVecProgram::eval(const StepContext& c, detail::HadamardCache& cache,
                         Eigen::VectorXcd& out) const {
    const Eigen::MatrixXcd S = pool_.eval(c);
    for (const auto& t : terms_)
        out += t.pre * S.col(t.cm).cwiseProduct(cache.get(t.mj) * S.col(t.cj));
}

void Pair2Program::add(const std::vector<Block>& blocks, Complex pre) {
    for (const auto& t : symwick::expand(blocks, pre)) {
        NormView v = normalize(t);
        if (v.merged(LBL_M, LBL_N)) {
            if (!v.cross.empty()) bad_term("Pair2Program");
            terms_.push_back({t.pre, pool_.intern(std::move(v.scal[LBL_M])), -1});
        } else {
            if (v.cross.size() != 1) bad_term("Pair2Program");
            terms_.push_back(
                {t.pre, pool_.intern(std::move(v.scal[LBL_M])), oriented(v.cross[0], LBL_M)});
        }
    }
}

void Pair2Program::eval(const StepContext& c, Eigen::MatrixXcd& out) const {
    const Eigen::MatrixXcd S = pool_.eval(c);
    // Accumulate the scalar weight per selector first so each two-point
    // matrix is touched once, independent of the term count.
    std::array<Eigen::VectorXcd, 4> w;
    std::array<bool, 4> have{};
    Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(c.n);
    for (const auto& t : terms_) {
        if (t.t < 0) {
            diag += t.pre * S.col(t.c);
        } else if (!have[size_t(t.t)]) {
            w[size_t(t.t)] = t.pre * S.col(t.c);
            have[size_t(t.t)] = true;
        } else {
            w[size_t(t.t)] += t.pre * S.col(t.c);
        }
    }
    Eigen::MatrixXcd tmp;
    if (mirrored_) tmp.setZero(c.n, c.n);
    Eigen::MatrixXcd& tgt = mirrored_ ? tmp : out;
    tgt.diagonal() += diag;
    for (int t = 0; t < 4; ++t)
        if (have[size_t(t)]) tgt.noalias() += w[size_t(t)].asDiagonal() * bmat(c, t);
    if (mirrored_) out += tmp.transpose();
}

void Ham4Program::add(const std::vector<Block>& blocks, Complex pre) {
    for (const auto& t : symwick::expand(blocks, pre)) {
        NormView v = normalize(t);
        if (v.merged(LBL_M, LBL_J)) continue;  // J_mm = 0 (covers m=j=n too)
        const bool dmn = v.merged(LBL_M, LBL_N);
        const bool djn = v.merged(LBL_J, LBL_N);
        const int repJ = v.rep[LBL_J];
        Term nt{t.pre, pool_.intern(std::move(v.scal[LBL_M])),
                pool_.intern(std::move(v.scal[size_t(repJ)])), {}, -1, -1};
        for (const auto& cr : v.cross) {
            if (dmn || djn || (cr.a != LBL_N && cr.b != LBL_N)) {
                // With the bare factor pinched by a delta, every cross factor
                // links the block sites m and j.
                nt.mj.push_back(oriented(cr, LBL_M));
            } else {
                const int other = cr.a == LBL_N ? cr.b : cr.a;
                if (nt.kind != -1) bad_term("Ham4Program");
                nt.kind = other == LBL_M ? 0 : 1;
                nt.t = oriented(cr, other);
            }
        }
        if (dmn)
            nt.kind = 2;
        else if (djn)
            nt.kind = 3;
        if (nt.kind == -1) bad_term("Ham4Program");
        std::sort(nt.mj.begin(), nt.mj.end());
        terms_.push_back(std::move(nt));
    }
    regroup();
}

void Ham4Program::regroup() {
    groups_.clear();
    std::map<std::vector<int>, int> index;
    for (int i = 0; i < int(terms_.size()); ++i) {
        auto [it, inserted] = index.try_emplace(terms_[i].mj, int(groups_.size()));
        if (inserted) groups_.push_back({terms_[i].mj, {}});
        groups_[size_t(it->second)].idx.push_back(i);
    }
}

void Ham4Program::eval(const StepContext& c, detail::HadamardCache& cache,
                       Eigen::MatrixXcd& out) const {
    const int n = c.n;
    const Eigen::MatrixXcd S = pool_.eval(c);
    Eigen::MatrixXcd tmp;
    if (mirrored_) tmp.setZero(n, n);
    Eigen::MatrixXcd& tgt = mirrored_ ? tmp : out;
    // Two batching layers keep the cost independent of the term count: every
    // J-kernel contraction runs as one matrix product over the batched scalar
    // columns, and every two-point selector is multiplied in exactly once.
    std::array<Eigen::VectorXcd, 4> wdiag;
    std::array<Eigen::MatrixXcd, 4> mleft;
    std::array<bool, 4> have_w{}, have_m{};
    Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(n);
    Eigen::MatrixXcd cj_cols, contracted, cm_cols, outer;
    for (const auto& g : groups_) {
        const Eigen::MatrixXcd& T = cache.get(g.mj);
        // Contracted kinds (0, 2): weight w_m = cm(m) sum_j T_mj cj(j).
        int nv = 0;
        for (int i : g.idx) {
            const int k = terms_[size_t(i)].kind;
            nv += (k == 0 || k == 2);
        }
        if (nv > 0) {
            cj_cols.resize(n, nv);
            int k = 0;
            for (int i : g.idx) {
                const Term& t = terms_[size_t(i)];
                if (t.kind == 0 || t.kind == 2) cj_cols.col(k++) = S.col(t.cj);
            }
            contracted.noalias() = T * cj_cols;
            k = 0;
            for (int i : g.idx) {
                const Term& t = terms_[size_t(i)];
                if (t.kind != 0 && t.kind != 2) continue;
                Eigen::VectorXcd w = t.pre * S.col(t.cm).cwiseProduct(contracted.col(k++));
                if (t.kind == 2) {
                    diag += w;
                } else if (!have_w[size_t(t.t)]) {
                    wdiag[size_t(t.t)] = std::move(w);
                    have_w[size_t(t.t)] = true;
                } else {
                    wdiag[size_t(t.t)] += w;
                }
            }
        }
        // Outer kinds (1, 3): kernel-masked rank-k products, one product per
        // (kernel, selector) bucket. Bucket 4 holds kind 3 (no selector).
        for (int bucket = 0; bucket < 5; ++bucket) {
            int k = 0;
            for (int i : g.idx) {
                const Term& t = terms_[size_t(i)];
                if ((bucket < 4 && t.kind == 1 && t.t == bucket) || (bucket == 4 && t.kind == 3))
                    ++k;
            }
            if (k == 0) continue;
            cm_cols.resize(n, k);
            cj_cols.resize(n, k);
            k = 0;
            for (int i : g.idx) {
                const Term& t = terms_[size_t(i)];
                if (!((bucket < 4 && t.kind == 1 && t.t == bucket) ||
                      (bucket == 4 && t.kind == 3)))
                    continue;
                cm_cols.col(k) = t.pre * S.col(t.cm);
                cj_cols.col(k) = S.col(t.cj);
                ++k;
            }
            outer.noalias() = cm_cols * cj_cols.transpose();
            if (bucket == 4) {
                tgt += outer.cwiseProduct(T);
            } else if (!have_m[size_t(bucket)]) {
                mleft[size_t(bucket)] = outer.cwiseProduct(T);
                have_m[size_t(bucket)] = true;
            } else {
                mleft[size_t(bucket)] += outer.cwiseProduct(T);
            }
        }
    }
    tgt.diagonal() += diag;
    for (int t = 0; t < 4; ++t) {
        if (have_w[size_t(t)]) tgt.noalias() += wdiag[size_t(t)].asDiagonal() * bmat(c, t);
        if (have_m[size_t(t)]) tgt.noalias() += mleft[size_t(t)] * bmat(c, t);
    }
    if (mirrored_) out += tmp.transpose();
}

void Mat2Program::add(const std::vector<Block>& blocks, Complex pre) {
    for (const auto& t : symwick::expand(blocks, pre)) {
        NormView v = normalize(t);
        if (v.merged(LBL_M, LBL_K)) {
            if (!v.cross.empty()) bad_term("Mat2Program");
            terms_.push_back({t.pre, pool_.intern(std::move(v.scal[LBL_K])), -1});
        } else {
            if (v.cross.size() != 1) bad_term("Mat2Program");
            terms_.push_back(
                {t.pre, pool_.intern(std::move(v.scal[LBL_K])), oriented(v.cross[0], LBL_M)});
        }
    }
}

void Mat2Program::eval(const StepContext& c, Eigen::MatrixXcd& out) const {
    const Eigen::MatrixXcd S = pool_.eval(c);
    std::array<Eigen::VectorXcd, 4> w;
    std::array<bool, 4> have{};
    for (const auto& t : terms_) {
        if (t.t < 0) {
            out.diagonal() += t.pre * S.col(t.c);
        } else if (!have[size_t(t.t)]) {
            w[size_t(t.t)] = t.pre * S.col(t.c);
            have[size_t(t.t)] = true;
        } else {
            w[size_t(t.t)] += t.pre * S.col(t.c);
        }
    }
    for (int t = 0; t < 4; ++t)
        if (have[size_t(t)]) out.noalias() += bmat(c, t) * w[size_t(t)].asDiagonal();
}

void SumVecProgram::add(const std::vector<Block>& blocks, Complex pre) {
    for (const auto& t : symwick::expand(blocks, pre)) {
        NormView v = normalize(t);
        if (v.merged(LBL_M, LBL_K)) {
            if (!v.cross.empty()) bad_term("SumVecProgram");
            terms_.push_back({t.pre, pool_.intern(std::move(v.scal[LBL_K])), -1});
        } else {
            if (v.cross.size() != 1) bad_term("SumVecProgram");
            terms_.push_back(
                {t.pre, pool_.intern(std::move(v.scal[LBL_K])), oriented(v.cross[0], LBL_K)});
        }
    }
}

void SumVecProgram::eval(const StepContext& c, const Eigen::VectorXcd& w,
                         Eigen::VectorXcd& out) const {
    const Eigen::MatrixXcd S = pool_.eval(c);
    std::array<Eigen::VectorXcd, 4> acc;
    std::array<bool, 4> have{};
    for (const auto& t : terms_) {
        if (t.t < 0) {
            out += t.pre * w.cwiseProduct(S.col(t.c));
        } else if (!have[size_t(t.t)]) {
            acc[size_t(t.t)] = t.pre * w.cwiseProduct(S.col(t.c));
            have[size_t(t.t)] = true;
        } else {
            acc[size_t(t.t)] += t.pre * w.cwiseProduct(S.col(t.c));
        }
    }
    for (int t = 0; t < 4; ++t)
        if (have[size_t(t)]) out.noalias() += bmat(c, t).transpose() * acc[size_t(t)];
}

void SumVecProgram::eval_fixed(const StepContext& c, int k, Eigen::VectorXcd& out) const {
    const Eigen::VectorXcd S = pool_.eval_site(c, k);
    for (const auto& t : terms_) {
        if (t.t < 0)
            out(k) += t.pre * S(t.c);
        else
            out += t.pre * S(t.c) * bmat(c, t.t).row(k).transpose();
    }
}

void Sum3Program::add(const std::vector<Block>& blocks, Complex pre) {
    for (const auto& t : symwick::expand(blocks, pre)) {
        NormView v = normalize(t);
        if (v.merged(LBL_M, LBL_N) && !v.merged(LBL_K, LBL_M)) bad_term("Sum3Program");
        const bool km = v.merged(LBL_K, LBL_M);
        const bool kn = v.merged(LBL_K, LBL_N);
        Term nt{t.pre, pool_.intern(std::move(v.scal[LBL_K])), -1, -1, -1};
        if (km && kn) {
            if (!v.cross.empty()) bad_term("Sum3Program");
            nt.kind = 4;
        } else if (km) {
            if (v.cross.size() != 1) bad_term("Sum3Program");
            nt.kind = 2;
            nt.t1 = oriented(v.cross[0], LBL_K);
        } else if (kn) {
            if (v.cross.size() != 1) bad_term("Sum3Program");
            nt.kind = 3;
            nt.t1 = oriented(v.cross[0], LBL_M);
        } else if (v.cross.size() == 2) {
            nt.kind = 0;
            for (const auto& cr : v.cross) {
                const bool to_m = cr.a == LBL_M || cr.b == LBL_M;
                (to_m ? nt.t1 : nt.t2) = oriented(cr, LBL_K);
            }
            if (nt.t1 < 0 || nt.t2 < 0) bad_term("Sum3Program");
        } else if (v.cross.size() == 1) {
            nt.kind = 1;
            nt.t1 = oriented(v.cross[0], LBL_M);
        } else {
            bad_term("Sum3Program");
        }
        terms_.push_back(nt);
    }
}

void Sum3Program::eval(const StepContext& c, const Eigen::VectorXcd& w,
                       Eigen::MatrixXcd& out) const {
    const Eigen::MatrixXcd S = pool_.eval(c);
    std::array<std::array<Eigen::VectorXcd, 4>, 4> acc;
    std::array<std::array<bool, 4>, 4> have{};
    std::array<Complex, 4> full{};
    std::array<Eigen::VectorXcd, 4> left, right;
    std::array<bool, 4> have_l{}, have_r{};
    Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(c.n);
    for (const auto& t : terms_) {
        const Eigen::VectorXcd wc = t.pre * w.cwiseProduct(S.col(t.c));
        switch (t.kind) {
            case 0: {
                auto& a = acc[size_t(t.t1)][size_t(t.t2)];
                if (!have[size_t(t.t1)][size_t(t.t2)]) {
                    a = wc;
                    have[size_t(t.t1)][size_t(t.t2)] = true;
                } else {
                    a += wc;
                }
                break;
            }
            case 1:
                full[size_t(t.t1)] += wc.sum();
                break;
            case 2:
                if (!have_l[size_t(t.t1)]) {
                    left[size_t(t.t1)] = wc;
                    have_l[size_t(t.t1)] = true;
                } else {
                    left[size_t(t.t1)] += wc;
                }
                break;
            case 3:
                if (!have_r[size_t(t.t1)]) {
                    right[size_t(t.t1)] = wc;
                    have_r[size_t(t.t1)] = true;
                } else {
                    right[size_t(t.t1)] += wc;
                }
                break;
            default:
                diag += wc;
                break;
        }
    }
    out.diagonal() += diag;
    for (int t1 = 0; t1 < 4; ++t1) {
        if (full[size_t(t1)] != Complex(0.0, 0.0)) out.noalias() += full[size_t(t1)] * bmat(c, t1);
        if (have_l[size_t(t1)]) out.noalias() += left[size_t(t1)].asDiagonal() * bmat(c, t1);
        if (have_r[size_t(t1)]) out.noalias() += bmat(c, t1) * right[size_t(t1)].asDiagonal();
    }
    // One product pair per occupied row selector: fold the column selectors
    // into a diagonal-scaled sum first.
    for (int t1 = 0; t1 < 4; ++t1) {
        Eigen::MatrixXcd inner;
        bool any = false;
        for (int t2 = 0; t2 < 4; ++t2) {
            if (!have[size_t(t1)][size_t(t2)]) continue;
            if (!any) {
                inner.noalias() = acc[size_t(t1)][size_t(t2)].asDiagonal() * bmat(c, t2);
                any = true;
            } else {
                inner.noalias() += acc[size_t(t1)][size_t(t2)].asDiagonal() * bmat(c, t2);
            }
        }
        if (any) out.noalias() += bmat(c, t1).transpose() * inner;
    }
}

void Sum3Program::eval_fixed(const StepContext& c, int k, Eigen::MatrixXcd& out) const {
    const Eigen::VectorXcd S = pool_.eval_site(c, k);
    std::array<std::array<Complex, 4>, 4> coef{};
    for (const auto& t : terms_) {
        const Complex z = t.pre * S(t.c);
        switch (t.kind) {
            case 0:
                coef[size_t(t.t1)][size_t(t.t2)] += z;
                break;
            case 1:
                out.noalias() += z * bmat(c, t.t1);
                break;
            case 2:
                out.row(k) += z * bmat(c, t.t1).row(k);
                break;
            case 3:
                out.col(k) += z * bmat(c, t.t1).col(k);
                break;
            default:
                out(k, k) += z;
                break;
        }
    }
    for (int t1 = 0; t1 < 4; ++t1)
        for (int t2 = 0; t2 < 4; ++t2) {
            const Complex z = coef[size_t(t1)][size_t(t2)];
            if (z != Complex(0.0, 0.0))
                out.noalias() += z * (bmat(c, t1).row(k).transpose() * bmat(c, t2).row(k));
        }
}

// ---------------------------------------------------------------------------
// Workspace construction: shared symbolic block inventory.

namespace {

struct BlockSet {
    SymPoly L = SymPoly::base(ARR_L);
    SymPoly S = SymPoly::base(ARR_S);
    SymPoly A = SymPoly::base(ARR_A);
    SymPoly Ld = sym_adjoint(L);
    SymPoly dL_dd = sym_deriv_dag(L);
    SymPoly dL_d = sym_deriv(L);
    SymPoly dLd_dd = sym_deriv_dag(Ld);
    SymPoly dLd_d = sym_deriv(Ld);
    SymPoly dS_dd = sym_deriv_dag(S);
    SymPoly dS_d = sym_deriv(S);
    SymPoly dA_dd = sym_deriv_dag(A);
    SymPoly dA_d = sym_deriv(A);
    SymPoly b = SymPoly::bare(false);
    SymPoly bd = SymPoly::bare(true);
};

// Hamiltonian commutator programs shared by both unravelings:
// du: i<[H, b_m b_n]>;  dv: i<[H, b+_m b_n]>.
void build_ham_programs(const BlockSet& bs, const ModelSpec& model, bool dagger_m,
                        Pair2Program& direct, Pair2Program& mirror, Ham4Program& hdirect,
                        Ham4Program& hmirror) {
    const Complex ih = kI * model.h;
    const Complex iz = kI * 2.0 * model.interaction_sign();
    if (!dagger_m) {
        direct.add({{bs.dS_dd, LBL_M}, {bs.b, LBL_N}}, -ih);
        mirror.add({{bs.b, LBL_N}, {bs.dS_dd, LBL_M}}, -ih);
        hdirect.add({{bs.dA_dd, LBL_M}, {bs.A, LBL_J}, {bs.b, LBL_N}}, -iz);
        hmirror.add({{bs.b, LBL_N}, {bs.dA_dd, LBL_M}, {bs.A, LBL_J}}, -iz);
    } else {
        direct.add({{bs.dS_d, LBL_M}, {bs.b, LBL_N}}, ih);
        mirror.add({{bs.bd, LBL_N}, {bs.dS_dd, LBL_M}}, -ih);
        hdirect.add({{bs.dA_d, LBL_M}, {bs.A, LBL_J}, {bs.b, LBL_N}}, iz);
        hmirror.add({{bs.bd, LBL_N}, {bs.dA_dd, LBL_M}, {bs.A, LBL_J}}, -iz);
    }
}

}  // namespace

HeterodyneWorkspace::HeterodyneWorkspace(const ModelSpec& model) {
    const BlockSet bs;
    const Complex half(0.5, 0.0);
    const Complex ih = kI * model.h;
    const Complex iz = kI * 2.0 * model.interaction_sign();

    // dbeta deterministic part: -i<dH/db+_m> + local dissipator.
    beta_local_.add({{bs.dS_dd, LBL_M}}, -ih);
    beta_local_.add({{bs.Ld, LBL_M}, {bs.dL_dd, LBL_M}}, half);
    beta_local_.add({{bs.dLd_dd, LBL_M}, {bs.L, LBL_M}}, -half);
    beta_ham_.add({{bs.dA_dd, LBL_M}, {bs.A, LBL_J}}, -iz);

    cstar_.add({{bs.b, LBL_M}, {bs.L, LBL_K}}, 1.0);
    cplain_.add({{bs.Ld, LBL_K}, {bs.b, LBL_M}}, 1.0);
    l_exp_.add({{bs.L, LBL_M}}, 1.0);

    build_ham_programs(bs, model, false, du_pair_d_, du_pair_m_, du_ham_d_, du_ham_m_);
    build_ham_programs(bs, model, true, dv_pair_d_, dv_pair_m_, dv_ham_d_, dv_ham_m_);

    // Localized dissipator, X = b_m b_n.
    du_pair_m_.add({{bs.Ld, LBL_M}, {bs.b, LBL_N}, {bs.dL_dd, LBL_M}}, half);
    du_pair_d_.add({{bs.Ld, LBL_M}, {bs.dL_dd, LBL_M}, {bs.b, LBL_N}}, half);
    du_pair_m_.add({{bs.b, LBL_N}, {bs.dLd_dd, LBL_M}, {bs.L, LBL_M}}, -half);
    du_pair_d_.add({{bs.dLd_dd, LBL_M}, {bs.b, LBL_N}, {bs.L, LBL_M}}, -half);
    // X = b+_m b_n.
    dv_pair_m_.add({{bs.Ld, LBL_M}, {bs.bd, LBL_N}, {bs.dL_dd, LBL_M}}, half);
    dv_pair_d_.add({{bs.Ld, LBL_M}, {bs.dL_d, LBL_M}, {bs.b, LBL_N}}, -half);
    dv_pair_m_.add({{bs.bd, LBL_N}, {bs.dLd_dd, LBL_M}, {bs.L, LBL_M}}, -half);
    dv_pair_d_.add({{bs.dLd_d, LBL_M}, {bs.b, LBL_N}, {bs.L, LBL_M}}, half);

    du_noise_star_.add({{bs.b, LBL_M}, {bs.b, LBL_N}, {bs.L, LBL_K}}, 1.0);
    du_noise_plain_.add({{bs.Ld, LBL_K}, {bs.b, LBL_M}, {bs.b, LBL_N}}, 1.0);
    dv_noise_star_.add({{bs.bd, LBL_M}, {bs.b, LBL_N}, {bs.L, LBL_K}}, 1.0);
    dv_noise_plain_.add({{bs.Ld, LBL_K}, {bs.bd, LBL_M}, {bs.b, LBL_N}}, 1.0);
}

HeterodyneWorkspace::Increments HeterodyneWorkspace::compute(const StepContext& c,
                                                             const Eigen::VectorXcd& dZ,
                                                             double dt) const {
    const int n = c.n;
    Increments inc;

    Eigen::MatrixXcd Cs = Eigen::MatrixXcd::Zero(n, n);  // <b_m L_k>
    Eigen::MatrixXcd Cp = Eigen::MatrixXcd::Zero(n, n);  // <L+_k b_m>
    cstar_.eval(c, Cs);
    cplain_.eval(c, Cp);

    detail::HadamardCache cache(c);
    Eigen::VectorXcd det = Eigen::VectorXcd::Zero(n);
    beta_local_.eval(c, det);
    beta_ham_.eval(c, cache, det);
    const Eigen::VectorXcd dZc = dZ.conjugate();
    inc.dbeta = det * dt + Cs * dZc + Cp * dZ;
    inc.dbeta_sq = (Cs.cwiseAbs2().rowwise().sum() + Cp.cwiseAbs2().rowwise().sum()) * dt;

    Eigen::MatrixXcd ddet = Eigen::MatrixXcd::Zero(n, n);
    du_pair_d_.eval(c, ddet);
    du_pair_m_.eval(c, ddet);
    du_ham_d_.eval(c, cache, ddet);
    du_ham_m_.eval(c, cache, ddet);
    ddet.noalias() -= Cs * Cp.transpose() + Cp * Cs.transpose();  // Ito recentring
    inc.du = ddet * dt;
    du_noise_star_.eval(c, dZc, inc.du);
    du_noise_plain_.eval(c, dZ, inc.du);

    ddet.setZero();
    dv_pair_d_.eval(c, ddet);
    dv_pair_m_.eval(c, ddet);
    dv_ham_d_.eval(c, cache, ddet);
    dv_ham_m_.eval(c, cache, ddet);
    ddet.noalias() -= Cp.conjugate() * Cp.transpose() + Cs.conjugate() * Cs.transpose();
    inc.dv = ddet * dt;
    dv_noise_star_.eval(c, dZc, inc.dv);
    dv_noise_plain_.eval(c, dZ, inc.dv);

    // Mean subtraction in the noise superoperator.
    Eigen::VectorXcd lk = Eigen::VectorXcd::Zero(n);
    l_exp_.eval(c, lk);
    const Complex s = dZc.cwiseProduct(lk).sum() + dZ.cwiseProduct(lk.conjugate()).sum();
    inc.du -= s * c.B[OT_U];
    inc.dv -= s * c.B[OT_VF];
    return inc;
}

QJumpWorkspace::QJumpWorkspace(const ModelSpec& model) {
    const BlockSet bs;
    const Complex half(0.5, 0.0);
    const Complex ih = kI * model.h;
    const Complex iz = kI * 2.0 * model.interaction_sign();

    rate_.add({{bs.Ld, LBL_M}, {bs.L, LBL_M}}, 1.0);

    beta_local_.add({{bs.dS_dd, LBL_M}}, -ih);
    beta_ham_.add({{bs.dA_dd, LBL_M}, {bs.A, LBL_J}}, -iz);
    beta_diss_.add({{bs.Ld, LBL_K}, {bs.L, LBL_K}, {bs.b, LBL_M}}, -half);
    beta_diss_.add({{bs.b, LBL_M}, {bs.Ld, LBL_K}, {bs.L, LBL_K}}, -half);

    build_ham_programs(bs, model, false, du_pair_d_, du_pair_m_, du_ham_d_, du_ham_m_);
    build_ham_programs(bs, model, true, dv_pair_d_, dv_pair_m_, dv_ham_d_, dv_ham_m_);

    du_anti_.add({{bs.Ld, LBL_K}, {bs.L, LBL_K}, {bs.b, LBL_M}, {bs.b, LBL_N}}, -half);
    du_anti_.add({{bs.b, LBL_M}, {bs.b, LBL_N}, {bs.Ld, LBL_K}, {bs.L, LBL_K}}, -half);
    dv_anti_.add({{bs.Ld, LBL_K}, {bs.L, LBL_K}, {bs.bd, LBL_M}, {bs.b, LBL_N}}, -half);
    dv_anti_.add({{bs.bd, LBL_M}, {bs.b, LBL_N}, {bs.Ld, LBL_K}, {bs.L, LBL_K}}, -half);

    jump_beta_.add({{bs.Ld, LBL_K}, {bs.b, LBL_M}, {bs.L, LBL_K}}, 1.0);
    jump_u_.add({{bs.Ld, LBL_K}, {bs.b, LBL_M}, {bs.b, LBL_N}, {bs.L, LBL_K}}, 1.0);
    jump_v_.add({{bs.Ld, LBL_K}, {bs.bd, LBL_M}, {bs.b, LBL_N}, {bs.L, LBL_K}}, 1.0);
}

Eigen::VectorXd QJumpWorkspace::rates(const StepContext& c) const {
    Eigen::VectorXcd r = Eigen::VectorXcd::Zero(c.n);
    rate_.eval(c, r);
    return r.real();
}

QJumpWorkspace::Rhs QJumpWorkspace::rhs(const StepContext& c) const {
    const int n = c.n;
    Rhs out;
    const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(n);
    const Eigen::VectorXd r = rates(c);
    const double rtot = r.sum();
    out.loglambda_dot = -rtot;

    detail::HadamardCache cache(c);
    out.bdot = Eigen::VectorXcd::Zero(n);
    beta_local_.eval(c, out.bdot);
    beta_ham_.eval(c, cache, out.bdot);
    beta_diss_.eval(c, ones, out.bdot);

    out.udot = Eigen::MatrixXcd::Zero(n, n);
    du_pair_d_.eval(c, out.udot);
    du_pair_m_.eval(c, out.udot);
    du_ham_d_.eval(c, cache, out.udot);
    du_ham_m_.eval(c, cache, out.udot);
    du_anti_.eval(c, ones, out.udot);
    out.udot += rtot * c.B[OT_U];

    out.vdot = Eigen::MatrixXcd::Zero(n, n);
    dv_pair_d_.eval(c, out.vdot);
    dv_pair_m_.eval(c, out.vdot);
    dv_ham_d_.eval(c, cache, out.vdot);
    dv_ham_m_.eval(c, cache, out.vdot);
    dv_anti_.eval(c, ones, out.vdot);
    out.vdot += rtot * c.B[OT_VF];
    return out;
}

QJumpWorkspace::JumpMoments QJumpWorkspace::jump_moments(const StepContext& c, int k) const {
    const int n = c.n;
    JumpMoments jm;
    jm.rate = rates(c)(k);
    jm.beta = Eigen::VectorXcd::Zero(n);
    jump_beta_.eval_fixed(c, k, jm.beta);
    jm.beta /= jm.rate;
    jm.u = Eigen::MatrixXcd::Zero(n, n);
    jump_u_.eval_fixed(c, k, jm.u);
    jm.u /= jm.rate;
    jm.u -= jm.beta * jm.beta.transpose();
    jm.v = Eigen::MatrixXcd::Zero(n, n);
    jump_v_.eval_fixed(c, k, jm.v);
    jm.v /= jm.rate;
    jm.v -= jm.beta.conjugate() * jm.beta.transpose();
    return jm;
}

}  // namespace swqt
