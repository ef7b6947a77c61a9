#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <vector>

#include "swqt/gaussian_state.hpp"
#include "swqt/model.hpp"
#include "swqt/symwick.hpp"

namespace swqt {

// Oriented two-point selectors: entry (r,c) of B[OT_U] = u, B[OT_UBAR] =
// conj(u), B[OT_VF] = v, B[OT_VR] = v^T.
inline constexpr int OT_U = 0;
inline constexpr int OT_UBAR = 1;
inline constexpr int OT_VF = 2;
inline constexpr int OT_VR = 3;

// Runtime coefficient array ids (see make_step_context).
inline constexpr int ARR_L = 0;  // jump operator
inline constexpr int ARR_S = 1;  // drive-axis spin
inline constexpr int ARR_A = 2;  // interaction-axis spin

/// Dense per-step data every compiled program evaluates against.
struct StepContext {
    int n = 0;
    std::array<Eigen::MatrixXcd, 4> B;
    std::array<Eigen::MatrixXcd, 3> coeff;  // (n x 6) monomial coefficients per site
    const Eigen::MatrixXd* J = nullptr;
};

StepContext make_step_context(const ModelSpec& model, const CouplingMatrix& coupling,
                              const FrameField& frames, const GaussianMoments& moments);

namespace detail {

/// Product of coefficient references and same-site pair factors, evaluated at
/// one bound site index.
struct SiteScalar {
    std::vector<symwick::CoeffRef> refs;
    std::vector<int> local;  // PT_* at (site, site)

    Complex eval(const StepContext& c, int site) const;
};

/// Interned scalar expressions, evaluated for all sites in one pass per step.
class ScalarPool {
  public:
    int intern(SiteScalar s);
    int size() const { return int(exprs_.size()); }
    /// (n x size) matrix, column per expression.
    Eigen::MatrixXcd eval(const StepContext& c) const;
    /// All expressions at one site.
    Eigen::VectorXcd eval_site(const StepContext& c, int site) const;

  private:
    std::vector<SiteScalar> exprs_;
    std::map<std::pair<std::vector<symwick::CoeffRef>, std::vector<int>>, int> index_;
};

/// Per-evaluation cache of J .* prod(B[t]) Hadamard products keyed by the
/// sorted selector list.
class HadamardCache {
  public:
    HadamardCache(const StepContext& c) : c_(c) {}
    const Eigen::MatrixXcd& get(const std::vector<int>& types);

  private:
    const StepContext& c_;
    std::map<std::vector<int>, Eigen::MatrixXcd> cache_;
};

}  // namespace detail

/// Q_m += <blocks all at site m>.
class LocalVecProgram {
  public:
    void add(const std::vector<symwick::Block>& blocks, Complex pre);
    void eval(const StepContext& c, Eigen::VectorXcd& out) const;

  private:
    struct Term {
        Complex pre;
        int c;
    };
    detail::ScalarPool pool_;
    std::vector<Term> terms_;
};

/// Q_m += sum_j J_mj <blocks at m and j>.
class HamVecProgram {
  public:
    void add(const std::vector<symwick::Block>& blocks, Complex pre);
    void eval(const StepContext& c, detail::HadamardCache& cache, Eigen::VectorXcd& out) const;

  private:
    struct Term {
        Complex pre;
        int cm, cj;
        std::vector<int> mj;  // oriented (m, j), sorted
    };
    detail::ScalarPool pool_;
    std::vector<Term> terms_;
};

/// Q_mn += <blocks at row site, one bare factor at column site>; with
/// mirrored = true the compiled matrix is transposed into the output, for
/// quantities whose operator blocks sit at the column site.
class Pair2Program {
  public:
    explicit Pair2Program(bool mirrored) : mirrored_(mirrored) {}
    void add(const std::vector<symwick::Block>& blocks, Complex pre);
    void eval(const StepContext& c, Eigen::MatrixXcd& out) const;

  private:
    bool mirrored_;
    detail::ScalarPool pool_;
    struct Term {
        Complex pre;
        int c;
        int t;  // -1: diagonal (column pinched onto row)
    };
    std::vector<Term> terms_;
};

/// Q_mn += sum_j J_mj <blocks at m (label M) and j (label J), bare at n>;
/// mirrored as in Pair2Program. Terms pinching j onto m are dropped (J_mm = 0).
class Ham4Program {
  public:
    explicit Ham4Program(bool mirrored) : mirrored_(mirrored) {}
    void add(const std::vector<symwick::Block>& blocks, Complex pre);
    void eval(const StepContext& c, detail::HadamardCache& cache, Eigen::MatrixXcd& out) const;

  private:
    bool mirrored_;
    detail::ScalarPool pool_;
    struct Term {
        Complex pre;
        int cm, cj;
        std::vector<int> mj;  // oriented (m, j), sorted
        int kind;             // 0: factor (m,n); 1: factor (j,n); 2: n == m; 3: n == j
        int t;                // oriented type for kinds 0/1
    };
    std::vector<Term> terms_;
    // Terms batched by J-kernel so each kernel contraction is one matrix
    // product at evaluation time; rebuilt at the end of every add().
    struct Group {
        std::vector<int> mj;
        std::vector<int> idx;
    };
    std::vector<Group> groups_;
    void regroup();
};

/// Q_mk += <bare factor at m, blocks at k>; both indices external.
class Mat2Program {
  public:
    void add(const std::vector<symwick::Block>& blocks, Complex pre);
    void eval(const StepContext& c, Eigen::MatrixXcd& out) const;

  private:
    detail::ScalarPool pool_;
    struct Term {
        Complex pre;
        int c;
        int t;  // oriented (m, k); -1: diagonal
    };
    std::vector<Term> terms_;
};

/// Q_m += sum_k w_k <blocks at k, bare at m>; eval_fixed pins k instead.
class SumVecProgram {
  public:
    void add(const std::vector<symwick::Block>& blocks, Complex pre);
    void eval(const StepContext& c, const Eigen::VectorXcd& w, Eigen::VectorXcd& out) const;
    void eval_fixed(const StepContext& c, int k, Eigen::VectorXcd& out) const;

  private:
    detail::ScalarPool pool_;
    struct Term {
        Complex pre;
        int c;
        int t;  // oriented (k, m); -1: diagonal
    };
    std::vector<Term> terms_;
};

/// Q_mn += sum_k w_k <blocks at k, bare factors at m then n>;
/// eval_fixed pins the channel site k instead of summing.
class Sum3Program {
  public:
    void add(const std::vector<symwick::Block>& blocks, Complex pre);
    void eval(const StepContext& c, const Eigen::VectorXcd& w, Eigen::MatrixXcd& out) const;
    void eval_fixed(const StepContext& c, int k, Eigen::MatrixXcd& out) const;

  private:
    detail::ScalarPool pool_;
    struct Term {
        Complex pre;
        int c;
        int kind;  // 0: factors (k,m),(k,n); 1: factor (m,n) with summed channel
                   // 2: k pinched onto m; 3: k pinched onto n; 4: diagonal
        int t1, t2;
    };
    std::vector<Term> terms_;
};

/// Compiled heterodyne increment evaluator for one model. All outputs are raw
/// increments over dt (not rates).
class HeterodyneWorkspace {
  public:
    explicit HeterodyneWorkspace(const ModelSpec& model);

    struct Increments {
        Eigen::VectorXcd dbeta;
        Eigen::MatrixXcd du, dv;
        Eigen::VectorXd dbeta_sq;  // Ito-reduced |dbeta_i|^2
    };

    Increments compute(const StepContext& c, const Eigen::VectorXcd& dZ, double dt) const;

  private:
    LocalVecProgram beta_local_;
    HamVecProgram beta_ham_;
    Mat2Program cstar_;      // <b_m L_k>
    Mat2Program cplain_;     // <L+_k b_m>
    LocalVecProgram l_exp_;  // <L_k>
    Pair2Program du_pair_d_{false}, du_pair_m_{true};
    Pair2Program dv_pair_d_{false}, dv_pair_m_{true};
    Ham4Program du_ham_d_{false}, du_ham_m_{true};
    Ham4Program dv_ham_d_{false}, dv_ham_m_{true};
    Sum3Program du_noise_star_, du_noise_plain_;
    Sum3Program dv_noise_star_, dv_noise_plain_;
};

/// Compiled quantum-jump evaluator: deterministic no-jump flow plus the
/// post-jump moment map for a given channel site.
class QJumpWorkspace {
  public:
    explicit QJumpWorkspace(const ModelSpec& model);

    struct Rhs {
        Eigen::VectorXcd bdot;
        Eigen::MatrixXcd udot, vdot;
        double loglambda_dot;
    };
    Rhs rhs(const StepContext& c) const;

    Eigen::VectorXd rates(const StepContext& c) const;

    struct JumpMoments {
        Eigen::VectorXcd beta;  // post-jump first moments
        Eigen::MatrixXcd u, v;  // post-jump cumulants (mean-subtracted)
        double rate;
    };
    JumpMoments jump_moments(const StepContext& c, int k) const;

  private:
    LocalVecProgram rate_;
    LocalVecProgram beta_local_;
    HamVecProgram beta_ham_;
    SumVecProgram beta_diss_;
    Pair2Program du_pair_d_{false}, du_pair_m_{true};
    Pair2Program dv_pair_d_{false}, dv_pair_m_{true};
    Ham4Program du_ham_d_{false}, du_ham_m_{true};
    Ham4Program dv_ham_d_{false}, dv_ham_m_{true};
    Sum3Program du_anti_, dv_anti_;
    SumVecProgram jump_beta_;
    Sum3Program jump_u_, jump_v_;
};

}  // namespace swqt
