#include "swqt/increments_oracle.hpp"

#include <vector>

namespace swqt::oracle {

namespace {

OperatorPolynomial mono(std::vector<LadderFactor> f) {
    return OperatorPolynomial{{{Complex(1.0, 0.0), std::move(f)}}};
}

struct Algebra {
    OperatorPolynomial H;
    std::vector<OperatorPolynomial> L, Ld;
    const GaussianMoments* m;

    Algebra(const ModelSpec& spec, const CouplingMatrix& cm, const GaussianTrajectoryState& st)
        : H(hamiltonian_polynomial(spec, cm, st.frames)), m(&st.moments) {
        for (int k = 0; k < st.size(); ++k) {
            L.push_back(jump_polynomial(k, spec, st.frames[size_t(k)]));
            Ld.push_back(adjoint(L.back()));
        }
    }

    Complex exp(const OperatorPolynomial& p) const {
        return gaussian_expectation(simplified(p), *m);
    }

    // <i[H, O]>
    Complex ham_flow(const OperatorPolynomial& o) const {
        return Complex(0.0, 1.0) * (exp(multiply(H, o)) - exp(multiply(o, H)));
    }

    // <L+_k O L_k - (1/2){L+_k L_k, O}>
    Complex dissipator(const OperatorPolynomial& o, int k) const {
        const auto& l = L[size_t(k)];
        const auto& ld = Ld[size_t(k)];
        const OperatorPolynomial ldl = multiply(ld, l);
        return exp(multiply(multiply(ld, o), l)) -
               0.5 * (exp(multiply(ldl, o)) + exp(multiply(o, ldl)));
    }

    // <(1/2){L+_k L_k, O}>
    Complex anti(const OperatorPolynomial& o, int k) const {
        const OperatorPolynomial ldl = multiply(Ld[size_t(k)], L[size_t(k)]);
        return 0.5 * (exp(multiply(ldl, o)) + exp(multiply(o, ldl)));
    }
};

}  // namespace

HetIncrements het_increments(const ModelSpec& spec, const CouplingMatrix& cm,
                             const GaussianTrajectoryState& state, const Eigen::VectorXcd& dZ,
                             double dt) {
    const int n = state.size();
    const Algebra al(spec, cm, state);
    const Eigen::MatrixXcd& u = state.moments.u;
    const Eigen::MatrixXcd& v = state.moments.v;

    // Noise coefficient matrices <b_m L_k>, <L+_k b_m>.
    Eigen::MatrixXcd Cs(n, n), Cp(n, n);
    Eigen::VectorXcd lk(n);
    for (int k = 0; k < n; ++k) {
        lk(k) = al.exp(al.L[size_t(k)]);
        for (int i = 0; i < n; ++i) {
            Cs(i, k) = al.exp(multiply(mono({{i, false}}), al.L[size_t(k)]));
            Cp(i, k) = al.exp(multiply(al.Ld[size_t(k)], mono({{i, false}})));
        }
    }

    HetIncrements out;
    out.dbeta.resize(n);
    out.dbeta_sq.resize(n);
    for (int i = 0; i < n; ++i) {
        const OperatorPolynomial b = mono({{i, false}});
        Complex det = al.ham_flow(b);
        for (int k = 0; k < n; ++k) det += al.dissipator(b, k);
        Complex noise(0.0, 0.0);
        for (int k = 0; k < n; ++k)
            noise += std::conj(dZ(k)) * Cs(i, k) + dZ(k) * Cp(i, k);
        out.dbeta(i) = det * dt + noise;
        out.dbeta_sq(i) = (Cs.row(i).cwiseAbs2().sum() + Cp.row(i).cwiseAbs2().sum()) * dt;
    }

    const Complex sub = dZ.conjugate().cwiseProduct(lk).sum() + dZ.cwiseProduct(lk.conjugate()).sum();
    out.du.resize(n, n);
    out.dv.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const OperatorPolynomial ou = mono({{i, false}, {j, false}});
            const OperatorPolynomial ov = mono({{i, true}, {j, false}});
            Complex det_u = al.ham_flow(ou), det_v = al.ham_flow(ov);
            Complex noise_u(0.0, 0.0), noise_v(0.0, 0.0);
            for (int k = 0; k < n; ++k) {
                det_u += al.dissipator(ou, k);
                det_v += al.dissipator(ov, k);
                noise_u += std::conj(dZ(k)) * al.exp(multiply(ou, al.L[size_t(k)])) +
                           dZ(k) * al.exp(multiply(al.Ld[size_t(k)], ou));
                noise_v += std::conj(dZ(k)) * al.exp(multiply(ov, al.L[size_t(k)])) +
                           dZ(k) * al.exp(multiply(al.Ld[size_t(k)], ov));
                // Ito recentring of the second cumulants
                det_u -= Cs(i, k) * Cp(j, k) + Cp(i, k) * Cs(j, k);
                det_v -= std::conj(Cp(i, k)) * Cp(j, k) + std::conj(Cs(i, k)) * Cs(j, k);
            }
            out.du(i, j) = det_u * dt + noise_u - sub * u(i, j);
            out.dv(i, j) = det_v * dt + noise_v - sub * v(i, j);
        }
    return out;
}

QjRhs qjump_rhs(const ModelSpec& spec, const CouplingMatrix& cm,
                const GaussianTrajectoryState& state) {
    const int n = state.size();
    const Algebra al(spec, cm, state);
    const Eigen::MatrixXcd& u = state.moments.u;
    const Eigen::MatrixXcd& v = state.moments.v;

    Eigen::VectorXd rates(n);
    for (int k = 0; k < n; ++k)
        rates(k) = al.exp(multiply(al.Ld[size_t(k)], al.L[size_t(k)])).real();
    const double rtot = rates.sum();

    QjRhs out;
    out.loglambda_dot = -rtot;
    out.bdot.resize(n);
    for (int i = 0; i < n; ++i) {
        const OperatorPolynomial b = mono({{i, false}});
        Complex z = al.ham_flow(b);
        for (int k = 0; k < n; ++k) z -= al.anti(b, k);
        out.bdot(i) = z;
    }
    out.udot.resize(n, n);
    out.vdot.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const OperatorPolynomial ou = mono({{i, false}, {j, false}});
            const OperatorPolynomial ov = mono({{i, true}, {j, false}});
            Complex zu = al.ham_flow(ou), zv = al.ham_flow(ov);
            for (int k = 0; k < n; ++k) {
                zu -= al.anti(ou, k);
                zv -= al.anti(ov, k);
            }
            out.udot(i, j) = zu + rtot * u(i, j);
            out.vdot(i, j) = zv + rtot * v(i, j);
        }
    return out;
}

JumpMoments jump_moments(const ModelSpec& spec, const CouplingMatrix& cm,
                         const GaussianTrajectoryState& state, int channel) {
    const int n = state.size();
    const Algebra al(spec, cm, state);
    const auto& l = al.L[size_t(channel)];
    const auto& ld = al.Ld[size_t(channel)];

    JumpMoments out;
    out.rate = al.exp(multiply(ld, l)).real();
    out.beta.resize(n);
    for (int i = 0; i < n; ++i)
        out.beta(i) = al.exp(multiply(multiply(ld, mono({{i, false}})), l)) / out.rate;
    out.u.resize(n, n);
    out.v.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            out.u(i, j) =
                al.exp(multiply(multiply(ld, mono({{i, false}, {j, false}})), l)) / out.rate -
                out.beta(i) * out.beta(j);
            out.v(i, j) =
                al.exp(multiply(multiply(ld, mono({{i, true}, {j, false}})), l)) / out.rate -
                std::conj(out.beta(i)) * out.beta(j);
        }
    return out;
}

}  // namespace swqt::oracle
