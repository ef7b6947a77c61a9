#pragma once

#include <vector>

#include "swqt/lattice.hpp"
#include "swqt/poly.hpp"
#include "swqt/quaternion.hpp"

namespace swqt {

enum class ModelVariant {
    I_z_xx,   // H = h sum sigma^z - sum J_ij sigma^x sigma^x
    II_x_zz,  // H = h sum sigma^x + sum J_ij sigma^z sigma^z
};

enum class SigmaConvention {
    paper,  // sigma^+- = sigma^x +- i sigma^y (amplitude-2 lowering)
    half,   // conventional (sigma^x +- i sigma^y)/2
};

struct ModelSpec {
    ModelVariant variant = ModelVariant::I_z_xx;
    double h = 0.0;
    double J = 0.0;
    double gamma = 0.0;
    Lattice lattice{2};
    Alpha alpha = alpha_infinity;
    double s = 0.5;
    SigmaConvention sigma_convention = SigmaConvention::paper;

    int drive_axis() const { return variant == ModelVariant::I_z_xx ? 2 : 0; }
    int interaction_axis() const { return variant == ModelVariant::I_z_xx ? 0 : 2; }
    // Interaction sign as printed: minus for Model I, plus for Model II.
    double interaction_sign() const { return variant == ModelVariant::I_z_xx ? -1.0 : 1.0; }
};

using FrameField = std::vector<Quaternion>;

/// Comoving-frame hard-core polynomial sigma~^axis at the given site
/// (axis 0,1,2 = x~,y~,z~): sigma~^+ = 2(1-n)b, sigma~^- = 2 b^dag (1-n),
/// sigma~^z = 1 - 2n.
OperatorPolynomial comoving_sigma_tilde(int site, int axis);

/// Lab-frame sigma^axis at the site, expressed in the comoving frame Q:
/// sigma^axis = sum_a M[a][axis] sigma~^a with M = to_rotation_matrix(Q).
OperatorPolynomial comoving_spin_polynomial(int site, int axis, const Quaternion& q);

/// Full lab-frame Hamiltonian as a comoving-frame polynomial; couplings from
/// the precomputed matrix (must match spec.lattice / spec.alpha / spec.J).
OperatorPolynomial hamiltonian_polynomial(const ModelSpec& spec, const CouplingMatrix& cm,
                                          const FrameField& frames);

/// Jump operator L_site = sqrt(gamma) sigma^-_site in the comoving frame.
OperatorPolynomial jump_polynomial(int site, const ModelSpec& spec, const Quaternion& q);

}  // namespace swqt
