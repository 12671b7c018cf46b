#pragma once

#include <array>

#include "qhc/dense_tensor.hpp"
#include "qhc/model_space.hpp"

namespace qhc {

/// A_(i) b (.., X_i, ..) = -b(.., A X_i, ..); slot is 1-based.
DenseTensor slot_act(const StructureMatrix& A, int slot, const DenseTensor& b);

/// A b (X_1..X_s) = (-1)^s b(A X_1, .., A X_s).
DenseTensor full_act(const StructureMatrix& A, const DenseTensor& b);

/// 1/p! times the full contraction; both arguments must be forms of equal rank.
double p_form_inner(const DenseTensor& a, const DenseTensor& b, double tol = 1e-10);

/// Full unnormalized contraction of two rank-4 tensors.
double curvature_inner(const DenseTensor& a, const DenseTensor& b);

/// (a ⊗ b)(x.., y..) = a(x..) b(y..); total rank at most 4.
DenseTensor outer(const DenseTensor& a, const DenseTensor& b);

/// b ⊙ c = (b ⊗ c + c ⊗ b) / 2 for 2-tensors.
DenseTensor odot(const DenseTensor& b, const DenseTensor& c);

/// Wedge with unit shuffle coefficients: a ∧ b = (p+q)!/(p! q!) Alt(a ⊗ b).
DenseTensor wedge(const DenseTensor& a, const DenseTensor& b);

/// wedge restricted to two 2-forms.
DenseTensor wedge2(const DenseTensor& b, const DenseTensor& c);

/// Total antisymmetrization, averaged over all permutations.
DenseTensor alternation(const DenseTensor& t);

/// out(i_0, .., i_{r-1}) = in(i_{perm[0]}, .., i_{perm[r-1]}).
DenseTensor permute_slots(const DenseTensor& t, const std::array<int, 4>& perm);

/// Swap of the first two slots.
DenseTensor swap12(const DenseTensor& t);

/// (T(x, y, ..) - T(y, x, ..)) / 2.
DenseTensor skew_a(const DenseTensor& t);

/// Symmetric part of a 2-tensor.
DenseTensor sym2(const DenseTensor& b);

/// Torsion-shaped tensors are indexed t(X; Y, Z) = <Y, xi_X Z>.
/// Returns B(X, Y, Z, U) = <xi_{zeta_X Y} Z - xi_{zeta_Y X} Z, U>.
DenseTensor b_tilde(const DenseTensor& xi, const DenseTensor& zeta);

/// C(X, Y, Z, U) = <xi_X zeta_Y Z, U>.
DenseTensor compose_torsion(const DenseTensor& xi, const DenseTensor& zeta);

/// Largest deviation from full antisymmetry, relative to the norm.
double form_defect(const DenseTensor& t);
bool is_form(const DenseTensor& t, double tol = 1e-12);

}  // namespace qhc
