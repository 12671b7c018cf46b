#pragma once

#include <array>
#include <string>

#include "qhc/curvature_space.hpp"
#include "qhc/decomposition.hpp"
#include "qhc/torsion.hpp"

namespace qhc {

// Operator side: maps on Λ² ⊗ Λ².
/// 4 pi_1es(a) = 3a - sum_A A_(3) A_(4) a.
DenseTensor pi1es_operator(const ModelSpace& m, const DenseTensor& a);
/// pi_1s(a)(X, Y, Z, U) = 1/4n sum_A <a(X, Y, ., .), omega_A> omega_A(Z, U).
DenseTensor pi1s_operator(const ModelSpace& m, const DenseTensor& a);
DenseTensor pi1_operator(const ModelSpace& m, const DenseTensor& a);

// Formula side: curvature data in terms of (xi, ∇̃xi, gamma).
DenseTensor pi1es(const ModelSpace& m, const TorsionState& s);
DenseTensor pi1s(const ModelSpace& m, const TorsionState& s);
/// pi_1 = pi_1es - pi_1s, evaluated from its own expansion (gamma-free).
DenseTensor pi1(const ModelSpace& m, const TorsionState& s);

DenseTensor ric_star_from(const ModelSpace& m, const TorsionState& s, int a);
DenseTensor ricq_from(const ModelSpace& m, const TorsionState& s);
/// Ric from 3 Ric = sum_A(-(n+2) gamma_A(., A.) - ...).
DenseTensor ric_from(const ModelSpace& m, const TorsionState& s);
/// 3 Ric - Ric^q.
DenseTensor ric_minus_ricq(const ModelSpace& m, const TorsionState& s);

/// S²ES²H part of sum_A gamma_A(., A.) as determined by d²omega = 0.
DenseTensor gamma_s2es2h_from_torsion(const ModelSpace& m, const TorsionState& s);

/// Component formulas for the Ricci tensors. Scalars rho stand for rho g.
struct RicciComponents {
  double ricq_real = 0;
  double ric_real = 0;
  DenseTensor ricq_l20e, ric_l20e;
  DenseTensor ricq_s2es2h, ric_s2es2h;
  DenseTensor ricq_l20es2h;
  DenseTensor ric_l20e_a, ric_l20e_b;      // Ric of the (Λ²₀E)_a and (Λ²₀E)_b parts
  DenseTensor ric_s2es2h_a, ric_s2es2h_b;  // Ric of the (S²ES²H)_a and (S²ES²H)_b parts
  double ric_qk = 0;                       // Ric_QK = ric_qk g
  double ric_qkperp_real = 0;              // pi_R(Ric_QK-perp), consistent normalisation
  double ric_qkperp_real_printed = 0;      // same with the printed coefficient 2 on the last trace
};
RicciComponents ricci_component_formulas(const ModelSpace& m, const TorsionState& s);

/// d*theta = -(∇̃_{e_i} theta)(e_i) - theta(xi_{e_i} e_i), with ∇̃theta the theta-contraction of ∇̃xi.
double dstar_theta(const ModelSpace& m, const TorsionState& s);
double sum_gamma_omega(const ModelSpace& m, const TorsionState& s);

struct TorsionScalars {
  double scal = 0;
  double scal_q = 0;
  double dstar_theta = 0;
  std::array<double, 6> norms2{};
};
/// Coefficients of the closed forms scal = g_coef G + sum_c coef[c] |xi_c|^2 - dstar_coef d*theta,
/// with G = sum_A <gamma_A, omega_A>.
struct ScalarCoefficients {
  double scal_gamma = 0, scal_dstar = 0, scalq_gamma = 0;
  std::array<double, 6> scal{}, scal_q{};
};
/// Published coefficients of the closed forms.
ScalarCoefficients printed_scalar_coefficients(int n);
/// Values forced by the traces of the pi_R(Ric) and pi_R(Ric^q) formulas.
ScalarCoefficients trace_scalar_coefficients(int n);

/// Closed forms in the component norms (printed coefficients unless given).
TorsionScalars scalars_from_torsion(const TorsionBank& tb, const TorsionState& s);
TorsionScalars scalars_from_torsion(const TorsionBank& tb, const TorsionState& s,
                                    const ScalarCoefficients& k);
/// 4n times the traces pi_R(Ric^q) and pi_R(Ric) of the component formulas.
TorsionScalars scalars_from_traces(const TorsionBank& tb, const TorsionState& s);

/// Right-hand sides of the d²omega_A = 0 identities.
std::array<DenseTensor, 3> isquare_rhs(const ModelSpace& m, const TorsionState& s);
/// Contracted identity; printed_sign keeps the sign of the <gamma_A, omega_A><X, Y> term as printed.
DenseTensor zeroxixi_rhs(const ModelSpace& m, const TorsionState& s, bool printed_sign = false);

struct DdOmegaResidual {
  double isquare = 0;
  double zeroxixi = 0;
  double max() const { return std::max(isquare, zeroxixi); }
};
DdOmegaResidual dd_omega_residual(const ModelSpace& m, const TorsionState& s);

/// Kernel of gamma -> (gamma_I∧omega_J - gamma_J∧omega_I, ...) on triples of two-forms.
struct GammaKernel {
  int dim = 0;
  Mat basis;                   // columns: flattened (gamma_I, gamma_J, gamma_K)
  Vec singular_values;         // relative, decreasing
  double gap = 0;              // smallest retained over largest discarded
  double omega_alignment = 0;  // |cos| between the kernel and (omega_I, omega_J, omega_K)
};
GammaKernel gamma_kernel(const ModelSpace& m, double rel_tol = 1e-8);

struct QkEinstein {
  double c = 0;
  double perp = 0;  // relative QK-perp part of the input
  double ric = 0, ric_star = 0, ric_q = 0, real_part = 0;
  double max_residual() const { return std::max({ric, ric_star, ric_q, real_part}); }
};
/// Throws if R is not in QK to 1e-9.
QkEinstein qk_einstein_verify(const ProjectorBank& bank, const CurvatureTensor& r);

}  // namespace qhc
