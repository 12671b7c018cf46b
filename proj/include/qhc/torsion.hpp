#pragma once

#include <array>
#include <string>
#include <vector>

#include "qhc/dense_tensor.hpp"
#include "qhc/linalg.hpp"
#include "qhc/model_space.hpp"

namespace qhc {

/// The six components of T* ⊗ Λ²₀ES²H, ordered as in the class mask (bit k <-> component k).
enum TorsionComponent : int { T33 = 0, TK3, TE3, T3H, TKH, TEH };
inline constexpr int kTorsionComponents = 6;
const std::array<std::string, 6>& torsion_component_names();
TorsionComponent torsion_component_from_name(const std::string& name);

/// Intrinsic torsion data: xi(X; Y, Z) = <Y, xi_X Z>, dxi(W; X, Y, Z) = <Y, (∇̃_W xi)_X Z>,
/// gamma_A two-forms and optional one-forms lambda_A.
struct TorsionState {
  DenseTensor xi;
  DenseTensor dxi;
  std::array<DenseTensor, 3> gamma;
  std::array<DenseTensor, 3> lambda;

  static TorsionState zero(int dim);
  void validate(int dim) const;
};

/// theta^xi with 6/n (2n+1)(n-1) theta(X) = -<xi_{e_i} e_i, X>.
DenseTensor theta(const ModelSpace& m, const DenseTensor& xi);
/// theta^xi_A with 2/n (2n+1)(n-1) theta_A(X) = -<A xi_{e_i} A e_i, X>.
DenseTensor theta_A(const ModelSpace& m, const DenseTensor& xi, int a);
/// <xi_{e_i} e_i, X>.
DenseTensor torsion_trace(const DenseTensor& xi);

/// E ⊗ S^3H part computed from the theta one-forms.
DenseTensor xi_E3_formula(const ModelSpace& m, const DenseTensor& xi);
/// E ⊗ H part computed from theta.
DenseTensor xi_EH_formula(const ModelSpace& m, const DenseTensor& xi);

/// (sum_A xi_A A) and (sum_A A xi_A) as torsion-shaped tensors.
DenseTensor sum_xi_A_A(const ModelSpace& m, const DenseTensor& xi);
DenseTensor sum_A_xi_A(const ModelSpace& m, const DenseTensor& xi);
/// xi_A A - A xi_A - A xi A for one structure.
DenseTensor h_operator(const ModelSpace& m, const DenseTensor& xi, int a);
/// Cyclic sum over (X, Y, Z) of <Y, xi_X Z>.
DenseTensor cyclic_sum(const DenseTensor& xi);
/// (3 psi - sum_A A_(2) A_(3) psi) for a three-form psi.
DenseTensor kh_from_three_form(const ModelSpace& m, const DenseTensor& psi);

struct Characterization {
  double in_T = 0;       // distance from T* ⊗ Λ²₀ES²H
  double s3h = 0;        // S^3H relations
  double h = 0;          // H relations
  double three_form = 0;
  double cyclic = 0;
  double kh_three_form = 0;  // least-squares distance from the 3psi - sum A_(23) psi image
  double trace = 0;          // |sum xi_{e_i} e_i|
};

/// Orthogonal projectors onto the six torsion components, as orthonormal bases of flattened
/// rank-3 tensors.
class TorsionBank {
 public:
  explicit TorsionBank(const ModelSpace& m);

  const ModelSpace& model() const { return m_; }
  int dim() const { return int(space_.cols()); }
  const Mat& space() const { return space_; }
  const Mat& component(int c) const { return comp_[c]; }
  int rank(int c) const { return int(comp_[c].cols()); }
  const std::vector<std::string>& log() const { return log_; }

  DenseTensor project_space(const DenseTensor& xi) const;
  DenseTensor project(const DenseTensor& xi, int c) const;
  std::array<double, 6> norms(const DenseTensor& xi) const;
  /// Bit c is set iff the c-th component exceeds rel_tol * |xi|.
  unsigned class_mask(const DenseTensor& xi, double rel_tol = 1e-8) const;

  /// Projection of the (X; Y, Z) factor of D(W; X, Y, Z) for every W.
  DenseTensor project_derivative(const DenseTensor& d, int c) const;

  /// Random element of a component (c = -1 for the whole space).
  DenseTensor sample(int c, std::uint64_t seed, std::uint64_t stream = 0) const;

  /// Residuals of the characterizations on a tensor.
  Characterization characterize(const DenseTensor& xi) const;

 private:
  ModelSpace m_;
  Mat space_;
  std::array<Mat, 6> comp_;
  Mat three_forms_;  // image of kh_from_three_form, orthonormal
  std::vector<std::string> log_;
};

/// Recovered torsion and lambda_A from the covariant derivatives of the Kahler forms.
struct TorsionRecovery {
  DenseTensor xi;
  std::array<DenseTensor, 3> lambda;
  double residual = 0;
};
TorsionRecovery torsion_from_nabla_omega(const ModelSpace& m, const std::array<DenseTensor, 3>& nabla_omega);

/// (∇_X omega_A)(Y, Z) from xi and lambda_A.
std::array<DenseTensor, 3> nabla_omega_from(const ModelSpace& m, const DenseTensor& xi,
                                            const std::array<DenseTensor, 3>& lambda);

}  // namespace qhc
