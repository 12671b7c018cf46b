#pragma once

#include <map>
#include <string>
#include <vector>

#include "qhc/curvature_space.hpp"
#include "qhc/linalg.hpp"
#include "qhc/model_space.hpp"

namespace qhc {

// Constructor maps into S^2(Lambda^2). phi, Phi, varphi take two-forms; psi, vartheta, Psi take
// symmetric forms.
DenseTensor phi_map(const DenseTensor& b, const DenseTensor& c);
DenseTensor Phi_map(const ModelSpace& m, const DenseTensor& b, const DenseTensor& c);
DenseTensor varphi_map(const ModelSpace& m, const DenseTensor& b, const DenseTensor& c);
DenseTensor psi_map(const DenseTensor& b, const DenseTensor& c);
DenseTensor vartheta_map(const ModelSpace& m, const DenseTensor& b, const DenseTensor& c);
DenseTensor Psi_map(const ModelSpace& m, const DenseTensor& b, const DenseTensor& c);

/// (A_(1) + sign A_(2)) b for a 2-tensor b.
DenseTensor mixed_act(const StructureMatrix& A, const DenseTensor& b, double sign);

/// R = sum_A (6 (A_(1)+A_(2)) b ⊙ omega_A - (A_(1)+A_(2)) b ∧ omega_A).
DenseTensor lambda20es2h_map(const ModelSpace& m, const DenseTensor& b);
/// R = sum_A (6 b_A ⊙ omega_A - b_A ∧ omega_A).
DenseTensor triple_map(const ModelSpace& m, const std::array<DenseTensor, 3>& b);

/// Fine Sp(n)Sp(1) components in construction order.
const std::vector<std::string>& fine_component_names();
/// Coarse subspaces: L-blocks, their L_sigma refinements and the QK split.
const std::vector<std::string>& coarse_component_names();

/// Orthonormal bases of the L-eigenspaces and their L_sigma refinements.
struct GlBlocks {
  Mat L6, L2, Lm6;
  Mat L6_12, L6_0, L6_m12, L2_4, L2_m4;
  double l_residual = 0;      // max relative |L x - lambda x| over block bases
  double sigma_residual = 0;  // same for L_sigma on the refined blocks
  double sigma_leak = 0;      // part of L_sigma(block) outside the block
  double sigma_m6 = 0;        // |L_sigma| on the L = -6 block
};

/// Orthogonal projectors onto the Sp(n)Sp(1) components of R; bases are orthonormal columns in
/// PairCoords coordinates.
class ProjectorBank {
 public:
  ProjectorBank(const ModelSpace& m, const PairCoords& pc) : m_(m), pc_(pc) {}

  const ModelSpace& model() const { return m_; }
  const PairCoords& coords() const { return pc_; }
  const GlBlocks& blocks() const { return gl_; }
  const std::vector<std::string>& log() const { return log_; }

  bool has(const std::string& name) const;
  const Mat& basis(const std::string& name) const;
  int rank(const std::string& name) const { return int(basis(name).cols()); }

  /// Orthogonal projection of R onto the named fine or coarse component.
  DenseTensor project(const DenseTensor& r, const std::string& name) const;
  Vec project_coords(const Vec& c, const std::string& name) const;

  friend ProjectorBank build_sp_projectors(const ModelSpace& m, const PairCoords& pc,
                                           const GlBlocks& gl);

 private:
  ModelSpace m_;
  PairCoords pc_;
  GlBlocks gl_;
  std::map<std::string, Mat> comp_;
  std::vector<std::string> log_;
};

/// L-eigenspaces via polynomial filtering of random elements of R, refined by L_sigma.
GlBlocks build_gl_projectors(const ModelSpace& m, const PairCoords& pc, std::uint64_t seed = 7);

/// Fine components from the constructor maps and Ricci kernels; includes the coarse names.
ProjectorBank build_sp_projectors(const ModelSpace& m, const PairCoords& pc, const GlBlocks& gl);

struct QkSplit {
  Mat qk, qkperp, r_qk, r_qkperp;
};
/// QK = S^4E + R(pi_2 + 2 pi_1) and its orthogonal complement in R.
QkSplit qk_split(const ProjectorBank& bank);

struct ComponentProjection {
  DenseTensor tensor;
  double norm = 0;
};
ComponentProjection project_component(const ProjectorBank& bank, const CurvatureTensor& r,
                                      const std::string& name);

/// Ric of the QK part and the real part of Ric of the QK-perp part, from the Ricci traces.
struct RicQkScalars {
  DenseTensor ric_qk;
  DenseTensor ric_qkperp_real;
  double residual_qk = 0;    // against direct projection
  double residual_perp = 0;
};
RicQkScalars ric_qk_scalars(const ProjectorBank& bank, const CurvatureTensor& r);

struct AuditLine {
  std::string name;
  double value = 0;
  double expected = 0;
  double tol = 0;
  bool pass = false;
};

struct DecompositionReport {
  int n = 0;
  std::vector<std::pair<std::string, int>> ranks;
  std::vector<AuditLine> checks;
  bool pass() const;
  std::vector<std::string> failures() const;
};

/// Ranks, closed-form dimension checks, low-n zero lists and eigenvalue residuals.
DecompositionReport dimension_audit(const ProjectorBank& bank, double tol = 1e-9);

/// Closed forms of dim R and dim QK.
long dim_R_formula(int n);
long dim_QK_formula(int n);

}  // namespace qhc
