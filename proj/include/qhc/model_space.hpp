#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qhc/dense_tensor.hpp"

namespace qhc {

/// Square matrix acting on column vectors, (A v)_r = sum_c A(r, c) v_c.
/// Keeps per-column nonzero lists so slot actions of signed permutations stay cheap.
class StructureMatrix {
 public:
  StructureMatrix() = default;
  explicit StructureMatrix(Eigen::MatrixXd m);

  int dim() const { return int(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }
  /// Nonzero entries (row, value) of column c, i.e. A e_c = sum value * e_row.
  const std::vector<std::pair<int, double>>& column(int c) const { return cols_[c]; }

 private:
  Eigen::MatrixXd m_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
};

/// Index of the three structures I, J, K.
enum Quat : int { qI = 0, qJ = 1, qK = 2 };

inline constexpr int kMaxDim4 = 1 << 24;

/// R^{4n} with its quaternionic structure, Kahler forms and the canonical curvature tensors.
class ModelSpace {
 public:
  int n() const { return n_; }
  int dim() const { return dim_; }
  const StructureMatrix& structure(int a) const { return A_[a]; }
  const DenseTensor& metric() const { return g_; }
  const DenseTensor& omega(int a) const { return omega_[a]; }
  const DenseTensor& Omega() const { return Omega_; }
  const DenseTensor& pi1() const { return pi1_; }
  const DenseTensor& pi2() const { return pi2_; }

  /// Builds the space from an explicit triple; checks quaternion relations and orthogonality.
  static ModelSpace from_triple(int n, const std::array<Eigen::MatrixXd, 3>& triple,
                                bool allow_large = false);

 private:
  int n_ = 0;
  int dim_ = 0;
  std::array<StructureMatrix, 3> A_;
  DenseTensor g_;
  std::array<DenseTensor, 3> omega_;
  DenseTensor Omega_, pi1_, pi2_;
};

/// Standard block model: I, J, K are left multiplication by i, j, k on each block (1, i, j, k).
ModelSpace build_model(int n, bool allow_large = false);

/// Triple A' = a_A I + b_A J + c_A K taken from the rows of rot; rot must lie in SO(3).
std::array<Eigen::MatrixXd, 3> adapted_basis(const ModelSpace& m, const Eigen::Matrix3d& rot);

/// The same vector space with the adapted basis replaced by adapted_basis(m, rot).
ModelSpace rotate_model(const ModelSpace& m, const Eigen::Matrix3d& rot);

/// Residuals of the defining identities (quaternion relations, metric compatibility).
double quaternion_residual(const std::array<Eigen::MatrixXd, 3>& triple);

}  // namespace qhc
