#include "qhc/model_space.hpp"

#include <cmath>

#include "qhc/tensor_ops.hpp"

namespace qhc {

StructureMatrix::StructureMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw Error("StructureMatrix: square matrix required");
  cols_.resize(m_.cols());
  for (int c = 0; c < m_.cols(); ++c)
    for (int r = 0; r < m_.rows(); ++r)
      if (std::abs(m_(r, c)) > 1e-15) cols_[c].emplace_back(r, m_(r, c));
}

double quaternion_residual(const std::array<Eigen::MatrixXd, 3>& t) {
  const long d = t[0].rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  double r = 0;
  for (const auto& A : t) {
    r = std::max(r, (A * A + id).cwiseAbs().maxCoeff());
    r = std::max(r, (A.transpose() * A - id).cwiseAbs().maxCoeff());
  }
  r = std::max(r, (t[0] * t[1] - t[2]).cwiseAbs().maxCoeff());
  r = std::max(r, (t[1] * t[0] + t[2]).cwiseAbs().maxCoeff());
  return r;
}

ModelSpace ModelSpace::from_triple(int n, const std::array<Eigen::MatrixXd, 3>& triple,
                                   bool allow_large) {
  if (n < 2) throw Error("model space requires n >= 2");
  const int d = 4 * n;
  const double d4 = double(d) * d * d * d;
  if (!allow_large && d4 > double(kMaxDim4)) throw Error("model space exceeds the memory cap");
  for (const auto& A : triple)
    if (A.rows() != d || A.cols() != d) throw Error("structure matrix has wrong size");
  if (quaternion_residual(triple) > 1e-10) throw Error("triple violates the quaternion identities");

  ModelSpace m;
  m.n_ = n;
  m.dim_ = d;
  m.g_ = DenseTensor(2, d, SymmetryTag::symmetric2);
  for (int i = 0; i < d; ++i) m.g_(i, i) = 1.0;
  m.Omega_ = DenseTensor(4, d, SymmetryTag::form);
  DenseTensor sq(4, d);
  for (int a = 0; a < 3; ++a) {
    m.A_[a] = StructureMatrix(triple[a]);
    // omega_A(e_r, e_c) = <e_r, A e_c> = A(r, c)
    m.omega_[a] = DenseTensor(2, d, SymmetryTag::form);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) m.omega_[a](r, c) = triple[a](r, c);
    const DenseTensor w = wedge2(m.omega_[a], m.omega_[a]);
    m.Omega_ += w;
    sq.axpy(6.0, odot(m.omega_[a], m.omega_[a]));
    sq -= w;
  }
  m.pi2_ = sq;
  m.pi2_.set_tag(SymmetryTag::curvature_pair);
  m.pi1_ = DenseTensor(4, d, SymmetryTag::curvature_pair);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      if (x != y) {
        m.pi1_(x, y, x, y) = 1.0;
        m.pi1_(x, y, y, x) = -1.0;
      }
  return m;
}

ModelSpace build_model(int n, bool allow_large) {
  if (n < 2) throw Error("model space requires n >= 2");
  const int d = 4 * n;
  // left multiplication by i, j, k on the basis (1, i, j, k) of each block
  const int qi[4][2] = {{1, 1}, {0, -1}, {3, 1}, {2, -1}};
  const int qj[4][2] = {{2, 1}, {3, -1}, {0, -1}, {1, 1}};
  const int qk[4][2] = {{3, 1}, {2, 1}, {1, -1}, {0, -1}};
  const int (*tables[3])[2] = {qi, qj, qk};
  std::array<Eigen::MatrixXd, 3> t;
  for (int a = 0; a < 3; ++a) {
    t[a] = Eigen::MatrixXd::Zero(d, d);
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < 4; ++c) t[a](4 * b + tables[a][c][0], 4 * b + c) = tables[a][c][1];
  }
  return ModelSpace::from_triple(n, t, allow_large);
}

std::array<Eigen::MatrixXd, 3> adapted_basis(const ModelSpace& m, const Eigen::Matrix3d& rot) {
  const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
  if ((rot * rot.transpose() - id).cwiseAbs().maxCoeff() > 1e-10)
    throw Error("adapted_basis: rotation is not orthogonal");
  if (std::abs(rot.determinant() - 1.0) > 1e-10)
    throw Error("adapted_basis: rotation reverses orientation");
  std::array<Eigen::MatrixXd, 3> out;
  for (int a = 0; a < 3; ++a) {
    out[a] = Eigen::MatrixXd::Zero(m.dim(), m.dim());
    for (int b = 0; b < 3; ++b) out[a] += rot(a, b) * m.structure(b).matrix();
  }
  return out;
}

ModelSpace rotate_model(const ModelSpace& m, const Eigen::Matrix3d& rot) {
  return ModelSpace::from_triple(m.n(), adapted_basis(m, rot), true);
}

}  // namespace qhc
