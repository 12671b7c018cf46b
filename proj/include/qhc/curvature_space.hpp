#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qhc/dense_tensor.hpp"
#include "qhc/linalg.hpp"
#include "qhc/model_space.hpp"

namespace qhc {

/// Rank-4 tensor known to satisfy the algebraic curvature identities.
class CurvatureTensor {
 public:
  const DenseTensor& tensor() const { return t_; }
  bool certified() const { return certified_; }
  int dim() const { return t_.dim(); }

  /// Checks pair symmetries and the first Bianchi identity to tol relative.
  static CurvatureTensor certify(DenseTensor t, double tol = 1e-10);

 private:
  DenseTensor t_;
  bool certified_ = false;
};

struct CurvatureDefects {
  double pair_antisym = 0;  // slots (1,2) and (3,4)
  double pair_exchange = 0;
  double bianchi = 0;
  double max() const;
};

/// Residuals of the curvature identities relative to the tensor norm.
CurvatureDefects curvature_defects(const DenseTensor& t);
/// Pair symmetries only, i.e. membership of S^2(Lambda^2).
bool in_sym2_lambda2(const DenseTensor& t, double tol = 1e-10);

/// Orthogonal projection S^2(Lambda^2) -> R, i.e. S minus its total alternation.
CurvatureTensor project_to_R(const DenseTensor& s, double tol = 1e-10);

/// Gaussian tensor symmetrized into S^2(Lambda^2) and projected to R.
CurvatureTensor random_curvature(const ModelSpace& m, std::uint64_t seed, std::uint64_t stream = 0);

/// L(R) = sum_{i<j, A} A_(i) A_(j) R.
DenseTensor L_map(const ModelSpace& m, const DenseTensor& r);
/// L_sigma(R) with sigma R(x, y, z, u) = R(z, x, y, u).
DenseTensor L_sigma_map(const ModelSpace& m, const DenseTensor& r);

/// Contractions on arbitrary rank-4 tensors; no certification.
DenseTensor contract_ricci(const DenseTensor& r);
DenseTensor contract_ricci_star(const ModelSpace& m, const DenseTensor& r, int a);
DenseTensor contract_ricci_q(const ModelSpace& m, const DenseTensor& r);

/// Ric(x, y) = R(x, e_i, y, e_i).
DenseTensor ricci(const CurvatureTensor& r);
/// Ric*_A(x, y) = R(x, e_i, Ay, Ae_i).
DenseTensor ricci_star(const ModelSpace& m, const CurvatureTensor& r, int a);
/// Ric^q = sum_A Ric*_A.
DenseTensor ricci_q(const ModelSpace& m, const CurvatureTensor& r);
double scal(const CurvatureTensor& r);
double scal_q(const ModelSpace& m, const CurvatureTensor& r);

double trace2(const DenseTensor& b);

/// Real probe tensors built from four one-forms; L-eigenvalues -6, 6 and 2.
struct ProbeTensors {
  DenseTensor phi1, phi2, phi3;
};
ProbeTensors probe_tensors(const ModelSpace& m, const DenseTensor& a, const DenseTensor& b,
                           const DenseTensor& c, const DenseTensor& d);

/// Sp(n)Sp(1) projectors on bilinear forms.
class BilinearProjectors {
 public:
  explicit BilinearProjectors(const ModelSpace& m) : m_(&m) {}

  // symmetric forms
  DenseTensor real(const DenseTensor& b) const;
  DenseTensor lambda20e(const DenseTensor& b) const;
  DenseTensor s2es2h(const DenseTensor& b) const;
  // two-forms
  DenseTensor s2e(const DenseTensor& b) const;
  DenseTensor s2h(const DenseTensor& b) const;
  DenseTensor lambda20es2h(const DenseTensor& b) const;

  /// Sum of the full actions of I, J and K.
  DenseTensor sum_action(const DenseTensor& b) const;

 private:
  const ModelSpace* m_;
};

/// Orthonormal coordinates on S^2(Lambda^2 V*), indexed by pairs P <= Q of pairs i < j.
class PairCoords {
 public:
  explicit PairCoords(int dim);

  int dim() const { return d_; }
  int pairs() const { return p_; }
  int size() const { return N_; }
  /// dim of R = N - C(d, 4).
  int curvature_dim() const;

  /// Inner products with the basis; orthogonal projection onto S^2(Lambda^2).
  Vec pack(const DenseTensor& t) const;
  DenseTensor unpack(const Vec& c) const;
  /// Projection onto R expressed in coordinates.
  Vec project_R(const Vec& c) const;

  int pair_index(int i, int j) const { return pidx_[std::size_t(i) * d_ + j]; }
  std::pair<int, int> pair(int P) const { return plist_[P]; }

 private:
  int d_, p_, N_;
  std::vector<int> pidx_;
  std::vector<std::pair<int, int>> plist_;
  std::vector<std::pair<int, int>> entries_;  // (P, Q) per coordinate
};

/// Applies a tensor-level operator to each column of a coordinate matrix.
template <class F>
Mat apply_columns(const PairCoords& pc, const Mat& x, F&& op) {
  Mat out(pc.size(), x.cols());
  parallel_for(int(x.cols()), [&](int k) { out.col(k) = pc.pack(op(pc.unpack(x.col(k)))); });
  return out;
}

}  // namespace qhc
