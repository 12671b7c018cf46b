#include "qhc/torsion.hpp"

#include <cmath>
#include <sstream>

#include "qhc/curvature_space.hpp"
#include "qhc/rng.hpp"
#include "qhc/tensor_ops.hpp"

namespace qhc {

namespace {

Vec flat(const DenseTensor& t) { return Eigen::Map<const Vec>(t.data(), Eigen::Index(t.size())); }

DenseTensor unflat(const Vec& v, int rank, int dim) {
  DenseTensor t(rank, dim);
  Eigen::Map<Vec>(t.data(), Eigen::Index(t.size())) = v;
  return t;
}

void require_torsion(const DenseTensor& xi, int dim, const char* where) {
  if (xi.rank() != 3 || xi.dim() != dim)
    throw Error(std::string(where) + ": expected a rank-3 tensor over R^" + std::to_string(dim));
}

// Matrix of a torsion operator in the coordinates of the orthonormal columns b.
template <class F>
Mat operator_matrix(const Mat& b, int dim, F&& op, double* leak = nullptr) {
  Mat img(b.rows(), b.cols());
  parallel_for(int(b.cols()), [&](int k) { img.col(k) = flat(op(unflat(b.col(k), 3, dim))); });
  Mat coords = b.transpose() * img;
  if (leak) {
    double scale = std::max(img.norm(), 1.0);
    *leak = (img - b * coords).norm() / scale;
  }
  return coords;
}

double mat_max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

const std::array<std::string, 6>& torsion_component_names() {
  static const std::array<std::string, 6> names = {"33", "K3", "E3", "3H", "KH", "EH"};
  return names;
}

TorsionComponent torsion_component_from_name(const std::string& name) {
  const auto& names = torsion_component_names();
  for (int c = 0; c < 6; ++c)
    if (names[c] == name) return TorsionComponent(c);
  throw Error("unknown torsion component: " + name);
}

TorsionState TorsionState::zero(int dim) {
  TorsionState s;
  s.xi = DenseTensor(3, dim);
  s.dxi = DenseTensor(4, dim);
  for (int a = 0; a < 3; ++a) {
    s.gamma[a] = DenseTensor(2, dim, SymmetryTag::form);
    s.lambda[a] = DenseTensor(1, dim);
  }
  return s;
}

void TorsionState::validate(int dim) const {
  require_torsion(xi, dim, "TorsionState::xi");
  if (dxi.rank() != 4 || dxi.dim() != dim) throw Error("TorsionState::dxi: expected a rank-4 tensor");
  for (int a = 0; a < 3; ++a) {
    if (gamma[a].rank() != 2 || gamma[a].dim() != dim) throw Error("TorsionState::gamma: expected 2-forms");
    if (!is_form(gamma[a], 1e-10)) throw Error("TorsionState::gamma: not antisymmetric");
    if (lambda[a].rank() != 0 && (lambda[a].rank() != 1 || lambda[a].dim() != dim))
      throw Error("TorsionState::lambda: expected one-forms");
  }
}

DenseTensor torsion_trace(const DenseTensor& xi) {
  if (xi.rank() != 3) throw Error("torsion_trace: expected a rank-3 tensor");
  int d = xi.dim();
  DenseTensor out(1, d);
  for (int x = 0; x < d; ++x)
    for (int i = 0; i < d; ++i) out(x) += xi(i, x, i);
  return out;
}

DenseTensor theta(const ModelSpace& m, const DenseTensor& xi) {
  require_torsion(xi, m.dim(), "theta");
  int n = m.n();
  return (-double(n) / (6.0 * (2 * n + 1) * (n - 1))) * torsion_trace(xi);
}

DenseTensor theta_A(const ModelSpace& m, const DenseTensor& xi, int a) {
  require_torsion(xi, m.dim(), "theta_A");
  const auto& A = m.structure(a);
  int n = m.n(), d = m.dim();
  // u(i; x, z) = xi(i; Ax, Az); <A xi_{e_i} A e_i, X> = -u(i; x, i)
  DenseTensor u = slot_act(A, 2, slot_act(A, 3, xi));
  DenseTensor out(1, d);
  for (int x = 0; x < d; ++x)
    for (int i = 0; i < d; ++i) out(x) -= u(i, x, i);
  return (-double(n) / (2.0 * (2 * n + 1) * (n - 1))) * out;
}

DenseTensor xi_E3_formula(const ModelSpace& m, const DenseTensor& xi) {
  int n = m.n(), d = m.dim();
  DenseTensor th = theta(m, xi);
  DenseTensor out(3, d);
  for (int a = 0; a < 3; ++a) {
    DenseTensor beta = full_act(m.structure(a), theta_A(m, xi, a) - th);
    out.axpy(1.0, wedge(beta, m.omega(a)));
    out.axpy(-double(n - 1) / n, outer(beta, m.omega(a)));
  }
  return out;
}

DenseTensor xi_EH_formula(const ModelSpace& m, const DenseTensor& xi) {
  int n = m.n(), d = m.dim();
  DenseTensor th = theta(m, xi);
  DenseTensor out(3, d);
  for (int x = 0; x < d; ++x)
    for (int i = 0; i < d; ++i) {
      out(x, x, i) += 3 * th(i);
      out(x, i, x) -= 3 * th(i);
    }
  for (int a = 0; a < 3; ++a) {
    const DenseTensor& w = m.omega(a);
    DenseTensor at = full_act(m.structure(a), th);
    for (int x = 0; x < d; ++x)
      for (int y = 0; y < d; ++y)
        for (int z = 0; z < d; ++z)
          out(x, y, z) -= -w(x, y) * at(z) + w(x, z) * at(y) + (2.0 / n) * at(x) * w(y, z);
  }
  return out;
}

DenseTensor sum_xi_A_A(const ModelSpace& m, const DenseTensor& xi) {
  DenseTensor out(3, xi.dim());
  for (int a = 0; a < 3; ++a) {
    const auto& A = m.structure(a);
    out += slot_act(A, 1, slot_act(A, 3, xi));
  }
  return out;
}

DenseTensor sum_A_xi_A(const ModelSpace& m, const DenseTensor& xi) {
  DenseTensor out(3, xi.dim());
  for (int a = 0; a < 3; ++a) {
    const auto& A = m.structure(a);
    out -= slot_act(A, 1, slot_act(A, 2, xi));
  }
  return out;
}

DenseTensor h_operator(const ModelSpace& m, const DenseTensor& xi, int a) {
  const auto& A = m.structure(a);
  DenseTensor s1 = slot_act(A, 1, xi);
  return slot_act(A, 3, s1) + slot_act(A, 2, s1) + slot_act(A, 2, slot_act(A, 3, xi));
}

DenseTensor cyclic_sum(const DenseTensor& xi) {
  return xi + permute_slots(xi, {1, 2, 0, 3}) + permute_slots(xi, {2, 0, 1, 3});
}

DenseTensor kh_from_three_form(const ModelSpace& m, const DenseTensor& psi) {
  DenseTensor out = 3.0 * psi;
  for (int a = 0; a < 3; ++a) {
    const auto& A = m.structure(a);
    out -= slot_act(A, 2, slot_act(A, 3, psi));
  }
  return out;
}

TorsionBank::TorsionBank(const ModelSpace& m) : m_(m) {
  const int d = m.dim();
  const int p = d * (d - 1) / 2;
  auto logf = [&](const std::string& s) { log_.push_back(s); };

  // Λ²₀ES²H as the range of its projector on the unit two-forms.
  BilinearProjectors bp(m_);
  Mat forms(d * d, p);
  {
    int k = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j, ++k) {
        DenseTensor e(2, d, SymmetryTag::form);
        e(i, j) = 1 / std::sqrt(2.0);
        e(j, i) = -1 / std::sqrt(2.0);
        forms.col(k) = flat(bp.lambda20es2h(e));
      }
  }
  Mat beta = orthonormal_range(forms, 1e-8);
  const int r = int(beta.cols());
  space_ = Mat::Zero(Eigen::Index(d) * d * d, Eigen::Index(d) * r);
  for (int x = 0; x < d; ++x)
    space_.block(Eigen::Index(x) * d * d, Eigen::Index(x) * r, d * d, r) = beta;
  {
    std::ostringstream os;
    os << "torsion space: " << d << " x " << r << " = " << space_.cols();
    logf(os.str());
  }
  const int T = int(space_.cols());
  const Mat id = Mat::Identity(T, T);

  // The S3H relations are imposed on the full tensors since the operators leave the space.
  Mat s3h_cond(2 * space_.rows(), T);
  parallel_for(T, [&](int k) {
    DenseTensor t = unflat(space_.col(k), 3, d);
    s3h_cond.col(k) << flat(sum_xi_A_A(m_, t) + t), flat(sum_A_xi_A(m_, t) - t);
  });
  Mat s3h = space_ * null_space(s3h_cond, 1e-10, 1.0);

  Mat h_cond(3 * T, T);
  double hleak = 0;
  for (int a = 0; a < 3; ++a) {
    double l = 0;
    h_cond.middleRows(Eigen::Index(a) * T, T) =
        operator_matrix(space_, d, [&](const DenseTensor& t) { return h_operator(m_, t, a); }, &l) - id;
    hleak = std::max(hleak, l);
  }
  Mat hpart = space_ * null_space(h_cond, 1e-10, 1.0);
  {
    std::ostringstream os;
    os << "S3H rank " << s3h.cols() << ", H rank " << hpart.cols() << ", H operator leak " << hleak << ", overlap " << mat_max_abs(s3h.transpose() * hpart);
    logf(os.str());
  }

  // E-parts from the theta formulas.
  double le3 = 0, leh = 0;
  Mat fe3 = operator_matrix(space_, d, [&](const DenseTensor& t) { return xi_E3_formula(m_, t); }, &le3);
  Mat feh = operator_matrix(space_, d, [&](const DenseTensor& t) { return xi_EH_formula(m_, t); }, &leh);
  {
    std::ostringstream os;
    os << "E formulas: leak " << le3 << " " << leh << ", idempotence "
       << mat_max_abs(fe3 * fe3 - fe3) << " " << mat_max_abs(feh * feh - feh) << ", symmetry "
       << mat_max_abs(fe3 - fe3.transpose()) << " " << mat_max_abs(feh - feh.transpose());
    logf(os.str());
  }
  comp_[TE3] = space_ * orthonormal_range(fe3, 1e-8);
  comp_[TEH] = space_ * orthonormal_range(feh, 1e-8);

  // Λ³₀E parts from the three-form and cyclic conditions on the E-complements.
  auto condition_kernel = [&](const Mat& sub, auto&& defect) {
    Mat img(sub.rows(), sub.cols());
    parallel_for(int(sub.cols()), [&](int k) { img.col(k) = flat(defect(unflat(sub.col(k), 3, d))); });
    return Mat(sub * null_space(img, 1e-10, 1.0));
  };
  Mat s3h_rest = range_orthogonal_to(s3h, {&comp_[TE3]});
  comp_[T33] = condition_kernel(s3h_rest, [](const DenseTensor& t) { return t - alternation(t); });
  comp_[TK3] = range_orthogonal_to(s3h_rest, {&comp_[T33]});
  Mat h_rest = range_orthogonal_to(hpart, {&comp_[TEH]});
  comp_[T3H] = condition_kernel(h_rest, [](const DenseTensor& t) { return cyclic_sum(t); });
  comp_[TKH] = range_orthogonal_to(h_rest, {&comp_[T3H]});

  // Image of 3psi - sum A_(23) psi over all three-forms.
  {
    Mat img(Eigen::Index(d) * d * d, Eigen::Index(d) * (d - 1) * (d - 2) / 6);
    int k = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (int l = j + 1; l < d; ++l, ++k) {
          DenseTensor e(1, d), f(1, d), g(1, d);
          e(i) = 1;
          f(j) = 1;
          g(l) = 1;
          img.col(k) = flat(kh_from_three_form(m_, wedge(e, wedge(f, g))));
        }
    three_forms_ = orthonormal_range(img, 1e-10);
  }

  Mat all(space_.rows(), 0);
  int total = 0;
  for (int c = 0; c < 6; ++c) total += rank(c);
  all.resize(space_.rows(), total);
  int off = 0;
  for (int c = 0; c < 6; ++c) {
    all.middleCols(off, rank(c)) = comp_[c];
    off += rank(c);
  }
  double ortho = mat_max_abs(all.transpose() * all - Mat::Identity(total, total));
  double complete = total == T ? mat_max_abs(all * all.transpose() - space_ * space_.transpose()) : 1.0;
  {
    std::ostringstream os;
    os << "ranks";
    for (int c = 0; c < 6; ++c) os << " " << torsion_component_names()[c] << "=" << rank(c);
    os << ", orthogonality " << ortho << ", completeness " << complete;
    logf(os.str());
  }
  if (total != T || ortho > 1e-9 || complete > 1e-9)
    throw Error("TorsionBank: projectors are not complete and orthogonal (" + log_.back() + ")");
}

DenseTensor TorsionBank::project_space(const DenseTensor& xi) const {
  require_torsion(xi, m_.dim(), "TorsionBank::project_space");
  Vec v = flat(xi);
  return unflat(space_ * (space_.transpose() * v), 3, m_.dim());
}

DenseTensor TorsionBank::project(const DenseTensor& xi, int c) const {
  require_torsion(xi, m_.dim(), "TorsionBank::project");
  if (c < 0 || c >= 6) throw Error("TorsionBank::project: component index out of range");
  Vec v = flat(xi);
  return unflat(comp_[c] * (comp_[c].transpose() * v), 3, m_.dim());
}

std::array<double, 6> TorsionBank::norms(const DenseTensor& xi) const {
  require_torsion(xi, m_.dim(), "TorsionBank::norms");
  Vec v = flat(xi);
  std::array<double, 6> out{};
  for (int c = 0; c < 6; ++c) out[c] = (comp_[c].transpose() * v).norm();
  return out;
}

unsigned TorsionBank::class_mask(const DenseTensor& xi, double rel_tol) const {
  auto nr = norms(xi);
  double scale = xi.norm();
  unsigned mask = 0;
  for (int c = 0; c < 6; ++c)
    if (scale > 0 && nr[c] > rel_tol * scale) mask |= 1u << c;
  return mask;
}

DenseTensor TorsionBank::project_derivative(const DenseTensor& dx, int c) const {
  const int d = m_.dim();
  if (dx.rank() != 4 || dx.dim() != d) throw Error("TorsionBank::project_derivative: expected a rank-4 tensor");
  if (c < 0 || c >= 6) throw Error("TorsionBank::project_derivative: component index out of range");
  const Eigen::Index s = Eigen::Index(d) * d * d;
  Eigen::Map<const Mat> rows(dx.data(), s, d);  // column W holds D(W; .)
  Mat proj = comp_[c] * (comp_[c].transpose() * rows);
  DenseTensor out(4, d);
  Eigen::Map<Mat>(out.data(), s, d) = proj;
  return out;
}

DenseTensor TorsionBank::sample(int c, std::uint64_t seed, std::uint64_t stream) const {
  const Mat& b = c < 0 ? space_ : comp_.at(c);
  Rng rng(seed, stream);
  Vec coef(b.cols());
  for (Eigen::Index k = 0; k < coef.size(); ++k) coef(k) = rng.normal();
  return unflat(b * coef, 3, m_.dim());
}

Characterization TorsionBank::characterize(const DenseTensor& xi) const {
  require_torsion(xi, m_.dim(), "TorsionBank::characterize");
  double s = std::max(xi.norm(), 1e-300);
  Characterization ch;
  Vec v = flat(xi);
  ch.in_T = (v - space_ * (space_.transpose() * v)).norm() / s;
  ch.s3h = std::max((sum_xi_A_A(m_, xi) + xi).norm(), (sum_A_xi_A(m_, xi) - xi).norm()) / s;
  for (int a = 0; a < 3; ++a) ch.h = std::max(ch.h, (h_operator(m_, xi, a) - xi).norm() / s);
  ch.three_form = (xi - alternation(xi)).norm() / s;
  ch.cyclic = cyclic_sum(xi).norm() / s;
  ch.kh_three_form = (v - three_forms_ * (three_forms_.transpose() * v)).norm() / s;
  ch.trace = torsion_trace(xi).norm() / s;
  return ch;
}

std::array<DenseTensor, 3> nabla_omega_from(const ModelSpace& m, const DenseTensor& xi,
                                            const std::array<DenseTensor, 3>& lambda) {
  const int d = m.dim();
  require_torsion(xi, d, "nabla_omega_from");
  std::array<DenseTensor, 3> out;
  for (int a = 0; a < 3; ++a) {
    int b = (a + 1) % 3, c = (a + 2) % 3;
    const auto& A = m.structure(a);
    out[a] = slot_act(A, 3, xi) + slot_act(A, 2, xi);
    out[a] += outer(lambda[c], m.omega(b)) - outer(lambda[b], m.omega(c));
  }
  return out;
}

TorsionRecovery torsion_from_nabla_omega(const ModelSpace& m, const std::array<DenseTensor, 3>& nw) {
  const int d = m.dim();
  for (int a = 0; a < 3; ++a) {
    if (nw[a].rank() != 3 || nw[a].dim() != d)
      throw Error("torsion_from_nabla_omega: expected rank-3 tensors over R^" + std::to_string(d));
    if ((nw[a] + permute_slots(nw[a], {0, 2, 1, 3})).norm() > 2e-10 * std::max(nw[a].norm(), 1.0))
      throw Error("torsion_from_nabla_omega: input not antisymmetric in its last two slots");
  }
  TorsionRecovery rec;
  const int n = m.n();
  for (int a = 0; a < 3; ++a) {
    int b = (a + 1) % 3, c = (a + 2) % 3;
    rec.lambda[a] = DenseTensor(1, d);
    const DenseTensor& w = m.omega(c);
    for (int x = 0; x < d; ++x) {
      double s = 0;
      for (int y = 0; y < d; ++y)
        for (int z = 0; z < d; ++z) s += nw[b](x, y, z) * w(y, z);
      rec.lambda[a](x) = s / 2 / (2.0 * n);
    }
  }
  rec.xi = DenseTensor(3, d);
  for (int a = 0; a < 3; ++a) {
    rec.xi.axpy(-0.25, slot_act(m.structure(a), 2, nw[a]));
    rec.xi.axpy(0.5, outer(rec.lambda[a], m.omega(a)));
  }
  auto syn = nabla_omega_from(m, rec.xi, rec.lambda);
  double scale = 0;
  for (int a = 0; a < 3; ++a) scale = std::max(scale, nw[a].norm());
  for (int a = 0; a < 3; ++a)
    rec.residual = std::max(rec.residual, (syn[a] - nw[a]).norm() / std::max(scale, 1e-300));
  if (scale == 0) rec.residual = 0;
  return rec;
}

}  // namespace qhc
