#include "qhc/curvature_from_torsion.hpp"

#include <cmath>

#include "qhc/tensor_ops.hpp"

namespace qhc {

namespace {

// Endomorphism view of a torsion state: E[x] = xi_{e_x}, D[w][x] = (∇̃_{e_w} xi)_{e_x},
// with (xi_X Z)_y = xi(X; y, Z).
struct Ctx {
  int d = 0;
  double n = 0;
  std::array<Mat, 3> A;
  std::vector<Mat> E;
  std::vector<std::vector<Mat>> D;
  std::array<std::vector<Mat>, 3> EA;  // EA[a][y] = xi_{A e_y}
  std::array<Vec, 3> v;                // v[a] = xi_{e_i} A e_i
  Vec tr;                              // xi_{e_i} e_i

  Ctx(const ModelSpace& m, const TorsionState& s) : d(m.dim()), n(m.n()) {
    s.validate(d);
    for (int a = 0; a < 3; ++a) A[a] = m.structure(a).matrix();
    E.assign(d, Mat::Zero(d, d));
    for (int x = 0; x < d; ++x)
      for (int y = 0; y < d; ++y)
        for (int z = 0; z < d; ++z) E[x](y, z) = s.xi(x, y, z);
    D.assign(d, std::vector<Mat>(d, Mat::Zero(d, d)));
    for (int w = 0; w < d; ++w)
      for (int x = 0; x < d; ++x)
        for (int y = 0; y < d; ++y)
          for (int z = 0; z < d; ++z) D[w][x](y, z) = s.dxi(w, x, y, z);
    tr = Vec::Zero(d);
    for (int i = 0; i < d; ++i) tr += E[i].col(i);
    for (int a = 0; a < 3; ++a) {
      EA[a].resize(d);
      for (int y = 0; y < d; ++y) EA[a][y] = xi(A[a].col(y));
      v[a] = Vec::Zero(d);
      for (int i = 0; i < d; ++i) v[a] += E[i] * A[a].col(i);
    }
  }

  Mat xi(const Vec& u) const {
    Mat out = Mat::Zero(d, d);
    for (int x = 0; x < d; ++x)
      if (u(x) != 0) out += u(x) * E[x];
    return out;
  }
  // (∇̃_W xi)_X
  Mat nab(const Vec& w, const Vec& x) const {
    Mat out = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (w(i) != 0 && x(j) != 0) out += w(i) * x(j) * D[i][j];
    return out;
  }
  Vec e(int i) const { return Vec::Unit(d, i); }

  template <class F>
  Mat form(F&& f) const {
    Mat b(d, d);
    for (int x = 0; x < d; ++x)
      for (int y = 0; y < d; ++y) b(x, y) = f(x, y);
    return b;
  }

  // <xi_X e_i, xi_{AY} A e_i>
  Mat B1(int a) const {
    return form([&](int x, int y) { return E[x].cwiseProduct(EA[a][y] * A[a]).sum(); });
  }
  // <xi_X e_i, xi_{A e_i} A Y>
  Mat B2(int a) const {
    return form([&](int x, int y) {
      double s = 0;
      for (int i = 0; i < d; ++i) s += E[x].col(i).dot(EA[a][i] * A[a].col(y));
      return s;
    });
  }
  // <xi_X A Y, xi_{e_i} A e_i>
  Mat B3(int a) const { return form([&](int x, int y) { return (E[x] * A[a].col(y)).dot(v[a]); }); }
  // <xi_X e_i, xi_{e_i} Y>
  Mat B4() const {
    return form([&](int x, int y) {
      double s = 0;
      for (int i = 0; i < d; ++i) s += E[x].col(i).dot(E[i].col(y));
      return s;
    });
  }
  // <xi_X Y, xi_{e_i} e_i>
  Mat B5() const { return form([&](int x, int y) { return E[x].col(y).dot(tr); }); }
  // <xi_{xi_{e_i} X} Y, e_i>
  Mat B6() const {
    std::vector<Mat> xe(d);
    for (int i = 0; i < d; ++i) xe[i] = Mat::Zero(d, d);
    return form([&](int x, int y) {
      double s = 0;
      for (int i = 0; i < d; ++i) s += xi(E[i].col(x)).col(y)(i);
      return s;
    });
  }
  // <X, xi_{xi_{e_i} A e_i} A Y>
  Mat B7(int a) const {
    Mat m = xi(v[a]) * A[a];
    return m;
  }
  // <xi_{e_i} X, xi_{A e_i} A Y>
  Mat B8(int a) const {
    return form([&](int x, int y) {
      double s = 0;
      for (int i = 0; i < d; ++i) s += E[i].col(x).dot(EA[a][i] * A[a].col(y));
      return s;
    });
  }
  // <X, xi_{xi_{e_i} Y} e_i>
  Mat B9() const {
    Mat b = Mat::Zero(d, d);
    for (int y = 0; y < d; ++y)
      for (int i = 0; i < d; ++i) b.col(y) += xi(E[i].col(y)).col(i);
    return b;
  }
  // <X, (∇̃_{e_i} xi)_{A e_i} A Y>
  Mat N(int a) const {
    Mat s = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) s += nab(e(i), A[a].col(i));
    return s * A[a];
  }
  // <(∇̃_X xi)_{e_i} Y, e_i>
  Mat DT1() const {
    return form([&](int x, int y) {
      double s = 0;
      for (int i = 0; i < d; ++i) s += D[x][i](i, y);
      return s;
    });
  }
  // <(∇̃_{e_i} xi)_X Y, e_i>
  Mat DT2() const {
    return form([&](int x, int y) {
      double s = 0;
      for (int i = 0; i < d; ++i) s += D[i][x](i, y);
      return s;
    });
  }
  // <X, (∇̃_{e_i} xi)_Y e_i>
  Mat DT3() const {
    return form([&](int x, int y) {
      double s = 0;
      for (int i = 0; i < d; ++i) s += D[i][y](x, i);
      return s;
    });
  }
  // <X, (∇̃_Y xi)_{e_i} e_i>
  Mat DT4() const {
    return form([&](int x, int y) {
      double s = 0;
      for (int i = 0; i < d; ++i) s += D[y][i](x, i);
      return s;
    });
  }
  // <xi_{e_i} X, xi_{AY} A e_i>
  Mat F1(int a) const {
    return form([&](int x, int y) {
      double s = 0;
      for (int i = 0; i < d; ++i) s += E[i].col(x).dot(EA[a][y] * A[a].col(i));
      return s;
    });
  }
  // <xi_{AX} Y, xi_{e_i} A e_i>
  Mat F2(int a) const { return form([&](int x, int y) { return EA[a][x].col(y).dot(v[a]); }); }
  // <xi_{e_i} X, A xi_{AY} e_i>
  Mat F3(int a) const {
    return form([&](int x, int y) {
      double s = 0;
      for (int i = 0; i < d; ++i) s += E[i].col(x).dot(A[a] * EA[a][y].col(i));
      return s;
    });
  }
  // <X, xi_{xi_{e_i} A Y} A e_i>
  Mat F4(int a) const {
    Mat b = Mat::Zero(d, d);
    for (int y = 0; y < d; ++y)
      for (int i = 0; i < d; ++i) b.col(y) += xi(E[i] * A[a].col(y)) * A[a].col(i);
    return b;
  }
  // <X, (∇̃_{AY} xi)_{e_i} A e_i>
  Mat G1(int a) const {
    Mat b = Mat::Zero(d, d);
    for (int y = 0; y < d; ++y)
      for (int i = 0; i < d; ++i) b.col(y) += nab(A[a].col(y), e(i)) * A[a].col(i);
    return b;
  }
  // <X, (∇̃_{e_i} xi)_{AY} A e_i>
  Mat G3(int a) const {
    Mat b = Mat::Zero(d, d);
    for (int y = 0; y < d; ++y)
      for (int i = 0; i < d; ++i) b.col(y) += nab(e(i), A[a].col(y)) * A[a].col(i);
    return b;
  }
};

DenseTensor to_tensor(const Mat& b) {
  DenseTensor t(2, int(b.rows()));
  for (int x = 0; x < b.rows(); ++x)
    for (int y = 0; y < b.cols(); ++y) t(x, y) = b(x, y);
  return t;
}

Mat sym(const Mat& b) { return 0.5 * (b + b.transpose()); }
Mat skew(const Mat& b) { return 0.5 * (b - b.transpose()); }

// Symmetric and skew projections of Sp(n)Sp(1) type.
struct Proj {
  BilinearProjectors bp;
  explicit Proj(const ModelSpace& m) : bp(m) {}
  DenseTensor l20e(const Mat& b) const { return bp.lambda20e(to_tensor(sym(b))); }
  DenseTensor s2es2h(const Mat& b) const { return bp.s2es2h(to_tensor(sym(b))); }
  DenseTensor l20es2h(const Mat& b) const { return bp.lambda20es2h(to_tensor(skew(b))); }
  double real(const Mat& b) const { return b.trace() / double(b.rows()); }
};

Mat gamma_mat(const DenseTensor& g) {
  int d = g.dim();
  Mat b(d, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) b(x, y) = g(x, y);
  return b;
}

// C'(X, Y, Z, U) = <(xi_X xi_Y - xi_Y xi_X) Z, U>
DenseTensor skew_composition(const DenseTensor& xi) {
  DenseTensor c = compose_torsion(xi, xi);
  return c - swap12(c);
}

// <(∇̃_X xi)_Y Z, U> - <(∇̃_Y xi)_X Z, U>
DenseTensor skew_derivative(const DenseTensor& dx) {
  DenseTensor t = permute_slots(dx, {0, 1, 3, 2});
  return t - swap12(t);
}

DenseTensor pi1_common(const ModelSpace& m, const TorsionState& s) {
  DenseTensor cp = skew_composition(s.xi);
  DenseTensor out = skew_derivative(s.dxi);
  out.axpy(-0.75, cp);
  for (int a = 0; a < 3; ++a) {
    const auto& A = m.structure(a);
    out.axpy(0.25, slot_act(A, 3, slot_act(A, 4, cp)));
  }
  out += b_tilde(s.xi, s.xi);
  return out;
}

// 1/4n sum_A <xi_X e_i, xi_Y A e_i> omega_A(Z, U)
DenseTensor pi1s_torsion(const ModelSpace& m, const Ctx& c) {
  const int d = c.d;
  DenseTensor out(4, d);
  for (int a = 0; a < 3; ++a) {
    Mat q = c.form([&](int x, int y) { return c.E[x].cwiseProduct(c.E[y] * c.A[a]).sum(); });
    out += outer(to_tensor(q / (4 * c.n)), m.omega(a));
  }
  return out;
}

DenseTensor gamma_omega(const ModelSpace& m, const TorsionState& s) {
  DenseTensor out(4, m.dim());
  for (int a = 0; a < 3; ++a) out.axpy(0.5, outer(s.gamma[a], m.omega(a)));
  return out;
}

// sum_A gamma_A(X, AY)
Mat sum_gamma_A(const Ctx& c, const TorsionState& s) {
  Mat g = Mat::Zero(c.d, c.d);
  for (int a = 0; a < 3; ++a) g += gamma_mat(s.gamma[a]) * c.A[a];
  return g;
}

// Everything in 3 Ric besides the gamma term.
Mat ric3_torsion(const Ctx& c) {
  Mat out = 4 * c.DT1() - 4 * c.DT2() - c.B4() - 3 * c.B5() - 4 * c.B6();
  for (int a = 0; a < 3; ++a) out += -c.B1(a) + c.B2(a) + c.B3(a);
  return out;
}

Mat ricq_torsion(const Ctx& c) {
  Mat out = Mat::Zero(c.d, c.d);
  for (int a = 0; a < 3; ++a) out -= c.B1(a);
  return out;
}

DenseTensor gamma_s2es2h(const ModelSpace& m, const Ctx& c) {
  Mat rhs = Mat::Zero(c.d, c.d);
  Mat s1 = Mat::Zero(c.d, c.d), s2 = s1, s3 = s1, s4 = s1, s5 = s1, s6 = s1, s7 = s1;
  for (int a = 0; a < 3; ++a) {
    s1 += c.B1(a);
    s2 += c.F1(a);
    s3 += c.F2(a);
    s4 += c.F3(a);
    s5 -= c.F4(a);
    s6 += c.G1(a);
    s7 += c.G3(a);
  }
  // Cyclic (I, J, K) terms, averaged over both orientations of the frame. The cyclic sum
  // alone is not Sp(1)-invariant off-shell; its orientation-odd part is.
  auto cyclic = [&](int ia, int ja, int ka, double w) {
    const Mat& I = c.A[ia];
    const Mat& J = c.A[ja];
    const Mat& K = c.A[ka];
    for (int x = 0; x < c.d; ++x)
      for (int y = 0; y < c.d; ++y) {
        double t2 = 0, t4 = 0;
        for (int i = 0; i < c.d; ++i) {
          Vec iex = c.E[i] * I.col(x);
          t2 += iex.dot(c.EA[ka][y] * J.col(i));
          t4 += iex.dot(J * c.EA[ka][y].col(i));
        }
        s2(x, y) += w * t2;
        s4(x, y) += w * t4;
        s3(x, y) += w * (c.EA[ia][x] * J.col(y)).dot(c.v[ka]);
      }
    for (int y = 0; y < c.d; ++y)
      for (int i = 0; i < c.d; ++i) {
        s5.col(y) += w * (I * c.xi(c.E[i] * K.col(y)) * J.col(i));
        s6.col(y) -= w * (I * c.nab(K.col(y), c.e(i)) * J.col(i));
        s7.col(y) -= w * (I * c.nab(c.e(i), K.col(y)) * J.col(i));
      }
  };
  for (int a = 0; a < 3; ++a) {
    cyclic(a, (a + 1) % 3, (a + 2) % 3, 0.5);
    cyclic(a, (a + 2) % 3, (a + 1) % 3, -0.5);
  }
  Proj p(m);
  rhs = 2 * s1 - sym(s2) + sym(s3) + sym(s4) + sym(s5) + sym(s6) - sym(s7);
  return (-1.0 / (2 * (c.n - 1))) * p.s2es2h(rhs);
}

}  // namespace

DenseTensor pi1es_operator(const ModelSpace& m, const DenseTensor& a) {
  if (a.rank() != 4) throw Error("pi1es_operator: rank-4 tensor required");
  DenseTensor out = 3.0 * a;
  for (int k = 0; k < 3; ++k) {
    const auto& A = m.structure(k);
    out -= slot_act(A, 3, slot_act(A, 4, a));
  }
  return 0.25 * out;
}

DenseTensor pi1s_operator(const ModelSpace& m, const DenseTensor& a) {
  if (a.rank() != 4) throw Error("pi1s_operator: rank-4 tensor required");
  const int d = m.dim();
  const Eigen::Index d2 = Eigen::Index(d) * d;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> am(a.data(), d2, d2);
  DenseTensor out(4, d);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> om(out.data(), d2, d2);
  for (int k = 0; k < 3; ++k) {
    Eigen::Map<const Vec> w(m.omega(k).data(), d2);
    // c(X, Y) = sum a(X, Y, z, u) omega(z, u) / 4n, a full contraction: |omega|^2 = 4n
    const Vec c = am * w * (1.0 / (4.0 * m.n()));
    om.noalias() += c * w.transpose();
  }
  return out;
}

DenseTensor pi1_operator(const ModelSpace& m, const DenseTensor& a) {
  return pi1es_operator(m, a) - pi1s_operator(m, a);
}

DenseTensor pi1es(const ModelSpace& m, const TorsionState& s) {
  s.validate(m.dim());
  return gamma_omega(m, s) + pi1_common(m, s);
}

DenseTensor pi1s(const ModelSpace& m, const TorsionState& s) {
  Ctx c(m, s);
  return gamma_omega(m, s) + pi1s_torsion(m, c);
}

DenseTensor pi1(const ModelSpace& m, const TorsionState& s) {
  Ctx c(m, s);
  return pi1_common(m, s) - pi1s_torsion(m, c);
}

DenseTensor ric_star_from(const ModelSpace& m, const TorsionState& s, int a) {
  Ctx c(m, s);
  return to_tensor(-c.n * gamma_mat(s.gamma[a]) * c.A[a] - c.B1(a));
}

DenseTensor ricq_from(const ModelSpace& m, const TorsionState& s) {
  Ctx c(m, s);
  return to_tensor(-c.n * sum_gamma_A(c, s) + ricq_torsion(c));
}

DenseTensor ric_from(const ModelSpace& m, const TorsionState& s) {
  Ctx c(m, s);
  return to_tensor((-(c.n + 2) * sum_gamma_A(c, s) + ric3_torsion(c)) / 3.0);
}

DenseTensor ric_minus_ricq(const ModelSpace& m, const TorsionState& s) {
  Ctx c(m, s);
  Mat out = -2 * sum_gamma_A(c, s) + 4 * c.DT1() - 4 * c.DT2() - c.B4() - 3 * c.B5() - 4 * c.B6();
  for (int a = 0; a < 3; ++a) out += c.B2(a) + c.B3(a);
  return to_tensor(out);
}

DenseTensor gamma_s2es2h_from_torsion(const ModelSpace& m, const TorsionState& s) {
  Ctx c(m, s);
  return gamma_s2es2h(m, c);
}

double sum_gamma_omega(const ModelSpace& m, const TorsionState& s) {
  double g = 0;
  for (int a = 0; a < 3; ++a) g += p_form_inner(s.gamma[a], m.omega(a));
  return g;
}

RicciComponents ricci_component_formulas(const ModelSpace& m, const TorsionState& s) {
  Ctx c(m, s);
  Proj p(m);
  const double n = c.n;
  const double G = sum_gamma_omega(m, s);
  const int d = c.d;

  double t_tr = c.tr.squaredNorm();  // <xi_{e_i} e_i, xi_{e_j} e_j>
  double t_swap = 0;                 // <xi_{e_i} e_j, xi_{e_j} e_i>
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t_swap += c.E[i].col(j).dot(c.E[j].col(i));
  double t_nab = 0;  // <(∇̃_{e_i} xi)_{e_j} e_i, e_j>
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t_nab += c.D[i][j](j, i);
  double t_v = 0, t_q = 0, t_r = 0;
  for (int a = 0; a < 3; ++a) {
    t_v += c.v[a].squaredNorm();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        t_q += c.E[i].col(j).dot(c.EA[a][j] * c.A[a].col(i));  // <xi_{e_i} e_j, xi_{A e_j} A e_i>
        t_r += c.E[i].col(j).dot(c.EA[a][i] * c.A[a].col(j));  // <xi_{e_i} e_j, xi_{A e_i} A e_j>
      }
  }
  const double common = -3 * t_tr - 5 * t_swap + 8 * t_nab + t_v + t_q;

  RicciComponents rc;
  rc.ricq_real = 0.5 * (G - t_r / (2 * n));
  rc.ric_real = (common + 2 * (n + 2) * G - t_r) / (12 * n);
  rc.ric_qk = (common + 4 * (5 * n + 1) * G - 10 * t_r) * (n + 2) / (24 * n * (5 * n + 1));
  rc.ric_qkperp_real = (common + (2 / n) * t_r) * 3 / (8 * (5 * n + 1));
  rc.ric_qkperp_real_printed = (common + 2 * t_r) * 3 / (8 * (5 * n + 1));

  Mat b1 = Mat::Zero(d, d), b2 = b1, b3 = b1, b7n = b1, b8 = b1;
  for (int a = 0; a < 3; ++a) {
    b1 += c.B1(a);
    b2 += c.B2(a);
    b3 += c.B3(a);
    b7n += c.B7(a) + c.N(a);
    b8 += c.B8(a);
  }
  const Mat b4 = c.B4(), b5 = c.B5(), b6 = c.B6();
  const Mat dt = c.DT1() - c.DT2();

  rc.ricq_l20e = p.l20e(-sym(b7n) - b8);
  rc.ric_l20e = (1.0 / 3) * p.l20e(-(b4 + 3 * b5 + 4 * b6) - (n + 2) / n * sym(b7n) + b3 + b2 +
                                   (2 / n) * b1 - (n + 2) / n * b8 + 4 * dt);
  const Mat shared = -(b4 + 3 * b5 + 4 * b6) + b3 + b2 + (2 / n) * b1 + 4 * dt;
  rc.ric_l20e_a = (1.0 / 6) * p.l20e(shared - 2 * (2 * n + 1) / n * (sym(b7n) + b8));
  rc.ric_l20e_b = (1.0 / 6) * p.l20e(shared + 2 * (n - 1) / n * (sym(b7n) + b8));

  const DenseTensor gs = gamma_s2es2h(m, c);
  rc.ricq_s2es2h = -n * gs + p.s2es2h(ricq_torsion(c));
  rc.ric_s2es2h = (1.0 / 3) * (-(n + 2) * gs + p.s2es2h(ric3_torsion(c)));
  rc.ric_s2es2h_a = 0.25 * (rc.ric_s2es2h + 3.0 * rc.ricq_s2es2h);
  rc.ric_s2es2h_b = 0.75 * (rc.ric_s2es2h - rc.ricq_s2es2h);

  Mat l = b4 + 3 * b5 + 4 * (c.B9() + c.DT3() - c.DT4()) - (b2 + b3 - b8) - (2 / n) * b1;
  rc.ricq_l20es2h = (n / 2) * (p.l20es2h(l) + p.l20es2h(skew(b7n)));
  return rc;
}

double dstar_theta(const ModelSpace& m, const TorsionState& s) {
  s.validate(m.dim());
  const int d = m.dim();
  const double n = m.n();
  const double ct = -n / (6 * (2 * n + 1) * (n - 1));
  double div = 0;  // sum_W (∇̃_W theta)(W)
  for (int w = 0; w < d; ++w)
    for (int i = 0; i < d; ++i) div += ct * s.dxi(w, i, w, i);
  DenseTensor th = theta(m, s.xi);
  DenseTensor tr = torsion_trace(s.xi);
  return -div - dot(th, tr);
}

ScalarCoefficients printed_scalar_coefficients(int n_) {
  const double n = n_;
  ScalarCoefficients k;
  k.scal_gamma = 2 * (n + 2) / 3;
  k.scal = {7.0 / 3, -1.0 / 3, (2 * n * n + 3 * n + 2) / (3 * n),
            -1.0 / 3, -7.0 / 3, 2 * (4 * n * n + 6 * n + 1) / (3 * n)};
  k.scal_dstar = 16 * (2 * n + 1) * (n + 1) / n;
  k.scalq_gamma = 2 * n;
  k.scal_q = {1, 1, 1, -2, -9, -2.0 / 3};
  return k;
}

ScalarCoefficients trace_scalar_coefficients(int n_) {
  const double n = n_;
  ScalarCoefficients k;
  k.scal_gamma = 2 * (n + 2) / 3;
  k.scal = {7.0 / 3, -2.0 / 3, (2 * n * n + 3 * n + 2) / (3 * n),
            -2.0 / 3, -2.0 / 3, 2 * (4 * n * n - 3 * n - 2) / (3 * n)};
  k.scal_dstar = 16 * (2 * n + 1) * (n - 1) / n;
  k.scalq_gamma = 2 * n;
  k.scal_q = {1, 1, 1, -2, -2, -2};
  return k;
}

TorsionScalars scalars_from_torsion(const TorsionBank& tb, const TorsionState& s) {
  return scalars_from_torsion(tb, s, printed_scalar_coefficients(tb.model().n()));
}

TorsionScalars scalars_from_torsion(const TorsionBank& tb, const TorsionState& s,
                                    const ScalarCoefficients& k) {
  const ModelSpace& m = tb.model();
  TorsionScalars out;
  auto nr = tb.norms(s.xi);
  for (int c = 0; c < 6; ++c) out.norms2[c] = nr[c] * nr[c];
  const double G = sum_gamma_omega(m, s);
  out.dstar_theta = dstar_theta(m, s);
  out.scal = k.scal_gamma * G - k.scal_dstar * out.dstar_theta;
  out.scal_q = k.scalq_gamma * G;
  for (int c = 0; c < 6; ++c) {
    out.scal += k.scal[c] * out.norms2[c];
    out.scal_q += k.scal_q[c] * out.norms2[c];
  }
  return out;
}

TorsionScalars scalars_from_traces(const TorsionBank& tb, const TorsionState& s) {
  const ModelSpace& m = tb.model();
  TorsionScalars out;
  auto nr = tb.norms(s.xi);
  for (int c = 0; c < 6; ++c) out.norms2[c] = nr[c] * nr[c];
  RicciComponents rc = ricci_component_formulas(m, s);
  out.scal = m.dim() * rc.ric_real;
  out.scal_q = m.dim() * rc.ricq_real;
  out.dstar_theta = dstar_theta(m, s);
  return out;
}

std::array<DenseTensor, 3> isquare_rhs(const ModelSpace& m, const TorsionState& s) {
  Ctx c(m, s);
  const int d = c.d;
  std::array<DenseTensor, 3> out;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, k = (a + 2) % 3;
    const Mat& I = c.A[a];
    out[a] = wedge2(s.gamma[k], m.omega(b)) - wedge2(s.gamma[b], m.omega(k));
    // f(W; p, q, r) = <e_q, F_{W,p} e_r>
    DenseTensor fd(4, d), fx(4, d);
    for (int w = 0; w < d; ++w)
      for (int pp = 0; pp < d; ++pp) {
        Mat md = I * c.D[w][pp] - c.D[w][pp] * I;
        Mat mx = c.E[w] * (I * c.E[pp] - c.E[pp] * I);
        for (int q = 0; q < d; ++q)
          for (int r = 0; r < d; ++r) {
            fd(w, pp, q, r) = md(q, r);
            fx(w, pp, q, r) = mx(q, r);
          }
      }
    auto cyc = [](const DenseTensor& f) {
      return f + permute_slots(f, {0, 2, 3, 1}) + permute_slots(f, {0, 3, 1, 2});
    };
    DenseTensor g = cyc(fd) - cyc(fx);
    // g(X; Y, Z, U) - g(Y; X, Z, U) + g(Z; X, Y, U) - g(U; X, Y, Z)
    out[a] += g - permute_slots(g, {1, 0, 2, 3}) + permute_slots(g, {2, 0, 1, 3}) -
              permute_slots(g, {3, 0, 1, 2});
  }
  return out;
}

DenseTensor zeroxixi_rhs(const ModelSpace& m, const TorsionState& s, bool printed_sign) {
  Ctx c(m, s);
  const int d = c.d;
  const double n = c.n;
  const Mat g = Mat::Identity(d, d);
  Mat out = Mat::Zero(d, d);
  for (int a = 0; a < 3; ++a) {
    const Mat ga = gamma_mat(s.gamma[a]);
    const double go = p_form_inner(s.gamma[a], m.omega(a));
    out -= (2 * n - 1) * ga * c.A[a] + (printed_sign ? -go : go) * g;
  }
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, k = (a + 2) % 3;
    out += p_form_inner(s.gamma[b], m.omega(k)) * c.A[a] - c.A[b].transpose() * gamma_mat(s.gamma[a]) * c.A[k];
  }
  for (int a = 0; a < 3; ++a) {
    Mat t = -2 * c.B1(a) - c.F3(a) + c.F1(a) + c.B7(a) + c.B8(a) + c.F4(a) + c.N(a) + c.G3(a) - c.G1(a);
    // <X, xi_{AY} xi_{e_i} A e_i>
    for (int y = 0; y < d; ++y) t.col(y) += c.EA[a][y] * c.v[a];
    out += t;
  }
  for (int a = 0; a < 3; ++a) {
    const Mat& I = c.A[a];
    const Mat& J = c.A[(a + 1) % 3];
    const Mat& K = c.A[(a + 2) % 3];
    const int j = (a + 1) % 3, k = (a + 2) % 3;
    for (int x = 0; x < d; ++x)
      for (int y = 0; y < d; ++y) {
        double s1 = 0;
        for (int i = 0; i < d; ++i) {
          Vec eix = c.E[i] * I.col(x);
          s1 += eix.dot(K * c.EA[j][y].col(i)) - eix.dot(c.EA[j][y] * K.col(i)) +
                eix.dot(c.EA[k][i] * J.col(y));
        }
        s1 -= I.col(x).dot(c.EA[j][y] * c.v[k]);
        out(x, y) += s1;
      }
    Mat t = Mat::Zero(d, d);
    for (int y = 0; y < d; ++y) {
      t.col(y) -= I * c.xi(c.v[k]) * J.col(y);
      for (int i = 0; i < d; ++i) {
        t.col(y) += I * c.xi(c.E[i] * J.col(y)) * K.col(i);
        t.col(y) -= I * c.nab(J.col(y), c.e(i)) * K.col(i);
        t.col(y) += I * c.nab(c.e(i), J.col(y)) * K.col(i);
        t.col(y) -= I * c.nab(c.e(i), K.col(i)) * J.col(y);
      }
    }
    out += t;
  }
  return to_tensor(out);
}

DdOmegaResidual dd_omega_residual(const ModelSpace& m, const TorsionState& s) {
  DdOmegaResidual r;
  for (const auto& t : isquare_rhs(m, s)) r.isquare = std::max(r.isquare, t.norm());
  r.zeroxixi = zeroxixi_rhs(m, s).norm();
  return r;
}

GammaKernel gamma_kernel(const ModelSpace& m, double rel_tol) {
  const int d = m.dim();
  const int p = d * (d - 1) / 2;
  std::vector<std::array<int, 4>> quads;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      for (int k = j + 1; k < d; ++k)
        for (int l = k + 1; l < d; ++l) quads.push_back({i, j, k, l});
  const int q = int(quads.size());
  Mat op = Mat::Zero(3 * q, 3 * p);
  int col = 0;
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j, ++col) {
        DenseTensor e(2, d, SymmetryTag::form);
        e(i, j) = 1 / std::sqrt(2.0);
        e(j, i) = -1 / std::sqrt(2.0);
        // rows: (I,J), (J,K), (K,I) equalities gamma_A ∧ omega_B - gamma_B ∧ omega_A
        for (int r = 0; r < 3; ++r) {
          const int A = r, B = (r + 1) % 3;
          DenseTensor w(4, d);
          if (a == A) w += wedge2(e, m.omega(B));
          if (a == B) w -= wedge2(e, m.omega(A));
          if (a != A && a != B) continue;
          for (int t = 0; t < q; ++t) {
            const auto& x = quads[t];
            op(r * q + t, col) = w(x[0], x[1], x[2], x[3]);
          }
        }
      }
  GammaKernel gk;
  Eigen::JacobiSVD<Mat> svd(op, Eigen::ComputeFullV);
  Vec sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  gk.singular_values = sv / std::max(smax, 1e-300);
  int rank = 0;
  while (rank < sv.size() && gk.singular_values(rank) > rel_tol) ++rank;
  gk.dim = int(op.cols()) - rank;
  gk.basis = svd.matrixV().rightCols(gk.dim);
  const double smallest_kept = rank > 0 ? gk.singular_values(rank - 1) : 0.0;
  const double largest_dropped = rank < sv.size() ? gk.singular_values(rank) : 0.0;
  gk.gap = smallest_kept / std::max(largest_dropped, 1e-300);
  // coordinates of (omega_I, omega_J, omega_K)
  Vec w = Vec::Zero(3 * p);
  col = 0;
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j, ++col) w(col) = std::sqrt(2.0) * m.omega(a)(i, j);
  if (gk.dim > 0) gk.omega_alignment = (gk.basis.transpose() * w).norm() / w.norm();
  return gk;
}

QkEinstein qk_einstein_verify(const ProjectorBank& bank, const CurvatureTensor& r) {
  const ModelSpace& m = bank.model();
  const double n = m.n();
  QkEinstein out;
  const double scale = std::max(r.tensor().norm(), 1e-300);
  out.perp = bank.project(r.tensor(), "QKperp").norm() / scale;
  if (r.tensor().norm() > 0 && out.perp > 1e-9)
    throw Error("qk_einstein_verify: curvature has a QK-perp component of relative size " +
                std::to_string(out.perp));
  const DenseTensor ric = ricci(r);
  out.c = trace2(ric) / (m.dim() * (n + 2));
  const DenseTensor& g = m.metric();
  const double rs = std::max(ric.norm(), scale);
  out.ric = (ric - (n + 2) * out.c * g).norm() / rs;
  for (int a = 0; a < 3; ++a)
    out.ric_star = std::max(out.ric_star, (ricci_star(m, r, a) - n * out.c * g).norm() / rs);
  out.ric_q = (ricci_q(m, r) - 3 * n * out.c * g).norm() / rs;
  DenseTensor real = bank.project(r.tensor(), "R_a") + bank.project(r.tensor(), "R_b");
  DenseTensor expect = (out.c / 8) * (m.pi2() + 2.0 * m.pi1());
  out.real_part = (real - expect).norm() / scale;
  if (r.tensor().norm() == 0) out = QkEinstein{};
  return out;
}

}  // namespace qhc
