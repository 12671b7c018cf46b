#include <numeric>

#include <gtest/gtest.h>

#include "qhc/tensor_ops.hpp"
#include "support.hpp"

using namespace qhc;
using namespace qhc::testing;

namespace {

// Weyl dimension of the Sp(n) module with highest weight lam in the epsilon basis.
long weyl_dim(std::vector<int> lam, int n) {
  if (int(lam.size()) > n) return 0;
  lam.resize(n, 0);
  double r = 1;
  auto rho = [&](int i) { return n - i; };
  for (int i = 0; i < n; ++i) {
    const double li = lam[i] + rho(i);
    for (int j = i + 1; j < n; ++j) {
      const double lj = lam[j] + rho(j);
      r *= (li - lj) * (li + lj) / double((rho(i) - rho(j)) * (rho(i) + rho(j)));
    }
    r *= li / rho(i);
  }
  return std::lround(r);
}

long expected_rank(const std::string& name, int n) {
  struct Entry {
    const char* name;
    std::vector<int> lam;
    int h;  // dim of the S^k H factor
  };
  static const std::vector<Entry> table = {
      {"S4E", {4}, 1},          {"V22", {2, 2}, 1},       {"L20E_a", {1, 1}, 1}, {"R_a", {}, 1},
      {"L40E", {1, 1, 1, 1}, 1}, {"L20E_b", {1, 1}, 1},   {"R_b", {}, 1},        {"V31S2H", {3, 1}, 3},
      {"S2ES2H_a", {2}, 3},     {"V211S2H", {2, 1, 1}, 3}, {"S2ES2H_b", {2}, 3}, {"L20ES2H", {1, 1}, 3},
      {"V22S4H", {2, 2}, 5},    {"L20ES4H", {1, 1}, 5},   {"S4H", {}, 5}};
  for (const auto& e : table)
    if (name == e.name) {
      // The second copy of Lambda^2_0 E sits in Lambda^4 E and needs n >= 3.
      if (name == "L20E_b" && n < 3) return 0;
      return e.h * weyl_dim(e.lam, n);
    }
  ADD_FAILURE() << "unknown component " << name;
  return -1;
}

DenseTensor transpose2(const DenseTensor& b) { return permute_slots(b, {1, 0, 2, 3}); }

DenseTensor random_sym(int d, Rng& rng) { return sym2(random_tensor(2, d, rng)); }
DenseTensor random_form(int d, Rng& rng) {
  const DenseTensor b = random_tensor(2, d, rng);
  return 0.5 * (b - transpose2(b));
}

DenseTensor apply_pair(const DenseTensor& b, const Mat& A) {
  const int d = b.dim();
  DenseTensor out(2, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) {
      double s = 0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += A(i, x) * A(j, y) * b(i, j);
      out(x, y) = s;
    }
  return out;
}

double in_component(const ProjectorBank& bank, const DenseTensor& r, const std::string& name) {
  return rel_diff(bank.project(r, name), r);
}

}  // namespace

TEST(Ranks, MatchWeylDimensions) {
  for (int n : {2, 3}) {
    const ProjectorBank& bank = banks(n).bank;
    long total = 0;
    for (const auto& name : fine_component_names()) {
      EXPECT_EQ(bank.rank(name), expected_rank(name, n)) << name << " n=" << n;
      total += bank.rank(name);
    }
    EXPECT_EQ(total, dim_R_formula(n));
    EXPECT_EQ(bank.rank("QK"), dim_QK_formula(n));
    EXPECT_EQ(bank.rank("L6") + bank.rank("L2") + bank.rank("Lm6"), dim_R_formula(n));
  }
}

TEST(Ranks, ClosedForms) {
  EXPECT_EQ(dim_R_formula(2), 336);
  EXPECT_EQ(dim_R_formula(3), 1716);
  EXPECT_EQ(dim_QK_formula(2), 36);
  // S^4 E plus the line of the quaternionic projective space.
  for (int n = 2; n <= 6; ++n) EXPECT_EQ(dim_QK_formula(n), weyl_dim({4}, n) + 1);
}

TEST(Audit, PassesAtDefaultTolerance) {
  for (int n : {2, 3}) {
    const DecompositionReport rep = dimension_audit(banks(n).bank);
    EXPECT_TRUE(rep.pass());
    for (const auto& f : rep.failures()) ADD_FAILURE() << f;
  }
}

TEST(Projectors, OrthogonalIdempotentAndComplete) {
  const ProjectorBank& bank = banks(2).bank;
  const auto& names = fine_component_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Mat& a = bank.basis(names[i]);
    if (!a.cols()) continue;
    EXPECT_LT((a.transpose() * a - Mat::Identity(a.cols(), a.cols())).norm(), 1e-10) << names[i];
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      const Mat& b = bank.basis(names[j]);
      if (b.cols()) EXPECT_LT((a.transpose() * b).norm(), 1e-9) << names[i] << " " << names[j];
    }
  }
  const CurvatureTensor r = random_curvature(bank.model(), 31);
  DenseTensor sum(4, r.dim());
  for (const auto& name : names) {
    const DenseTensor p = bank.project(r.tensor(), name);
    if (bank.rank(name)) EXPECT_LT(rel_diff(bank.project(p, name), p), 1e-10) << name;
    sum += p;
  }
  EXPECT_LT(rel_diff(sum, r.tensor()), 1e-10);
  EXPECT_THROW(bank.basis("nonsense"), Error);
}

TEST(Projectors, Equivariant) {
  const Banks& b = banks(2);
  Rng rng(17);
  for (int trial = 0; trial < 2; ++trial) {
    const Mat g = random_spsp(b.m, rng);
    ASSERT_LT((g.transpose() * g - Mat::Identity(8, 8)).norm(), 1e-10);
    const DenseTensor r = random_curvature(b.m, 40 + trial).tensor();
    const DenseTensor gr = act(g, r);
    for (const auto& name : fine_component_names()) {
      if (!b.bank.rank(name)) continue;
      EXPECT_LT(rel_diff(b.bank.project(gr, name), act(g, b.bank.project(r, name))), 1e-9) << name;
    }
    for (const char* name : {"QK", "QKperp"})
      EXPECT_LT(rel_diff(b.bank.project(gr, name), act(g, b.bank.project(r, name))), 1e-9) << name;
  }
}

TEST(Projectors, EigenvaluesOfBlocks) {
  const Banks& b = banks(2);
  const CurvatureTensor r = random_curvature(b.m, 50);
  const std::vector<std::tuple<std::string, double, double>> expect = {
      {"V22", 6, 0},       {"R_a", 6, 0},        {"L20E_a", 6, 0},   {"R_b", 6, -12},
      {"V31S2H", 2, 4},    {"S2ES2H_a", 2, 4},   {"S2ES2H_b", 2, -4}, {"L20ES2H", 2, -4},
      {"V22S4H", -6, 0},   {"L20ES4H", -6, 0},   {"S4H", -6, 0},      {"S4E", 6, 12}};
  for (const auto& [name, l, ls] : expect) {
    const DenseTensor p = b.bank.project(r.tensor(), name);
    ASSERT_GT(p.norm(), 1e-6) << name;
    EXPECT_LT(rel_diff(L_map(b.m, p), l * p), 1e-9) << name;
    EXPECT_LT((L_sigma_map(b.m, p) - ls * p).norm(), 1e-9 * p.norm()) << name;
  }
  // S^4 E carries no Ricci trace.
  const DenseTensor s = b.bank.project(r.tensor(), "S4E");
  EXPECT_LT(ricci(CurvatureTensor::certify(s, 1e-9)).norm(), 1e-9 * s.norm());
}

TEST(Constructors, CanonicalValues) {
  const ModelSpace m = build_model(2);
  const DenseTensor g = m.metric();
  EXPECT_LT(rel_diff(psi_map(g, g), 2.0 * m.pi1()), 1e-14);
  EXPECT_LT(rel_diff(vartheta_map(m, g, g), 4.0 * m.pi2()), 1e-14);
  Rng rng(3);
  EXPECT_THROW(psi_map(random_form(8, rng), g), Error);
  EXPECT_THROW(phi_map(g, random_form(8, rng)), Error);
  EXPECT_THROW(mixed_act(m.structure(qI), random_tensor(3, 8, rng), 1), Error);
}

TEST(Constructors, SymmetricTwoCopiesAndRicci) {
  for (int n : {2, 3}) {
    const Banks& b = banks(n);
    const BilinearProjectors bp(b.m);
    const DenseTensor g = b.m.metric();
    Rng rng(60 + n);

    const DenseTensor e = bp.lambda20e(random_sym(b.m.dim(), rng));
    const DenseTensor ra = vartheta_map(b.m, e, g) + 12.0 * psi_map(e, g);
    const DenseTensor rb = vartheta_map(b.m, e, g) - 12.0 * psi_map(e, g);
    EXPECT_LT(in_component(b.bank, ra, "L20E_a"), 1e-9);
    const auto ca = CurvatureTensor::certify(ra, 1e-9);
    EXPECT_LT(rel_diff(ricci(ca), 48.0 * (n + 1) * e), 1e-10);
    EXPECT_LT(rel_diff(ricci_q(b.m, ca), ricci(ca)), 1e-10);
    if (n == 2) {
      EXPECT_LT(rb.norm(), 1e-10 * ra.norm());
    } else {
      EXPECT_LT(in_component(b.bank, rb, "L20E_b"), 1e-9);
      const auto cb = CurvatureTensor::certify(rb, 1e-9);
      EXPECT_LT(rel_diff(ricci(cb), -48.0 * (n - 2) * e), 1e-10);
      EXPECT_LT(rel_diff(ricci_q(b.m, cb), -1.0 * ricci(cb)), 1e-10);
    }

    const DenseTensor s = bp.s2es2h(random_sym(b.m.dim(), rng));
    const DenseTensor sa = vartheta_map(b.m, s, g) + 4.0 * psi_map(s, g);
    const DenseTensor sb = vartheta_map(b.m, s, g) - 12.0 * psi_map(s, g);
    EXPECT_LT(in_component(b.bank, sa, "S2ES2H_a"), 1e-9);
    EXPECT_LT(in_component(b.bank, sb, "S2ES2H_b"), 1e-9);
    const auto csa = CurvatureTensor::certify(sa, 1e-9);
    const auto csb = CurvatureTensor::certify(sb, 1e-9);
    EXPECT_LT(rel_diff(ricci(csa), 16.0 * (n + 1) * s), 1e-10);
    EXPECT_LT(rel_diff(ricci(csb), -48.0 * (n - 1) * s), 1e-10);
    EXPECT_LT(rel_diff(L_sigma_map(b.m, sa), 4.0 * sa), 1e-10);
    EXPECT_LT(rel_diff(L_sigma_map(b.m, sb), -4.0 * sb), 1e-10);
  }
}

TEST(Constructors, FormComponentsAndQRicci) {
  for (int n : {2, 3}) {
    const Banks& b = banks(n);
    const BilinearProjectors bp(b.m);
    Rng rng(70 + n);
    const DenseTensor f = bp.lambda20es2h(random_form(b.m.dim(), rng));
    const DenseTensor r = lambda20es2h_map(b.m, f);
    EXPECT_LT(in_component(b.bank, r, "L20ES2H"), 1e-9);
    const auto c = CurvatureTensor::certify(r, 1e-9);
    EXPECT_LT(rel_diff(ricci_q(b.m, c), -16.0 * n * f), 1e-10);
    EXPECT_LT(ricci(c).norm(), 1e-10 * r.norm());
  }
}

TEST(Constructors, Sym4HAndLocalRicci) {
  const Banks& b = banks(2);
  const ModelSpace& m = b.m;
  Rng rng(80);
  // b_A = sum_B lambda_{BA} omega_B with sum_A A_(2) b_A = 0, i.e. lambda symmetric traceless.
  Eigen::Matrix3d lam;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) lam(i, j) = rng.normal();
  lam = 0.5 * (lam + lam.transpose()).eval();
  lam -= lam.trace() / 3 * Eigen::Matrix3d::Identity();
  std::array<DenseTensor, 3> bs;
  for (int a = 0; a < 3; ++a) {
    bs[a] = DenseTensor(2, m.dim());
    for (int c = 0; c < 3; ++c) bs[a] += lam(c, a) * m.omega(c);
  }
  DenseTensor constraint(2, m.dim());
  for (int a = 0; a < 3; ++a) constraint += slot_act(m.structure(a), 2, bs[a]);
  ASSERT_LT(constraint.norm(), 1e-12);
  const DenseTensor r = triple_map(m, bs);
  EXPECT_LT(in_component(b.bank, r, "S4H"), 1e-9);
  const auto c = CurvatureTensor::certify(r, 1e-9);
  EXPECT_LT(ricci_q(m, c).norm(), 1e-10 * r.norm());
  // The S^2 H parameters carry their own omega_A trace, hence 4(2n+1) rather than 4(n+1).
  for (int a = 0; a < 3; ++a)
    EXPECT_LT(rel_diff(ricci_star(m, c, a), 4.0 * (2 * m.n() + 1) * slot_act(m.structure(a), 2, bs[a])), 1e-10);
}

TEST(Constructors, L20ES4HLocalRicci) {
  const Banks& b = banks(2);
  const ModelSpace& m = b.m;
  const BilinearProjectors bp(m);
  Rng rng(81);
  // Solve sum_A A_(2) b_A = 0 on a random triple by projecting onto the kernel.
  const int d = m.dim(), dd = d * d;
  Mat basis(dd, 0);
  {
    Mat cols(dd, dd);
    for (int k = 0; k < dd; ++k) {
      DenseTensor e(2, d);
      e[k] = 1;
      const DenseTensor p = bp.lambda20es2h(0.5 * (e - transpose2(e)));
      cols.col(k) = Eigen::Map<const Vec>(p.data(), dd);
    }
    Eigen::JacobiSVD<Mat> svd(cols, Eigen::ComputeThinU);
    int r = 0;
    while (r < svd.singularValues().size() && svd.singularValues()[r] > 1e-10) ++r;
    basis = svd.matrixU().leftCols(r);
  }
  ASSERT_EQ(basis.cols(), 15);
  const int k = int(basis.cols());
  Mat op(dd, 3 * k);
  for (int a = 0; a < 3; ++a)
    for (int j = 0; j < k; ++j) {
      DenseTensor e(2, d);
      Eigen::Map<Vec>(e.data(), dd) = basis.col(j);
      const DenseTensor ae = slot_act(m.structure(a), 2, e);
      op.col(a * k + j) = Eigen::Map<const Vec>(ae.data(), dd);
    }
  Eigen::FullPivLU<Mat> lu(op);
  const Mat ker = lu.kernel();
  ASSERT_GT(ker.cols(), 0);
  Vec coef = ker * Vec::NullaryExpr(ker.cols(), [&] { return rng.normal(); });
  std::array<DenseTensor, 3> bs;
  for (int a = 0; a < 3; ++a) {
    bs[a] = DenseTensor(2, d);
    Eigen::Map<Vec>(bs[a].data(), dd) = basis * coef.segment(a * k, k);
  }
  const DenseTensor r = triple_map(m, bs);
  EXPECT_LT(in_component(b.bank, r, "L20ES4H"), 1e-9);
  const auto c = CurvatureTensor::certify(r, 1e-9);
  EXPECT_LT(ricci_q(m, c).norm(), 1e-10 * r.norm());
  // Positive with omega_A(x, y) = <x, Ay>; the opposite orientation of omega_A flips it.
  for (int a = 0; a < 3; ++a)
    EXPECT_LT(rel_diff(ricci_star(m, c, a), 4.0 * (m.n() + 1) * slot_act(m.structure(a), 2, bs[a])), 1e-10);
}

TEST(Ricci, RelationsOnComponentSums) {
  const Banks& b = banks(3);
  const CurvatureTensor r = random_curvature(b.m, 90);
  auto part = [&](std::vector<std::string> names) {
    DenseTensor out(4, b.m.dim());
    for (const auto& nm : names) out += b.bank.project(r.tensor(), nm);
    return CurvatureTensor::certify(out, 1e-9);
  };
  const auto a = part({"V22", "L20E_a", "R_a"});
  const auto l4 = part({"L40E", "L20E_b", "R_b"});
  const auto u31 = part({"V31S2H", "S2ES2H_a"});
  const auto u211 = part({"V211S2H", "S2ES2H_b", "L20ES2H"});
  EXPECT_LT(rel_diff(ricci(a), ricci_q(b.m, a)), 1e-9);
  EXPECT_LT(rel_diff(ricci(l4), -1.0 * ricci_q(b.m, l4)), 1e-9);
  EXPECT_LT(rel_diff(ricci(u31), ricci_q(b.m, u31)), 1e-9);
  const DenseTensor q = ricci_q(b.m, u211);
  EXPECT_LT(rel_diff(ricci(u211), -1.5 * (q + transpose2(q))), 1e-9);
  for (int s = 0; s < 3; ++s) {
    const Mat& A = b.m.structure(s).matrix();
    EXPECT_LT(rel_diff(apply_pair(ricci(a), A), ricci(a)), 1e-9);
    EXPECT_LT(rel_diff(apply_pair(ricci(l4), A), ricci(l4)), 1e-9);
  }
  EXPECT_LT(ricci(part({"V22", "S4E", "V22S4H"})).norm(), 1e-9 * r.tensor().norm());
  EXPECT_LT(ricci_q(b.m, part({"V22S4H", "L20ES4H", "S4H"})).norm(), 1e-9 * r.tensor().norm());
}

TEST(QuaternionKaehler, SplitAndRicciScalars) {
  for (int n : {2, 3}) {
    const Banks& b = banks(n);
    const QkSplit q = qk_split(b.bank);
    EXPECT_EQ(q.qk.cols(), dim_QK_formula(n));
    EXPECT_EQ(q.qk.cols() + q.qkperp.cols(), dim_R_formula(n));
    EXPECT_LT((q.qk.transpose() * q.qkperp).norm(), 1e-9);
    // pi_2 + 2 pi_1 is the curvature of quaternionic projective space.
    const DenseTensor hp = b.m.pi2() + 2.0 * b.m.pi1();
    EXPECT_LT(in_component(b.bank, hp, "QK"), 1e-10);
    EXPECT_LT(in_component(b.bank, b.bank.project(hp, "S4E") , "S4E"), 1e-10);
    const CurvatureTensor r = random_curvature(b.m, 100 + n);
    const RicQkScalars s = ric_qk_scalars(b.bank, r);
    EXPECT_LT(s.residual_qk, 1e-9);
    EXPECT_LT(s.residual_perp, 1e-9);
    const auto qk = CurvatureTensor::certify(b.bank.project(r.tensor(), "QK"), 1e-9);
    const DenseTensor ric = ricci(qk);
    const double c = trace2(ric) / b.m.dim();
    EXPECT_LT(rel_diff(ric, c * b.m.metric()), 1e-9);
    EXPECT_LT(rel_diff(s.ric_qk, ric), 1e-9);
  }
}
