#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>

#include "qhc/model_space.hpp"
#include "qhc/rng.hpp"
#include "qhc/tensor_file.hpp"
#include "qhc/tensor_ops.hpp"

using namespace qhc;

namespace {

DenseTensor random_form(int rank, int dim, Rng& rng) {
  return alternation(random_tensor(rank, dim, rng));
}

}  // namespace

TEST(DenseTensor, ShapeAndArithmetic) {
  DenseTensor t(3, 4);
  EXPECT_EQ(t.size(), 64u);
  t(1, 2, 3) = 2.0;
  DenseTensor u = 3.0 * t - t;
  EXPECT_DOUBLE_EQ(u(1, 2, 3), 4.0);
  EXPECT_DOUBLE_EQ(dot(u, t), 8.0);
  EXPECT_THROW(t += DenseTensor(2, 4), Error);
}

TEST(SlotAct, DefinitionOnMetric) {
  const ModelSpace m = build_model(2);
  const auto& I = m.structure(qI);
  // I_(1) omega_I = -g and I_(1) g = -omega_I^T, i.e. -g(Ix, y).
  EXPECT_LT(rel_diff(slot_act(I, 1, m.omega(qI)), -1.0 * m.metric()), 1e-15);
  DenseTensor expected(2, m.dim());
  for (int x = 0; x < m.dim(); ++x)
    for (int y = 0; y < m.dim(); ++y) expected(x, y) = -m.omega(qI)(y, x);
  EXPECT_LT(rel_diff(slot_act(I, 1, m.metric()), expected), 1e-15);
}

TEST(SlotAct, SquareIsMinusIdentityAndSlotsCommute) {
  const ModelSpace m = build_model(2);
  Rng rng(1);
  const DenseTensor t = random_tensor(4, m.dim(), rng);
  for (int a = 0; a < 3; ++a)
    for (int s = 1; s <= 4; ++s)
      EXPECT_LT(rel_diff(slot_act(m.structure(a), s, slot_act(m.structure(a), s, t)), -1.0 * t), 1e-14);
  const auto& I = m.structure(qI);
  const auto& J = m.structure(qJ);
  EXPECT_LT(rel_diff(slot_act(I, 1, slot_act(J, 3, t)), slot_act(J, 3, slot_act(I, 1, t))), 1e-14);
  EXPECT_THROW(slot_act(I, 5, t), Error);
  EXPECT_THROW(slot_act(I, 0, t), Error);
}

TEST(SlotAct, AdjointUnderCurvatureInner) {
  const ModelSpace m = build_model(2);
  Rng rng(2);
  for (int trial = 0; trial < 4; ++trial) {
    const DenseTensor b = random_tensor(4, m.dim(), rng);
    const DenseTensor c = random_tensor(4, m.dim(), rng);
    for (int a = 0; a < 3; ++a)
      for (int s = 1; s <= 4; ++s) {
        const double lhs = curvature_inner(slot_act(m.structure(a), s, b), c);
        const double rhs = -curvature_inner(b, slot_act(m.structure(a), s, c));
        EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(lhs) + 1e-12);
      }
  }
}

TEST(FullAct, MetricAndKahlerForms) {
  const ModelSpace m = build_model(2);
  for (int a = 0; a < 3; ++a) EXPECT_LT(rel_diff(full_act(m.structure(a), m.metric()), m.metric()), 1e-15);
  EXPECT_LT(rel_diff(full_act(m.structure(qI), m.omega(qI)), m.omega(qI)), 1e-15);
  EXPECT_LT(rel_diff(full_act(m.structure(qI), m.omega(qJ)), -1.0 * m.omega(qJ)), 1e-15);
}

TEST(FormInner, KahlerFormsAndPositivity) {
  for (int n : {2, 3}) {
    const ModelSpace m = build_model(n);
    EXPECT_NEAR(p_form_inner(m.omega(qI), m.omega(qI)), 2.0 * n, 1e-12);
    EXPECT_NEAR(p_form_inner(m.omega(qI), m.omega(qJ)), 0.0, 1e-12);
  }
  Rng rng(3);
  const DenseTensor a = random_form(3, 8, rng);
  const DenseTensor b = random_form(3, 8, rng);
  EXPECT_GT(p_form_inner(a, a), 0.0);
  EXPECT_NEAR(p_form_inner(a, b), p_form_inner(b, a), 1e-12);
  EXPECT_DOUBLE_EQ(p_form_inner(DenseTensor(3, 8), DenseTensor(3, 8)), 0.0);
  EXPECT_THROW(p_form_inner(a, random_form(2, 8, rng)), Error);
  EXPECT_THROW(p_form_inner(random_tensor(2, 8, rng), random_tensor(2, 8, rng)), Error);
}

TEST(Products, OdotAndWedge) {
  Rng rng(4);
  const DenseTensor b = random_form(2, 8, rng);
  const DenseTensor c = random_form(2, 8, rng);
  EXPECT_LT(rel_diff(odot(b, c), odot(c, b)), 1e-15);
  EXPECT_LT(rel_diff(odot(b, -1.0 * b), -1.0 * odot(b, b)), 1e-15);
  const DenseTensor w = wedge2(b, c);
  EXPECT_TRUE(is_form(w));
  EXPECT_LT(rel_diff(w, wedge2(c, b)), 1e-14);
  // Unit shuffle convention: (e1∧e2)∧(e3∧e4) has entry 1 at (0,1,2,3).
  DenseTensor e12(2, 8), e34(2, 8);
  e12(0, 1) = 1, e12(1, 0) = -1, e34(2, 3) = 1, e34(3, 2) = -1;
  EXPECT_DOUBLE_EQ(wedge2(e12, e34)(0, 1, 2, 3), 1.0);
  EXPECT_DOUBLE_EQ(wedge(e12, e34)(1, 0, 2, 3), -1.0);
}

TEST(Alternation, Idempotent) {
  Rng rng(5);
  const DenseTensor t = random_tensor(3, 6, rng);
  const DenseTensor a = alternation(t);
  EXPECT_TRUE(is_form(a));
  EXPECT_LT(rel_diff(alternation(a), a), 1e-14);
  EXPECT_GT(form_defect(t), 0.1);
}

TEST(Skewing, SkewAAndBTilde) {
  Rng rng(6);
  DenseTensor t = random_tensor(4, 8, rng);
  const DenseTensor s = skew_a(t);
  EXPECT_LT(rel_diff(skew_a(s), s), 1e-15);
  EXPECT_LT(rel_diff(swap12(s), -1.0 * s), 1e-15);

  DenseTensor xi = random_tensor(3, 8, rng);
  xi = xi - permute_slots(xi, {0, 2, 1, 3});
  const DenseTensor bt = b_tilde(xi, xi);
  EXPECT_LT(rel_diff(swap12(bt), -1.0 * bt), 1e-14);
  EXPECT_DOUBLE_EQ(b_tilde(xi, DenseTensor(3, 8)).norm(), 0.0);

  // Definition check on one entry: B(X,Y,Z,U) = <xi_{zeta_X Y} Z - xi_{zeta_Y X} Z, U>, with
  // <U, xi_X Z> = xi(X; U, Z) and zeta_X Y = sum_k zeta(X; k, Y) e_k.
  const DenseTensor zeta = random_tensor(3, 8, rng);
  const int X = 1, Y = 4, Z = 2, U = 7;
  double v = 0;
  for (int k = 0; k < 8; ++k) v += zeta(X, k, Y) * xi(k, U, Z) - zeta(Y, k, X) * xi(k, U, Z);
  EXPECT_NEAR(b_tilde(xi, zeta)(X, Y, Z, U), v, 1e-12);
}

TEST(ComposeTorsion, MatchesEndomorphismComposition) {
  Rng rng(7);
  const int d = 8;
  const DenseTensor xi = random_tensor(3, d, rng);
  const DenseTensor zeta = random_tensor(3, d, rng);
  const DenseTensor c = compose_torsion(xi, zeta);
  const int X = 3, Y = 5, Z = 0, U = 6;
  double v = 0;  // <xi_X zeta_Y Z, U> = sum_k zeta(Y; k, Z) xi(X; U, k)
  for (int k = 0; k < d; ++k) v += zeta(Y, k, Z) * xi(X, U, k);
  EXPECT_NEAR(c(X, Y, Z, U), v, 1e-12);
}

TEST(TensorFile, RoundTripAndValidation) {
  Rng rng(8);
  TensorFile f{2, TensorFile::kCertified, random_tensor(3, 8, rng)};
  const auto path = (std::filesystem::temp_directory_path() / "qhc_roundtrip.qht").string();
  write_tensor_file(path, f);
  const TensorFile g = read_tensor_file(path);
  EXPECT_EQ(g.n, 2);
  EXPECT_TRUE(g.certified());
  EXPECT_EQ(g.tensor.rank(), 3);
  EXPECT_EQ(g.tensor.values(), f.tensor.values());
  EXPECT_EQ(std::filesystem::file_size(path), 4u + 1 + 1 + 2 + 4 + 3 * 4 + 512 * 8);

  {
    std::FILE* h = std::fopen(path.c_str(), "r+b");
    std::fputs("QHT2", h);
    std::fclose(h);
  }
  EXPECT_THROW(read_tensor_file(path), Error);
  std::filesystem::resize_file(path, 10);
  EXPECT_THROW(read_tensor_file(path), Error);
  EXPECT_THROW(read_tensor_file(path + ".missing"), Error);
  EXPECT_THROW(write_tensor_file(path, {3, 0, random_tensor(2, 8, rng)}), Error);
  std::filesystem::remove(path);
}
