#include "qhc/curvature_space.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "qhc/rng.hpp"
#include "qhc/tensor_ops.hpp"

namespace qhc {

double CurvatureDefects::max() const { return std::max({pair_antisym, pair_exchange, bianchi}); }

CurvatureDefects curvature_defects(const DenseTensor& t) {
  if (t.rank() != 4) throw Error("curvature check: rank-4 tensor required");
  const int d = t.dim();
  double a = 0, e = 0, b = 0;
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z)
        for (int u = 0; u < d; ++u) {
          const double v = t(x, y, z, u);
          const double s1 = v + t(y, x, z, u);
          const double s2 = v + t(x, y, u, z);
          const double s3 = v - t(z, u, x, y);
          const double s4 = v + t(y, z, x, u) + t(z, x, y, u);
          a += s1 * s1 + s2 * s2;
          e += s3 * s3;
          b += s4 * s4;
        }
  const double nrm = std::max(t.norm(), 1e-300);
  return {std::sqrt(a) / nrm, std::sqrt(e) / nrm, std::sqrt(b) / nrm};
}

bool in_sym2_lambda2(const DenseTensor& t, double tol) {
  const auto c = curvature_defects(t);
  return std::max(c.pair_antisym, c.pair_exchange) <= tol || t.norm() == 0.0;
}

CurvatureTensor CurvatureTensor::certify(DenseTensor t, double tol) {
  if (t.rank() != 4) throw Error("certify: rank-4 tensor required");
  if (t.norm() > 0.0 && curvature_defects(t).max() > tol)
    throw Error("certify: tensor violates the curvature identities");
  CurvatureTensor c;
  t.set_tag(SymmetryTag::curvature_pair);
  c.t_ = std::move(t);
  c.certified_ = true;
  return c;
}

namespace {

// Subtracts the 4-form part; valid on S^2(Lambda^2).
DenseTensor remove_four_form(const DenseTensor& s) {
  const int d = s.dim();
  DenseTensor out(4, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z)
        for (int u = 0; u < d; ++u) {
          const double w = (s(x, y, z, u) + s(x, z, u, y) + s(x, u, y, z)) / 3.0;
          out(x, y, z, u) = s(x, y, z, u) - w;
        }
  return out;
}

}  // namespace

CurvatureTensor project_to_R(const DenseTensor& s, double tol) {
  if (s.rank() != 4) throw Error("project_to_R: rank-4 tensor required");
  if (!in_sym2_lambda2(s, tol)) throw Error("project_to_R: input lacks the pair symmetries");
  return CurvatureTensor::certify(remove_four_form(s), tol);
}

CurvatureTensor random_curvature(const ModelSpace& m, std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  const DenseTensor t = random_tensor(4, m.dim(), rng);
  DenseTensor a = skew_a(t);
  a = 0.5 * (a - permute_slots(a, {0, 1, 3, 2}));
  const DenseTensor s = 0.5 * (a + permute_slots(a, {2, 3, 0, 1}));
  return project_to_R(s);
}

DenseTensor L_map(const ModelSpace& m, const DenseTensor& r) {
  if (r.rank() != 4) throw Error("L_map: rank-4 tensor required");
  DenseTensor out(4, r.dim());
  for (int a = 0; a < 3; ++a) {
    const auto& A = m.structure(a);
    for (int i = 1; i <= 3; ++i) {
      const DenseTensor s = slot_act(A, i, r);
      for (int j = i + 1; j <= 4; ++j) out += slot_act(A, j, s);
    }
  }
  return out;
}

DenseTensor L_sigma_map(const ModelSpace& m, const DenseTensor& r) {
  if (r.rank() != 4) throw Error("L_sigma_map: rank-4 tensor required");
  const DenseTensor s1 = permute_slots(r, {2, 0, 1, 3});
  const DenseTensor s2 = permute_slots(r, {1, 2, 0, 3});
  DenseTensor out(4, r.dim());
  for (int a = 0; a < 3; ++a) {
    const auto& A = m.structure(a);
    out += slot_act(A, 2, slot_act(A, 1, r));
    out += slot_act(A, 4, slot_act(A, 3, r));
    out += slot_act(A, 3, slot_act(A, 2, s1));
    out += slot_act(A, 4, slot_act(A, 1, s1));
    out += slot_act(A, 3, slot_act(A, 1, s2));
    out += slot_act(A, 4, slot_act(A, 2, s2));
  }
  return out;
}

DenseTensor contract_ricci(const DenseTensor& r) {
  if (r.rank() != 4) throw Error("ricci: rank-4 tensor required");
  const int d = r.dim();
  DenseTensor out(2, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) {
      double s = 0;
      for (int i = 0; i < d; ++i) s += r(x, i, y, i);
      out(x, y) = s;
    }
  return out;
}

DenseTensor contract_ricci_star(const ModelSpace& m, const DenseTensor& r, int a) {
  if (r.rank() != 4) throw Error("ricci_star: rank-4 tensor required");
  const int d = r.dim();
  const auto& A = m.structure(a);
  DenseTensor out(2, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) {
      double s = 0;
      for (const auto& [ry, vy] : A.column(y))
        for (int i = 0; i < d; ++i)
          for (const auto& [ri, vi] : A.column(i)) s += vy * vi * r(x, i, ry, ri);
      out(x, y) = s;
    }
  return out;
}

DenseTensor contract_ricci_q(const ModelSpace& m, const DenseTensor& r) {
  DenseTensor out = contract_ricci_star(m, r, 0);
  out += contract_ricci_star(m, r, 1);
  out += contract_ricci_star(m, r, 2);
  return out;
}

namespace {
void require_certified(const CurvatureTensor& r) {
  if (!r.certified()) throw Error("uncertified curvature tensor");
}
}  // namespace

DenseTensor ricci(const CurvatureTensor& r) {
  require_certified(r);
  return contract_ricci(r.tensor());
}

DenseTensor ricci_star(const ModelSpace& m, const CurvatureTensor& r, int a) {
  require_certified(r);
  return contract_ricci_star(m, r.tensor(), a);
}

DenseTensor ricci_q(const ModelSpace& m, const CurvatureTensor& r) {
  require_certified(r);
  return contract_ricci_q(m, r.tensor());
}

double trace2(const DenseTensor& b) {
  if (b.rank() != 2) throw Error("trace2: 2-tensor required");
  double s = 0;
  for (int i = 0; i < b.dim(); ++i) s += b(i, i);
  return s;
}

double scal(const CurvatureTensor& r) { return trace2(ricci(r)); }
double scal_q(const ModelSpace& m, const CurvatureTensor& r) { return trace2(ricci_q(m, r)); }

namespace {

using Cplx = std::complex<double>;
using CForm = std::vector<Cplx>;

CForm make_form(const DenseTensor& re, double re_s, const DenseTensor& im, double im_s) {
  CForm f(re.size());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = Cplx(re_s * re[k], im_s * im[k]);
  return f;
}

void add_real_product(DenseTensor& out, double sign, const CForm& p, const CForm& q, const CForm& r,
                      const CForm& s) {
  const int d = out.dim();
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z)
        for (int u = 0; u < d; ++u) out(x, y, z, u) += sign * (p[x] * q[y] * r[z] * s[u]).real();
}

}  // namespace

ProbeTensors probe_tensors(const ModelSpace& m, const DenseTensor& a, const DenseTensor& b,
                           const DenseTensor& c, const DenseTensor& d) {
  for (const auto* f : {&a, &b, &c, &d})
    if (f->rank() != 1 || f->dim() != m.dim()) throw Error("probe_tensors: one-forms required");
  const auto& I = m.structure(qI);
  const auto& J = m.structure(qJ);
  const auto& K = m.structure(qK);
  auto ft = [&](const DenseTensor& x) { return make_form(x, 1.0, full_act(I, x), 1.0); };
  auto fh = [&](const DenseTensor& x) { return make_form(full_act(J, x), 1.0, full_act(K, x), -1.0); };
  const CForm ta = ft(a), tb = ft(b), tc = ft(c), td = ft(d);
  const CForm ha = fh(a), hb = fh(b), hc = fh(c), hd = fh(d);

  ProbeTensors p{DenseTensor(4, m.dim()), DenseTensor(4, m.dim()), DenseTensor(4, m.dim())};
  add_real_product(p.phi1, 1, ta, tb, tc, td);

  add_real_product(p.phi2, 1, ha, tb, hc, td);
  add_real_product(p.phi2, -1, ha, tb, tc, hd);
  add_real_product(p.phi2, -1, ta, hb, hc, td);
  add_real_product(p.phi2, 1, ta, hb, tc, hd);

  add_real_product(p.phi3, 1, ha, hb, tc, td);
  add_real_product(p.phi3, -1, ta, tb, hc, hd);
  return p;
}

DenseTensor BilinearProjectors::sum_action(const DenseTensor& b) const {
  DenseTensor out = full_act(m_->structure(0), b);
  out += full_act(m_->structure(1), b);
  out += full_act(m_->structure(2), b);
  return out;
}

DenseTensor BilinearProjectors::real(const DenseTensor& b) const {
  return (trace2(b) / m_->dim()) * m_->metric();
}

DenseTensor BilinearProjectors::lambda20e(const DenseTensor& b) const {
  DenseTensor out = 0.25 * (b + sum_action(b));
  out -= real(b);
  return out;
}

DenseTensor BilinearProjectors::s2es2h(const DenseTensor& b) const {
  return 0.25 * (3.0 * b - sum_action(b));
}

DenseTensor BilinearProjectors::s2e(const DenseTensor& b) const { return 0.25 * (b + sum_action(b)); }

DenseTensor BilinearProjectors::s2h(const DenseTensor& b) const {
  DenseTensor out(2, m_->dim());
  for (int a = 0; a < 3; ++a) out.axpy(0.5 * dot(b, m_->omega(a)) / (2.0 * m_->n()), m_->omega(a));
  return out;
}

DenseTensor BilinearProjectors::lambda20es2h(const DenseTensor& b) const {
  DenseTensor out = 0.25 * (3.0 * b - sum_action(b));
  out -= s2h(b);
  return out;
}

PairCoords::PairCoords(int dim) : d_(dim) {
  p_ = d_ * (d_ - 1) / 2;
  N_ = p_ * (p_ + 1) / 2;
  pidx_.assign(std::size_t(d_) * d_, -1);
  for (int i = 0; i < d_; ++i)
    for (int j = i + 1; j < d_; ++j) {
      pidx_[std::size_t(i) * d_ + j] = int(plist_.size());
      plist_.emplace_back(i, j);
    }
  for (int P = 0; P < p_; ++P)
    for (int Q = P; Q < p_; ++Q) entries_.emplace_back(P, Q);
}

int PairCoords::curvature_dim() const {
  const long c4 = long(d_) * (d_ - 1) * (d_ - 2) * (d_ - 3) / 24;
  return int(N_ - c4);
}

Vec PairCoords::pack(const DenseTensor& t) const {
  if (t.rank() != 4 || t.dim() != d_) throw Error("PairCoords::pack: shape mismatch");
  Vec c(N_);
  const double s_off = 1.0 / (2.0 * std::sqrt(2.0));
  for (int k = 0; k < N_; ++k) {
    const auto [P, Q] = entries_[k];
    const auto [i, j] = plist_[P];
    const auto [a, b] = plist_[Q];
    double v = t(i, j, a, b) - t(j, i, a, b) - t(i, j, b, a) + t(j, i, b, a);
    if (P == Q) {
      c(k) = 0.5 * v;
    } else {
      v += t(a, b, i, j) - t(b, a, i, j) - t(a, b, j, i) + t(b, a, j, i);
      c(k) = s_off * v;
    }
  }
  return c;
}

DenseTensor PairCoords::unpack(const Vec& c) const {
  if (c.size() != N_) throw Error("PairCoords::unpack: size mismatch");
  DenseTensor t(4, d_);
  const double s_off = 1.0 / (2.0 * std::sqrt(2.0));
  for (int k = 0; k < N_; ++k) {
    const auto [P, Q] = entries_[k];
    const auto [i, j] = plist_[P];
    const auto [a, b] = plist_[Q];
    const double v = (P == Q ? 0.5 : s_off) * c(k);
    t(i, j, a, b) += v;
    t(j, i, a, b) -= v;
    t(i, j, b, a) -= v;
    t(j, i, b, a) += v;
    if (P != Q) {
      t(a, b, i, j) += v;
      t(b, a, i, j) -= v;
      t(a, b, j, i) -= v;
      t(b, a, j, i) += v;
    }
  }
  return t;
}

Vec PairCoords::project_R(const Vec& c) const { return pack(remove_four_form(unpack(c))); }

}  // namespace qhc
