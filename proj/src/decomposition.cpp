#include "qhc/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qhc/rng.hpp"
#include "qhc/tensor_ops.hpp"

namespace qhc {

DenseTensor mixed_act(const StructureMatrix& A, const DenseTensor& b, double sign) {
  if (b.rank() != 2) throw Error("mixed_act: 2-tensor required");
  DenseTensor out = slot_act(A, 1, b);
  out.axpy(sign, slot_act(A, 2, b));
  return out;
}

namespace {

void require_form(const DenseTensor& b, const char* where) {
  if (b.rank() != 2 || !is_form(b, 1e-10)) throw Error(std::string(where) + ": two-form required");
}

void require_symmetric(const DenseTensor& b, const char* where) {
  if (b.rank() != 2 || (b - swap12(b)).norm() > 1e-10 * std::max(1.0, b.norm()))
    throw Error(std::string(where) + ": symmetric form required");
}

DenseTensor psi_raw(const DenseTensor& b, const DenseTensor& c) {
  const int d = b.dim();
  DenseTensor out(4, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z)
        for (int u = 0; u < d; ++u)
          out(x, y, z, u) = b(x, z) * c(y, u) - b(x, u) * c(y, z) + c(x, z) * b(y, u) - c(x, u) * b(y, z);
  return out;
}

DenseTensor phi_raw(const DenseTensor& b, const DenseTensor& c) {
  DenseTensor out = 6.0 * odot(b, c);
  out -= wedge(b, c);
  return out;
}

}  // namespace

DenseTensor phi_map(const DenseTensor& b, const DenseTensor& c) {
  require_form(b, "phi");
  require_form(c, "phi");
  return phi_raw(b, c);
}

DenseTensor Phi_map(const ModelSpace& m, const DenseTensor& b, const DenseTensor& c) {
  require_form(b, "Phi");
  require_form(c, "Phi");
  DenseTensor out(4, m.dim());
  for (int a = 0; a < 3; ++a)
    out += phi_raw(mixed_act(m.structure(a), b, 1), mixed_act(m.structure(a), c, 1));
  return out;
}

DenseTensor varphi_map(const ModelSpace& m, const DenseTensor& b, const DenseTensor& c) {
  require_form(b, "varphi");
  require_form(c, "varphi");
  DenseTensor out(4, m.dim());
  for (int a = 0; a < 3; ++a)
    out += psi_raw(mixed_act(m.structure(a), b, -1), mixed_act(m.structure(a), c, -1));
  return out;
}

DenseTensor psi_map(const DenseTensor& b, const DenseTensor& c) {
  require_symmetric(b, "psi");
  require_symmetric(c, "psi");
  return psi_raw(b, c);
}

DenseTensor vartheta_map(const ModelSpace& m, const DenseTensor& b, const DenseTensor& c) {
  require_symmetric(b, "vartheta");
  require_symmetric(c, "vartheta");
  DenseTensor out(4, m.dim());
  for (int a = 0; a < 3; ++a)
    out += phi_raw(mixed_act(m.structure(a), b, -1), mixed_act(m.structure(a), c, -1));
  return out;
}

DenseTensor Psi_map(const ModelSpace& m, const DenseTensor& b, const DenseTensor& c) {
  require_symmetric(b, "Psi");
  require_symmetric(c, "Psi");
  DenseTensor out(4, m.dim());
  for (int a = 0; a < 3; ++a)
    out += psi_raw(mixed_act(m.structure(a), b, 1), mixed_act(m.structure(a), c, 1));
  return out;
}

DenseTensor lambda20es2h_map(const ModelSpace& m, const DenseTensor& b) {
  require_form(b, "lambda20es2h_map");
  DenseTensor out(4, m.dim());
  for (int a = 0; a < 3; ++a) out += phi_raw(mixed_act(m.structure(a), b, 1), m.omega(a));
  return out;
}

DenseTensor triple_map(const ModelSpace& m, const std::array<DenseTensor, 3>& b) {
  DenseTensor out(4, m.dim());
  for (int a = 0; a < 3; ++a) {
    require_form(b[a], "triple_map");
    out += phi_raw(b[a], m.omega(a));
  }
  return out;
}

const std::vector<std::string>& fine_component_names() {
  static const std::vector<std::string> names = {
      "S4E",     "V22",       "L20E_a",  "R_a",      "L40E",    "L20E_b",  "R_b",  "V31S2H",
      "S2ES2H_a", "V211S2H", "S2ES2H_b", "L20ES2H", "V22S4H", "L20ES4H", "S4H"};
  return names;
}

const std::vector<std::string>& coarse_component_names() {
  static const std::vector<std::string> names = {"L6",   "L2",     "Lm6",  "L6_12",  "L6_0",
                                                 "L6_m12", "L2_4", "L2_m4", "QK", "QKperp",
                                                 "R_QK", "R_QKperp"};
  return names;
}

namespace {

Vec flat(const DenseTensor& t) { return Eigen::Map<const Vec>(t.data(), Eigen::Index(t.size())); }

DenseTensor unflat2(const Vec& v, int d) {
  DenseTensor t(2, d);
  for (int k = 0; k < v.size(); ++k) t[k] = v(k);
  return t;
}

// Orthonormal basis (as flattened 2-tensors) of the image of proj on symmetric or skew forms.
Mat bilinear_subspace(int d, bool symmetric, const std::function<DenseTensor(const DenseTensor&)>& proj) {
  Mat cols(d * d, 0);
  std::vector<Vec> v;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      if (!symmetric && i == j) continue;
      DenseTensor e(2, d);
      e(i, j) += 1.0;
      e(j, i) += symmetric ? 1.0 : -1.0;
      v.push_back(flat(proj(e)));
    }
  cols.resize(d * d, Eigen::Index(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) cols.col(Eigen::Index(k)) = v[k];
  return orthonormal_range(cols, 1e-10);
}

Mat random_R_batch(const PairCoords& pc, int k, Rng& rng) {
  Mat x(pc.size(), k);
  for (int j = 0; j < k; ++j) {
    Vec c(pc.size());
    for (int i = 0; i < pc.size(); ++i) c(i) = rng.normal();
    x.col(j) = pc.project_R(c);
  }
  return x;
}

double max_col_norm(const Mat& m) { return m.cols() ? m.colwise().norm().maxCoeff() : 0.0; }

// Eigen-subspaces of the restriction of L_sigma to an orthonormal block.
struct Refined {
  std::vector<Mat> parts;
  double residual = 0;
  double leak = 0;
};

Refined refine(const ModelSpace& m, const PairCoords& pc, const Mat& q, const std::vector<double>& mus) {
  Refined out;
  if (q.cols() == 0) {
    for (std::size_t k = 0; k < mus.size(); ++k) out.parts.emplace_back(pc.size(), 0);
    return out;
  }
  const Mat s = apply_columns(pc, q, [&](const DenseTensor& t) { return L_sigma_map(m, t); });
  const Mat mm = q.transpose() * s;
  out.leak = max_col_norm(s - q * mm) / 12.0;
  const long k = q.cols();
  const Mat id = Mat::Identity(k, k);
  for (std::size_t i = 0; i < mus.size(); ++i) {
    Mat poly = id;
    for (std::size_t j = 0; j < mus.size(); ++j)
      if (j != i) poly = poly * (mm - mus[j] * id) / (mus[i] - mus[j]);
    const Mat u = orthonormal_range(poly, 1e-8);
    out.residual = std::max(out.residual, max_col_norm(mm * u - mus[i] * u) / 12.0);
    out.parts.push_back(q * u);
  }
  return out;
}

}  // namespace

GlBlocks build_gl_projectors(const ModelSpace& m, const PairCoords& pc, std::uint64_t seed) {
  GlBlocks gl;
  const int batch = 48;
  gl.L6 = Mat(pc.size(), 0);
  gl.L2 = Mat(pc.size(), 0);
  gl.Lm6 = Mat(pc.size(), 0);
  bool done[3] = {false, false, false};
  Mat* qs[3] = {&gl.L6, &gl.L2, &gl.Lm6};
  auto lop = [&](const DenseTensor& t) { return L_map(m, t); };
  for (std::uint64_t round = 0; !(done[0] && done[1] && done[2]); ++round) {
    if (round > std::uint64_t(pc.size() / batch + 8)) throw Error("L-eigenspace search did not terminate");
    Rng rng(seed, round);
    const Mat x = random_R_batch(pc, batch, rng);
    const Mat y = apply_columns(pc, x, lop);
    const Mat z = apply_columns(pc, y, lop);
    const Mat f[3] = {(z + 4 * y - 12 * x) / 48.0, (z - 36 * x) / -32.0, (z - 8 * y + 12 * x) / 96.0};
    for (int b = 0; b < 3; ++b) {
      if (done[b]) continue;
      const int added = append_orthonormal(*qs[b], f[b], 1e-8);
      if (added < batch) done[b] = true;
    }
  }
  const double lambdas[3] = {6, 2, -6};
  for (int b = 0; b < 3; ++b) {
    if (qs[b]->cols() == 0) continue;
    const Mat lq = apply_columns(pc, *qs[b], lop);
    gl.l_residual = std::max(gl.l_residual, max_col_norm(lq - lambdas[b] * *qs[b]) / 6.0);
  }
  const Refined r6 = refine(m, pc, gl.L6, {12, 0, -12});
  gl.L6_12 = r6.parts[0];
  gl.L6_0 = r6.parts[1];
  gl.L6_m12 = r6.parts[2];
  const Refined r2 = refine(m, pc, gl.L2, {4, -4});
  gl.L2_4 = r2.parts[0];
  gl.L2_m4 = r2.parts[1];
  gl.sigma_residual = std::max(r6.residual, r2.residual);
  gl.sigma_leak = std::max(r6.leak, r2.leak);
  if (gl.Lm6.cols() > 0) {
    const Mat s = apply_columns(pc, gl.Lm6, [&](const DenseTensor& t) { return L_sigma_map(m, t); });
    gl.sigma_m6 = max_col_norm(s) / 12.0;
  }
  return gl;
}

namespace {

struct ImageFamily {
  Mat cols;
  double r_defect = 0;
  double block_defect = 0;
};

ImageFamily images(const PairCoords& pc, const Mat& block, const std::vector<DenseTensor>& tensors) {
  ImageFamily f;
  f.cols = Mat(pc.size(), Eigen::Index(tensors.size()));
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    const Vec c = pc.pack(tensors[k]);
    const double nrm = std::max(c.norm(), 1.0);
    f.r_defect = std::max(f.r_defect, (c - pc.project_R(c)).norm() / nrm);
    const Vec in_block = block * (block.transpose() * c);
    f.block_defect = std::max(f.block_defect, (c - in_block).norm() / nrm);
    f.cols.col(Eigen::Index(k)) = in_block;
  }
  return f;
}

std::string fmt_line(const std::string& what, double v) {
  std::ostringstream os;
  os << what << ' ' << v;
  return os.str();
}

// Kernel of a stacked contraction map inside block minus the given components.
Mat kernel_in_block(const PairCoords& pc, const Mat& block, const std::vector<const Mat*>& taken,
                    const std::function<Vec(const DenseTensor&)>& contraction) {
  Mat rest = block;
  if (block.cols() == 0) return rest;
  Mat y(block.cols(), 0);
  for (const Mat* t : taken) {
    if (t->cols() == 0) continue;
    const Mat c = block.transpose() * *t;
    y.conservativeResize(block.cols(), y.cols() + c.cols());
    y.rightCols(c.cols()) = c;
  }
  if (y.cols() > 0) rest = block * null_space(y.transpose(), 1e-8, 1.0);
  if (rest.cols() == 0) return rest;
  std::vector<Vec> rows(rest.cols());
  parallel_for(int(rest.cols()), [&](int k) { rows[k] = contraction(pc.unpack(rest.col(k))); });
  Mat cm(rows[0].size(), rest.cols());
  for (int k = 0; k < rest.cols(); ++k) cm.col(k) = rows[k];
  Mat basis = rest * null_space(cm, 1e-8, 1.0);
  if (basis.cols() > 0) {
    Eigen::HouseholderQR<Mat> qr(basis);
    basis = qr.householderQ() * Mat::Identity(basis.rows(), basis.cols());
  }
  return basis;
}

}  // namespace

ProjectorBank build_sp_projectors(const ModelSpace& m, const PairCoords& pc, const GlBlocks& gl) {
  ProjectorBank bank(m, pc);
  bank.gl_ = gl;
  const int d = m.dim();
  BilinearProjectors bp(m);
  auto& comp = bank.comp_;
  auto& log = bank.log_;

  const Mat l20e = bilinear_subspace(d, true, [&](const DenseTensor& b) { return bp.lambda20e(b); });
  const Mat s2es2h = bilinear_subspace(d, true, [&](const DenseTensor& b) { return bp.s2es2h(b); });
  const Mat l20es2h = bilinear_subspace(d, false, [&](const DenseTensor& b) { return bp.lambda20es2h(b); });
  log.push_back(fmt_line("param Lambda20E", double(l20e.cols())));
  log.push_back(fmt_line("param S2ES2H", double(s2es2h.cols())));
  log.push_back(fmt_line("param Lambda20ES2H", double(l20es2h.cols())));

  const DenseTensor& g = m.metric();
  auto family = [&](const Mat& params, auto&& f) {
    std::vector<DenseTensor> out(params.cols());
    parallel_for(int(params.cols()), [&](int k) { out[k] = f(unflat2(params.col(k), d)); });
    return out;
  };
  auto add_image = [&](const std::string& name, const Mat& block, const std::vector<DenseTensor>& ts,
                       const std::vector<const Mat*>& prior) {
    const ImageFamily f = images(pc, block, ts);
    comp[name] = range_orthogonal_to(f.cols, prior, 1e-8, 1.0);
    log.push_back(fmt_line(name + " R-defect", f.r_defect));
    log.push_back(fmt_line(name + " block-defect", f.block_defect));
    log.push_back(fmt_line(name + " rank", double(comp[name].cols())));
  };
  auto ric_flat = [&](const DenseTensor& t) { return flat(contract_ricci(t)); };

  // L = 6, L_sigma = 12
  comp["S4E"] = gl.L6_12;

  // L = 6, L_sigma = 0
  add_image("R_a", gl.L6_0, {m.pi2() + 6.0 * m.pi1()}, {});
  add_image("L20E_a", gl.L6_0,
            family(l20e, [&](const DenseTensor& b) { return vartheta_map(m, b, g) + 12.0 * psi_map(b, g); }),
            {&comp["R_a"]});
  comp["V22"] = kernel_in_block(pc, gl.L6_0, {&comp["R_a"], &comp["L20E_a"]}, ric_flat);

  // L = 6, L_sigma = -12
  add_image("R_b", gl.L6_m12, {m.pi2() - 6.0 * m.pi1()}, {});
  add_image("L20E_b", gl.L6_m12,
            family(l20e, [&](const DenseTensor& b) { return vartheta_map(m, b, g) - 12.0 * psi_map(b, g); }),
            {&comp["R_b"]});
  comp["L40E"] = kernel_in_block(pc, gl.L6_m12, {&comp["R_b"], &comp["L20E_b"]}, ric_flat);

  // L = 2, L_sigma = 4
  add_image("S2ES2H_a", gl.L2_4,
            family(s2es2h, [&](const DenseTensor& b) { return vartheta_map(m, b, g) + 4.0 * psi_map(b, g); }),
            {});
  comp["V31S2H"] = kernel_in_block(pc, gl.L2_4, {&comp["S2ES2H_a"]}, ric_flat);

  // L = 2, L_sigma = -4
  add_image("S2ES2H_b", gl.L2_m4,
            family(s2es2h, [&](const DenseTensor& b) { return vartheta_map(m, b, g) - 12.0 * psi_map(b, g); }),
            {});
  add_image("L20ES2H", gl.L2_m4, family(l20es2h, [&](const DenseTensor& b) { return lambda20es2h_map(m, b); }),
            {&comp["S2ES2H_b"]});
  comp["V211S2H"] = kernel_in_block(pc, gl.L2_m4, {&comp["S2ES2H_b"], &comp["L20ES2H"]}, ric_flat);

  // L = -6: triples (b_I, b_J, b_K) with sum_A A_(2) b_A = 0
  auto triples = [&](const Mat& sub) {
    const long k = sub.cols();
    Mat cond(d * d, 3 * k);
    for (int a = 0; a < 3; ++a)
      for (long j = 0; j < k; ++j) cond.col(a * k + j) = flat(slot_act(m.structure(a), 2, unflat2(sub.col(j), d)));
    const Mat ker = null_space(cond, 1e-10, 1.0);
    std::vector<DenseTensor> out(ker.cols());
    parallel_for(int(ker.cols()), [&](int c) {
      std::array<DenseTensor, 3> b;
      for (int a = 0; a < 3; ++a) b[a] = unflat2(sub * ker.col(c).segment(a * k, k), d);
      out[c] = triple_map(m, b);
    });
    log.push_back(fmt_line("triple kernel", double(ker.cols())));
    return out;
  };
  Mat s2h(d * d, 3);
  for (int a = 0; a < 3; ++a) s2h.col(a) = flat(m.omega(a)) / std::sqrt(double(d));
  add_image("L20ES4H", gl.Lm6, triples(l20es2h), {});
  add_image("S4H", gl.Lm6, triples(s2h), {&comp["L20ES4H"]});
  comp["V22S4H"] = kernel_in_block(pc, gl.Lm6, {&comp["L20ES4H"], &comp["S4H"]}, [&](const DenseTensor& t) {
    Vec v(3 * d * d);
    for (int a = 0; a < 3; ++a) v.segment(a * d * d, d * d) = flat(contract_ricci_star(m, t, a));
    return v;
  });

  comp["L6"] = gl.L6;
  comp["L2"] = gl.L2;
  comp["Lm6"] = gl.Lm6;
  comp["L6_12"] = gl.L6_12;
  comp["L6_0"] = gl.L6_0;
  comp["L6_m12"] = gl.L6_m12;
  comp["L2_4"] = gl.L2_4;
  comp["L2_m4"] = gl.L2_m4;

  Vec rqk = pc.pack(m.pi2() + 2.0 * m.pi1());
  Vec rperp = pc.pack(double(m.n() + 2) * m.pi2() - 18.0 * m.n() * m.pi1());
  comp["R_QK"] = Mat(rqk.normalized());
  comp["R_QKperp"] = Mat(rperp.normalized());
  std::vector<const Mat*> qk_parts = {&comp["S4E"], &comp["R_QK"]};
  std::vector<const Mat*> perp_parts = {&comp["R_QKperp"]};
  for (const auto& nm : fine_component_names())
    if (nm != "S4E" && nm != "R_a" && nm != "R_b") perp_parts.push_back(&comp[nm]);
  auto hcat = [&](const std::vector<const Mat*>& parts) {
    long cols = 0;
    for (const Mat* p : parts) cols += p->cols();
    Mat out(pc.size(), cols);
    long at = 0;
    for (const Mat* p : parts) {
      out.middleCols(at, p->cols()) = *p;
      at += p->cols();
    }
    return out;
  };
  comp["QK"] = hcat(qk_parts);
  comp["QKperp"] = hcat(perp_parts);

  double overlap = 0;
  const auto& names = fine_component_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      const Mat& a = comp[names[i]];
      const Mat& b = comp[names[j]];
      if (a.cols() && b.cols()) overlap = std::max(overlap, (a.transpose() * b).cwiseAbs().maxCoeff());
    }
  log.push_back(fmt_line("max fine overlap", overlap));
  if (overlap > 1e-9) throw Error("fine components are not mutually orthogonal");
  return bank;
}

bool ProjectorBank::has(const std::string& name) const { return comp_.count(name) > 0; }

const Mat& ProjectorBank::basis(const std::string& name) const {
  auto it = comp_.find(name);
  if (it == comp_.end()) throw Error("unknown component: " + name);
  return it->second;
}

Vec ProjectorBank::project_coords(const Vec& c, const std::string& name) const {
  const Mat& b = basis(name);
  if (b.cols() == 0) return Vec::Zero(c.size());
  return b * (b.transpose() * c);
}

DenseTensor ProjectorBank::project(const DenseTensor& r, const std::string& name) const {
  return pc_.unpack(project_coords(pc_.pack(r), name));
}

ComponentProjection project_component(const ProjectorBank& bank, const CurvatureTensor& r,
                                      const std::string& name) {
  if (!r.certified()) throw Error("project_component: uncertified curvature tensor");
  ComponentProjection out;
  const Vec c = bank.project_coords(bank.coords().pack(r.tensor()), name);
  out.norm = c.norm();
  out.tensor = bank.coords().unpack(c);
  return out;
}

QkSplit qk_split(const ProjectorBank& bank) {
  return {bank.basis("QK"), bank.basis("QKperp"), bank.basis("R_QK"), bank.basis("R_QKperp")};
}

RicQkScalars ric_qk_scalars(const ProjectorBank& bank, const CurvatureTensor& r) {
  const ModelSpace& m = bank.model();
  const double n = m.n();
  BilinearProjectors bp(m);
  const DenseTensor ric_r = bp.real(ricci(r));
  const DenseTensor ricq_r = bp.real(ricci_q(m, r));
  RicQkScalars out;
  out.ric_qk = (n + 2) / (2 * (5 * n + 1)) * (ric_r + 3.0 * ricq_r);
  out.ric_qkperp_real = 9 * n / (2 * (5 * n + 1)) * (ric_r - (n + 2) / (3 * n) * ricq_r);
  const DenseTensor direct_qk = contract_ricci(bank.project(r.tensor(), "QK"));
  const DenseTensor direct_perp = bp.real(contract_ricci(bank.project(r.tensor(), "QKperp")));
  const double scale = std::max(contract_ricci(r.tensor()).norm(), 1e-300);
  out.residual_qk = (direct_qk - out.ric_qk).norm() / scale;
  out.residual_perp = (direct_perp - out.ric_qkperp_real).norm() / scale;
  return out;
}

long dim_R_formula(int n) { return 4L * n * n * (16L * n * n - 1) / 3; }
long dim_QK_formula(int n) {
  const long k = n;
  return (4 * k * k * k * k + 12 * k * k * k + 11 * k * k + 3 * k + 6) / 6;
}

bool DecompositionReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const AuditLine& a) { return a.pass; });
}

std::vector<std::string> DecompositionReport::failures() const {
  std::vector<std::string> f;
  for (const auto& c : checks)
    if (!c.pass) f.push_back(c.name);
  return f;
}

DecompositionReport dimension_audit(const ProjectorBank& bank, double tol) {
  DecompositionReport rep;
  const int n = bank.model().n();
  rep.n = n;
  auto exact = [&](const std::string& name, double v, double e) {
    rep.checks.push_back({name, v, e, 0.0, v == e});
  };
  auto small = [&](const std::string& name, double v) { rep.checks.push_back({name, v, 0.0, tol, v <= tol}); };

  long total = 0;
  for (const auto& nm : fine_component_names()) {
    rep.ranks.emplace_back(nm, bank.rank(nm));
    total += bank.rank(nm);
  }
  for (const auto& nm : coarse_component_names()) rep.ranks.emplace_back(nm, bank.rank(nm));

  exact("dim_R", double(total), double(dim_R_formula(n)));
  exact("dim_R_coordinates", double(bank.coords().curvature_dim()), double(dim_R_formula(n)));
  exact("dim_L_blocks", double(bank.rank("L6") + bank.rank("L2") + bank.rank("Lm6")), double(dim_R_formula(n)));
  exact("dim_L6_refined", double(bank.rank("L6_12") + bank.rank("L6_0") + bank.rank("L6_m12")),
        double(bank.rank("L6")));
  exact("dim_L2_refined", double(bank.rank("L2_4") + bank.rank("L2_m4")), double(bank.rank("L2")));
  exact("dim_QK", double(bank.rank("QK")), double(dim_QK_formula(n)));
  exact("dim_QK_plus_QKperp", double(bank.rank("QK") + bank.rank("QKperp")), double(dim_R_formula(n)));

  std::vector<std::string> zero;
  if (n == 2) zero = {"L40E", "L20E_b", "V211S2H"};
  if (n == 3) zero = {"L40E"};
  for (const auto& nm : fine_component_names()) {
    const bool should_vanish = std::find(zero.begin(), zero.end(), nm) != zero.end();
    rep.checks.push_back({"nonzero_" + nm, double(bank.rank(nm) > 0), should_vanish ? 0.0 : 1.0, 0.0,
                          (bank.rank(nm) > 0) != should_vanish});
  }

  const GlBlocks& gl = bank.blocks();
  small("L_eigen_residual", gl.l_residual);
  small("L_sigma_eigen_residual", gl.sigma_residual);
  small("L_sigma_block_leak", gl.sigma_leak);
  small("L_sigma_on_Lm6", gl.sigma_m6);

  double orth = 0;
  const auto& names = fine_component_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Mat& a = bank.basis(names[i]);
    if (a.cols() == 0) continue;
    orth = std::max(orth, (a.transpose() * a - Mat::Identity(a.cols(), a.cols())).cwiseAbs().maxCoeff());
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      const Mat& b = bank.basis(names[j]);
      if (b.cols()) orth = std::max(orth, (a.transpose() * b).cwiseAbs().maxCoeff());
    }
  }
  small("fine_orthonormality", orth);
  return rep;
}

}  // namespace qhc
