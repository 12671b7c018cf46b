#include "qhc/tensor_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace qhc {

namespace {

struct Perm {
  std::array<int, 4> p;
  int sign;
};

std::vector<Perm> permutations(int r) {
  std::vector<Perm> out;
  std::array<int, 4> p{0, 1, 2, 3};
  do {
    int inv = 0;
    for (int a = 0; a < r; ++a)
      for (int b = a + 1; b < r; ++b)
        if (p[a] > p[b]) ++inv;
    out.push_back({p, inv % 2 ? -1 : 1});
  } while (std::next_permutation(p.begin(), p.begin() + r));
  return out;
}

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

void unravel(std::size_t flat, int r, int d, std::array<int, 4>& idx) {
  for (int s = r - 1; s >= 0; --s) {
    idx[s] = int(flat % d);
    flat /= d;
  }
}

std::size_t ravel(const std::array<int, 4>& idx, int r, int d) {
  std::size_t f = 0;
  for (int s = 0; s < r; ++s) f = f * d + idx[s];
  return f;
}

}  // namespace

DenseTensor slot_act(const StructureMatrix& A, int slot, const DenseTensor& b) {
  const int r = b.rank();
  if (slot < 1 || slot > r) throw Error("slot_act: slot out of range");
  if (A.dim() != b.dim()) throw Error("slot_act: dimension mismatch");
  const int d = b.dim();
  const std::size_t st = b.stride(slot - 1);
  const std::size_t outer_n = b.size() / (st * d);
  DenseTensor out(r, d, b.tag());
  const double* in = b.data();
  double* o = out.data();
  for (std::size_t hi = 0; hi < outer_n; ++hi) {
    const std::size_t base = hi * st * d;
    for (int i = 0; i < d; ++i) {
      double* dst = o + base + std::size_t(i) * st;
      for (const auto& [row, v] : A.column(i)) {
        const double* src = in + base + std::size_t(row) * st;
        for (std::size_t lo = 0; lo < st; ++lo) dst[lo] -= v * src[lo];
      }
    }
  }
  return out;
}

DenseTensor full_act(const StructureMatrix& A, const DenseTensor& b) {
  if (b.rank() == 0) return b;
  DenseTensor out = slot_act(A, 1, b);
  for (int s = 2; s <= b.rank(); ++s) out = slot_act(A, s, out);
  return out;
}

double form_defect(const DenseTensor& t) {
  if (t.rank() < 2) return 0.0;
  const DenseTensor alt = alternation(t);
  const double nrm = std::max(t.norm(), 1e-300);
  return (t - alt).norm() / nrm;
}

bool is_form(const DenseTensor& t, double tol) { return form_defect(t) <= tol; }

double p_form_inner(const DenseTensor& a, const DenseTensor& b, double tol) {
  if (!a.same_shape(b)) throw Error("p_form_inner: rank mismatch");
  if (!is_form(a, tol) || !is_form(b, tol)) throw Error("p_form_inner: arguments must be forms");
  return dot(a, b) / factorial(a.rank());
}

double curvature_inner(const DenseTensor& a, const DenseTensor& b) {
  if (a.rank() != 4 || b.rank() != 4) throw Error("curvature_inner: rank-4 arguments required");
  return dot(a, b);
}

DenseTensor outer(const DenseTensor& a, const DenseTensor& b) {
  if (a.dim() != b.dim()) throw Error("outer: dimension mismatch");
  const int r = a.rank() + b.rank();
  if (r > 4) throw Error("outer: total rank exceeds 4");
  DenseTensor out(r, a.dim());
  double* o = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    double* row = o + i * b.size();
    for (std::size_t j = 0; j < b.size(); ++j) row[j] = ai * b[j];
  }
  return out;
}

DenseTensor odot(const DenseTensor& b, const DenseTensor& c) {
  if (b.rank() != 2 || c.rank() != 2) throw Error("odot: 2-tensors required");
  DenseTensor out = outer(b, c);
  out += outer(c, b);
  out *= 0.5;
  return out;
}

DenseTensor alternation(const DenseTensor& t) {
  const int r = t.rank();
  if (r < 2) return t;
  const int d = t.dim();
  const auto perms = permutations(r);
  const double inv = 1.0 / double(perms.size());
  DenseTensor out(r, d, SymmetryTag::form);
  std::array<int, 4> idx{}, q{};
  for (std::size_t f = 0; f < t.size(); ++f) {
    unravel(f, r, d, idx);
    double s = 0;
    for (const auto& p : perms) {
      for (int k = 0; k < r; ++k) q[k] = idx[p.p[k]];
      s += p.sign * t[ravel(q, r, d)];
    }
    out[f] = s * inv;
  }
  return out;
}

DenseTensor wedge(const DenseTensor& a, const DenseTensor& b) {
  const int p = a.rank(), q = b.rank();
  DenseTensor out = alternation(outer(a, b));
  out *= factorial(p + q) / (factorial(p) * factorial(q));
  out.set_tag(SymmetryTag::form);
  return out;
}

DenseTensor wedge2(const DenseTensor& b, const DenseTensor& c) {
  if (b.rank() != 2 || c.rank() != 2) throw Error("wedge2: 2-forms required");
  return wedge(b, c);
}

DenseTensor permute_slots(const DenseTensor& t, const std::array<int, 4>& perm) {
  const int r = t.rank();
  const int d = t.dim();
  std::vector<int> seen(r, 0);
  for (int k = 0; k < r; ++k) {
    if (perm[k] < 0 || perm[k] >= r || seen[perm[k]]) throw Error("permute_slots: invalid permutation");
    seen[perm[k]] = 1;
  }
  DenseTensor out(r, d);
  std::array<int, 4> idx{}, q{};
  for (std::size_t f = 0; f < t.size(); ++f) {
    unravel(f, r, d, idx);
    for (int k = 0; k < r; ++k) q[k] = idx[perm[k]];
    out[f] = t[ravel(q, r, d)];
  }
  return out;
}

DenseTensor swap12(const DenseTensor& t) {
  if (t.rank() < 2) throw Error("swap12: rank >= 2 required");
  std::array<int, 4> p{1, 0, 2, 3};
  return permute_slots(t, p);
}

DenseTensor skew_a(const DenseTensor& t) {
  DenseTensor out = t - swap12(t);
  out *= 0.5;
  return out;
}

DenseTensor sym2(const DenseTensor& b) {
  if (b.rank() != 2) throw Error("sym2: 2-tensor required");
  DenseTensor out = b + swap12(b);
  out *= 0.5;
  out.set_tag(SymmetryTag::symmetric2);
  return out;
}

DenseTensor b_tilde(const DenseTensor& xi, const DenseTensor& zeta) {
  if (xi.rank() != 3 || zeta.rank() != 3 || xi.dim() != zeta.dim())
    throw Error("b_tilde: rank-3 arguments of equal dimension required");
  const int d = xi.dim();
  // w(X, Y, m) = <e_m, zeta_X Y> - <e_m, zeta_Y X>
  std::vector<double> w(std::size_t(d) * d * d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int m = 0; m < d; ++m) w[(std::size_t(x) * d + y) * d + m] = zeta(x, m, y) - zeta(y, m, x);
  DenseTensor out(4, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int m = 0; m < d; ++m) {
        const double c = w[(std::size_t(x) * d + y) * d + m];
        if (c == 0.0) continue;
        for (int z = 0; z < d; ++z)
          for (int u = 0; u < d; ++u) out(x, y, z, u) += c * xi(m, u, z);
      }
  return out;
}

DenseTensor compose_torsion(const DenseTensor& xi, const DenseTensor& zeta) {
  if (xi.rank() != 3 || zeta.rank() != 3 || xi.dim() != zeta.dim())
    throw Error("compose_torsion: rank-3 arguments of equal dimension required");
  const int d = xi.dim();
  DenseTensor out(4, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z)
        for (int u = 0; u < d; ++u) {
          double s = 0;
          for (int m = 0; m < d; ++m) s += xi(x, u, m) * zeta(y, m, z);
          out(x, y, z, u) = s;
        }
  return out;
}

}  // namespace qhc
