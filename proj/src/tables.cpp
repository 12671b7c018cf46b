#include "qhc/tables.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "json.hpp"

#include "qhc/curvature_from_torsion.hpp"
#include "qhc/rng.hpp"
#include "qhc/tensor_ops.hpp"

namespace qhc {

namespace {

const std::array<std::string, 6> kT = {"33", "K3", "E3", "3H", "KH", "EH"};

std::vector<std::string> make_rows(bool with_gamma) {
  std::vector<std::string> r;
  if (with_gamma) r.push_back("gamma");
  for (const auto& t : kT) r.push_back("D" + t);
  for (const auto& t : kT) r.push_back(t + "." + t);
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j) r.push_back(kT[i] + "." + kT[j]);
  return r;
}

// Reference tables, one string per row in make_rows order.
const std::vector<std::string> kTable1 = {
    "1000100", "0011001", "0011001", "0011001", "0111011", "0111011", "0111111", "1110111",
    "1110111", "1110111", "1110111", "1110111", "1110111", "0111011", "0101010", "0011001",
    "0011001", "0001000", "0111011", "0011001", "0011001", "0011001", "0001000", "0011001",
    "0011001", "0111011", "0101010", "0111011"};
const std::vector<std::string> kTable2 = {
    "1000", "0011", "0011", "0011", "0111", "0111", "1111", "1110", "1220", "1110",
    "1110", "1220", "1110", "0111", "0101", "0011", "0011", "0001", "0011", "0011",
    "0021", "0011", "0001", "0011", "0011", "0111", "0101", "0101"};
const std::vector<std::string> kTable3 = {
    "0001010", "0011110", "0000011", "0101000", "1011000", "0000000", "1101111", "1110111", "0000011",
    "1101000", "1110000", "0000000", "1111110", "0101010", "0001111", "0011110", "0001010", "1011110",
    "0011110", "0011111", "0011110", "0001010", "0011110", "0000011", "1111000", "0101000", "1011000"};

// Output blocks of one evaluation.
enum Block : int {
  bRqR = 0, bRqL20E, bRqS2ES2H, bRqL20ES2H, bRR, bRL20E, bRS2ES2H,
  bRx, bL20Ea, bL20Eb, bS2ES2Ha, bS2ES2Hb, bL20ES2H,
  bT3,  // seven Table 3 blocks follow
  kBlocks = bT3 + 7
};

const std::vector<std::string> kT3Targets = {"V22", "L40E", "V31S2H", "V211S2H", "V22S4H", "L20ES4H", "S4H"};

Vec flat(const DenseTensor& t) { return Eigen::Map<const Vec>(t.data(), Eigen::Index(t.size())); }

// 2 a(i, j, k, l) over pairs i < j, k < l: an isometry on Λ² ⊗ Λ².
Vec pair_flat(const DenseTensor& a, const PairCoords& pc) {
  const int p = pc.pairs();
  Vec v(Eigen::Index(p) * p);
  for (int P = 0; P < p; ++P) {
    const auto [i, j] = pc.pair(P);
    for (int Q = 0; Q < p; ++Q) {
      const auto [k, l] = pc.pair(Q);
      v(Eigen::Index(P) * p + Q) = 2 * a(i, j, k, l);
    }
  }
  return v;
}

struct Engine {
  const TorsionBank& tb;
  const ProjectorBank& bank;
  const ModelSpace& m;
  std::array<double, 2> ric_ab{}, ricq_ab{};
  std::vector<Eigen::ColPivHouseholderQR<Mat>> t3qr;
  std::vector<int> t3rank;

  Engine(const TorsionBank& t, const ProjectorBank& b) : tb(t), bank(b), m(t.model()) {
    const DenseTensor a = m.pi2() + 6.0 * m.pi1();
    const DenseTensor bb = m.pi2() - 6.0 * m.pi1();
    const double d = m.dim();
    ric_ab = {trace2(contract_ricci(a)) / d, trace2(contract_ricci(bb)) / d};
    ricq_ab = {trace2(contract_ricci_q(m, a)) / d, trace2(contract_ricci_q(m, bb)) / d};
    const PairCoords& pc = bank.coords();
    t3qr.resize(kT3Targets.size());
    t3rank.assign(kT3Targets.size(), 0);
    parallel_for(int(kT3Targets.size()), [&](int f) {
      const Mat& basis = bank.basis(kT3Targets[f]);
      if (basis.cols() == 0) return;
      Mat w(Eigen::Index(pc.pairs()) * pc.pairs(), basis.cols());
      for (Eigen::Index c = 0; c < basis.cols(); ++c)
        w.col(c) = pair_flat(pi1_operator(m, pc.unpack(basis.col(c))), pc);
      t3qr[f].compute(w);
      t3qr[f].setThreshold(1e-10);
      t3rank[f] = int(t3qr[f].rank());
    });
  }

  std::vector<Vec> eval(const TorsionState& s, bool table3) const {
    std::vector<Vec> out(kBlocks);
    const RicciComponents rc = ricci_component_formulas(m, s);
    auto scalar = [](double x) { return Vec::Constant(1, x); };
    out[bRqR] = scalar(rc.ricq_real);
    out[bRqL20E] = flat(rc.ricq_l20e);
    out[bRqS2ES2H] = flat(rc.ricq_s2es2h);
    out[bRqL20ES2H] = flat(rc.ricq_l20es2h);
    out[bRR] = scalar(rc.ric_real);
    out[bRL20E] = flat(rc.ric_l20e);
    out[bRS2ES2H] = flat(rc.ric_s2es2h);
    // pi_R(R) = alpha a + beta b from the Ric and Ric^q traces
    Eigen::Matrix2d k;
    k << ric_ab[0], ric_ab[1], ricq_ab[0], ricq_ab[1];
    out[bRx] = k.inverse() * Eigen::Vector2d(rc.ric_real, rc.ricq_real);
    out[bL20Ea] = flat(rc.ric_l20e_a);
    out[bL20Eb] = flat(rc.ric_l20e_b);
    out[bS2ES2Ha] = flat(rc.ric_s2es2h_a);
    out[bS2ES2Hb] = flat(rc.ric_s2es2h_b);
    out[bL20ES2H] = flat(rc.ricq_l20es2h);
    if (table3) {
      const Vec v = pair_flat(pi1(m, s), bank.coords());
      for (std::size_t f = 0; f < kT3Targets.size(); ++f)
        out[bT3 + f] = t3rank[f] > 0 ? Vec(t3qr[f].solve(v)) : Vec::Zero(1);
    } else {
      for (std::size_t f = 0; f < kT3Targets.size(); ++f) out[bT3 + f] = Vec::Zero(1);
    }
    return out;
  }
};

DenseTensor unit(DenseTensor t) {
  const double s = t.norm();
  if (s > 0) t *= 1.0 / s;
  return t;
}

int component_index(const std::string& t) { return int(torsion_component_from_name(t)); }

// Samples for one row and seed: the evaluated (polarized) blocks.
std::vector<Vec> row_sample(const Engine& e, const std::string& row, std::uint64_t seed,
                            std::uint64_t stream, bool table3) {
  const int d = e.m.dim();
  Rng rng(seed, stream);
  if (row == "gamma") {
    TorsionState s = TorsionState::zero(d);
    double norm2 = 0;
    for (int a = 0; a < 3; ++a) {
      DenseTensor g = random_tensor(2, d, rng);
      s.gamma[a] = g - swap12(g);
      s.gamma[a].set_tag(SymmetryTag::form);
      norm2 += dot(s.gamma[a], s.gamma[a]);
    }
    for (int a = 0; a < 3; ++a) s.gamma[a] *= 1.0 / std::sqrt(norm2);
    return e.eval(s, table3);
  }
  if (row[0] == 'D') {
    TorsionState s = TorsionState::zero(d);
    s.dxi = unit(e.tb.project_derivative(random_tensor(4, d, rng), component_index(row.substr(1))));
    return e.eval(s, table3);
  }
  const auto dot_pos = row.find('.');
  const int c1 = component_index(row.substr(0, dot_pos));
  const int c2 = component_index(row.substr(dot_pos + 1));
  TorsionState s = TorsionState::zero(d);
  const DenseTensor x1 = unit(e.tb.sample(c1, seed, 2 * stream));
  if (c1 == c2) {
    s.xi = x1;
    return e.eval(s, table3);
  }
  const DenseTensor x2 = unit(e.tb.sample(c2, seed, 2 * stream + 1));
  s.xi = x1 + x2;
  auto f12 = e.eval(s, table3);
  s.xi = x1;
  auto f1 = e.eval(s, table3);
  s.xi = x2;
  auto f2 = e.eval(s, table3);
  for (std::size_t b = 0; b < f12.size(); ++b) f12[b] -= f1[b] + f2[b];
  return f12;
}

const std::vector<std::string> kCols1 = {"Rq_R", "Rq_L20E", "Rq_S2ES2H", "Rq_L20ES2H",
                                         "R_R", "R_L20E", "R_S2ES2H"};
const std::vector<std::string> kCols2 = {"R_x", "L20E_x", "S2ES2H_x", "L20ES2H"};

// Curvature components a column depends on.
std::vector<std::string> column_components(int table, const std::string& c) {
  if (table == 3) return {c};
  if (c.find("L20ES2H") != std::string::npos) return {"L20ES2H"};
  if (c.find("L20E") != std::string::npos) return {"L20E_a", "L20E_b"};
  if (c.find("S2ES2H") != std::string::npos) return {"S2ES2H_a", "S2ES2H_b"};
  return {"R_a", "R_b"};
}

bool column_skipped(const ProjectorBank& bank, int table, const std::string& c) {
  const auto comps = column_components(table, c);
  int zero = 0;
  for (const auto& name : comps) zero += bank.rank(name) == 0;
  // Table 1 columns need one live component, the split columns need all of them.
  return table == 1 ? zero == int(comps.size()) : zero > 0;
}

bool row_skipped(const TorsionBank& tb, const std::string& row) {
  if (row == "gamma") return false;
  if (row[0] == 'D') return tb.rank(component_index(row.substr(1))) == 0;
  const auto p = row.find('.');
  return tb.rank(component_index(row.substr(0, p))) == 0 || tb.rank(component_index(row.substr(p + 1))) == 0;
}

// Tick count from the largest witness (0/1) or from two stacked directions (0/1/2); -1 if ambiguous.
int decide(double w, double on, double off) {
  if (w > on) return 1;
  if (w < off) return 0;
  return -1;
}

double metric_cos(const std::array<double, 2>& u, const std::array<double, 2>& v, double k1, double k2,
                  double* angle) {
  // <pa + qb, ra + sb> proportional to pr k2 + 2 qs k1
  const double x1 = u[0] * std::sqrt(k2), y1 = u[1] * std::sqrt(2 * k1);
  const double x2 = v[0] * std::sqrt(k2), y2 = v[1] * std::sqrt(2 * k1);
  const double n1 = std::hypot(x1, y1), n2 = std::hypot(x2, y2);
  const double dotp = (x1 * x2 + y1 * y2) / (n1 * n2);
  const double cross = (x1 * y2 - y1 * x2) / (n1 * n2);
  if (angle) *angle = std::atan2(std::abs(cross), std::abs(dotp));
  return dotp;
}

struct Annotation {
  std::array<double, 2> dir, orth;
};

std::map<std::string, Annotation> annotations(int n_) {
  const double n = n_, k1 = n - 1, k2 = 2 * n + 1;
  const double f = n * n + 3 * n + 1, g = n * n + 1, h = (2 * n - 1) * (n + 1);
  return {
      {"gamma", {{2, 1}, {k1, -k2}}},
      {"DEH", {{2 * k1, -k2}, {1, 1}}},
      {"33.33", {{5 * k1, -k2}, {2, 5}}},
      {"K3.K3", {{k1, k2}, {2, -1}}},
      {"E3.E3", {{2 * k1 * f, -k2 * g}, {g, f}}},
      {"3H.3H", {{-14 * k1, -5 * k2}, {5, -7}}},
      {"KH.KH", {{-17 * k1, -5 * k2}, {10, -7}}},
      {"EH.EH", {{-h, k2 * k2}, {2 * k1 * k2, h}}},
  };
}

}  // namespace

const char* status_name(CellStatus s) {
  switch (s) {
    case CellStatus::match: return "match";
    case CellStatus::mismatch: return "mismatch";
    case CellStatus::remark: return "remark";
    case CellStatus::ambiguous: return "ambiguous";
    case CellStatus::skipped: return "skipped";
  }
  return "?";
}

const std::vector<std::string>& table_rows(int table) {
  static const std::vector<std::string> with = make_rows(true), without = make_rows(false);
  return table == 3 ? without : with;
}

const std::vector<std::string>& table_columns(int table) {
  if (table == 1) return kCols1;
  if (table == 2) return kCols2;
  if (table == 3) return kT3Targets;
  throw Error("table_columns: table must be 1, 2 or 3");
}

int expected_ticks(int table, const std::string& row, const std::string& column) {
  const auto& rows = table_rows(table);
  const auto& cols = table_columns(table);
  const auto r = std::find(rows.begin(), rows.end(), row);
  const auto c = std::find(cols.begin(), cols.end(), column);
  if (r == rows.end() || c == cols.end()) throw Error("expected_ticks: unknown cell " + row + "/" + column);
  const auto& t = table == 1 ? kTable1 : table == 2 ? kTable2 : kTable3;
  return t[r - rows.begin()][c - cols.begin()] - '0';
}

bool remark_column(int table, const std::string& column) {
  if (table == 1) return column == "Rq_L20ES2H";
  if (table == 2) return column == "L20ES2H";
  return column == "V211S2H" || column == "L20ES4H";
}

int TablesReport::count(CellStatus s) const {
  int k = 0;
  for (const auto& c : cells) k += c.status == s;
  return k;
}

bool TablesReport::consistent() const {
  if (count(CellStatus::mismatch) > 0 || ambiguous()) return false;
  for (const auto& d : directions)
    if (!d.pass) return false;
  return true;
}

const ContributionCell* TablesReport::find(const std::string& table, const std::string& source,
                                           const std::string& target) const {
  for (const auto& c : cells)
    if (c.table == table && c.source == source && c.target == target) return &c;
  return nullptr;
}

TablesReport contribution_tables(const TorsionBank& tb, const ProjectorBank& bank, const TableOptions& opt) {
  if (opt.seeds < 1) throw Error("contribution_tables: at least one seed required");
  const ModelSpace& m = tb.model();
  const Engine e(tb, bank);
  const auto& rows = table_rows(1);
  std::vector<std::vector<std::vector<Vec>>> samples(rows.size());
  std::vector<int> active;
  for (int r = 0; r < int(rows.size()); ++r)
    if ((opt.rows.empty() || opt.rows.count(rows[r])) && !row_skipped(tb, rows[r])) active.push_back(r);
  // one sample per (row, seed); the substream depends only on those two
  std::vector<std::pair<int, int>> jobs;
  for (int r : active) {
    samples[r].resize(opt.seeds);
    for (int k = 0; k < opt.seeds; ++k) jobs.push_back({r, k});
  }
  parallel_for(int(jobs.size()), [&](int j) {
    const auto [r, k] = jobs[j];
    samples[r][k] = row_sample(e, rows[r], opt.seed + std::uint64_t(k), 1000 + std::uint64_t(r), rows[r] != "gamma");
  });

  TablesReport rep;
  rep.n = m.n();
  rep.seeds = opt.seeds;
  auto status = [&](int table, const std::string& col, int expected, int observed) {
    if (observed < 0) return CellStatus::ambiguous;
    if (observed == expected) return CellStatus::match;
    return remark_column(table, col) ? CellStatus::remark : CellStatus::mismatch;
  };
  auto add_skipped = [&](const std::string& table, const std::string& row, const std::string& col, int exp) {
    ContributionCell c;
    c.table = table;
    c.source = row;
    c.target = col;
    c.expected = exp;
    c.status = CellStatus::skipped;
    rep.cells.push_back(c);
  };
  auto max_norm = [&](int r, int block) {
    double w = 0;
    for (const auto& s : samples[r]) w = std::max(w, s[block].norm());
    return w;
  };

  for (int table = 1; table <= 3; ++table) {
    const auto& cols = table_columns(table);
    for (const auto& row : table_rows(table)) {
      if (!opt.rows.empty() && !opt.rows.count(row)) continue;
      const int r = int(std::find(rows.begin(), rows.end(), row) - rows.begin());
      for (int ci = 0; ci < int(cols.size()); ++ci) {
        const std::string& col = cols[ci];
        const int exp = expected_ticks(table, row, col);
        if (row_skipped(tb, row) || column_skipped(bank, table, col)) {
          add_skipped(std::to_string(table), row, col, exp);
          continue;
        }
        ContributionCell c;
        c.table = std::to_string(table);
        c.source = row;
        c.target = col;
        c.expected = exp;
        c.seeds = opt.seeds;
        if (table == 1) {
          c.witness = max_norm(r, ci);
          c.observed = decide(c.witness, opt.tick_on, opt.tick_off);
        } else if (table == 3) {
          c.witness = max_norm(r, bT3 + ci);
          c.observed = decide(c.witness, opt.tick_on, opt.tick_off);
        } else if (col == "L20ES2H") {
          c.witness = max_norm(r, bL20ES2H);
          c.observed = decide(c.witness, opt.tick_on, opt.tick_off);
        } else {
          // rank of the stacked (a, b) contributions
          const int ba = col == "R_x" ? bRx : col == "L20E_x" ? bL20Ea : bS2ES2Ha;
          Mat st;
          if (col == "R_x") {
            st.resize(opt.seeds, 2);
            for (int k = 0; k < opt.seeds; ++k) st.row(k) = samples[r][k][bRx].transpose();
          } else {
            const Eigen::Index len = samples[r][0][ba].size();
            st.resize(len * opt.seeds, 2);
            for (int k = 0; k < opt.seeds; ++k) {
              st.col(0).segment(k * len, len) = samples[r][k][ba];
              st.col(1).segment(k * len, len) = samples[r][k][ba + 1];
            }
          }
          Eigen::JacobiSVD<Mat> svd(st);
          const Vec sv = svd.singularValues();
          c.witness = sv(0);
          c.second = sv(0) > 0 ? sv(1) / sv(0) : 0.0;
          const int first = decide(c.witness, opt.tick_on, opt.tick_off);
          if (first <= 0) {
            c.observed = first;
          } else {
            const int second = decide(c.second, opt.tick_on, opt.tick_off);
            c.observed = second < 0 ? -1 : 1 + second;
          }
        }
        c.status = status(table, col, exp, c.observed);
        rep.cells.push_back(c);
      }
    }
  }

  // directions of the R_x contributions
  const double k1 = m.n() - 1, k2 = 2 * m.n() + 1;
  for (const auto& [row, ann] : annotations(m.n())) {
    if (!opt.rows.empty() && !opt.rows.count(row)) continue;
    if (row_skipped(tb, row)) continue;
    const int r = int(std::find(rows.begin(), rows.end(), row) - rows.begin());
    Mat st(opt.seeds, 2);
    for (int k = 0; k < opt.seeds; ++k) st.row(k) = samples[r][k][bRx].transpose();
    Eigen::JacobiSVD<Mat> svd(st, Eigen::ComputeFullV);
    Vec v = svd.matrixV().col(0);
    // orient along the sum of the samples so that a definite sign is reported
    if ((st * v).sum() < 0) v = -v;
    DirectionCheck dc;
    dc.source = row;
    dc.observed = {v(0), v(1)};
    dc.annotated_direction = ann.dir;
    dc.annotated_orthogonal = ann.orth;
    metric_cos(dc.observed, ann.dir, k1, k2, &dc.angle_direction);
    dc.orthogonality = std::abs(metric_cos(dc.observed, ann.orth, k1, k2, nullptr));
    dc.annotation_gap = std::abs(metric_cos(ann.dir, ann.orth, k1, k2, nullptr));
    dc.pass = dc.angle_direction < opt.angle_tol && dc.orthogonality < opt.angle_tol;
    rep.directions.push_back(dc);
  }
  return rep;
}

std::string format_tables(const TablesReport& r) {
  std::ostringstream os;
  for (int table = 1; table <= 3; ++table) {
    const auto& cols = table_columns(table);
    os << "Table " << table << " (n = " << r.n << ", seeds = " << r.seeds << ")\n";
    os << std::left << std::setw(8) << "";
    for (const auto& c : cols) os << std::setw(12) << c;
    os << "\n";
    for (const auto& row : table_rows(table)) {
      bool any = false;
      std::ostringstream line;
      line << std::left << std::setw(8) << row;
      for (const auto& col : cols) {
        const ContributionCell* c = r.find(std::to_string(table), row, col);
        std::string s = "-";
        if (c) {
          any = true;
          if (c->status == CellStatus::skipped) {
            s = ".";
          } else if (c->observed < 0) {
            s = "?";
          } else {
            s = std::string(c->observed, 'x');
            if (s.empty()) s = " ";
            if (c->status == CellStatus::mismatch) s += " !" + std::to_string(c->expected);
            if (c->status == CellStatus::remark) s += " r" + std::to_string(c->expected);
          }
        }
        line << std::setw(12) << s;
      }
      if (any) os << line.str() << "\n";
    }
    os << "\n";
  }
  os << "R_x directions (a = pi2 + 6 pi1, b = pi2 - 6 pi1)\n";
  for (const auto& d : r.directions) {
    os << std::left << std::setw(8) << d.source << std::setprecision(6) << "observed (" << d.observed[0] << ", "
       << d.observed[1] << ")  angle " << d.angle_direction << "  orth " << d.orthogonality
       << (d.annotation_gap > 1e-8 ? "  [annotation not orthogonal]" : "") << (d.pass ? "  ok" : "  FAIL") << "\n";
  }
  os << "cells: " << r.count(CellStatus::match) << " match, " << r.count(CellStatus::remark) << " remark, "
     << r.count(CellStatus::mismatch) << " mismatch, " << r.count(CellStatus::ambiguous) << " ambiguous, "
     << r.count(CellStatus::skipped) << " skipped\n";
  for (const auto& c : r.cells)
    if (c.status == CellStatus::mismatch || c.status == CellStatus::remark || c.status == CellStatus::ambiguous)
      os << "  table " << c.table << " " << c.source << " / " << c.target << ": expected " << c.expected
         << ", observed " << c.observed << " (" << status_name(c.status) << ", witness " << c.witness << ")\n";
  return os.str();
}

std::string tables_json(const TablesReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["seeds"] = r.seeds;
  j["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : r.cells)
    j["cells"].push_back({{"table", c.table},
                          {"source", c.source},
                          {"target", c.target},
                          {"expected", c.expected},
                          {"observed", c.observed},
                          {"witness", c.witness},
                          {"second", c.second},
                          {"seeds", c.seeds},
                          {"status", status_name(c.status)}});
  j["directions"] = nlohmann::ordered_json::array();
  for (const auto& d : r.directions)
    j["directions"].push_back({{"source", d.source},
                               {"observed", d.observed},
                               {"annotated_direction", d.annotated_direction},
                               {"annotated_orthogonal", d.annotated_orthogonal},
                               {"angle_direction", d.angle_direction},
                               {"orthogonality", d.orthogonality},
                               {"annotation_gap", d.annotation_gap},
                               {"pass", d.pass}});
  j["summary"] = {{"match", r.count(CellStatus::match)},
                  {"remark", r.count(CellStatus::remark)},
                  {"mismatch", r.count(CellStatus::mismatch)},
                  {"ambiguous", r.count(CellStatus::ambiguous)},
                  {"skipped", r.count(CellStatus::skipped)},
                  {"consistent", r.consistent()}};
  return j.dump(2);
}

}  // namespace qhc
