#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qhc/curvature_space.hpp"
#include "qhc/decomposition.hpp"
#include "qhc/tables.hpp"
#include "qhc/tensor_file.hpp"
#include "qhc/torsion.hpp"

using namespace qhc;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kPass = 0, kUsage = 1, kFail = 2, kAmbiguous = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  int n = 0;
  double tol = -1;  // < 0: module defaults
  bool allow_large = false;
  std::string json_path;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--n", c.n, "quaternionic dimension")->required();
  sub->add_option("--tol", c.tol, "override every verification tolerance");
  sub->add_option("--json", c.json_path, "write a JSON report to PATH");
  sub->add_flag("--allow-large", c.allow_large, "permit n = 4");
}

void check_n(const Common& c) {
  if (c.n == 2 || c.n == 3) return;
  if (c.n == 4 && c.allow_large) return;
  if (c.n == 4) throw UsageError("n = 4 requires --allow-large");
  throw UsageError("n must be 2 or 3 (4 with --allow-large)");
}

double tol_or(const Common& c, double def) { return c.tol >= 0 ? c.tol : def; }

json report(const Common& c, const std::string& command, const json& tolerances) {
  json j;
  j["version"] = 1;
  j["n"] = c.n;
  j["command"] = command;
  j["tolerances"] = tolerances;
  j["results"] = json::array();
  j["failures"] = json::array();
  return j;
}

void write_report(const Common& c, const json& j) {
  if (c.json_path.empty()) return;
  std::ofstream out(c.json_path);
  if (!out) throw Error("cannot write " + c.json_path);
  out << j.dump(2) << "\n";
}

struct Banks {
  ModelSpace m;
  PairCoords pc;
  ProjectorBank bank;

  explicit Banks(const ModelSpace& model)
      : m(model), pc(m.dim()), bank(build_sp_projectors(m, pc, build_gl_projectors(m, pc))) {}
};

int cmd_audit(const Common& c) {
  const double tol = tol_or(c, 1e-9);
  const ModelSpace m = build_model(c.n, c.allow_large);
  const Banks b(m);
  const DecompositionReport rep = dimension_audit(b.bank, tol);

  json j = report(c, "audit", {{"residual", tol}, {"rank", 0}});
  std::printf("audit n=%d\n", c.n);
  for (const auto& [name, rank] : rep.ranks) {
    std::printf("  rank %-10s %d\n", name.c_str(), rank);
    j["results"].push_back({{"name", "rank_" + name}, {"value", rank}, {"tolerance", 0}});
  }
  for (const auto& l : rep.checks) {
    std::printf("  %-24s %-14.6g expected %-10.6g %s\n", l.name.c_str(), l.value, l.expected,
                l.pass ? "ok" : "FAIL");
    j["results"].push_back({{"name", l.name},
                            {"value", l.value},
                            {"expected", l.expected},
                            {"tolerance", l.tol},
                            {"pass", l.pass}});
  }
  for (const auto& f : rep.failures()) j["failures"].push_back(f);
  write_report(c, j);
  std::printf("%s\n", rep.pass() ? "PASS" : "FAIL");
  return rep.pass() ? kPass : kFail;
}

int cmd_decompose(const Common& c, const std::string& input) {
  const double tol = tol_or(c, 1e-8);
  const TensorFile f = read_tensor_file(input);
  if (f.n != c.n) throw UsageError("input was written for n = " + std::to_string(f.n));
  if (f.tensor.rank() != 4) throw UsageError("decompose expects a rank-4 tensor");

  json j = report(c, "decompose", {{"certification", tol}, {"reconstruction", tol}});
  CurvatureTensor r;
  try {
    r = CurvatureTensor::certify(f.tensor, tol);
  } catch (const Error& e) {
    j["failures"].push_back(std::string("certification: ") + e.what());
    write_report(c, j);
    std::fprintf(stderr, "certification failed: %s\n", e.what());
    return kFail;
  }

  const ModelSpace m = build_model(c.n, c.allow_large);
  const Banks b(m);
  const double total = r.tensor().norm();
  double sum2 = 0;
  std::printf("decompose n=%d |R| = %.12g\n", c.n, total);
  for (const auto& name : fine_component_names()) {
    const double v = b.bank.rank(name) ? project_component(b.bank, r, name).norm : 0.0;
    sum2 += v * v;
    std::printf("  %-10s %.12g\n", name.c_str(), v);
    j["results"].push_back({{"name", name}, {"norm", v}, {"tolerance", tol}});
  }
  for (const char* name : {"QK", "QKperp"}) {
    const double v = project_component(b.bank, r, name).norm;
    std::printf("  %-10s %.12g\n", name, v);
    j["results"].push_back({{"name", name}, {"norm", v}, {"tolerance", tol}});
  }
  const double residual = std::abs(std::sqrt(sum2) - total) / std::max(total, 1.0);
  std::printf("  reconstruction residual %.3g\n", residual);
  j["results"].push_back({{"name", "reconstruction_residual"}, {"value", residual}, {"tolerance", tol}});
  const bool pass = residual <= tol;
  if (!pass) j["failures"].push_back("reconstruction_residual");
  write_report(c, j);
  return pass ? kPass : kFail;
}

int cmd_torsion(const Common& c, const std::string& input, const std::vector<std::string>& nabla) {
  const double tol = tol_or(c, 1e-8);
  if (input.empty() == nabla.empty()) throw UsageError("give exactly one of --input, --from-nabla-omega");
  const ModelSpace m = build_model(c.n, c.allow_large);
  auto load = [&](const std::string& path) {
    TensorFile f = read_tensor_file(path);
    if (f.n != c.n) throw UsageError(path + " was written for n = " + std::to_string(f.n));
    if (f.tensor.rank() != 3) throw UsageError(path + ": rank-3 tensor expected");
    return f.tensor;
  };

  json j = report(c, "torsion", {{"membership", tol}, {"class", tol}});
  DenseTensor xi;
  if (!input.empty()) {
    xi = load(input);
  } else {
    std::array<DenseTensor, 3> nw;
    for (int a = 0; a < 3; ++a) nw[a] = load(nabla[a]);
    const TorsionRecovery rec = torsion_from_nabla_omega(m, nw);
    j["results"].push_back({{"name", "recovery_residual"}, {"value", rec.residual}, {"tolerance", tol}});
    if (rec.residual > tol) {
      j["failures"].push_back("recovery_residual");
      write_report(c, j);
      std::fprintf(stderr, "covariant derivatives are not of the form xi . omega (residual %.3g)\n",
                   rec.residual);
      return kFail;
    }
    xi = rec.xi;
  }

  const TorsionBank tb(m);
  const double scale = std::max(xi.norm(), 1e-300);
  const double outside = (xi - tb.project_space(xi)).norm() / scale;
  j["results"].push_back({{"name", "outside_torsion_space"}, {"value", xi.norm() > 0 ? outside : 0.0},
                          {"tolerance", tol}});
  if (xi.norm() > 0 && outside > tol) {
    j["failures"].push_back("outside_torsion_space");
    write_report(c, j);
    std::fprintf(stderr, "input is not in T* (x) L20E S2H (relative residual %.3g)\n", outside);
    return kFail;
  }

  const auto norms = tb.norms(xi);
  const unsigned mask = tb.class_mask(xi, tol);
  std::string bits;
  std::printf("torsion n=%d\n", c.n);
  for (int k = 0; k < kTorsionComponents; ++k) {
    const std::string& name = torsion_component_names()[k];
    std::printf("  %-3s %.12g\n", name.c_str(), norms[k]);
    j["results"].push_back({{"name", name}, {"norm", norms[k]}, {"tolerance", tol}});
    bits += (mask >> k) & 1u ? '1' : '0';
  }
  std::printf("  class %s\n", bits.c_str());
  j["results"].push_back({{"name", "class"}, {"value", bits}, {"mask", mask}, {"tolerance", tol}});
  write_report(c, j);
  return kPass;
}

int cmd_tables(const Common& c, int seeds, std::uint64_t seed) {
  if (seeds < 1) throw UsageError("--seeds must be positive");
  TableOptions opt;
  opt.seeds = seeds;
  opt.seed = seed;
  if (c.tol >= 0) opt.angle_tol = c.tol;
  const ModelSpace m = build_model(c.n, c.allow_large);
  const Banks b(m);
  const TorsionBank tb(m);
  const TablesReport r = contribution_tables(tb, b.bank, opt);

  std::cout << format_tables(r);
  json j = report(c, "tables", {{"tick_on", opt.tick_on}, {"tick_off", opt.tick_off}, {"angle", opt.angle_tol}});
  json t = json::parse(tables_json(r));
  j["results"] = t;
  for (const auto& cell : r.cells)
    if (cell.status == CellStatus::mismatch || cell.status == CellStatus::ambiguous)
      j["failures"].push_back("table " + cell.table + " " + cell.source + " / " + cell.target + ": " +
                              status_name(cell.status));
  for (const auto& d : r.directions)
    if (!d.pass) j["failures"].push_back("direction " + d.source);
  write_report(c, j);
  if (r.ambiguous()) return kAmbiguous;
  return r.consistent() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sp(n)Sp(1) curvature and intrinsic torsion toolkit"};
  app.require_subcommand(1);

  Common audit_opt, dec_opt, tor_opt, tab_opt;
  auto* audit = app.add_subcommand("audit", "dimension, spectrum and projector audit");
  add_common(audit, audit_opt);

  std::string dec_input;
  auto* dec = app.add_subcommand("decompose", "component norms of a curvature tensor");
  add_common(dec, dec_opt);
  dec->add_option("--input", dec_input, "QHT1 rank-4 tensor")->required()->check(CLI::ExistingFile);

  std::string tor_input;
  std::vector<std::string> tor_nabla;
  auto* tor = app.add_subcommand("torsion", "intrinsic torsion components and class");
  add_common(tor, tor_opt);
  tor->add_option("--input", tor_input, "QHT1 rank-3 tensor xi(X; Y, Z)")->check(CLI::ExistingFile);
  tor->add_option("--from-nabla-omega", tor_nabla, "three QHT1 tensors (∇_X omega_A)(Y, Z)")->expected(3)->check(CLI::ExistingFile);

  int seeds = 8;
  std::uint64_t seed = 1;
  auto* tab = app.add_subcommand("tables", "randomized contribution tables");
  add_common(tab, tab_opt);
  tab->add_option("--seeds", seeds, "samples per row");
  tab->add_option("--seed", seed, "base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*audit) return check_n(audit_opt), cmd_audit(audit_opt);
    if (*dec) return check_n(dec_opt), cmd_decompose(dec_opt, dec_input);
    if (*tor) return check_n(tor_opt), cmd_torsion(tor_opt, tor_input, tor_nabla);
    if (*tab) return check_n(tab_opt), cmd_tables(tab_opt, seeds, seed);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFail;
  }
  return kUsage;
}
