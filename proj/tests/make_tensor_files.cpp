#include <filesystem>
#include <iostream>

#include "qhc/curvature_space.hpp"
#include "qhc/rng.hpp"
#include "qhc/tensor_file.hpp"
#include "qhc/tensor_ops.hpp"
#include "qhc/torsion.hpp"

using namespace qhc;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_tensor_files DIR\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  const ModelSpace m = build_model(2);
  const int d = m.dim();
  auto save = [&](const char* name, const DenseTensor& t, bool certified) {
    write_tensor_file((dir / name).string(), {2, std::uint8_t(certified ? TensorFile::kCertified : 0), t});
  };

  save("ra.qht", m.pi2() + 6.0 * m.pi1(), true);
  save("zero4.qht", DenseTensor(4, d), true);
  save("random.qht", random_curvature(m, 11).tensor(), true);
  Rng rng(12);
  save("bad.qht", random_tensor(4, d, rng), true);

  const TorsionBank tb(m);
  save("zero3.qht", DenseTensor(3, d), false);
  const DenseTensor xi = tb.sample(TEH, 13);
  save("xi_eh.qht", xi, false);
  std::array<DenseTensor, 3> lambda;
  for (auto& l : lambda) l = random_tensor(1, d, rng);
  const auto nw = nabla_omega_from(m, xi, lambda);
  save("nw0.qht", nw[0], false);
  save("nw1.qht", nw[1], false);
  save("nw2.qht", nw[2], false);
  DenseTensor bad = random_tensor(3, d, rng);
  bad = bad - permute_slots(bad, {0, 2, 1, 3});
  save("bad_nw0.qht", bad, false);
  return 0;
}
