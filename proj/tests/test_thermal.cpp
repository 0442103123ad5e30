#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <random>
#include <sstream>

#include "support.hpp"
#include "systolic3d/errors.hpp"
#include "systolic3d/kernels.hpp"
#include "systolic3d/thermal.hpp"

using namespace systolic3d;

namespace {

ChipStack single_tier(double w_mm, double h_mm, double beol_nm = 0) {
  ChipStack s;
  s.name = "single";
  s.footprint_w_mm = w_mm;
  s.footprint_h_mm = h_mm;
  Tier t;
  t.name = "die";
  t.thickness_m = 500e-9;
  t.beol_thickness_m = beol_nm * 1e-9;
  s.tiers.push_back(t);
  s.blocks.push_back({"pe_array", 0, Rect{0, 0, w_mm, h_mm}, "pe_array"});
  return s;
}

BlockPower pe(double watts) { return BlockPower{{BlockKind::PEArray, 0}, watts, 0, 0}; }

Eigen::SparseMatrix<double> to_eigen(const ThermalSystem& sys) {
  const auto n = static_cast<Eigen::Index>(sys.size());
  std::vector<Eigen::Triplet<double>> trips;
  const std::ptrdiff_t nx = sys.nx, pl = static_cast<std::ptrdiff_t>(sys.plane());
  const std::ptrdiff_t off[6] = {-1, 1, -nx, nx, -pl, pl};
  for (Eigen::Index i = 0; i < n; ++i) {
    trips.emplace_back(i, i, sys.diag[i]);
    for (std::size_t k = 0; k < 6; ++k)
      if (sys.coupling[k][i] != 0) trips.emplace_back(i, i + off[k], -sys.coupling[k][i]);
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

std::vector<double> random_device_power(const ThermalSystem& sys, std::mt19937_64& rng, double density) {
  std::vector<double> p(sys.size(), 0.0);
  for (std::size_t l = 0; l < sys.layers.size(); ++l) {
    if (sys.layers[l].role != LayerRole::Device) continue;
    for (std::size_t j = 0; j < sys.plane(); ++j)
      if (testsupport::draw_real(rng, 0, 1) < density) p[l * sys.plane() + j] = testsupport::draw_real(rng, 0, 0.05);
  }
  return p;
}

}  // namespace

TEST_CASE("zero power gives ambient exactly") {
  const auto sys = build_grid(testsupport::mono3d_stack(), {32, 32});
  const auto f = solve_steady(sys, std::vector<double>(sys.size(), 0.0));
  for (double t : f.cells) REQUIRE(t == 45.0);
  CHECK(f.max_overall == 45.0);
}

TEST_CASE("lumped single-tier grid is a two-node series circuit") {
  const auto stack = single_tier(8.416, 5.398);
  const auto sys = build_grid(stack, {1, 1});
  REQUIRE(sys.size() == 2);
  const double A = stack.footprint_mm2() * 1e-6;
  const double r_spreader_half = stack.spreader_thickness_m / (2 * 400 * A);
  const double r_sink = stack.sink_thickness_m / (400 * A);
  const double r_die_half = 500e-9 / (2 * 120 * A);
  const auto f = solve_steady(sys, power_vector(sys, {pe(1.0)}));
  CHECK(f.cells[0] == doctest::Approx(45 + 1.3 + r_sink + r_spreader_half).epsilon(1e-9));
  CHECK(f.cells[1] == doctest::Approx(45 + 1.3 + r_sink + 2 * r_spreader_half + r_die_half).epsilon(1e-9));
  CHECK(f.cells[1] == doctest::Approx(46.3).epsilon(0.01));
}

TEST_CASE("layer layout of the shipped stacks") {
  const auto sys = build_grid(testsupport::mono3d_stack(), {32, 32});
  // spreader + 6 device + 6 BEOL + 5 ILD
  CHECK(sys.layers.size() == 18);
  CHECK(sys.size() == 32u * 32u * 18u);
  CHECK(sys.tier_count() == 6);
  CHECK(sys.layers[0].role == LayerRole::Spreader);
  CHECK(*sys.device_layer(0) == 1);
  CHECK(*sys.beol_layer(0) == 2);
  CHECK(sys.layers[3].role == LayerRole::Ild);
  const auto planar = build_grid(testsupport::planar_stack(), {32, 32});
  CHECK(planar.layers.size() == 3);
}

TEST_CASE("conductance matrix is symmetric positive definite") {
  const auto sys = build_grid(testsupport::mono3d_stack(), {4, 3});
  const auto n = sys.size();
  Eigen::MatrixXd dense(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dense(i, j) = sys.entry(i, j);
  CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::LLT<Eigen::MatrixXd> llt(dense);
  CHECK(llt.info() == Eigen::Success);
  const auto sparse = to_eigen(sys);
  CHECK((Eigen::MatrixXd(sparse) - dense).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pcg agrees with a direct sparse factorisation") {
  std::mt19937_64 rng(31);
  for (const auto& stack : {testsupport::mono3d_stack(), testsupport::planar_stack()}) {
    const auto sys = build_grid(stack, {12, 10});
    const auto p = random_device_power(sys, rng, 0.4);
    const auto f = solve_steady(sys, p);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(to_eigen(sys));
    REQUIRE(ldlt.info() == Eigen::Success);
    const Eigen::VectorXd theta = ldlt.solve(Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size())));
    double worst = 0, scale = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      worst = std::max(worst, std::abs(f.cells[i] - 45.0 - theta[static_cast<Eigen::Index>(i)]));
      scale = std::max(scale, std::abs(theta[static_cast<Eigen::Index>(i)]));
    }
    CHECK(worst <= 1e-7 * scale);
  }
}

TEST_CASE("energy conservation at the default resolution") {
  std::mt19937_64 rng(41);
  const auto sys = build_grid(testsupport::mono3d_stack(), {32, 32});
  const auto p = random_device_power(sys, rng, 0.3);
  double injected = 0;
  for (double v : p) injected += v;
  const auto f = solve_steady(sys, p);
  CHECK(std::abs(heat_to_ambient(sys, f) - injected) / injected < 1e-6);
}

TEST_CASE("linearity, monotonicity and the maximum principle") {
  std::mt19937_64 rng(43);
  const auto sys = build_grid(testsupport::mono3d_stack(), {16, 16});
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_device_power(sys, rng, 0.2);
    auto p2 = p;
    for (auto& v : p2) v *= 2;
    auto more = p;
    for (int k = 0; k < 20; ++k) more[testsupport::draw(rng, 0, sys.size() - 1)] += testsupport::draw_real(rng, 0, 0.1);
    const auto f = solve_steady(sys, p);
    const auto f2 = solve_steady(sys, p2);
    const auto fm = solve_steady(sys, more);
    double hottest_powered = -1e9;
    for (std::size_t i = 0; i < sys.size(); ++i) {
      CHECK(f2.cells[i] - 45 == doctest::Approx(2 * (f.cells[i] - 45)).epsilon(1e-8));
      CHECK(fm.cells[i] >= f.cells[i] - 1e-9);
      CHECK(f.cells[i] >= 45.0 - 1e-12);
      if (p[i] > 0) hottest_powered = std::max(hottest_powered, f.cells[i]);
    }
    CHECK(f.max_overall == doctest::Approx(hottest_powered).epsilon(1e-9));
  }
}

TEST_CASE("mirrored power mirrors the field") {
  std::mt19937_64 rng(47);
  const auto sys = build_grid(testsupport::planar_stack(), {20, 14});
  const auto p = random_device_power(sys, rng, 0.3);
  std::vector<double> mirrored(p.size());
  for (std::size_t l = 0; l < sys.layers.size(); ++l)
    for (std::uint32_t iy = 0; iy < sys.ny; ++iy)
      for (std::uint32_t ix = 0; ix < sys.nx; ++ix) mirrored[sys.index(sys.nx - 1 - ix, iy, l)] = p[sys.index(ix, iy, l)];
  const auto a = solve_steady(sys, p);
  const auto b = solve_steady(sys, mirrored);
  for (std::size_t l = 0; l < sys.layers.size(); ++l)
    for (std::uint32_t iy = 0; iy < sys.ny; ++iy)
      for (std::uint32_t ix = 0; ix < sys.nx; ++ix)
        CHECK(b.cells[sys.index(sys.nx - 1 - ix, iy, l)] == doctest::Approx(a.cells[sys.index(ix, iy, l)]).epsilon(1e-9));
}

TEST_CASE("block power distribution") {
  const auto stack = testsupport::mono3d_stack();
  const auto sys = build_grid(stack, {8, 8});
  const std::vector<BlockPower> blocks{pe(2.0),
                                       {{BlockKind::IfmapSram, 0}, 0.5, 0.25, 1},
                                       {{BlockKind::Beol, 3}, 0.125, 0, 3},
                                       {{BlockKind::Dram, 0}, 9.0, 0, std::nullopt}};
  const auto p = power_vector(sys, blocks);
  double total = 0;
  for (double v : p) total += v;
  CHECK(total == doctest::Approx(2.875));
  // IFMAP SRAM is the left half of tier 1.
  const auto dev1 = *sys.device_layer(1);
  CHECK(p[sys.index(0, 0, dev1)] == doctest::Approx(0.75 / 32));
  CHECK(p[sys.index(7, 0, dev1)] == 0.0);
  CHECK(p[sys.index(3, 5, *sys.beol_layer(3))] == doctest::Approx(0.125 / 64));
  CHECK_THROWS_AS(power_vector(sys, {BlockPower{{BlockKind::RramTier, 7}, 1, 0, 2}}), FloorplanError);

  const auto f = solve_steady(sys, p);
  const auto mean = block_temperatures(sys, f, blocks, BlockTemperature::Mean);
  const auto hot = block_temperatures(sys, f, blocks, BlockTemperature::Max);
  for (std::size_t i = 0; i < blocks.size(); ++i) CHECK(hot[i] >= mean[i]);
  CHECK(mean[3] == 45.0);
}

TEST_CASE("degenerate inputs") {
  CHECK_THROWS_AS(build_grid(testsupport::mono3d_stack(), {0, 4}), ValidationError);
  auto bad = testsupport::mono3d_stack();
  bad.ild_thickness_m = 0;
  CHECK_THROWS_AS(build_grid(bad, {4, 4}), ValidationError);
  auto overlap = testsupport::mono3d_stack();
  overlap.blocks.push_back({"dup", 0, Rect{1, 1, 1, 1}, "pe_array"});
  CHECK_THROWS_AS(build_grid(overlap, {4, 4}), FloorplanError);
  const auto sys = build_grid(testsupport::mono3d_stack(), {16, 16});
  SolveOptions starved;
  starved.max_iterations = 1;
  try {
    solve_steady(sys, power_vector(sys, {pe(3.0)}), starved);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(e.residual() > 0);
  }
  CHECK_THROWS_AS(solve_steady(sys, std::vector<double>(3, 0.0)), ValidationError);
}

TEST_CASE("backends give the same temperatures") {
  std::mt19937_64 rng(53);
  const auto sys = build_grid(testsupport::mono3d_stack(), {32, 32});
  const auto p = random_device_power(sys, rng, 0.5);
  const auto before = kernels::active().backend;
  kernels::set_active(kernels::Backend::Scalar);
  const auto ref = solve_steady(sys, p);
  kernels::set_active(before);
  const auto fast = solve_steady(sys, p);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(fast.cells[i] == doctest::Approx(ref.cells[i]).epsilon(1e-9));
}

TEST_CASE("leakage fixed point") {
  const auto stack = testsupport::mono3d_stack();
  const auto sys = build_grid(stack, {16, 16});
  const std::vector<BlockPower> blocks{pe(3.0), {{BlockKind::IfmapSram, 0}, 0.4, 0, 1}};

  SUBCASE("beta zero settles on the second pass") {
    const std::vector<LeakageModel> flat{{2.0, 45, 0}, {1.0, 45, 0}};
    const auto r = fixed_point(sys, blocks, flat);
    CHECK(r.iterations == 2);
    CHECK(r.blocks[0].leakage_w == 2.0);
    CHECK(r.max_temp_history[0] == r.max_temp_history[1]);
  }
  SUBCASE("small beta rises monotonically and converges") {
    const std::vector<LeakageModel> warm{{2.0, 45, 0.008}, {1.0, 45, 0.008}};
    FixedPointOptions tight;
    tight.tolerance_c = 1e-4;
    const auto r = fixed_point(sys, blocks, warm, tight);
    CHECK(r.iterations < 50);
    for (std::size_t i = 1; i < r.max_temp_history.size(); ++i)
      CHECK(r.max_temp_history[i] >= r.max_temp_history[i - 1]);
    CHECK(r.blocks[0].leakage_w > 2.0);
    // Converged leakage is consistent with the reported block temperature.
    CHECK(r.blocks[0].leakage_w == doctest::Approx(warm[0].at(r.block_temps_c[0])).epsilon(1e-4));
  }
  SUBCASE("iteration cap") {
    const std::vector<LeakageModel> warm{{2.0, 45, 0.008}, {1.0, 45, 0.008}};
    FixedPointOptions capped;
    capped.max_iterations = 2;
    capped.tolerance_c = 1e-6;
    CHECK_THROWS_AS(fixed_point(sys, blocks, warm, capped), DivergenceError);
    FixedPointOptions zero;
    zero.tolerance_c = 0;
    CHECK_THROWS_AS(fixed_point(sys, blocks, warm, zero), ValidationError);
  }
}

TEST_CASE("temperature csv") {
  const auto sys = build_grid(testsupport::mono3d_stack(), {4, 2});
  const auto f = solve_steady(sys, power_vector(sys, {pe(1.0)}));
  std::stringstream ss;
  write_temperature_csv(ss, sys, f);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "layer,name,tier,ix,iy,x_mm,y_mm,temp_c");
  std::size_t rows = 0;
  while (std::getline(ss, line)) ++rows;
  CHECK(rows == sys.size());
}
