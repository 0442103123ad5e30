#include <doctest.h>

#include <random>

#include "support.hpp"
#include "systolic3d/dataflow.hpp"

using namespace systolic3d;

namespace {

ArrayConfig array(std::uint32_t rows, std::uint32_t cols, Variant v = Variant::WS2D) {
  return ArrayConfig{rows, cols, v, 1e9};
}

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

}  // namespace

TEST_CASE("variant names round-trip") {
  CHECK(to_string(Variant::WS2D) == "ws2d");
  CHECK(to_string(Variant::WSMono3D) == "ws-mono3d");
  CHECK(parse_variant("ws-mono3d") == Variant::WSMono3D);
  CHECK(parse_variant("ws2d") == Variant::WS2D);
  CHECK_THROWS(parse_variant("os"));
}

TEST_CASE("fold enumeration examples") {
  auto folds = enumerate_folds({9, 8, 1}, array(4, 4));
  REQUIRE(folds.size() == 6);
  const std::uint64_t rs[] = {4, 4, 4, 4, 1, 1};
  const std::uint64_t ps[] = {0, 0, 1, 1, 2, 2};
  const std::uint64_t qs[] = {0, 1, 0, 1, 0, 1};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(folds[i].r == rs[i]);
    CHECK(folds[i].c == 4);
    CHECK(folds[i].p == ps[i]);
    CHECK(folds[i].q == qs[i]);
  }
  folds = enumerate_folds({4, 4, 1}, array(4, 4));
  REQUIRE(folds.size() == 1);
  CHECK(folds[0].r == 4);
  CHECK(folds[0].c == 4);
  folds = enumerate_folds({1, 1, 1}, array(256, 256));
  REQUIRE(folds.size() == 1);
  CHECK(folds[0].r == 1);
  CHECK(folds[0].c == 1);
}

TEST_CASE("fold cycle examples") {
  const GemmDims g{4, 4, 4};
  const FoldIndex f{0, 0, 4, 4};
  CHECK(fold_cycles(g, f, Variant::WS2D) == PhaseCycles{4, 3, 7});
  CHECK(fold_cycles(g, f, Variant::WSMono3D) == PhaseCycles{1, 1, 7});
  CHECK(fold_cycles({1, 1, 1}, {0, 0, 1, 1}, Variant::WS2D) == PhaseCycles{1, 0, 1});
  CHECK(fold_cycles({1, 1, 1}, {0, 0, 1, 1}, Variant::WS2D).total() == 2);
}

TEST_CASE("layer cycle examples") {
  auto rep = layer_cycles(GemmDims{4, 4, 4}, array(4, 4));
  CHECK(rep.compute_cycles == 14);
  CHECK(rep.utilization == doctest::Approx(1.0));
  CHECK(rep.mac_ops == 64);
  CHECK(layer_cycles(GemmDims{4, 4, 4}, array(4, 4, Variant::WSMono3D)).compute_cycles == 9);
  rep = layer_cycles(GemmDims{9, 8, 10}, array(4, 4));
  CHECK(rep.compute_cycles == 108);
  CHECK(rep.folds.size() == 6);
}

TEST_CASE("access and hop examples") {
  const GemmDims g{4, 4, 4};
  auto a = count_accesses(g, {0, 0, 4, 4}, Variant::WS2D);
  CHECK(a.rram_weight_reads == 16);
  CHECK(a.sram_ifmap_reads == 16);
  CHECK(a.sram_ofmap_writes == 16);
  CHECK(a.sram_ofmap_reads == 0);
  CHECK(count_accesses(g, {1, 0, 4, 4}, Variant::WS2D).sram_ofmap_reads == 16);

  auto h = count_hops(g, {0, 0, 4, 4}, Variant::WS2D);
  CHECK(h == HopCounts{48, 24, 48, 0, 0});
  h = count_hops(g, {0, 0, 4, 4}, Variant::WSMono3D);
  CHECK(h == HopCounts{0, 0, 48, 16, 16});
  CHECK(count_hops({1, 5, 7}, {0, 0, 1, 5}, Variant::WS2D).hops_psum == 0);

  const auto rep = layer_cycles(GemmDims{9, 8, 10}, array(4, 4));
  CHECK(rep.accesses.rram_weight_reads == 72);
}

TEST_CASE("depthwise layers concatenate per-channel folds") {
  LayerSpec dw;
  dw.kind = LayerKind::DepthwiseConv;
  dw.ifmap_h = dw.ifmap_w = 6;
  dw.filter_h = dw.filter_w = 3;
  dw.channels_in = dw.num_filters = 5;
  const auto rep = layer_cycles(dw, array(4, 4));
  // K = 9 on 4 rows: three row folds per channel.
  REQUIRE(rep.folds.size() == 15);
  for (std::size_t i = 0; i < rep.folds.size(); ++i) CHECK(rep.folds[i].group == i / 3);
  const auto single = layer_cycles(GemmDims{9, 1, 16}, array(4, 4));
  CHECK(rep.compute_cycles == 5 * single.compute_cycles);
  CHECK(rep.mac_ops == 5 * 9 * 16);
}

TEST_CASE("fold model properties over random shapes") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto rows = static_cast<std::uint32_t>(testsupport::draw(rng, 1, 300));
    const auto cols = static_cast<std::uint32_t>(testsupport::draw(rng, 1, 300));
    const GemmDims g{testsupport::draw(rng, 1, 2000), testsupport::draw(rng, 1, 700), testsupport::draw(rng, 1, 4000)};
    CAPTURE(rows);
    CAPTURE(cols);
    CAPTURE(g.K);
    CAPTURE(g.M);
    CAPTURE(g.T);
    const auto a2 = array(rows, cols, Variant::WS2D);
    const auto a3 = array(rows, cols, Variant::WSMono3D);
    const auto folds = enumerate_folds(g, a2);
    REQUIRE(folds.size() == ceil_div(g.K, rows) * ceil_div(g.M, cols));

    std::uint64_t used = 0;
    for (const auto& f : folds) {
      const auto c2 = fold_cycles(g, f, Variant::WS2D);
      const auto c3 = fold_cycles(g, f, Variant::WSMono3D);
      CHECK(c2.total() == 2 * f.r + f.c + g.T - 2);
      CHECK(c3.total() == g.T + f.r + 1);
      CHECK(c2.o == c3.o);
      CHECK(c2.total() + 3 == c3.total() + f.r + f.c);
      const auto signed_total = [](const PhaseCycles& c) { return static_cast<std::int64_t>(c.total()); };
      CHECK(signed_total(c2) - signed_total(c3) ==
            (static_cast<std::int64_t>(c2.w) - 1) + (static_cast<std::int64_t>(c2.i_fill) - 1));
      used += f.r * f.c;
    }
    const auto rep2 = layer_cycles(g, a2);
    const auto rep3 = layer_cycles(g, a3);
    CHECK(used <= folds.size() * rows * cols);
    CHECK((used == folds.size() * rows * cols) == (g.K % rows == 0 && g.M % cols == 0));
    CHECK(rep2.utilization == doctest::Approx(static_cast<double>(used) / (folds.size() * rows * cols)));
    CHECK(rep2.accesses.rram_weight_reads == g.K * g.M);
    CHECK(rep2.accesses.sram_ofmap_writes == ceil_div(g.K, rows) * g.M * g.T);
    CHECK(rep2.accesses == rep3.accesses);
    CHECK(rep2.mac_ops == g.macs());
    std::uint64_t sum = 0;
    for (const auto& f : rep2.folds) sum += f.cycles.total();
    CHECK(rep2.compute_cycles == sum);
  }
}
