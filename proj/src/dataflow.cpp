#include "systolic3d/dataflow.hpp"

#include <algorithm>
#include <string>

#include "systolic3d/errors.hpp"

namespace systolic3d {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

}  // namespace

std::string_view to_string(Variant v) {
  return v == Variant::WS2D ? "ws2d" : "ws-mono3d";
}

Variant parse_variant(std::string_view text) {
  if (text == "ws2d" || text == "2d" || text == "ws") return Variant::WS2D;
  if (text == "ws-mono3d" || text == "mono3d" || text == "ws_mono3d")
    return Variant::WSMono3D;
  throw ValidationError("unknown variant '" + std::string(text) + "'");
}

AccessCounts& AccessCounts::operator+=(const AccessCounts& o) {
  sram_ifmap_reads += o.sram_ifmap_reads;
  sram_ofmap_writes += o.sram_ofmap_writes;
  sram_ofmap_reads += o.sram_ofmap_reads;
  rram_weight_reads += o.rram_weight_reads;
  return *this;
}

HopCounts& HopCounts::operator+=(const HopCounts& o) {
  hops_input += o.hops_input;
  hops_weight += o.hops_weight;
  hops_psum += o.hops_psum;
  miv_input += o.miv_input;
  miv_weight += o.miv_weight;
  return *this;
}

std::vector<FoldIndex> enumerate_folds(const GemmDims& g, const ArrayConfig& a) {
  const std::uint64_t row_folds = ceil_div(g.K, a.rows);
  const std::uint64_t col_folds = ceil_div(g.M, a.cols);
  std::vector<FoldIndex> folds;
  folds.reserve(row_folds * col_folds);
  for (std::uint64_t p = 0; p < row_folds; ++p) {
    const std::uint64_t r = std::min<std::uint64_t>(a.rows, g.K - p * a.rows);
    for (std::uint64_t q = 0; q < col_folds; ++q) {
      const std::uint64_t c = std::min<std::uint64_t>(a.cols, g.M - q * a.cols);
      folds.push_back({p, q, r, c});
    }
  }
  return folds;
}

PhaseCycles fold_cycles(const GemmDims& g, const FoldIndex& fold, Variant v) {
  // Row skew is charged to O (psum drain), so O does not depend on the variant.
  const std::uint64_t o = g.T + fold.r - 1;
  if (v == Variant::WSMono3D) return {1, 1, o};
  return {fold.r, fold.c - 1, o};
}

AccessCounts count_accesses(const GemmDims& g, const FoldIndex& fold, Variant) {
  AccessCounts a;
  a.rram_weight_reads = fold.r * fold.c;
  a.sram_ifmap_reads = fold.r * g.T;
  a.sram_ofmap_writes = fold.c * g.T;
  // Row folds after the first accumulate into the partial sums already in
  // the OFMAP SRAM.
  a.sram_ofmap_reads = fold.p > 0 ? fold.c * g.T : 0;
  return a;
}

HopCounts count_hops(const GemmDims& g, const FoldIndex& fold, Variant v) {
  HopCounts h;
  h.hops_psum = fold.c * g.T * (fold.r - 1);
  if (v == Variant::WS2D) {
    h.hops_input = fold.r * g.T * (fold.c - 1);
    h.hops_weight = fold.c * (fold.r * (fold.r - 1) / 2);
  } else {
    h.miv_input = fold.r * g.T;
    h.miv_weight = fold.r * fold.c;
  }
  return h;
}

namespace {

void append_gemm(const GemmDims& g, std::uint64_t group, const ArrayConfig& a,
                 LayerCycleReport& out, std::uint64_t& used_pes,
                 std::uint64_t& total_pes) {
  for (const auto& fold : enumerate_folds(g, a)) {
    FoldTrace t{fold, group, fold_cycles(g, fold, a.variant),
                count_accesses(g, fold, a.variant), count_hops(g, fold, a.variant)};
    out.compute_cycles += t.cycles.total();
    out.accesses += t.accesses;
    out.hops += t.hops;
    used_pes += fold.r * fold.c;
    total_pes += std::uint64_t{a.rows} * a.cols;
    out.folds.push_back(t);
  }
  out.mac_ops += g.macs();
}

}  // namespace

LayerCycleReport layer_cycles(const GemmDims& g, const ArrayConfig& a) {
  LayerCycleReport out;
  std::uint64_t used = 0, total = 0;
  append_gemm(g, 0, a, out, used, total);
  out.utilization = static_cast<double>(used) / static_cast<double>(total);
  return out;
}

LayerCycleReport layer_cycles(const LayerSpec& layer, const ArrayConfig& a) {
  LayerCycleReport out;
  std::uint64_t used = 0, total = 0;
  const auto gemms = derive_gemm(layer);
  for (std::size_t k = 0; k < gemms.size(); ++k) append_gemm(gemms[k], k, a, out, used, total);
  out.utilization = static_cast<double>(used) / static_cast<double>(total);
  return out;
}

}  // namespace systolic3d
