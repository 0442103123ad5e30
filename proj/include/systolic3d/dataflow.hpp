#pragma once
// Fold enumeration and per-fold cycle/counter model for weight-stationary
// systolic arrays, in the native 2D organisation and the monolithic-3D one
// where weights are preloaded in parallel and IFMAPs are multicast over
// vertical vias.

#include <cstdint>
#include <vector>

#include "systolic3d/topology.hpp"

namespace systolic3d {

enum class Variant { WS2D, WSMono3D };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

struct ArrayConfig {
  std::uint32_t rows = 256;
  std::uint32_t cols = 256;
  Variant variant = Variant::WS2D;
  double frequency_hz = 1e9;
};

struct FoldIndex {
  std::uint64_t p = 0;  // row fold
  std::uint64_t q = 0;  // column fold
  std::uint64_t r = 1;  // used rows
  std::uint64_t c = 1;  // used columns
};

struct PhaseCycles {
  std::uint64_t w = 0;       // weight preload
  std::uint64_t i_fill = 0;  // IFMAP fill until the last used column has data
  std::uint64_t o = 0;       // steady streaming plus psum drain

  std::uint64_t total() const { return w + i_fill + o; }
  friend bool operator==(const PhaseCycles&, const PhaseCycles&) = default;
};

struct AccessCounts {
  std::uint64_t sram_ifmap_reads = 0;
  std::uint64_t sram_ofmap_writes = 0;
  std::uint64_t sram_ofmap_reads = 0;
  std::uint64_t rram_weight_reads = 0;

  AccessCounts& operator+=(const AccessCounts& o);
  friend bool operator==(const AccessCounts&, const AccessCounts&) = default;
};

struct HopCounts {
  std::uint64_t hops_input = 0;
  std::uint64_t hops_weight = 0;
  std::uint64_t hops_psum = 0;
  std::uint64_t miv_input = 0;
  std::uint64_t miv_weight = 0;

  HopCounts& operator+=(const HopCounts& o);
  friend bool operator==(const HopCounts&, const HopCounts&) = default;
};

struct FoldTrace {
  FoldIndex fold;
  std::uint64_t group = 0;  // depthwise channel; 0 otherwise
  PhaseCycles cycles;
  AccessCounts accesses;
  HopCounts hops;
};

struct LayerCycleReport {
  std::uint64_t compute_cycles = 0;
  std::vector<FoldTrace> folds;
  std::uint64_t mac_ops = 0;
  double utilization = 0.0;
  AccessCounts accesses;  // summed over folds
  HopCounts hops;         // summed over folds
};

// Row-fold-major: every column fold of row fold 0, then row fold 1, ...
std::vector<FoldIndex> enumerate_folds(const GemmDims& g, const ArrayConfig& a);

PhaseCycles fold_cycles(const GemmDims& g, const FoldIndex& fold, Variant v);
AccessCounts count_accesses(const GemmDims& g, const FoldIndex& fold, Variant v);
HopCounts count_hops(const GemmDims& g, const FoldIndex& fold, Variant v);

LayerCycleReport layer_cycles(const GemmDims& g, const ArrayConfig& a);

// Every GEMM of a layer (one per depthwise channel) on the array, folds
// concatenated in GEMM order.
LayerCycleReport layer_cycles(const LayerSpec& layer, const ArrayConfig& a);

}  // namespace systolic3d
