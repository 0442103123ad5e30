#pragma once
// Cycle-accurate PE-grid simulator. It moves real integer operands through
// per-PE registers one transfer per link per cycle and derives every cycle
// and hop count from events, so it can be used as ground truth for the
// closed-form model in dataflow.hpp.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <random>
#include <vector>

#include "systolic3d/dataflow.hpp"

namespace systolic3d::oracle {

inline constexpr std::uint32_t kMaxGridDim = 64;

struct IntMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int64_t> data;

  IntMatrix() = default;
  IntMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}

  std::int64_t& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;
};

struct FoldRecord {
  FoldIndex fold;
  PhaseCycles phases;
  AccessCounts accesses;
  HopCounts hops;
};

struct SimulationResult {
  IntMatrix ofmap;  // T x M
  std::uint64_t total_cycles = 0;
  std::vector<FoldRecord> folds;
  HopCounts hops;
  AccessCounts accesses;
};

// ifmap is T x K (one im2col window per row), weights K x M.
SimulationResult simulate(const GemmDims& g, const ArrayConfig& a,
                          const IntMatrix& ifmap, const IntMatrix& weights);

IntMatrix naive_gemm(const IntMatrix& ifmap, const IntMatrix& weights);

IntMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                        std::int64_t lo = -128, std::int64_t hi = 127);

// Exhaustive comparison of a closed-form fold model against the simulator.
using FoldModel = std::function<PhaseCycles(const GemmDims&, const FoldIndex&, Variant)>;

struct SweepBounds {
  std::uint32_t max_rows = 8;
  std::uint32_t max_cols = 8;
  std::uint32_t max_k = 12;
  std::uint32_t max_m = 12;
  std::uint32_t max_t = 16;
};

struct SweepMismatch {
  ArrayConfig array;
  GemmDims gemm;
  std::string what;
};

struct SweepResult {
  std::uint64_t instances = 0;
  std::uint64_t folds_checked = 0;
  // failures[(rows-1) * max_cols + (cols-1)] counts failing instances per array shape
  std::vector<std::uint64_t> failures;
  std::vector<SweepMismatch> first_mismatches;  // capped sample
  bool passed() const { return first_mismatches.empty(); }
};

// Throws ValidationError when bounds exceed the oracle scale limit.
SweepResult validate_sweep(const SweepBounds& bounds, const FoldModel& model = fold_cycles,
                           std::uint64_t seed = 0x5eed);

}  // namespace systolic3d::oracle
