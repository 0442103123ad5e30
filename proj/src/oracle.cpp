#include "systolic3d/oracle.hpp"

#include <sstream>
#include <stdexcept>
#include <string>

#include "systolic3d/errors.hpp"

namespace systolic3d::oracle {

namespace {

struct Reg {
  std::int64_t value = 0;
  std::int64_t tag = -1;  // pixel index carried by the value; -1 when empty
  bool valid() const { return tag >= 0; }
};

// Per-fold register file, reused across folds to avoid reallocation.
struct Grid {
  std::size_t r = 0, c = 0;
  std::vector<Reg> weight, input, psum, next_input, next_psum;
  std::vector<Reg> row_latch, next_row_latch;  // Mono3D multicast latches

  void reset(std::size_t rows, std::size_t cols) {
    r = rows;
    c = cols;
    for (auto* v : {&weight, &input, &psum, &next_input, &next_psum}) v->assign(r * c, Reg{});
    row_latch.assign(r, Reg{});
    next_row_latch.assign(r, Reg{});
  }
  std::size_t at(std::size_t i, std::size_t j) const { return i * c + j; }
};

struct FoldContext {
  const GemmDims& g;
  const FoldIndex& fold;
  std::size_t k0, m0;
  const IntMatrix& ifmap;
  const IntMatrix& weights;
  IntMatrix& acc;
};

// Weights enter at the top edge and shift down one row per cycle.
std::uint64_t preload_2d(Grid& grid, const FoldContext& f, FoldRecord& rec) {
  const std::size_t r = grid.r, c = grid.c;
  std::uint64_t cycle = 0;
  auto loaded = [&] {
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        if (grid.weight[grid.at(i, j)].tag != static_cast<std::int64_t>(i)) return false;
    return true;
  };
  while (!loaded()) {
    for (std::size_t i = r - 1; i >= 1; --i) {
      for (std::size_t j = 0; j < c; ++j) {
        const Reg& above = grid.weight[grid.at(i - 1, j)];
        if (above.valid()) ++rec.hops.hops_weight;
        grid.weight[grid.at(i, j)] = above;
      }
    }
    // The weight for the deepest row goes in first.
    for (std::size_t j = 0; j < c; ++j) {
      if (cycle < r) {
        const std::size_t row = r - 1 - cycle;
        grid.weight[grid.at(0, j)] = {f.weights(f.k0 + row, f.m0 + j),
                                      static_cast<std::int64_t>(row)};
        ++rec.accesses.rram_weight_reads;
      } else {
        grid.weight[grid.at(0, j)] = Reg{};
      }
    }
    ++cycle;
    if (cycle > 4 * r + 4) throw std::logic_error("oracle: 2D preload did not settle");
  }
  return cycle;
}

// All weights arrive over vertical vias in a single transfer.
std::uint64_t preload_mono3d(Grid& grid, const FoldContext& f, FoldRecord& rec) {
  for (std::size_t i = 0; i < grid.r; ++i) {
    for (std::size_t j = 0; j < grid.c; ++j) {
      grid.weight[grid.at(i, j)] = {f.weights(f.k0 + i, f.m0 + j), static_cast<std::int64_t>(i)};
      ++rec.hops.miv_weight;
      ++rec.accesses.rram_weight_reads;
    }
  }
  return 1;
}

// Row i presents ifmap[t][k0 + i] at edge cycle t + i; returns an empty
// register outside that window.
Reg feed(const FoldContext& f, std::size_t row, std::uint64_t cycle) {
  if (cycle < row) return {};
  const std::uint64_t t = cycle - row;
  if (t >= f.g.T) return {};
  return {f.ifmap(t, f.k0 + row), static_cast<std::int64_t>(t)};
}

struct ComputeOutcome {
  std::uint64_t fill = 0;
  std::uint64_t cycles = 0;
};

ComputeOutcome compute(Grid& grid, const FoldContext& f, Variant variant, FoldRecord& rec) {
  const std::size_t r = grid.r, c = grid.c;
  const std::uint64_t expected_outputs = f.g.T * c;
  std::uint64_t outputs = 0;
  std::uint64_t cycle = 0;
  std::int64_t fill_event = -1;
  std::uint64_t last_exit = 0;

  for (auto& reg : grid.input) reg = Reg{};
  for (auto& reg : grid.psum) reg = Reg{};
  for (auto& reg : grid.row_latch) reg = Reg{};

  const std::uint64_t cap = 8 * (f.g.T + r + c) + 16;
  while (outputs < expected_outputs) {
    if (variant == Variant::WSMono3D) {
      // Vertical delivery into the row latch; PEs read the latch next cycle.
      for (std::size_t i = 0; i < r; ++i) {
        grid.next_row_latch[i] = feed(f, i, cycle);
        if (grid.next_row_latch[i].valid()) {
          ++rec.hops.miv_input;
          ++rec.accesses.sram_ifmap_reads;
        }
      }
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) grid.next_input[grid.at(i, j)] = grid.row_latch[i];
    } else {
      for (std::size_t i = 0; i < r; ++i) {
        grid.next_input[grid.at(i, 0)] = feed(f, i, cycle);
        if (grid.next_input[grid.at(i, 0)].valid()) ++rec.accesses.sram_ifmap_reads;
        for (std::size_t j = 1; j < c; ++j) {
          const Reg& left = grid.input[grid.at(i, j - 1)];
          if (left.valid()) ++rec.hops.hops_input;
          grid.next_input[grid.at(i, j)] = left;
        }
      }
    }

    if (fill_event < 0 && grid.next_input[grid.at(0, c - 1)].valid())
      fill_event = static_cast<std::int64_t>(cycle);

    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        const Reg& in = grid.next_input[grid.at(i, j)];
        Reg& out = grid.next_psum[grid.at(i, j)];
        if (!in.valid()) {
          out = Reg{};
          continue;
        }
        std::int64_t partial = 0;
        if (i > 0) {
          const Reg& above = grid.psum[grid.at(i - 1, j)];
          if (above.tag != in.tag) throw std::logic_error("oracle: psum/input misaligned");
          partial = above.value;
          ++rec.hops.hops_psum;
        }
        out = {partial + grid.weight[grid.at(i, j)].value * in.value, in.tag};
        if (i == r - 1) {
          const auto t = static_cast<std::size_t>(out.tag);
          if (f.fold.p > 0) ++rec.accesses.sram_ofmap_reads;
          ++rec.accesses.sram_ofmap_writes;
          f.acc(t, f.m0 + j) += out.value;
          ++outputs;
          last_exit = cycle;
        }
      }
    }
    std::swap(grid.input, grid.next_input);
    std::swap(grid.psum, grid.next_psum);
    std::swap(grid.row_latch, grid.next_row_latch);
    ++cycle;
    if (cycle > cap) throw std::logic_error("oracle: compute phase did not drain");
  }
  return {static_cast<std::uint64_t>(fill_event), last_exit + 1};
}

}  // namespace

IntMatrix naive_gemm(const IntMatrix& ifmap, const IntMatrix& weights) {
  if (ifmap.cols != weights.rows) throw ValidationError("naive_gemm: inner dimensions differ");
  IntMatrix out(ifmap.rows, weights.cols);
  for (std::size_t t = 0; t < ifmap.rows; ++t)
    for (std::size_t k = 0; k < ifmap.cols; ++k)
      for (std::size_t m = 0; m < weights.cols; ++m) out(t, m) += ifmap(t, k) * weights(k, m);
  return out;
}

IntMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                        std::int64_t lo, std::int64_t hi) {
  std::uniform_int_distribution<std::int64_t> dist(lo, hi);
  IntMatrix m(rows, cols);
  for (auto& v : m.data) v = dist(rng);
  return m;
}

SimulationResult simulate(const GemmDims& g, const ArrayConfig& a, const IntMatrix& ifmap,
                          const IntMatrix& weights) {
  if (a.rows < 1 || a.cols < 1 || a.rows > kMaxGridDim || a.cols > kMaxGridDim)
    throw ValidationError("oracle grid must be between 1x1 and 64x64");
  if (ifmap.rows != g.T || ifmap.cols != g.K)
    throw ValidationError("oracle: ifmap must be T x K");
  if (weights.rows != g.K || weights.cols != g.M)
    throw ValidationError("oracle: weights must be K x M");

  SimulationResult result;
  result.ofmap = IntMatrix(g.T, g.M);
  Grid grid;
  for (const auto& fold : enumerate_folds(g, a)) {
    FoldRecord rec;
    rec.fold = fold;
    grid.reset(fold.r, fold.c);
    FoldContext ctx{g, fold, fold.p * a.rows, fold.q * a.cols, ifmap, weights, result.ofmap};
    rec.phases.w = a.variant == Variant::WSMono3D ? preload_mono3d(grid, ctx, rec)
                                                  : preload_2d(grid, ctx, rec);
    const auto outcome = compute(grid, ctx, a.variant, rec);
    rec.phases.i_fill = outcome.fill;
    rec.phases.o = outcome.cycles - outcome.fill;
    result.total_cycles += rec.phases.total();
    result.hops += rec.hops;
    result.accesses += rec.accesses;
    result.folds.push_back(rec);
  }
  return result;
}

SweepResult validate_sweep(const SweepBounds& b, const FoldModel& model, std::uint64_t seed) {
  if (b.max_rows < 1 || b.max_cols < 1 || b.max_rows > kMaxGridDim || b.max_cols > kMaxGridDim)
    throw ValidationError("sweep array bounds must lie within 1..64");
  if (b.max_k < 1 || b.max_m < 1 || b.max_t < 1)
    throw ValidationError("sweep GEMM bounds must be >= 1");

  constexpr std::size_t kMaxReported = 16;
  SweepResult out;
  out.failures.assign(std::size_t{b.max_rows} * b.max_cols, 0);
  std::mt19937_64 rng(seed);

  for (std::uint32_t rows = 1; rows <= b.max_rows; ++rows) {
    for (std::uint32_t cols = 1; cols <= b.max_cols; ++cols) {
      for (std::uint64_t K = 1; K <= b.max_k; ++K) {
        for (std::uint64_t M = 1; M <= b.max_m; ++M) {
          const IntMatrix weights = random_matrix(K, M, rng);
          for (std::uint64_t T = 1; T <= b.max_t; ++T) {
            const GemmDims g{K, M, T};
            const IntMatrix ifmap = random_matrix(T, K, rng);
            const IntMatrix expected = naive_gemm(ifmap, weights);
            std::optional<IntMatrix> first_ofmap;
            for (Variant v : {Variant::WS2D, Variant::WSMono3D}) {
              const ArrayConfig a{rows, cols, v, 1e9};
              const auto sim = simulate(g, a, ifmap, weights);
              ++out.instances;
              std::ostringstream why;
              if (sim.ofmap != expected) why << "ofmap differs from naive GEMM; ";
              if (first_ofmap && sim.ofmap != *first_ofmap) why << "variants disagree on ofmap; ";
              first_ofmap = sim.ofmap;
              std::uint64_t analytic_total = 0;
              for (const auto& fold : enumerate_folds(g, a)) analytic_total += model(g, fold, v).total();
              if (analytic_total != sim.total_cycles)
                why << "total " << analytic_total << " vs oracle " << sim.total_cycles << "; ";
              for (const auto& rec : sim.folds) {
                ++out.folds_checked;
                const PhaseCycles analytic = model(g, rec.fold, v);
                if (!(analytic == rec.phases)) {
                  why << "fold (" << rec.fold.p << "," << rec.fold.q << ") phases "
                      << "model(" << analytic.w << "," << analytic.i_fill << "," << analytic.o
                      << ") oracle(" << rec.phases.w << "," << rec.phases.i_fill << ","
                      << rec.phases.o << "); ";
                  break;
                }
                if (!(count_hops(g, rec.fold, v) == rec.hops)) {
                  why << "fold hop counters differ; ";
                  break;
                }
                if (!(count_accesses(g, rec.fold, v) == rec.accesses)) {
                  why << "fold access counters differ; ";
                  break;
                }
              }
              if (!why.str().empty()) {
                ++out.failures[std::size_t{rows - 1} * b.max_cols + (cols - 1)];
                if (out.first_mismatches.size() < kMaxReported)
                  out.first_mismatches.push_back({a, g, why.str()});
              }
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace systolic3d::oracle
