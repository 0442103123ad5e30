#pragma once
// Steady-state finite-volume thermal model of a chip stack and the
// leakage/temperature fixed point.
//
// Layers run bottom-up from the heat spreader: spreader, then per tier an
// optional ILD, the device layer and an optional BEOL layer. Heat leaves
// through the spreader's bottom face, the sink and the convection
// resistance; every other face is adiabatic.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "systolic3d/power.hpp"
#include "systolic3d/stack.hpp"

namespace systolic3d {

struct GridResolution {
  std::uint32_t nx = 32;
  std::uint32_t ny = 32;
};

enum class LayerRole { Spreader, Device, Beol, Ild };

struct ThermalLayer {
  std::string name;
  LayerRole role = LayerRole::Device;
  std::optional<std::uint32_t> tier;
  double thickness_m = 0;
  double conductivity = 0;
};

// Conductance system G * (T - ambient) = P over nx * ny * layers cells,
// x fastest, then y, then layer.
struct ThermalSystem {
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;
  double dx_mm = 0;
  double dy_mm = 0;
  double ambient_c = 45.0;
  std::vector<ThermalLayer> layers;
  std::vector<StackBlock> blocks;

  // Neighbour order: -x, +x, -y, +y, below, above.
  std::vector<double> diag;
  std::array<std::vector<double>, 6> coupling;
  std::vector<double> ambient;  // conductance to ambient

  // z-line tridiagonal factors for the preconditioner.
  std::vector<double> line_lower;
  std::vector<double> line_inv;
  std::vector<double> line_upper;

  std::size_t plane() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t size() const { return plane() * layers.size(); }
  std::size_t index(std::uint32_t ix, std::uint32_t iy, std::size_t layer) const {
    return layer * plane() + static_cast<std::size_t>(iy) * nx + ix;
  }
  std::optional<std::size_t> device_layer(std::uint32_t tier) const;
  std::optional<std::size_t> beol_layer(std::uint32_t tier) const;
  // Fraction of each plane cell covered by r, in cell order.
  std::vector<double> coverage(const Rect& r) const;
  // Matrix entry (i, j), for inspection and tests.
  double entry(std::size_t i, std::size_t j) const;
  std::uint32_t tier_count() const;
};

// Throws FloorplanError / ValidationError from the stack checks.
ThermalSystem build_grid(const ChipStack& stack, GridResolution res);

// Watts per cell. Chip blocks go area-proportionally to the device-layer
// cells of every stack block with the same source name, BEOL blocks spread
// uniformly over their tier's BEOL layer (or device layer when there is
// none) and DRAM is off-stack.
std::vector<double> power_vector(const ThermalSystem& sys, const std::vector<BlockPower>& blocks);

struct TemperatureField {
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;
  std::vector<double> cells;  // degrees C, same order as the system
  std::vector<double> max_per_tier;
  double max_overall = 0;
  std::uint32_t iterations = 0;
  double relative_residual = 0;
};

struct SolveOptions {
  double relative_tolerance = 1e-11;
  std::uint32_t max_iterations = 20000;
};

// Preconditioned conjugate gradients. Throws SolverError when the iteration
// cap is reached.
TemperatureField solve_steady(const ThermalSystem& sys, const std::vector<double>& power,
                              const SolveOptions& opts = {});

// Heat leaving through the convection boundary.
double heat_to_ambient(const ThermalSystem& sys, const TemperatureField& field);

enum class BlockTemperature { Mean, Max };

// One temperature per block: area-weighted mean (or max) over the cells
// that receive its power; ambient for DRAM.
std::vector<double> block_temperatures(const ThermalSystem& sys, const TemperatureField& field,
                                       const std::vector<BlockPower>& blocks,
                                       BlockTemperature mode = BlockTemperature::Mean);

struct FixedPointOptions {
  double tolerance_c = 1.0;
  std::uint32_t max_iterations = 50;
  BlockTemperature coupling = BlockTemperature::Mean;
  SolveOptions solve;
};

struct FixedPointResult {
  TemperatureField field;
  std::vector<BlockPower> blocks;  // dynamic as given, leakage at block_temps_c
  std::vector<double> block_temps_c;
  std::uint32_t iterations = 0;
  std::vector<double> max_temp_history;  // max_overall after each solve
};

// Throws DivergenceError when the cap is reached first.
FixedPointResult fixed_point(const ThermalSystem& sys, std::vector<BlockPower> blocks,
                             const std::vector<LeakageModel>& models, const FixedPointOptions& opts = {});

// layer,name,tier,ix,iy,x_mm,y_mm,temp_c
void write_temperature_csv(std::ostream& os, const ThermalSystem& sys, const TemperatureField& field);

}  // namespace systolic3d
