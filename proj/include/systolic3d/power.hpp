#pragma once
// Per-block dynamic and leakage power of one network execution.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "systolic3d/dataflow.hpp"
#include "systolic3d/memsys.hpp"
#include "systolic3d/stack.hpp"
#include "systolic3d/topology.hpp"

namespace systolic3d {

enum class BlockKind { PEArray, IfmapSram, OfmapSram, RramTier, Beol, Dram };

struct BlockId {
  BlockKind kind = BlockKind::PEArray;
  std::uint32_t index = 0;  // RRAM tier for RramTier, stack tier for Beol

  friend bool operator==(const BlockId&, const BlockId&) = default;
};

// pe_array, sram_ifmap, sram_ofmap, rram<k>, beol<tier>, dram
std::string block_name(BlockId id);
BlockId parse_block_name(std::string_view name);

struct BlockPower {
  BlockId block;
  double dynamic_w = 0;
  double leakage_w = 0;
  std::optional<std::uint32_t> tier;  // empty for DRAM

  double total_w() const { return dynamic_w + leakage_w; }
  bool on_chip() const { return tier.has_value(); }
};

struct LeakageModel {
  double base_w = 0;
  double reference_c = 45.0;
  double beta_per_c = 0.0;

  double at(double temp_c) const;
};

// Energy of one inference split by where it is dissipated.
struct WorkloadEnergy {
  double mac_j = 0;
  double hop_input_j = 0;
  double hop_weight_j = 0;
  double hop_psum_j = 0;
  AccessEnergy memory;
  double miv_input_j = 0;   // lands in the IFMAP SRAM tier BEOL
  double miv_weight_j = 0;  // spread over the powered RRAM tier BEOLs
  double routing_j = 0;     // lateral memory wires, PE tier BEOL
  double dram_j = 0;

  double pe_array_j() const { return mac_j + hop_input_j + hop_weight_j + hop_psum_j; }
  double chip_j() const { return pe_array_j() + memory.total() + miv_input_j + miv_weight_j + routing_j; }
  double system_j() const { return chip_j() + dram_j; }
};

// Where each power source sits in a stack.
struct PowerLayout {
  std::uint32_t pe_tier = 0;
  std::uint32_t ifmap_tier = 0;
  std::uint32_t ofmap_tier = 0;
  std::vector<std::uint32_t> rram_tiers;  // one per RRAM instance
  std::uint32_t powered_rram = 0;         // instances 0..powered_rram-1 are on
};

std::uint32_t powered_rram_tiers(const NetworkSpec& net, const TechConfig& t);
PowerLayout make_power_layout(const ChipStack& stack, const TechConfig& t, std::uint32_t powered_rram);

// reports holds one entry per layer of net, computed for variant v.
WorkloadEnergy workload_energy(const NetworkSpec& net, const std::vector<LayerCycleReport>& reports,
                               Variant v, const TechConfig& t, const MemoryGeometry& geom,
                               const PowerLayout& layout);

// Energy averaged over total_cycles at f. Leakage fields are left at zero.
// Throws UndefinedPowerError when there are no cycles.
std::vector<BlockPower> dynamic_power(const WorkloadEnergy& e, std::uint64_t total_cycles, double f,
                                      const PowerLayout& layout);

// One model per block of `blocks`, zero base for BEOL and DRAM.
std::vector<LeakageModel> leakage_models(const std::vector<BlockPower>& blocks, const TechConfig& t);

std::vector<double> leakage_power(const std::vector<LeakageModel>& models, const std::vector<double>& temps_c);

struct ChipPower {
  double chip_w = 0;
  double system_w = 0;
};
ChipPower chip_power(const std::vector<BlockPower>& blocks);

void write_power_csv(std::ostream& os, const std::vector<BlockPower>& blocks);
std::vector<BlockPower> read_power_csv(std::istream& is, std::string origin);

}  // namespace systolic3d
