#pragma once
// Circuit and memory constants, on-chip memory geometry, DRAM cycles and
// memory access energy.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "systolic3d/dataflow.hpp"
#include "systolic3d/stack.hpp"
#include "systolic3d/topology.hpp"

namespace systolic3d {

struct MemoryTech {
  double read_latency_s = 0;
  double write_latency_s = 0;
  double read_energy_j = 0;   // per word transaction
  double write_energy_j = 0;  // per word transaction
  double leakage_w = 0;       // per instance at the leakage reference temperature
  std::uint32_t word_bytes = 16;
  std::uint32_t banks = 16;
  std::uint64_t capacity_bytes = 0;  // per instance (one SRAM, or one RRAM tier)

  std::uint64_t bank_bytes() const { return capacity_bytes / banks; }
  std::uint32_t address_bits() const;
  // One read and one write port per bank, one via per address/data bit.
  std::uint64_t miv_per_bank() const { return 2 * (address_bits() + 8ull * word_bytes); }
};

struct TechConfig {
  // Processing elements
  double mac_energy_j = 0.26e-12;
  double mac_area_m2 = 121e-12;
  double pe_array_leakage_w = 0;
  // Vertical vias
  double miv_delay_s = 8.6e-12;
  double miv_energy_j_per_bit = 0.02e-15;
  double miv_pitch_m = 1.0e-6;
  // Neighbour-to-neighbour PE links
  double hop_delay_s = 14e-12;
  double hop_energy_j_per_bit = 0.08e-15;
  std::uint32_t psum_bits = 32;
  // Lateral wires
  double wire_delay_s_per_mm = 0;
  double wire_energy_j_per_bit_mm = 0;
  // Memories
  MemoryTech sram_ifmap;
  MemoryTech sram_ofmap;
  MemoryTech rram;  // per tier
  std::uint32_t rram_tiers = 4;
  // Off-chip
  double dram_bandwidth_bytes_per_cycle = 10.0;
  double dram_energy_j_per_byte = 0;
  // Leakage temperature dependence
  double leakage_reference_c = 45.0;
  double leakage_beta_per_c = 0.008;
  bool power_off_unused_rram = false;
  // Operating points
  std::uint32_t array_rows = 256;
  std::uint32_t array_cols = 256;
  std::vector<double> frequencies_hz{1000e6, 700e6, 500e6};  // descending
  std::vector<double> budgets_c{75.0, 85.0};

  std::uint64_t rram_capacity_bytes() const { return rram.capacity_bytes * rram_tiers; }
};

void validate(const TechConfig& t);
TechConfig parse_tech_config(std::string_view text, std::string origin);
TechConfig load_tech_config(const std::filesystem::path& path);

enum class MemoryKind { SramIfmap, SramOfmap, Rram };
std::string_view to_string(MemoryKind m);

struct Bank {
  MemoryKind memory;
  std::uint32_t instance = 0;  // RRAM tier index for Rram, 0 otherwise
  std::uint32_t tier = 0;
  Rect rect;
};

struct MemoryGeometry {
  double access_x_mm = 0;  // lateral access point (centre of the PE array)
  double access_y_mm = 0;
  std::uint32_t pe_tier = 0;
  std::uint32_t io_tier = 0;
  std::vector<Bank> banks;

  std::vector<const Bank*> banks_of(MemoryKind m) const;
  double manhattan_mm(const Bank& b) const;
  // Mean lateral distance over all banks of a memory (round-robin use).
  double mean_manhattan_mm(MemoryKind m) const;
  std::uint64_t bank_count(MemoryKind m) const;
};

// Splits every memory block of the stack into the configured bank grid.
MemoryGeometry build_memory_geometry(const ChipStack& stack, const TechConfig& t);

std::uint64_t total_mivs(const MemoryGeometry& geom, const TechConfig& t, bool monolithic);
double miv_area_mm2(const MemoryGeometry& geom, const TechConfig& t, bool monolithic);

// Vertical crossings at the via delay plus Manhattan distance from the
// access point to the bank centre at the wire delay.
double routing_delay(std::uint32_t from_tier, const Bank& to, const MemoryGeometry& geom,
                     const TechConfig& t);

// Bytes in of the first layer plus bytes out of the last one at the DRAM
// bandwidth. Throws CapacityError when any layer's IFMAP or OFMAP exceeds its
// SRAM or the weights exceed the RRAM.
std::uint64_t dram_transfer_cycles(std::uint64_t bytes, const TechConfig& t);
std::uint64_t dram_nonoverlap_cycles(const NetworkSpec& net, const TechConfig& t);
std::uint64_t dram_bytes(const NetworkSpec& net);

enum class EdgePosition { First, Last };

// ceil(seconds * f), tolerant of floating-point noise just above an integer.
std::uint64_t seconds_to_cycles(double seconds, double frequency_hz);

double edge_layer_latency_s(EdgePosition pos, const TechConfig& t, const MemoryGeometry& geom);
std::uint64_t edge_layer_extra_cycles(const LayerSpec& layer, EdgePosition pos, const TechConfig& t,
                                      const MemoryGeometry& geom, double frequency_hz);

std::uint64_t word_transactions(std::uint64_t elements, std::uint32_t element_bytes,
                                std::uint32_t word_bytes);

struct AccessEnergy {
  double sram_ifmap_j = 0;
  double sram_ofmap_j = 0;
  double rram_j = 0;

  double total() const { return sram_ifmap_j + sram_ofmap_j + rram_j; }
  AccessEnergy& operator+=(const AccessEnergy& o);
};

// Counters of one fold; transactions are rounded up per fold and memory.
AccessEnergy access_energy(const AccessCounts& counts, std::uint32_t element_bytes,
                           const TechConfig& t);

}  // namespace systolic3d
