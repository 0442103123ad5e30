#include "systolic3d/power.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "systolic3d/errors.hpp"

namespace systolic3d {

std::string block_name(BlockId id) {
  switch (id.kind) {
    case BlockKind::PEArray: return "pe_array";
    case BlockKind::IfmapSram: return "sram_ifmap";
    case BlockKind::OfmapSram: return "sram_ofmap";
    case BlockKind::RramTier: return "rram" + std::to_string(id.index);
    case BlockKind::Beol: return "beol" + std::to_string(id.index);
    case BlockKind::Dram: return "dram";
  }
  return "unknown";
}

namespace {

std::optional<std::uint32_t> suffix_index(std::string_view name, std::string_view prefix) {
  if (name.size() <= prefix.size() || name.substr(0, prefix.size()) != prefix) return std::nullopt;
  std::uint32_t v = 0;
  auto digits = name.substr(prefix.size());
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return v;
}

}  // namespace

BlockId parse_block_name(std::string_view name) {
  if (name == "pe_array") return {BlockKind::PEArray, 0};
  if (name == "sram_ifmap") return {BlockKind::IfmapSram, 0};
  if (name == "sram_ofmap") return {BlockKind::OfmapSram, 0};
  if (name == "dram") return {BlockKind::Dram, 0};
  if (auto k = suffix_index(name, "rram")) return {BlockKind::RramTier, *k};
  if (auto k = suffix_index(name, "beol")) return {BlockKind::Beol, *k};
  throw ValidationError("unknown power block '" + std::string(name) + "'");
}

double LeakageModel::at(double temp_c) const {
  return base_w * std::exp(beta_per_c * (temp_c - reference_c));
}

std::uint32_t powered_rram_tiers(const NetworkSpec& net, const TechConfig& t) {
  if (!t.power_off_unused_rram) return t.rram_tiers;
  std::uint64_t weights = 0;
  for (const auto& l : net.layers) weights += l.weight_bytes();
  const std::uint64_t per_tier = t.rram.capacity_bytes;
  std::uint64_t need = per_tier == 0 ? t.rram_tiers : (weights + per_tier - 1) / per_tier;
  if (need < 1) need = 1;
  if (need > t.rram_tiers) need = t.rram_tiers;
  return static_cast<std::uint32_t>(need);
}

PowerLayout make_power_layout(const ChipStack& stack, const TechConfig& t, std::uint32_t powered_rram) {
  auto tier_of = [&](const std::string& source) {
    const StackBlock* b = stack.find_source(source);
    if (b == nullptr) throw FloorplanError("stack '" + stack.name + "' has no block for '" + source + "'");
    return b->tier;
  };
  PowerLayout layout;
  layout.pe_tier = tier_of("pe_array");
  layout.ifmap_tier = tier_of("sram_ifmap");
  layout.ofmap_tier = tier_of("sram_ofmap");
  for (std::uint32_t k = 0; k < t.rram_tiers; ++k)
    layout.rram_tiers.push_back(tier_of("rram" + std::to_string(k)));
  layout.powered_rram = std::min(powered_rram, t.rram_tiers);
  return layout;
}

namespace {

double tier_distance(std::uint32_t a, std::uint32_t b) {
  return static_cast<double>(a > b ? a - b : b - a);
}

}  // namespace

WorkloadEnergy workload_energy(const NetworkSpec& net, const std::vector<LayerCycleReport>& reports,
                               Variant v, const TechConfig& t, const MemoryGeometry& geom,
                               const PowerLayout& layout) {
  if (reports.size() != net.layers.size())
    throw ValidationError("workload energy needs one cycle report per layer");
  WorkloadEnergy e;
  const double d_ifmap = geom.mean_manhattan_mm(MemoryKind::SramIfmap);
  const double d_ofmap = geom.mean_manhattan_mm(MemoryKind::SramOfmap);
  const double d_rram = geom.mean_manhattan_mm(MemoryKind::Rram);

  double rram_crossings = 0;
  const std::uint32_t powered = std::max<std::uint32_t>(layout.powered_rram, 1);
  for (std::uint32_t k = 0; k < powered && k < layout.rram_tiers.size(); ++k)
    rram_crossings += tier_distance(layout.rram_tiers[k], layout.pe_tier);
  rram_crossings /= powered;
  const double ifmap_crossings = tier_distance(layout.ifmap_tier, layout.pe_tier);

  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const auto& layer = net.layers[li];
    const auto& rep = reports[li];
    const double bits = 8.0 * layer.element_bytes;

    e.mac_j += static_cast<double>(rep.mac_ops) * t.mac_energy_j;
    e.hop_psum_j += static_cast<double>(rep.hops.hops_psum) * t.psum_bits * t.hop_energy_j_per_bit;
    if (v == Variant::WS2D) {
      e.hop_input_j += static_cast<double>(rep.hops.hops_input) * bits * t.hop_energy_j_per_bit;
      e.hop_weight_j += static_cast<double>(rep.hops.hops_weight) * bits * t.hop_energy_j_per_bit;
    } else {
      e.miv_input_j += static_cast<double>(rep.hops.miv_input) * bits * ifmap_crossings * t.miv_energy_j_per_bit;
      e.miv_weight_j += static_cast<double>(rep.hops.miv_weight) * bits * rram_crossings * t.miv_energy_j_per_bit;
    }
    for (const auto& f : rep.folds) e.memory += access_energy(f.accesses, layer.element_bytes, t);

    const auto& a = rep.accesses;
    e.routing_j += bits * t.wire_energy_j_per_bit_mm *
                   (static_cast<double>(a.sram_ifmap_reads) * d_ifmap +
                    static_cast<double>(a.sram_ofmap_writes + a.sram_ofmap_reads) * d_ofmap +
                    static_cast<double>(a.rram_weight_reads) * d_rram);
  }
  e.dram_j = static_cast<double>(dram_bytes(net)) * t.dram_energy_j_per_byte;
  return e;
}

std::vector<BlockPower> dynamic_power(const WorkloadEnergy& e, std::uint64_t total_cycles, double f,
                                      const PowerLayout& layout) {
  if (total_cycles == 0) throw UndefinedPowerError("power is undefined for a zero-cycle workload");
  if (!(f > 0)) throw ValidationError("frequency must be positive");
  const double seconds = static_cast<double>(total_cycles) / f;
  const std::uint32_t powered = std::min<std::uint32_t>(layout.powered_rram,
                                                        static_cast<std::uint32_t>(layout.rram_tiers.size()));

  std::vector<BlockPower> out;
  auto add = [&](BlockId id, double joules, std::optional<std::uint32_t> tier) {
    for (auto& b : out) {
      if (b.block == id) {
        b.dynamic_w += joules / seconds;
        return;
      }
    }
    out.push_back(BlockPower{id, joules / seconds, 0.0, tier});
  };

  add({BlockKind::PEArray, 0}, e.pe_array_j(), layout.pe_tier);
  add({BlockKind::IfmapSram, 0}, e.memory.sram_ifmap_j, layout.ifmap_tier);
  add({BlockKind::OfmapSram, 0}, e.memory.sram_ofmap_j, layout.ofmap_tier);
  for (std::uint32_t k = 0; k < powered; ++k)
    add({BlockKind::RramTier, k}, e.memory.rram_j / powered, layout.rram_tiers[k]);

  add({BlockKind::Beol, layout.pe_tier}, e.routing_j, layout.pe_tier);
  if (e.miv_input_j > 0) add({BlockKind::Beol, layout.ifmap_tier}, e.miv_input_j, layout.ifmap_tier);
  if (e.miv_weight_j > 0) {
    for (std::uint32_t k = 0; k < powered; ++k)
      add({BlockKind::Beol, layout.rram_tiers[k]}, e.miv_weight_j / powered, layout.rram_tiers[k]);
  }
  add({BlockKind::Dram, 0}, e.dram_j, std::nullopt);
  return out;
}

std::vector<LeakageModel> leakage_models(const std::vector<BlockPower>& blocks, const TechConfig& t) {
  std::vector<LeakageModel> models;
  models.reserve(blocks.size());
  for (const auto& b : blocks) {
    LeakageModel m{0.0, t.leakage_reference_c, t.leakage_beta_per_c};
    switch (b.block.kind) {
      case BlockKind::PEArray: m.base_w = t.pe_array_leakage_w; break;
      case BlockKind::IfmapSram: m.base_w = t.sram_ifmap.leakage_w; break;
      case BlockKind::OfmapSram: m.base_w = t.sram_ofmap.leakage_w; break;
      case BlockKind::RramTier: m.base_w = t.rram.leakage_w; break;
      case BlockKind::Beol:
      case BlockKind::Dram: break;
    }
    models.push_back(m);
  }
  return models;
}

std::vector<double> leakage_power(const std::vector<LeakageModel>& models, const std::vector<double>& temps_c) {
  if (models.size() != temps_c.size())
    throw ValidationError("leakage needs one temperature per block");
  std::vector<double> out(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (!std::isfinite(temps_c[i])) throw ValidationError("block temperature is not finite");
    out[i] = models[i].at(temps_c[i]);
  }
  return out;
}

ChipPower chip_power(const std::vector<BlockPower>& blocks) {
  ChipPower p;
  for (const auto& b : blocks) {
    if (b.on_chip()) p.chip_w += b.total_w();
    p.system_w += b.total_w();
  }
  return p;
}

void write_power_csv(std::ostream& os, const std::vector<BlockPower>& blocks) {
  os << "block,tier,dynamic_w,leakage_w\n";
  char buf[64];
  for (const auto& b : blocks) {
    os << block_name(b.block) << ',';
    if (b.tier) os << *b.tier;
    std::snprintf(buf, sizeof buf, ",%.9e", b.dynamic_w);
    os << buf;
    std::snprintf(buf, sizeof buf, ",%.9e\n", b.leakage_w);
    os << buf;
  }
}

std::vector<BlockPower> read_power_csv(std::istream& is, std::string origin) {
  std::vector<BlockPower> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("block", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4)
      throw ParseError(origin + " line " + std::to_string(lineno) + ": expected 4 columns");
    auto num = [&](const std::string& s, const char* what) {
      char* end = nullptr;
      double v = std::strtod(s.c_str(), &end);
      if (s.empty() || *end != '\0' || !std::isfinite(v) || v < 0)
        throw ParseError(origin + " line " + std::to_string(lineno) + ": bad " + what + " '" + s + "'");
      return v;
    };
    BlockPower b;
    b.block = parse_block_name(cells[0]);
    if (!cells[1].empty()) b.tier = static_cast<std::uint32_t>(num(cells[1], "tier"));
    b.dynamic_w = num(cells[2], "dynamic_w");
    b.leakage_w = num(cells[3], "leakage_w");
    out.push_back(b);
  }
  return out;
}

}  // namespace systolic3d
