#include "systolic3d/memsys.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <limits>

#include "systolic3d/config.hpp"
#include "systolic3d/errors.hpp"

namespace systolic3d {

std::uint32_t MemoryTech::address_bits() const {
  const std::uint64_t words = std::max<std::uint64_t>(1, bank_bytes() / word_bytes);
  return static_cast<std::uint32_t>(std::bit_width(words - 1));
}

namespace {

void validate_memory(const MemoryTech& m, const std::string& name) {
  auto fail = [&](const char* what) {
    throw ValidationError("memory [" + name + "]: " + what);
  };
  if (!(m.read_latency_s > 0) || !(m.write_latency_s > 0)) fail("latencies must be positive");
  if (!(m.read_energy_j > 0) || !(m.write_energy_j > 0)) fail("access energies must be positive");
  if (m.leakage_w < 0) fail("leakage must be non-negative");
  if (m.word_bytes == 0 || m.banks == 0) fail("word size and bank count must be positive");
  if (m.capacity_bytes == 0 || m.capacity_bytes % m.banks != 0)
    fail("capacity must be a positive multiple of the bank count");
  if (m.bank_bytes() < m.word_bytes) fail("bank smaller than one word");
}

MemoryTech read_memory(const config::Document& doc, const std::string& section,
                       bool per_bank_capacity) {
  MemoryTech m;
  m.read_latency_s = doc.number(section, "read_latency_ns") * 1e-9;
  m.write_latency_s = doc.number(section, "write_latency_ns") * 1e-9;
  m.read_energy_j = doc.number(section, "read_energy_pj") * 1e-12;
  m.write_energy_j = doc.number(section, "write_energy_pj") * 1e-12;
  m.leakage_w = doc.number(section, "leakage_mw") * 1e-3;
  m.word_bytes = static_cast<std::uint32_t>(doc.count(section, "word_bytes"));
  m.banks = static_cast<std::uint32_t>(doc.count(section, "banks"));
  if (per_bank_capacity) {
    m.capacity_bytes = doc.count(section, "bank_capacity_kb") * 1024 * m.banks;
  } else {
    m.capacity_bytes = doc.count(section, "capacity_kb") * 1024;
  }
  return m;
}

}  // namespace

void validate(const TechConfig& t) {
  auto fail = [](const std::string& what) { throw ValidationError("tech config: " + what); };
  const std::pair<const char*, double> positive[] = {
      {"mac energy", t.mac_energy_j},       {"mac area", t.mac_area_m2},
      {"miv delay", t.miv_delay_s},         {"miv energy", t.miv_energy_j_per_bit},
      {"miv pitch", t.miv_pitch_m},         {"hop delay", t.hop_delay_s},
      {"hop energy", t.hop_energy_j_per_bit}, {"wire delay", t.wire_delay_s_per_mm},
      {"wire energy", t.wire_energy_j_per_bit_mm},
      {"dram bandwidth", t.dram_bandwidth_bytes_per_cycle},
      {"dram energy", t.dram_energy_j_per_byte},
  };
  for (auto [what, v] : positive)
    if (!(v > 0)) fail(std::string(what) + " must be positive");
  if (t.pe_array_leakage_w < 0) fail("PE array leakage must be non-negative");
  if (t.leakage_beta_per_c < 0) fail("leakage beta must be non-negative");
  if (t.psum_bits == 0) fail("psum width must be positive");
  if (t.rram_tiers == 0) fail("need at least one RRAM tier");
  if (t.array_rows == 0 || t.array_cols == 0) fail("array dimensions must be positive");
  if (t.frequencies_hz.empty()) fail("need at least one frequency");
  for (std::size_t i = 0; i < t.frequencies_hz.size(); ++i) {
    if (!(t.frequencies_hz[i] > 0)) fail("frequencies must be positive");
    if (i > 0 && !(t.frequencies_hz[i] < t.frequencies_hz[i - 1]))
      fail("frequencies must be listed in descending order");
  }
  validate_memory(t.sram_ifmap, "sram_ifmap");
  validate_memory(t.sram_ofmap, "sram_ofmap");
  validate_memory(t.rram, "rram");
}

TechConfig parse_tech_config(std::string_view text, std::string origin) {
  auto doc = config::Document::parse(text, std::move(origin));
  TechConfig t;
  t.mac_energy_j = doc.number("mac", "energy_pj") * 1e-12;
  t.mac_area_m2 = doc.number("mac", "area_um2") * 1e-12;
  t.pe_array_leakage_w = doc.number("mac", "array_leakage_mw") * 1e-3;

  t.miv_delay_s = doc.number("miv", "delay_ps") * 1e-12;
  t.miv_energy_j_per_bit = doc.number("miv", "energy_fj_per_bit") * 1e-15;
  t.miv_pitch_m = doc.number("miv", "pitch_um") * 1e-6;

  t.hop_delay_s = doc.number("hop", "delay_ps") * 1e-12;
  t.hop_energy_j_per_bit = doc.number("hop", "energy_fj_per_bit") * 1e-15;
  t.psum_bits = static_cast<std::uint32_t>(doc.count_or("hop", "psum_bits", t.psum_bits));

  t.wire_delay_s_per_mm = doc.number("wire", "delay_ps_per_mm") * 1e-12;
  t.wire_energy_j_per_bit_mm = doc.number("wire", "energy_fj_per_bit_mm") * 1e-15;

  t.sram_ifmap = read_memory(doc, "sram_ifmap", false);
  t.sram_ofmap = read_memory(doc, "sram_ofmap", false);
  t.rram = read_memory(doc, "rram", true);
  t.rram_tiers = static_cast<std::uint32_t>(doc.count_or("rram", "tiers", t.rram_tiers));

  t.dram_bandwidth_bytes_per_cycle = doc.number("dram", "bandwidth_bytes_per_cycle");
  t.dram_energy_j_per_byte = doc.number("dram", "energy_pj_per_byte") * 1e-12;

  t.leakage_reference_c = doc.number_or("leakage", "reference_temp_c", t.leakage_reference_c);
  t.leakage_beta_per_c = doc.number_or("leakage", "beta_per_c", t.leakage_beta_per_c);
  t.power_off_unused_rram = doc.flag_or("leakage", "power_off_unused_rram", false);

  t.array_rows = static_cast<std::uint32_t>(doc.count_or("array", "rows", t.array_rows));
  t.array_cols = static_cast<std::uint32_t>(doc.count_or("array", "cols", t.array_cols));
  if (doc.has_section("array")) {
    auto mhz = doc.numbers("array", "frequencies_mhz");
    t.frequencies_hz.clear();
    for (double f : mhz) t.frequencies_hz.push_back(f * 1e6);
  }
  if (doc.has_section("dvfs")) t.budgets_c = doc.numbers("dvfs", "budgets_c");
  validate(t);
  return t;
}

TechConfig load_tech_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open tech config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_tech_config(buf.str(), path.string());
}

std::string_view to_string(MemoryKind m) {
  switch (m) {
    case MemoryKind::SramIfmap: return "sram_ifmap";
    case MemoryKind::SramOfmap: return "sram_ofmap";
    case MemoryKind::Rram: return "rram";
  }
  return "rram";
}

std::vector<const Bank*> MemoryGeometry::banks_of(MemoryKind m) const {
  std::vector<const Bank*> out;
  for (const auto& b : banks)
    if (b.memory == m) out.push_back(&b);
  return out;
}

double MemoryGeometry::manhattan_mm(const Bank& b) const {
  return std::abs(b.rect.cx() - access_x_mm) + std::abs(b.rect.cy() - access_y_mm);
}

double MemoryGeometry::mean_manhattan_mm(MemoryKind m) const {
  double sum = 0;
  std::uint64_t n = 0;
  for (const auto& b : banks) {
    if (b.memory != m) continue;
    sum += manhattan_mm(b);
    ++n;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

std::uint64_t MemoryGeometry::bank_count(MemoryKind m) const {
  return static_cast<std::uint64_t>(
      std::count_if(banks.begin(), banks.end(), [m](const Bank& b) { return b.memory == m; }));
}

namespace {

// Most-square grid rows x cols with rows * cols == n.
std::pair<std::uint32_t, std::uint32_t> bank_grid(std::uint32_t n) {
  auto rows = static_cast<std::uint32_t>(std::sqrt(static_cast<double>(n)));
  while (rows > 1 && n % rows != 0) --rows;
  return {rows, n / rows};
}

void split_into_banks(const StackBlock& block, MemoryKind kind, std::uint32_t instance,
                      std::uint32_t count, MemoryGeometry& geom) {
  auto [rows, cols] = bank_grid(count);
  const double bw = block.rect.w_mm / cols;
  const double bh = block.rect.h_mm / rows;
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j)
      geom.banks.push_back({kind, instance, block.tier,
                            Rect{block.rect.x_mm + j * bw, block.rect.y_mm + i * bh, bw, bh}});
}

}  // namespace

MemoryGeometry build_memory_geometry(const ChipStack& stack, const TechConfig& t) {
  MemoryGeometry geom;
  geom.io_tier = stack.io_tier;
  if (const auto* pe = stack.find_source("pe_array")) {
    geom.pe_tier = pe->tier;
    geom.access_x_mm = pe->rect.cx();
    geom.access_y_mm = pe->rect.cy();
  } else {
    geom.access_x_mm = 0.5 * stack.footprint_w_mm;
    geom.access_y_mm = 0.5 * stack.footprint_h_mm;
  }
  for (const auto& block : stack.blocks) {
    if (block.source == "sram_ifmap") {
      split_into_banks(block, MemoryKind::SramIfmap, 0, t.sram_ifmap.banks, geom);
    } else if (block.source == "sram_ofmap") {
      split_into_banks(block, MemoryKind::SramOfmap, 0, t.sram_ofmap.banks, geom);
    } else if (block.source.rfind("rram", 0) == 0) {
      const auto instance = static_cast<std::uint32_t>(std::stoul(block.source.substr(4)));
      split_into_banks(block, MemoryKind::Rram, instance, t.rram.banks, geom);
    }
  }
  return geom;
}

std::uint64_t total_mivs(const MemoryGeometry& geom, const TechConfig& t, bool monolithic) {
  if (!monolithic) return 0;
  std::uint64_t total = 0;
  for (const auto& b : geom.banks) {
    if (b.tier == geom.pe_tier) continue;
    switch (b.memory) {
      case MemoryKind::SramIfmap: total += t.sram_ifmap.miv_per_bank(); break;
      case MemoryKind::SramOfmap: total += t.sram_ofmap.miv_per_bank(); break;
      case MemoryKind::Rram: total += t.rram.miv_per_bank(); break;
    }
  }
  return total;
}

double miv_area_mm2(const MemoryGeometry& geom, const TechConfig& t, bool monolithic) {
  const double pitch_mm = t.miv_pitch_m * 1e3;
  return static_cast<double>(total_mivs(geom, t, monolithic)) * pitch_mm * pitch_mm;
}

double routing_delay(std::uint32_t from_tier, const Bank& to, const MemoryGeometry& geom,
                     const TechConfig& t) {
  const auto crossings = from_tier > to.tier ? from_tier - to.tier : to.tier - from_tier;
  return crossings * t.miv_delay_s + geom.manhattan_mm(to) * t.wire_delay_s_per_mm;
}

std::uint64_t dram_bytes(const NetworkSpec& net) {
  if (net.layers.empty()) return 0;
  return net.layers.front().ifmap_bytes() + net.layers.back().ofmap_bytes();
}

std::uint64_t dram_transfer_cycles(std::uint64_t bytes, const TechConfig& t) {
  return static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(bytes) / t.dram_bandwidth_bytes_per_cycle));
}

std::uint64_t dram_nonoverlap_cycles(const NetworkSpec& net, const TechConfig& t) {
  if (net.layers.empty()) return 0;
  std::uint64_t weights = 0;
  for (const auto& layer : net.layers) {
    if (layer.ifmap_bytes() > t.sram_ifmap.capacity_bytes)
      throw CapacityError("layer '" + layer.name + "' IFMAP (" + std::to_string(layer.ifmap_bytes()) +
                          " B) exceeds the IFMAP SRAM");
    if (layer.ofmap_bytes() > t.sram_ofmap.capacity_bytes)
      throw CapacityError("layer '" + layer.name + "' OFMAP (" + std::to_string(layer.ofmap_bytes()) +
                          " B) exceeds the OFMAP SRAM");
    weights += layer.weight_bytes();
  }
  if (weights > t.rram_capacity_bytes())
    throw CapacityError("network '" + net.name + "' weights (" + std::to_string(weights) +
                        " B) exceed the RRAM capacity");
  return dram_transfer_cycles(net.layers.front().ifmap_bytes(), t) +
         dram_transfer_cycles(net.layers.back().ofmap_bytes(), t);
}

std::uint64_t seconds_to_cycles(double seconds, double frequency_hz) {
  const double cycles = seconds * frequency_hz;
  if (cycles <= 0) return 0;
  return static_cast<std::uint64_t>(std::ceil(cycles * (1.0 - 1e-12)));
}

double edge_layer_latency_s(EdgePosition pos, const TechConfig& t, const MemoryGeometry& geom) {
  const MemoryKind sram = pos == EdgePosition::First ? MemoryKind::SramIfmap : MemoryKind::SramOfmap;
  const MemoryTech& sram_tech = pos == EdgePosition::First ? t.sram_ifmap : t.sram_ofmap;
  const double memory = sram_tech.write_latency_s + sram_tech.read_latency_s + t.rram.read_latency_s;
  double routing = 0;
  for (const auto& b : geom.banks) {
    if (b.memory == sram || b.memory == MemoryKind::Rram)
      routing = std::max(routing, routing_delay(geom.io_tier, b, geom, t));
  }
  return memory + routing;
}

std::uint64_t edge_layer_extra_cycles(const LayerSpec&, EdgePosition pos, const TechConfig& t,
                                      const MemoryGeometry& geom, double frequency_hz) {
  return seconds_to_cycles(edge_layer_latency_s(pos, t, geom), frequency_hz);
}

std::uint64_t word_transactions(std::uint64_t elements, std::uint32_t element_bytes,
                                std::uint32_t word_bytes) {
  const std::uint64_t bytes = elements * element_bytes;
  return (bytes + word_bytes - 1) / word_bytes;
}

AccessEnergy& AccessEnergy::operator+=(const AccessEnergy& o) {
  sram_ifmap_j += o.sram_ifmap_j;
  sram_ofmap_j += o.sram_ofmap_j;
  rram_j += o.rram_j;
  return *this;
}

AccessEnergy access_energy(const AccessCounts& c, std::uint32_t element_bytes, const TechConfig& t) {
  AccessEnergy e;
  e.sram_ifmap_j = static_cast<double>(word_transactions(c.sram_ifmap_reads, element_bytes,
                                                         t.sram_ifmap.word_bytes)) *
                   t.sram_ifmap.read_energy_j;
  e.sram_ofmap_j =
      static_cast<double>(word_transactions(c.sram_ofmap_writes, element_bytes, t.sram_ofmap.word_bytes)) *
          t.sram_ofmap.write_energy_j +
      static_cast<double>(word_transactions(c.sram_ofmap_reads, element_bytes, t.sram_ofmap.word_bytes)) *
          t.sram_ofmap.read_energy_j;
  e.rram_j = static_cast<double>(word_transactions(c.rram_weight_reads, element_bytes, t.rram.word_bytes)) *
             t.rram.read_energy_j;
  return e;
}

}  // namespace systolic3d
