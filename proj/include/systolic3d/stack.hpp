#pragma once
// Physical description of a chip stack: tiers bottom-up from the heat
// spreader, inter-tier dielectric, package layers and block rectangles.
// Loaded from an INI file with [stack], [materials], [spreader], [sink],
// [tier N] and [block NAME] sections.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace systolic3d {

struct Rect {
  double x_mm = 0;
  double y_mm = 0;
  double w_mm = 0;
  double h_mm = 0;

  double cx() const { return x_mm + 0.5 * w_mm; }
  double cy() const { return y_mm + 0.5 * h_mm; }
  double area_mm2() const { return w_mm * h_mm; }
  double overlap_mm2(const Rect& o) const;
};

struct Tier {
  std::string name;
  double thickness_m = 0;
  std::string material = "silicon";
  double beol_thickness_m = 0;  // 0 means no separate BEOL layer
  std::string beol_material = "beol";
};

// A rectangle on one tier whose power comes from a named power source
// (pe_array, sram_ifmap, sram_ofmap, rram0..rram3).
struct StackBlock {
  std::string name;
  std::uint32_t tier = 0;
  Rect rect;
  std::string source;
};

struct ChipStack {
  std::string name;
  double footprint_w_mm = 0;
  double footprint_h_mm = 0;
  std::vector<Tier> tiers;
  std::vector<StackBlock> blocks;
  double ild_thickness_m = 100e-9;
  std::string ild_material = "ild";
  double spreader_thickness_m = 1e-3;
  std::string spreader_material = "copper";
  double sink_thickness_m = 1e-9;
  std::string sink_material = "copper";
  double convection_c_per_w = 1.3;
  double ambient_c = 45.0;
  std::uint32_t io_tier = 0;  // tier on the PCB side where off-chip data enters
  std::map<std::string, double> conductivity_w_per_mk{
      {"silicon", 120.0}, {"ild", 1.4}, {"beol", 2.25}, {"copper", 400.0}};

  double footprint_mm2() const { return footprint_w_mm * footprint_h_mm; }
  double silicon_area_mm2() const { return footprint_mm2() * static_cast<double>(tiers.size()); }
  double conductivity(const std::string& material) const;
  const StackBlock* find_source(std::string_view source) const;
};

// Throws ValidationError / FloorplanError.
void validate(const ChipStack& stack);

ChipStack parse_stack(std::string_view text, std::string origin);
ChipStack load_stack(const std::filesystem::path& path);

}  // namespace systolic3d
