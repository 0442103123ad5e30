#include "systolic3d/stack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "systolic3d/config.hpp"
#include "systolic3d/errors.hpp"

namespace systolic3d {

double Rect::overlap_mm2(const Rect& o) const {
  const double w = std::min(x_mm + w_mm, o.x_mm + o.w_mm) - std::max(x_mm, o.x_mm);
  const double h = std::min(y_mm + h_mm, o.y_mm + o.h_mm) - std::max(y_mm, o.y_mm);
  return (w > 0 && h > 0) ? w * h : 0.0;
}

double ChipStack::conductivity(const std::string& material) const {
  auto it = conductivity_w_per_mk.find(material);
  if (it == conductivity_w_per_mk.end())
    throw ValidationError("stack '" + name + "': unknown material '" + material + "'");
  return it->second;
}

const StackBlock* ChipStack::find_source(std::string_view source) const {
  for (const auto& b : blocks)
    if (b.source == source) return &b;
  return nullptr;
}

void validate(const ChipStack& s) {
  auto fail = [&](const std::string& why) {
    throw ValidationError("stack '" + s.name + "': " + why);
  };
  if (!(s.footprint_w_mm > 0) || !(s.footprint_h_mm > 0)) fail("footprint must be positive");
  if (s.tiers.empty()) fail("needs at least one tier");
  if (!(s.spreader_thickness_m > 0)) fail("spreader thickness must be positive");
  if (!(s.sink_thickness_m > 0)) fail("sink thickness must be positive");
  if (s.tiers.size() > 1 && !(s.ild_thickness_m > 0)) fail("ILD thickness must be positive");
  if (!(s.convection_c_per_w > 0)) fail("convection resistance must be positive");
  if (s.io_tier >= s.tiers.size()) fail("io_tier outside the stack");
  for (const auto& [mat, k] : s.conductivity_w_per_mk)
    if (!(k > 0)) fail("conductivity of '" + mat + "' must be positive");
  for (const auto& t : s.tiers) {
    if (!(t.thickness_m > 0)) fail("tier '" + t.name + "' has zero thickness");
    if (t.beol_thickness_m < 0) fail("tier '" + t.name + "' has negative BEOL thickness");
    s.conductivity(t.material);
    if (t.beol_thickness_m > 0) s.conductivity(t.beol_material);
  }
  s.conductivity(s.spreader_material);
  s.conductivity(s.sink_material);
  if (s.tiers.size() > 1) s.conductivity(s.ild_material);

  constexpr double kEps = 1e-9;
  for (std::size_t i = 0; i < s.blocks.size(); ++i) {
    const auto& b = s.blocks[i];
    if (b.tier >= s.tiers.size())
      throw FloorplanError("block '" + b.name + "' on nonexistent tier " + std::to_string(b.tier));
    if (!(b.rect.w_mm > 0) || !(b.rect.h_mm > 0))
      throw FloorplanError("block '" + b.name + "' has empty rectangle");
    if (b.rect.x_mm < -kEps || b.rect.y_mm < -kEps ||
        b.rect.x_mm + b.rect.w_mm > s.footprint_w_mm + kEps ||
        b.rect.y_mm + b.rect.h_mm > s.footprint_h_mm + kEps)
      throw FloorplanError("block '" + b.name + "' extends outside the footprint");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = s.blocks[j];
      if (o.tier == b.tier && b.rect.overlap_mm2(o.rect) > kEps)
        throw FloorplanError("blocks '" + o.name + "' and '" + b.name + "' overlap on tier " +
                             std::to_string(b.tier));
    }
  }
}

ChipStack parse_stack(std::string_view text, std::string origin) {
  auto doc = config::Document::parse(text, std::move(origin));
  ChipStack s;
  s.name = doc.text_or("stack", "name", "stack");
  s.footprint_w_mm = doc.number("stack", "footprint_w_mm");
  s.footprint_h_mm = doc.number("stack", "footprint_h_mm");
  s.ambient_c = doc.number_or("stack", "ambient_c", s.ambient_c);
  s.convection_c_per_w = doc.number_or("stack", "convection_c_per_w", s.convection_c_per_w);
  s.ild_thickness_m = doc.number_or("stack", "ild_thickness_nm", 100.0) * 1e-9;
  s.ild_material = doc.text_or("stack", "ild_material", s.ild_material);
  s.io_tier = static_cast<std::uint32_t>(doc.count_or("stack", "io_tier", 0));

  if (doc.has_section("spreader")) {
    s.spreader_thickness_m = doc.number_or("spreader", "thickness_mm", 1.0) * 1e-3;
    s.spreader_material = doc.text_or("spreader", "material", s.spreader_material);
  }
  if (doc.has_section("sink")) {
    s.sink_thickness_m = doc.number_or("sink", "thickness_nm", 1.0) * 1e-9;
    s.sink_material = doc.text_or("sink", "material", s.sink_material);
  }

  const std::string suffix = "_w_per_mk";
  std::vector<std::pair<std::uint32_t, Tier>> tiers;
  for (const auto& section : doc.sections()) {
    if (section == "materials") {
      continue;
    }
    if (section.rfind("tier ", 0) == 0) {
      const std::string idx = section.substr(5);
      Tier t;
      t.name = doc.text_or(section, "name", section);
      t.thickness_m = doc.number(section, "thickness_nm") * 1e-9;
      t.material = doc.text_or(section, "material", t.material);
      t.beol_thickness_m = doc.number_or(section, "beol_thickness_nm", 0.0) * 1e-9;
      t.beol_material = doc.text_or(section, "beol_material", t.beol_material);
      std::uint32_t index = 0;
      try {
        index = static_cast<std::uint32_t>(std::stoul(idx));
      } catch (const std::exception&) {
        throw ParseError(doc.origin() + ": bad tier section '" + section + "'");
      }
      tiers.emplace_back(index, std::move(t));
    } else if (section.rfind("block ", 0) == 0) {
      StackBlock b;
      b.name = section.substr(6);
      b.tier = static_cast<std::uint32_t>(doc.count(section, "tier"));
      b.rect = {doc.number(section, "x_mm"), doc.number(section, "y_mm"),
                doc.number(section, "w_mm"), doc.number(section, "h_mm")};
      b.source = doc.text_or(section, "source", b.name);
      s.blocks.push_back(std::move(b));
    }
  }
  std::sort(tiers.begin(), tiers.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    if (tiers[i].first != i) throw ParseError(doc.origin() + ": tier sections must be numbered 0..N-1");
    s.tiers.push_back(std::move(tiers[i].second));
  }

  // Material conductivities: "<material>_w_per_mk = value".
  for (const std::string mat : {"silicon", "ild", "beol", "copper"}) {
    s.conductivity_w_per_mk[mat] = doc.number_or("materials", mat + suffix, s.conductivity_w_per_mk[mat]);
  }
  for (const auto& t : s.tiers) {
    for (const auto& mat : {t.material, t.beol_material}) {
      if (!s.conductivity_w_per_mk.count(mat))
        s.conductivity_w_per_mk[mat] = doc.number("materials", mat + suffix);
    }
  }
  for (const auto& mat : {s.spreader_material, s.sink_material, s.ild_material}) {
    if (!s.conductivity_w_per_mk.count(mat))
      s.conductivity_w_per_mk[mat] = doc.number("materials", mat + suffix);
  }
  validate(s);
  return s;
}

ChipStack load_stack(const std::filesystem::path& path) {
  std::ifstream probe(path);
  if (!probe) throw ParseError("cannot open stack file '" + path.string() + "'");
  std::ostringstream buf;
  buf << probe.rdbuf();
  return parse_stack(buf.str(), path.string());
}

}  // namespace systolic3d
