#include "systolic3d/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "systolic3d/errors.hpp"

namespace systolic3d {

using nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string report_to_json(const SimReport& r) {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["network"] = r.network;
  j["variant"] = to_string(r.variant);
  j["array"] = {{"rows", r.array_rows}, {"cols", r.array_cols}};
  j["frequency_hz"] = r.frequency_hz;
  j["cycles"] = {{"compute", r.compute_cycles},
                 {"dram", r.dram_cycles},
                 {"edge", r.edge_cycles},
                 {"total", r.total_cycles}};
  j["latency_s"] = r.latency_s;
  j["power"] = {{"chip_w", r.chip_power_w}, {"system_w", r.system_power_w}};
  j["energy"] = {{"dram_j", r.dram_energy_j}, {"chip_j", r.chip_energy_j}, {"system_j", r.system_energy_j}};
  j["edp_js"] = r.edp_js;
  j["ips"] = r.ips;
  j["ips_per_w"] = r.ips_per_w;
  j["ips_per_w_per_mm2"] = r.ips_per_w_per_mm2;
  j["ips_per_w_per_footprint"] = r.ips_per_w_per_footprint;
  j["area"] = {{"footprint_mm2", r.footprint_mm2},
               {"silicon_mm2", r.silicon_area_mm2},
               {"miv_mm2", r.miv_area_mm2},
               {"mivs", r.mivs}};
  ordered_json thermal;
  thermal["max_temp_c"] = r.max_temp_c;
  thermal["max_temp_per_tier_c"] = r.max_temp_per_tier;
  thermal["fixed_point_iterations"] = r.fixed_point_iterations;
  thermal["budget_c"] = r.budget_c ? ordered_json(*r.budget_c) : ordered_json(nullptr);
  thermal["feasible"] = r.feasible;
  j["thermal"] = thermal;
  ordered_json layers = ordered_json::array();
  for (const auto& l : r.layers)
    layers.push_back({{"name", l.name},
                      {"compute_cycles", l.compute_cycles},
                      {"folds", l.folds},
                      {"mac_ops", l.mac_ops},
                      {"utilization", l.utilization}});
  j["layers"] = layers;
  ordered_json blocks = ordered_json::array();
  for (const auto& b : r.blocks) {
    ordered_json e;
    e["block"] = block_name(b.block);
    e["tier"] = b.tier ? ordered_json(*b.tier) : ordered_json(nullptr);
    e["dynamic_w"] = b.dynamic_w;
    e["leakage_w"] = b.leakage_w;
    blocks.push_back(e);
  }
  j["blocks"] = blocks;
  return j.dump(2) + "\n";
}

SimReport report_from_json(std::string_view text, const std::string& origin) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(origin + ": not valid JSON (" + e.what() + ")");
  }
  if (!j.is_object() || !j.contains("schema") || j["schema"] != kReportSchema)
    throw ParseError(origin + ": not a " + std::string(kReportSchema) + " document");
  try {
    SimReport r;
    r.network = j.at("network").get<std::string>();
    r.variant = parse_variant(j.at("variant").get<std::string>());
    r.array_rows = j.at("array").at("rows").get<std::uint32_t>();
    r.array_cols = j.at("array").at("cols").get<std::uint32_t>();
    r.frequency_hz = j.at("frequency_hz").get<double>();
    const auto& cy = j.at("cycles");
    r.compute_cycles = cy.at("compute").get<std::uint64_t>();
    r.dram_cycles = cy.at("dram").get<std::uint64_t>();
    r.edge_cycles = cy.at("edge").get<std::uint64_t>();
    r.total_cycles = cy.at("total").get<std::uint64_t>();
    r.latency_s = j.at("latency_s").get<double>();
    r.chip_power_w = j.at("power").at("chip_w").get<double>();
    r.system_power_w = j.at("power").at("system_w").get<double>();
    r.dram_energy_j = j.at("energy").at("dram_j").get<double>();
    r.chip_energy_j = j.at("energy").at("chip_j").get<double>();
    r.system_energy_j = j.at("energy").at("system_j").get<double>();
    r.edp_js = j.at("edp_js").get<double>();
    r.ips = j.at("ips").get<double>();
    r.ips_per_w = j.at("ips_per_w").get<double>();
    r.ips_per_w_per_mm2 = j.at("ips_per_w_per_mm2").get<double>();
    r.ips_per_w_per_footprint = j.at("ips_per_w_per_footprint").get<double>();
    const auto& area = j.at("area");
    r.footprint_mm2 = area.at("footprint_mm2").get<double>();
    r.silicon_area_mm2 = area.at("silicon_mm2").get<double>();
    r.miv_area_mm2 = area.at("miv_mm2").get<double>();
    r.mivs = area.at("mivs").get<std::uint64_t>();
    const auto& th = j.at("thermal");
    r.max_temp_c = th.at("max_temp_c").get<double>();
    r.max_temp_per_tier = th.at("max_temp_per_tier_c").get<std::vector<double>>();
    r.fixed_point_iterations = th.at("fixed_point_iterations").get<std::uint32_t>();
    if (!th.at("budget_c").is_null()) r.budget_c = th.at("budget_c").get<double>();
    r.feasible = th.at("feasible").get<bool>();
    for (const auto& l : j.at("layers"))
      r.layers.push_back({l.at("name").get<std::string>(), l.at("compute_cycles").get<std::uint64_t>(),
                          l.at("folds").get<std::uint64_t>(), l.at("mac_ops").get<std::uint64_t>(),
                          l.at("utilization").get<double>()});
    for (const auto& b : j.at("blocks")) {
      BlockPower p;
      p.block = parse_block_name(b.at("block").get<std::string>());
      if (!b.at("tier").is_null()) p.tier = b.at("tier").get<std::uint32_t>();
      p.dynamic_w = b.at("dynamic_w").get<double>();
      p.leakage_w = b.at("leakage_w").get<double>();
      r.blocks.push_back(p);
    }
    return r;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(origin + ": report field missing or mistyped (" + e.what() + ")");
  }
}

SimReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open report '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str(), path);
}

void write_sweep_csv(std::ostream& os, const std::vector<SimReport>& reports) {
  os << "network,variant,frequency_mhz,budget_c,feasible,total_cycles,compute_cycles,dram_cycles,edge_cycles,"
        "latency_s,chip_power_w,system_power_w,chip_energy_j,system_energy_j,edp_js,ips,ips_per_w,"
        "ips_per_w_per_mm2,ips_per_w_per_footprint,silicon_area_mm2,footprint_mm2,max_temp_c,"
        "fixed_point_iterations\n";
  for (const auto& r : reports) {
    os << r.network << ',' << to_string(r.variant) << ',' << format_double(r.frequency_hz / 1e6) << ','
       << (r.budget_c ? format_double(*r.budget_c) : std::string()) << ',' << (r.feasible ? 1 : 0) << ','
       << r.total_cycles << ',' << r.compute_cycles << ',' << r.dram_cycles << ',' << r.edge_cycles << ','
       << format_double(r.latency_s) << ',' << format_double(r.chip_power_w) << ','
       << format_double(r.system_power_w) << ',' << format_double(r.chip_energy_j) << ','
       << format_double(r.system_energy_j) << ',' << format_double(r.edp_js) << ',' << format_double(r.ips)
       << ',' << format_double(r.ips_per_w) << ',' << format_double(r.ips_per_w_per_mm2) << ','
       << format_double(r.ips_per_w_per_footprint) << ',' << format_double(r.silicon_area_mm2) << ','
       << format_double(r.footprint_mm2) << ',' << format_double(r.max_temp_c) << ','
       << r.fixed_point_iterations << '\n';
  }
}

void write_comparison_csv(std::ostream& os, const std::vector<Comparison>& comparisons) {
  os << "network,baseline,candidate,baseline_mhz,candidate_mhz,metric,baseline_value,candidate_value,delta_pct,"
        "ratio\n";
  for (const auto& c : comparisons) {
    for (const auto& m : c.metrics) {
      os << c.network << ',' << to_string(c.baseline_variant) << ',' << to_string(c.candidate_variant) << ','
         << format_double(c.baseline_frequency_hz / 1e6) << ',' << format_double(c.candidate_frequency_hz / 1e6)
         << ',' << m.metric << ',' << format_double(m.baseline) << ',' << format_double(m.candidate) << ','
         << format_double(m.delta_pct) << ',' << format_double(m.ratio) << '\n';
    }
  }
}

void write_comparison_table(std::ostream& os, const Comparison& c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s: %s @ %.0f MHz -> %s @ %.0f MHz\n", c.network.c_str(),
                std::string(to_string(c.baseline_variant)).c_str(), c.baseline_frequency_hz / 1e6,
                std::string(to_string(c.candidate_variant)).c_str(), c.candidate_frequency_hz / 1e6);
  os << buf;
  std::snprintf(buf, sizeof buf, "  %-26s %14s %14s %10s %9s\n", "metric", "baseline", "candidate", "delta%",
                "ratio");
  os << buf;
  for (const auto& m : c.metrics) {
    std::snprintf(buf, sizeof buf, "  %-26s %14.6g %14.6g %+10.2f %9.4f\n", m.metric.c_str(), m.baseline,
                  m.candidate, m.delta_pct, m.ratio);
    os << buf;
  }
}

void write_trace_csv(std::ostream& os, const NetworkSpec& net, const std::vector<LayerCycleReport>& reports) {
  os << "layer,fold_p,fold_q,r,c,w,i,o,total,sram_ifmap_reads,sram_ofmap_writes,sram_ofmap_reads,"
        "rram_weight_reads,hops_input,hops_weight,hops_psum,miv_input,miv_weight,group\n";
  for (std::size_t li = 0; li < reports.size() && li < net.layers.size(); ++li) {
    for (const auto& f : reports[li].folds) {
      os << net.layers[li].name << ',' << f.fold.p << ',' << f.fold.q << ',' << f.fold.r << ',' << f.fold.c << ','
         << f.cycles.w << ',' << f.cycles.i_fill << ',' << f.cycles.o << ',' << f.cycles.total() << ','
         << f.accesses.sram_ifmap_reads << ',' << f.accesses.sram_ofmap_writes << ','
         << f.accesses.sram_ofmap_reads << ',' << f.accesses.rram_weight_reads << ',' << f.hops.hops_input << ','
         << f.hops.hops_weight << ',' << f.hops.hops_psum << ',' << f.hops.miv_input << ','
         << f.hops.miv_weight << ',' << f.group << '\n';
    }
  }
}

}  // namespace systolic3d
