#pragma once
// End-to-end latency, energy and efficiency of one network on one variant,
// frequency selection under a temperature budget, and report comparison.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "systolic3d/dataflow.hpp"
#include "systolic3d/memsys.hpp"
#include "systolic3d/power.hpp"
#include "systolic3d/stack.hpp"
#include "systolic3d/thermal.hpp"
#include "systolic3d/topology.hpp"

namespace systolic3d {

struct LayerResult {
  std::string name;
  std::uint64_t compute_cycles = 0;
  std::uint64_t folds = 0;
  std::uint64_t mac_ops = 0;
  double utilization = 0;
};

struct SimReport {
  std::string network;
  Variant variant = Variant::WS2D;
  std::uint32_t array_rows = 0;
  std::uint32_t array_cols = 0;
  std::vector<LayerResult> layers;

  std::uint64_t compute_cycles = 0;
  std::uint64_t dram_cycles = 0;
  std::uint64_t edge_cycles = 0;
  std::uint64_t total_cycles = 0;
  double frequency_hz = 0;
  double latency_s = 0;

  double chip_power_w = 0;
  double system_power_w = 0;
  double dram_energy_j = 0;
  double chip_energy_j = 0;
  double system_energy_j = 0;
  double edp_js = 0;
  double ips = 0;
  double ips_per_w = 0;  // on chip power
  double ips_per_w_per_mm2 = 0;
  double ips_per_w_per_footprint = 0;

  double footprint_mm2 = 0;
  double silicon_area_mm2 = 0;
  double miv_area_mm2 = 0;
  std::uint64_t mivs = 0;

  double max_temp_c = 0;
  std::vector<double> max_temp_per_tier;
  std::uint32_t fixed_point_iterations = 0;
  std::optional<double> budget_c;
  bool feasible = true;

  std::vector<BlockPower> blocks;
};

struct EvaluatorOptions {
  GridResolution grid;
  FixedPointOptions fixed_point;
};

// Everything that does not depend on frequency is computed once here;
// evaluate() is const and may be called from several threads.
class Evaluator {
 public:
  Evaluator(NetworkSpec net, TechConfig tech, ChipStack stack, Variant variant, EvaluatorOptions opts = {});

  SimReport evaluate(double frequency_hz) const;

  const NetworkSpec& network() const { return net_; }
  Variant variant() const { return variant_; }
  const TechConfig& tech() const { return tech_; }
  const ChipStack& stack() const { return stack_; }
  const ThermalSystem& thermal() const { return thermal_; }
  const MemoryGeometry& geometry() const { return geom_; }
  const std::vector<LayerCycleReport>& layer_reports() const { return reports_; }
  const WorkloadEnergy& energy() const { return energy_; }
  // Dynamic and leakage power at f after the leakage fixed point, with the
  // temperature field.
  FixedPointResult thermal_state(double frequency_hz) const;
  std::uint64_t total_cycles(double frequency_hz) const;

 private:
  NetworkSpec net_;
  TechConfig tech_;
  ChipStack stack_;
  Variant variant_;
  EvaluatorOptions opts_;
  MemoryGeometry geom_;
  PowerLayout layout_;
  ThermalSystem thermal_;
  std::vector<LayerCycleReport> reports_;
  WorkloadEnergy energy_;
  std::uint64_t compute_cycles_ = 0;
  std::uint64_t dram_cycles_ = 0;
};

SimReport assemble(const NetworkSpec& net, const ArrayConfig& array, const TechConfig& tech, const ChipStack& stack,
                   const EvaluatorOptions& opts = {});

struct FrequencyChoice {
  double frequency_hz = 0;
  bool feasible = true;
};

// candidates must be non-empty and strictly descending; evaluator returns
// the steady-state maximum temperature at a frequency.
FrequencyChoice select_frequency(const std::vector<double>& candidates, double budget_c,
                                 const std::function<double(double)>& max_temp_at);

// Report at the frequency chosen for the budget, with budget and
// feasibility filled in.
SimReport evaluate_under_budget(const Evaluator& ev, const std::vector<double>& candidates, double budget_c);

struct MetricDelta {
  std::string metric;
  double baseline = 0;
  double candidate = 0;
  double delta_pct = 0;  // (candidate - baseline) / baseline * 100
  double ratio = 0;      // candidate / baseline
};

struct Comparison {
  std::string network;
  Variant baseline_variant = Variant::WS2D;
  Variant candidate_variant = Variant::WSMono3D;
  double baseline_frequency_hz = 0;
  double candidate_frequency_hz = 0;
  std::vector<MetricDelta> metrics;

  const MetricDelta& at(const std::string& metric) const;
  double latency_reduction_pct() const { return -at("latency_s").delta_pct; }
  double edp_reduction_pct() const { return -at("edp_js").delta_pct; }
};

// Throws ValidationError when the reports are for different networks.
Comparison compare(const SimReport& baseline, const SimReport& candidate);

// Runs fn(0..count-1) on up to `jobs` threads. Every index is handled once;
// callers write results into pre-sized slots so the output order is fixed.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace systolic3d
