#include "systolic3d/metrics.hpp"

#include <atomic>
#include <exception>
#include <algorithm>
#include <thread>

#include "systolic3d/errors.hpp"

namespace systolic3d {

Evaluator::Evaluator(NetworkSpec net, TechConfig tech, ChipStack stack, Variant variant, EvaluatorOptions opts)
    : net_(std::move(net)), tech_(std::move(tech)), stack_(std::move(stack)), variant_(variant), opts_(opts) {
  if (net_.layers.empty()) throw ValidationError("network '" + net_.name + "' has no layers");
  validate(tech_);
  validate(stack_);
  geom_ = build_memory_geometry(stack_, tech_);
  const ArrayConfig array{tech_.array_rows, tech_.array_cols, variant_, 1e9};
  reports_.reserve(net_.layers.size());
  for (const auto& layer : net_.layers) {
    reports_.push_back(layer_cycles(layer, array));
    compute_cycles_ += reports_.back().compute_cycles;
  }
  dram_cycles_ = dram_nonoverlap_cycles(net_, tech_);
  layout_ = make_power_layout(stack_, tech_, powered_rram_tiers(net_, tech_));
  energy_ = workload_energy(net_, reports_, variant_, tech_, geom_, layout_);
  thermal_ = build_grid(stack_, opts_.grid);
}

std::uint64_t Evaluator::total_cycles(double f) const {
  return compute_cycles_ + dram_cycles_ +
         edge_layer_extra_cycles(net_.layers.front(), EdgePosition::First, tech_, geom_, f) +
         edge_layer_extra_cycles(net_.layers.back(), EdgePosition::Last, tech_, geom_, f);
}

FixedPointResult Evaluator::thermal_state(double f) const {
  auto blocks = dynamic_power(energy_, total_cycles(f), f, layout_);
  const auto models = leakage_models(blocks, tech_);
  return fixed_point(thermal_, std::move(blocks), models, opts_.fixed_point);
}

SimReport Evaluator::evaluate(double f) const {
  if (!(f > 0)) throw ValidationError("frequency must be positive");
  SimReport r;
  r.network = net_.name;
  r.variant = variant_;
  r.array_rows = tech_.array_rows;
  r.array_cols = tech_.array_cols;
  for (std::size_t i = 0; i < net_.layers.size(); ++i) {
    const auto& rep = reports_[i];
    r.layers.push_back({net_.layers[i].name, rep.compute_cycles, rep.folds.size(), rep.mac_ops, rep.utilization});
  }
  r.compute_cycles = compute_cycles_;
  r.dram_cycles = dram_cycles_;
  r.total_cycles = total_cycles(f);
  r.edge_cycles = r.total_cycles - compute_cycles_ - dram_cycles_;
  r.frequency_hz = f;
  r.latency_s = static_cast<double>(r.total_cycles) / f;

  auto fp = thermal_state(f);
  const auto power = chip_power(fp.blocks);
  r.chip_power_w = power.chip_w;
  r.system_power_w = power.system_w;
  r.dram_energy_j = (power.system_w - power.chip_w) * r.latency_s;
  r.chip_energy_j = power.chip_w * r.latency_s;
  r.system_energy_j = r.chip_energy_j + r.dram_energy_j;
  r.edp_js = r.system_energy_j * r.latency_s;
  r.ips = static_cast<double>(net_.batch) / r.latency_s;
  r.ips_per_w = r.ips / r.chip_power_w;

  const bool monolithic = variant_ == Variant::WSMono3D;
  r.footprint_mm2 = stack_.footprint_mm2();
  r.mivs = total_mivs(geom_, tech_, monolithic);
  r.miv_area_mm2 = miv_area_mm2(geom_, tech_, monolithic);
  r.silicon_area_mm2 = stack_.silicon_area_mm2() + r.miv_area_mm2;
  r.ips_per_w_per_mm2 = r.ips_per_w / r.silicon_area_mm2;
  r.ips_per_w_per_footprint = r.ips_per_w / r.footprint_mm2;

  r.max_temp_c = fp.field.max_overall;
  r.max_temp_per_tier = fp.field.max_per_tier;
  r.fixed_point_iterations = fp.iterations;
  r.blocks = std::move(fp.blocks);
  return r;
}

SimReport assemble(const NetworkSpec& net, const ArrayConfig& array, const TechConfig& tech, const ChipStack& stack,
                   const EvaluatorOptions& opts) {
  TechConfig t = tech;
  t.array_rows = array.rows;
  t.array_cols = array.cols;
  return Evaluator(net, std::move(t), stack, array.variant, opts).evaluate(array.frequency_hz);
}

FrequencyChoice select_frequency(const std::vector<double>& candidates, double budget_c,
                                 const std::function<double(double)>& max_temp_at) {
  if (candidates.empty()) throw ValidationError("frequency candidates are empty");
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!(candidates[i] > 0)) throw ValidationError("frequency candidates must be positive");
    if (i > 0 && !(candidates[i] < candidates[i - 1]))
      throw ValidationError("frequency candidates must be strictly descending");
  }
  for (double f : candidates)
    if (max_temp_at(f) <= budget_c) return {f, true};
  return {candidates.back(), false};
}

SimReport evaluate_under_budget(const Evaluator& ev, const std::vector<double>& candidates, double budget_c) {
  std::vector<std::optional<SimReport>> cache(candidates.size());
  auto index_of = [&](double f) {
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (candidates[i] == f) return i;
    return candidates.size();
  };
  const auto choice = select_frequency(candidates, budget_c, [&](double f) {
    auto& slot = cache[index_of(f)];
    if (!slot) slot = ev.evaluate(f);
    return slot->max_temp_c;
  });
  auto& slot = cache[index_of(choice.frequency_hz)];
  SimReport r = slot ? std::move(*slot) : ev.evaluate(choice.frequency_hz);
  r.budget_c = budget_c;
  r.feasible = choice.feasible;
  return r;
}

const MetricDelta& Comparison::at(const std::string& metric) const {
  for (const auto& m : metrics)
    if (m.metric == metric) return m;
  throw ValidationError("comparison has no metric '" + metric + "'");
}

Comparison compare(const SimReport& a, const SimReport& b) {
  if (a.network != b.network)
    throw ValidationError("cannot compare reports of different networks ('" + a.network + "' vs '" + b.network +
                          "')");
  Comparison c;
  c.network = a.network;
  c.baseline_variant = a.variant;
  c.candidate_variant = b.variant;
  c.baseline_frequency_hz = a.frequency_hz;
  c.candidate_frequency_hz = b.frequency_hz;
  auto add = [&](const char* name, double x, double y) {
    MetricDelta d{name, x, y, 0.0, 1.0};
    if (x != 0) {
      d.ratio = y / x;
      d.delta_pct = (y - x) / x * 100.0;
    } else if (y != 0) {
      d.ratio = std::numeric_limits<double>::infinity();
      d.delta_pct = std::numeric_limits<double>::infinity();
    }
    c.metrics.push_back(d);
  };
  add("latency_s", a.latency_s, b.latency_s);
  add("chip_power_w", a.chip_power_w, b.chip_power_w);
  add("system_power_w", a.system_power_w, b.system_power_w);
  add("system_energy_j", a.system_energy_j, b.system_energy_j);
  add("edp_js", a.edp_js, b.edp_js);
  add("ips_per_w", a.ips_per_w, b.ips_per_w);
  add("ips_per_w_per_mm2", a.ips_per_w_per_mm2, b.ips_per_w_per_mm2);
  add("ips_per_w_per_footprint", a.ips_per_w_per_footprint, b.ips_per_w_per_footprint);
  add("max_temp_c", a.max_temp_c, b.max_temp_c);
  return c;
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace systolic3d
