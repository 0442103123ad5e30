// systolic3d: simulate / validate / compare / thermal

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "systolic3d/errors.hpp"
#include "systolic3d/kernels.hpp"
#include "systolic3d/metrics.hpp"
#include "systolic3d/oracle.hpp"
#include "systolic3d/report.hpp"
#include "systolic3d/thermal.hpp"

namespace fs = std::filesystem;
using namespace systolic3d;

namespace {

struct SimulateArgs {
  std::vector<std::string> topologies;
  std::string tech = "configs/tech_22nm.ini";
  std::string stack_mono3d = "configs/stack_mono3d.ini";
  std::string stack_2d = "configs/stack_2d.ini";
  std::vector<std::string> variants;
  std::vector<double> freqs_mhz;
  std::vector<double> budgets_c;
  std::string out;
  bool trace = false;
  std::string grid = "32x32";
  unsigned jobs = 1;
  double tolerance_c = 1.0;
  bool max_coupling = false;
};

struct ValidateArgs {
  oracle::SweepBounds bounds;
  std::uint64_t seed = 0x5eed;
};

struct CompareArgs {
  std::string baseline;
  std::string candidate;
  std::string out;
};

struct ThermalArgs {
  std::string stack;
  std::string power;
  std::string grid = "32x32";
  std::string out;
};

GridResolution parse_grid(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const auto nx = std::stoul(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    const auto ny = std::stoul(text.substr(x + 1), &used);
    if (used != text.size() - x - 1) throw std::invalid_argument(text);
    if (nx < 1 || ny < 1) throw std::invalid_argument(text);
    return {static_cast<std::uint32_t>(nx), static_cast<std::uint32_t>(ny)};
  } catch (const std::exception&) {
    throw ValidationError("grid must look like NXxNY, got '" + text + "'");
  }
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw ValidationError(std::string(what) + " '" + path + "' does not exist");
}

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  os << data;
}

std::string mhz_tag(double hz) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gMHz", hz / 1e6);
  return buf;
}

std::string budget_tag(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "budget%gC", c);
  return buf;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<fs::path> expand_topologies(const std::vector<std::string>& items) {
  std::vector<fs::path> out;
  for (const auto& item : items) {
    if (fs::is_directory(item)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(item))
        if (e.is_regular_file() && e.path().extension() == ".csv") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      require_file(item, "topology file");
      out.emplace_back(item);
    }
  }
  if (out.empty()) throw ValidationError("no topology files given");
  return out;
}

struct Point {
  std::size_t evaluator = 0;
  double frequency_hz = 0;
  std::optional<double> budget_c;
};

struct PointOutput {
  SimReport report;
  std::string power_csv;
  std::string temperature_csv;
};

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& argv) {
  require_file(a.tech, "tech config");
  const auto tech = load_tech_config(a.tech);
  const auto paths = expand_topologies(a.topologies);

  std::vector<Variant> variants;
  if (a.variants.empty()) {
    variants = {Variant::WS2D, Variant::WSMono3D};
  } else {
    for (const auto& v : a.variants) variants.push_back(parse_variant(v));
  }
  std::vector<double> freqs;
  for (double mhz : a.freqs_mhz) freqs.push_back(mhz * 1e6);
  if (freqs.empty()) freqs = tech.frequencies_hz;

  std::optional<ChipStack> stack2d, stack3d;
  for (Variant v : variants) {
    if (v == Variant::WS2D && !stack2d) {
      require_file(a.stack_2d, "2D stack file");
      stack2d = load_stack(a.stack_2d);
    }
    if (v == Variant::WSMono3D && !stack3d) {
      require_file(a.stack_mono3d, "Mono3D stack file");
      stack3d = load_stack(a.stack_mono3d);
    }
  }

  EvaluatorOptions opts;
  opts.grid = parse_grid(a.grid);
  opts.fixed_point.tolerance_c = a.tolerance_c;
  opts.fixed_point.coupling = a.max_coupling ? BlockTemperature::Max : BlockTemperature::Mean;

  std::vector<NetworkSpec> nets;
  for (const auto& p : paths) nets.push_back(parse_topology_file(p));

  std::vector<std::unique_ptr<Evaluator>> evaluators(nets.size() * variants.size());
  parallel_for(evaluators.size(), a.jobs, [&](std::size_t i) {
    const auto& net = nets[i / variants.size()];
    const Variant v = variants[i % variants.size()];
    evaluators[i] = std::make_unique<Evaluator>(net, tech, v == Variant::WS2D ? *stack2d : *stack3d, v, opts);
  });

  std::vector<Point> points;
  for (std::size_t e = 0; e < evaluators.size(); ++e)
    for (double f : freqs) points.push_back({e, f, std::nullopt});
  const std::size_t fixed_points = points.size();
  std::vector<double> sorted = freqs;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  for (std::size_t e = 0; e < evaluators.size(); ++e)
    for (double b : a.budgets_c) points.push_back({e, 0.0, b});

  std::vector<PointOutput> outputs(points.size());
  parallel_for(points.size(), a.jobs, [&](std::size_t i) {
    const auto& p = points[i];
    const Evaluator& ev = *evaluators[p.evaluator];
    PointOutput out;
    out.report = p.budget_c ? evaluate_under_budget(ev, sorted, *p.budget_c) : ev.evaluate(p.frequency_hz);
    const auto state = ev.thermal_state(out.report.frequency_hz);
    std::ostringstream pc, tc;
    write_power_csv(pc, state.blocks);
    write_temperature_csv(tc, ev.thermal(), state.field);
    out.power_csv = pc.str();
    out.temperature_csv = tc.str();
    outputs[i] = std::move(out);
  });

  std::string out_dir = a.out;
  if (const char* env = std::getenv("SYSTOLIC3D_OUT"); env != nullptr && *env != '\0') out_dir = env;
  if (out_dir.empty()) out_dir = "out";
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  std::vector<SimReport> fixed_reports, budget_reports;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& r = outputs[i].report;
    const std::string stem = r.network + "_" + std::string(to_string(r.variant)) + "_" +
                             (points[i].budget_c ? budget_tag(*points[i].budget_c) : mhz_tag(r.frequency_hz));
    write_file(dir / (stem + ".json"), report_to_json(r));
    write_file(dir / (stem + "_power.csv"), outputs[i].power_csv);
    write_file(dir / (stem + "_temperature.csv"), outputs[i].temperature_csv);
    (i < fixed_points ? fixed_reports : budget_reports).push_back(r);
  }

  auto emit_sweep = [&](const std::string& name, const std::vector<SimReport>& reports) {
    std::ostringstream os;
    write_sweep_csv(os, reports);
    write_file(dir / name, os.str());
  };
  emit_sweep("sweep.csv", fixed_reports);
  if (!budget_reports.empty()) emit_sweep("budget_sweep.csv", budget_reports);

  // Baseline 2D against Mono3D wherever both were run.
  auto pair_up = [&](const std::vector<SimReport>& reports, bool by_budget) {
    std::vector<Comparison> cmp;
    for (const auto& base : reports) {
      if (base.variant != Variant::WS2D) continue;
      for (const auto& cand : reports) {
        if (cand.variant != Variant::WSMono3D || cand.network != base.network) continue;
        const bool same = by_budget ? cand.budget_c == base.budget_c : cand.frequency_hz == base.frequency_hz;
        if (same) cmp.push_back(compare(base, cand));
      }
    }
    return cmp;
  };
  for (auto [name, reports, by_budget] :
       {std::tuple{"comparison.csv", &fixed_reports, false}, std::tuple{"budget_comparison.csv", &budget_reports, true}}) {
    const auto cmp = pair_up(*reports, by_budget);
    if (cmp.empty()) continue;
    std::ostringstream os;
    write_comparison_csv(os, cmp);
    write_file(dir / name, os.str());
    for (const auto& c : cmp) write_comparison_table(std::cout, c);
  }

  if (a.trace) {
    for (const auto& ev : evaluators) {
      std::ostringstream os;
      write_trace_csv(os, ev->network(), ev->layer_reports());
      write_file(dir / (ev->network().name + "_" + std::string(to_string(ev->variant())) + "_trace.csv"), os.str());
    }
  }

  nlohmann::ordered_json meta;
  meta["tool"] = "systolic3d";
  meta["started_utc"] = utc_now();
  meta["argv"] = argv;
  meta["kernel_backend"] = std::string(kernels::to_string(kernels::active().backend));
  meta["jobs"] = a.jobs;
  write_file(dir / "run_metadata.json", meta.dump(2) + "\n");

  std::cout << "wrote " << points.size() << " report(s) to " << dir.string() << "\n";
  return 0;
}

int cmd_validate(const ValidateArgs& a) {
  const auto result = oracle::validate_sweep(a.bounds, fold_cycles, a.seed);
  const auto& b = a.bounds;
  std::printf("oracle sweep: %llu instances, %llu folds\n", static_cast<unsigned long long>(result.instances),
              static_cast<unsigned long long>(result.folds_checked));
  std::printf("rows\\cols");
  for (std::uint32_t c = 1; c <= b.max_cols; ++c) std::printf(" %4u", c);
  std::printf("\n");
  for (std::uint32_t r = 1; r <= b.max_rows; ++r) {
    std::printf("%9u", r);
    for (std::uint32_t c = 1; c <= b.max_cols; ++c) {
      const auto fails = result.failures[(r - 1) * b.max_cols + (c - 1)];
      std::printf(" %4s", fails == 0 ? "pass" : "FAIL");
    }
    std::printf("\n");
  }
  for (const auto& m : result.first_mismatches) {
    std::printf("mismatch %ux%u K=%llu M=%llu T=%llu %s: %s\n", m.array.rows, m.array.cols,
                static_cast<unsigned long long>(m.gemm.K), static_cast<unsigned long long>(m.gemm.M),
                static_cast<unsigned long long>(m.gemm.T), std::string(to_string(m.array.variant)).c_str(),
                m.what.c_str());
  }
  std::printf("%s\n", result.passed() ? "all pass" : "MISMATCHES FOUND");
  return result.passed() ? 0 : 1;
}

int cmd_compare(const CompareArgs& a) {
  const auto base = load_report(a.baseline);
  const auto cand = load_report(a.candidate);
  const auto c = compare(base, cand);
  write_comparison_table(std::cout, c);
  if (!a.out.empty()) {
    std::ostringstream os;
    write_comparison_csv(os, {c});
    write_file(a.out, os.str());
  }
  return 0;
}

int cmd_thermal(const ThermalArgs& a) {
  require_file(a.stack, "stack file");
  require_file(a.power, "power map");
  const auto stack = load_stack(a.stack);
  std::ifstream in(a.power);
  const auto blocks = read_power_csv(in, a.power);
  const auto sys = build_grid(stack, parse_grid(a.grid));
  const auto field = solve_steady(sys, power_vector(sys, blocks));
  double injected = 0;
  for (const auto& b : blocks)
    if (b.on_chip()) injected += b.total_w();
  std::printf("injected %.6f W, to ambient %.6f W, %u PCG iterations\n", injected, heat_to_ambient(sys, field),
              field.iterations);
  for (std::size_t t = 0; t < field.max_per_tier.size(); ++t)
    std::printf("tier %zu (%s): max %.3f C\n", t, stack.tiers[t].name.c_str(), field.max_per_tier[t]);
  std::printf("max %.3f C\n", field.max_overall);
  if (!a.out.empty()) {
    std::ostringstream os;
    write_temperature_csv(os, sys, field);
    write_file(a.out, os.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weight-stationary systolic array simulator: 2D vs monolithic 3D"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Cycles, power, temperature and efficiency for networks");
  s->add_option("--topology", sim.topologies, "Topology CSV file(s) or directories")->required();
  s->add_option("--tech", sim.tech, "Technology config")->capture_default_str();
  s->add_option("--stack-mono3d", sim.stack_mono3d, "Mono3D stack config")->capture_default_str();
  s->add_option("--stack-2d", sim.stack_2d, "2D stack config")->capture_default_str();
  s->add_option("--variant", sim.variants, "ws2d and/or ws-mono3d (default both)");
  s->add_option("--freq", sim.freqs_mhz, "Frequencies in MHz (default from tech config)");
  s->add_option("--budget", sim.budgets_c, "Thermal budgets in C; adds budget-limited runs");
  s->add_option("--out", sim.out, "Output directory (SYSTOLIC3D_OUT overrides)");
  s->add_flag("--trace", sim.trace, "Write per-fold trace CSVs");
  s->add_option("--grid", sim.grid, "Thermal grid, e.g. 32x32")->capture_default_str();
  s->add_option("--jobs", sim.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--tolerance", sim.tolerance_c, "Leakage fixed-point tolerance in C")->capture_default_str();
  s->add_flag("--max-coupling", sim.max_coupling, "Use block max temperature for leakage");

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Check the analytical fold model against the cycle-level oracle");
  v->add_option("--rows", val.bounds.max_rows, "Largest array rows")->capture_default_str();
  v->add_option("--cols", val.bounds.max_cols, "Largest array columns")->capture_default_str();
  v->add_option("--k", val.bounds.max_k, "Largest K")->capture_default_str();
  v->add_option("--m", val.bounds.max_m, "Largest M")->capture_default_str();
  v->add_option("--t", val.bounds.max_t, "Largest T")->capture_default_str();
  v->add_option("--seed", val.seed, "Operand seed")->capture_default_str();

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Delta table between two report files");
  c->add_option("baseline", cmp.baseline, "Baseline report JSON")->required();
  c->add_option("candidate", cmp.candidate, "Candidate report JSON")->required();
  c->add_option("--out", cmp.out, "Also write the deltas as CSV");

  ThermalArgs th;
  auto* t = app.add_subcommand("thermal", "Solve temperatures for a stack and a power map CSV");
  t->add_option("--stack", th.stack, "Stack config")->required();
  t->add_option("--power", th.power, "Power map CSV (block,tier,dynamic_w,leakage_w)")->required();
  t->add_option("--grid", th.grid, "Thermal grid, e.g. 32x32")->capture_default_str();
  t->add_option("--out", th.out, "Temperature CSV output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) return cmd_simulate(sim, std::vector<std::string>(argv, argv + argc));
    if (*v) return cmd_validate(val);
    if (*c) return cmd_compare(cmp);
    if (*t) return cmd_thermal(th);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
