#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "support.hpp"
#include "systolic3d/errors.hpp"
#include "systolic3d/report.hpp"

using namespace systolic3d;

namespace {

SimReport sample(Variant v) {
  const auto stack = v == Variant::WSMono3D ? testsupport::mono3d_stack() : testsupport::planar_stack();
  return Evaluator(testsupport::corpus("resnet32"), testsupport::shipped_tech(), stack, v).evaluate(700e6);
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::size_t fields(const std::string& line) { return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1; }

}  // namespace

TEST_CASE("json report round-trips exactly") {
  for (auto v : {Variant::WS2D, Variant::WSMono3D}) {
    auto r = sample(v);
    r.budget_c = 75;
    r.feasible = false;
    const auto text = report_to_json(r);
    const auto back = report_from_json(text, "mem");
    CHECK(report_to_json(back) == text);
    CHECK(back.edp_js == r.edp_js);
    CHECK(back.latency_s == r.latency_s);
    CHECK(back.max_temp_per_tier == r.max_temp_per_tier);
    CHECK(back.blocks.size() == r.blocks.size());
    CHECK(back.layers.size() == r.layers.size());
    REQUIRE(back.budget_c);
    CHECK(*back.budget_c == 75);
    CHECK_FALSE(back.feasible);
  }
}

TEST_CASE("malformed reports are rejected") {
  CHECK_THROWS_AS(report_from_json("{", "x"), ParseError);
  CHECK_THROWS_AS(report_from_json(R"({"schema":"other/1"})", "x"), ParseError);
  CHECK_THROWS_AS(report_from_json(R"({"schema":"systolic3d.report/1","network":"n"})", "x"), ParseError);
  auto text = report_to_json(sample(Variant::WS2D));
  const auto pos = text.find("\"pe_array\"");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 10, "\"toaster\"");
  CHECK_THROWS_AS(report_from_json(text, "x"), Error);
  CHECK_THROWS_AS(load_report("/nonexistent/report.json"), ParseError);
}

TEST_CASE("sweep and comparison csv shape") {
  const auto a = sample(Variant::WS2D);
  const auto b = sample(Variant::WSMono3D);
  std::stringstream sweep;
  write_sweep_csv(sweep, {a, b});
  const auto sl = lines(sweep.str());
  REQUIRE(sl.size() == 3);
  CHECK(sl[0].rfind("network,variant,frequency_mhz,", 0) == 0);
  for (const auto& l : sl) CHECK(fields(l) == fields(sl[0]));

  std::stringstream cmp;
  const auto c = compare(a, b);
  write_comparison_csv(cmp, {c});
  const auto cl = lines(cmp.str());
  CHECK(cl.size() == 1 + c.metrics.size());
  for (const auto& l : cl) CHECK(fields(l) == 10);

  std::stringstream table;
  write_comparison_table(table, c);
  CHECK(lines(table.str()).size() == 2 + c.metrics.size());
}

TEST_CASE("trace csv has one row per fold") {
  const auto net = testsupport::corpus("mobilenet_v1");
  const ArrayConfig array{32, 32, Variant::WSMono3D, 1e9};
  std::vector<LayerCycleReport> reports;
  std::size_t folds = 0;
  for (const auto& l : net.layers) {
    reports.push_back(layer_cycles(l, array));
    folds += reports.back().folds.size();
  }
  std::stringstream ss;
  write_trace_csv(ss, net, reports);
  const auto tl = lines(ss.str());
  CHECK(tl.size() == folds + 1);
  CHECK(fields(tl[0]) == 19);
  CHECK(fields(tl.back()) == 19);
}

TEST_CASE("double formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1e9) == "1000000000");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
