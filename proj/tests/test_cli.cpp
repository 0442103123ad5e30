#include <doctest.h>

#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = 0;
  std::string output;
};

Run run(const std::string& args, const fs::path& scratch) {
  const auto log = scratch / "cli.log";
  const std::string cmd = std::string(SYSTOLIC3D_CLI) + " " + args + " > " + log.string() + " 2>&1";
  Run r;
  r.status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("systolic3d_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string configs() {
  using testsupport::source_path;
  return " --tech " + source_path("configs/tech_22nm.ini") + " --stack-mono3d " +
         source_path("configs/stack_mono3d.ini") + " --stack-2d " + source_path("configs/stack_2d.ini");
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("simulate writes one report per point and identical bytes on rerun") {
  const auto dir = scratch_dir("sim");
  const auto topo = testsupport::source_path("configs/topologies/resnet18.csv");
  const std::string common = "simulate --topology " + topo + configs() + " --budget 75 --trace --jobs 3 --out ";
  auto a = run(common + (dir / "a").string(), dir);
  REQUIRE_MESSAGE(a.status == 0, a.output);
  auto b = run(common + (dir / "b").string(), dir);
  REQUIRE_MESSAGE(b.status == 0, b.output);

  const auto sweep = slurp(dir / "a" / "sweep.csv");
  CHECK(count_lines(sweep) == 1 + 2 * 3);
  CHECK(count_lines(slurp(dir / "a" / "budget_sweep.csv")) == 1 + 2);
  for (const char* v : {"ws2d", "ws-mono3d"}) {
    for (const char* point : {"1000MHz", "700MHz", "500MHz", "budget75C"}) {
      const std::string stem = std::string("resnet18_") + v + "_" + point;
      CAPTURE(stem);
      CHECK(fs::exists(dir / "a" / (stem + ".json")));
      CHECK(fs::exists(dir / "a" / (stem + "_power.csv")));
      CHECK(fs::exists(dir / "a" / (stem + "_temperature.csv")));
    }
    CHECK(fs::exists(dir / "a" / (std::string("resnet18_") + v + "_trace.csv")));
  }
  CHECK(fs::exists(dir / "a" / "run_metadata.json"));
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    if (e.path().filename() == "run_metadata.json") continue;
    CAPTURE(e.path().filename().string());
    CHECK(slurp(e.path()) == slurp(dir / "b" / e.path().filename()));
  }

  SUBCASE("compare two reports") {
    const auto out = dir / "cmp.csv";
    const auto c = run("compare " + (dir / "a" / "resnet18_ws2d_1000MHz.json").string() + " " +
                           (dir / "a" / "resnet18_ws-mono3d_1000MHz.json").string() + " --out " + out.string(),
                       dir);
    CHECK(c.status == 0);
    CHECK(c.output.find("latency_s") != std::string::npos);
    CHECK(count_lines(slurp(out)) == 10);
  }
  SUBCASE("thermal from a power map") {
    const auto out = dir / "temps.csv";
    const auto t = run("thermal --stack " + testsupport::source_path("configs/stack_mono3d.ini") + " --power " +
                           (dir / "a" / "resnet18_ws-mono3d_1000MHz_power.csv").string() + " --grid 16x16 --out " +
                           out.string(),
                       dir);
    CHECK_MESSAGE(t.status == 0, t.output);
    CHECK(t.output.find("max ") != std::string::npos);
    CHECK(count_lines(slurp(out)) == 1 + 16 * 16 * 18);
  }
  fs::remove_all(dir);
}

TEST_CASE("output directory comes from the environment when set") {
  const auto dir = scratch_dir("env");
  const auto topo = testsupport::source_path("configs/topologies/resnet32.csv");
  const auto r = run("simulate --topology " + topo + configs() + " --variant ws-mono3d --freq 500 --out " +
                         (dir / "ignored").string(),
                     dir);
  REQUIRE(r.status == 0);
  ::setenv("SYSTOLIC3D_OUT", (dir / "env").string().c_str(), 1);
  const auto e = run("simulate --topology " + topo + configs() + " --variant ws-mono3d --freq 500 --out " +
                         (dir / "ignored2").string(),
                     dir);
  ::unsetenv("SYSTOLIC3D_OUT");
  REQUIRE(e.status == 0);
  CHECK(fs::exists(dir / "env" / "resnet32_ws-mono3d_500MHz.json"));
  CHECK_FALSE(fs::exists(dir / "ignored2"));
  CHECK(count_lines(slurp(dir / "ignored" / "sweep.csv")) == 2);
  fs::remove_all(dir);
}

TEST_CASE("errors are reported with a nonzero status") {
  const auto dir = scratch_dir("err");
  const auto missing = run("simulate --topology /no/such/net.csv" + configs() + " --out " + dir.string(), dir);
  CHECK(missing.status != 0);
  CHECK(missing.output.find("/no/such/net.csv") != std::string::npos);
  const auto big = run("validate --rows 65", dir);
  CHECK(big.status != 0);
  CHECK(big.output.find("error") != std::string::npos);
  const auto none = run("", dir);
  CHECK(none.status != 0);
  fs::remove_all(dir);
}

TEST_CASE("validate prints a passing matrix") {
  const auto dir = scratch_dir("val");
  const auto v = run("validate --rows 3 --cols 3 --k 5 --m 5 --t 5", dir);
  CHECK_MESSAGE(v.status == 0, v.output);
  CHECK(v.output.find("all pass") != std::string::npos);
  fs::remove_all(dir);
}
