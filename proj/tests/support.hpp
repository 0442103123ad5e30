#pragma once
// Shared helpers for the test binaries.

#include <cstdint>
#include <random>
#include <string>

#include "systolic3d/memsys.hpp"
#include "systolic3d/stack.hpp"
#include "systolic3d/topology.hpp"

namespace testsupport {

inline std::string source_path(const std::string& rel) { return std::string(SYSTOLIC3D_SOURCE_DIR) + "/" + rel; }

inline systolic3d::TechConfig shipped_tech() { return systolic3d::load_tech_config(source_path("configs/tech_22nm.ini")); }
inline systolic3d::ChipStack mono3d_stack() { return systolic3d::load_stack(source_path("configs/stack_mono3d.ini")); }
inline systolic3d::ChipStack planar_stack() { return systolic3d::load_stack(source_path("configs/stack_2d.ini")); }
inline systolic3d::NetworkSpec corpus(const std::string& name) {
  return systolic3d::parse_topology_file(source_path("configs/topologies/" + name + ".csv"));
}

inline const char* const kCorpus[] = {"resnet18", "resnet32", "resnet50", "mobilenet_v1", "efficientnet_b0",
                                      "googlenet"};

// Uniform integer in [lo, hi].
inline std::uint64_t draw(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

inline double draw_real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace testsupport
