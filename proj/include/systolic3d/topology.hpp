#pragma once
// DNN layer tables and their reduction to GEMM dimensions.
//
// A topology table is comma-separated text with a header line. Recognised
// columns: name, kind, ifmap_h, ifmap_w, filter_h, filter_w, channels,
// num_filters, stride (stride_h/stride_w also accepted) and an optional
// element_bytes. The SCALE-Sim header spellings ("Layer name",
// "IFMAP Height", ...) are accepted as aliases. When there is no kind column
// a row whose ifmap and filter are both 1x1 is read as FC, anything else as
// Conv.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace systolic3d {

enum class LayerKind { Conv, DepthwiseConv, FC };

std::string_view to_string(LayerKind kind);

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  std::uint32_t ifmap_h = 1;
  std::uint32_t ifmap_w = 1;
  std::uint32_t filter_h = 1;
  std::uint32_t filter_w = 1;
  std::uint32_t channels_in = 1;
  std::uint32_t num_filters = 1;
  std::uint32_t stride_h = 1;
  std::uint32_t stride_w = 1;
  std::uint32_t element_bytes = 1;

  std::uint32_t ofmap_h() const { return (ifmap_h - filter_h) / stride_h + 1; }
  std::uint32_t ofmap_w() const { return (ifmap_w - filter_w) / stride_w + 1; }
  std::uint32_t ofmap_channels() const {
    return kind == LayerKind::DepthwiseConv ? channels_in : num_filters;
  }
  std::uint64_t ifmap_bytes() const;
  std::uint64_t ofmap_bytes() const;
  std::uint64_t weight_bytes() const;
};

// K rows of stationary weights, M columns (OFMAP channels), T streamed
// OFMAP pixels.
struct GemmDims {
  std::uint64_t K = 1;
  std::uint64_t M = 1;
  std::uint64_t T = 1;

  std::uint64_t macs() const { return K * M * T; }
  friend bool operator==(const GemmDims&, const GemmDims&) = default;
};

struct NetworkSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  std::uint32_t batch = 1;
};

// Throws ValidationError naming the offending field.
void validate(const LayerSpec& layer);

NetworkSpec parse_topology(std::string_view text, std::string name);
NetworkSpec parse_topology_file(const std::filesystem::path& path);

// Conv/FC give one GEMM; a depthwise layer gives channels_in independent
// M = 1 GEMMs.
std::vector<GemmDims> derive_gemm(const LayerSpec& layer);

}  // namespace systolic3d
