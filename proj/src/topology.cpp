#include "systolic3d/topology.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "systolic3d/errors.hpp"

namespace systolic3d {

namespace {

std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::string normalize_key(std::string_view raw) {
  std::string key;
  for (char ch : trim(raw)) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      key.push_back(static_cast<char>(std::tolower(c)));
    } else if (!key.empty() && key.back() != '_') {
      key.push_back('_');
    }
  }
  while (!key.empty() && key.back() == '_') key.pop_back();
  return key;
}

enum class Column {
  Name, Kind, IfmapH, IfmapW, FilterH, FilterW, Channels, NumFilters,
  Stride, StrideH, StrideW, ElementBytes
};

std::optional<Column> column_for(const std::string& key) {
  static const std::map<std::string, Column> aliases = {
      {"name", Column::Name},          {"layer_name", Column::Name},
      {"layer", Column::Name},         {"kind", Column::Kind},
      {"type", Column::Kind},          {"ifmap_h", Column::IfmapH},
      {"ifmap_height", Column::IfmapH}, {"ifmap_w", Column::IfmapW},
      {"ifmap_width", Column::IfmapW}, {"filter_h", Column::FilterH},
      {"filter_height", Column::FilterH}, {"filter_w", Column::FilterW},
      {"filter_width", Column::FilterW}, {"channels", Column::Channels},
      {"channels_in", Column::Channels}, {"num_filters", Column::NumFilters},
      {"num_filter", Column::NumFilters}, {"stride", Column::Stride},
      {"strides", Column::Stride},     {"stride_h", Column::StrideH},
      {"stride_w", Column::StrideW},   {"element_bytes", Column::ElementBytes},
  };
  auto it = aliases.find(key);
  if (it == aliases.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  // SCALE-Sim tables end every row with a trailing comma.
  while (!cells.empty() && cells.back().empty()) cells.pop_back();
  return cells;
}

std::optional<LayerKind> parse_kind(const std::string& raw) {
  std::string k = normalize_key(raw);
  if (k == "conv" || k == "convolution") return LayerKind::Conv;
  if (k == "dwconv" || k == "depthwise" || k == "depthwiseconv" ||
      k == "depthwise_conv" || k == "dw")
    return LayerKind::DepthwiseConv;
  if (k == "fc" || k == "linear" || k == "dense") return LayerKind::FC;
  return std::nullopt;
}

[[noreturn]] void row_error(std::size_t row, const std::string& what) {
  throw ParseError("topology row " + std::to_string(row) + ": " + what);
}

std::uint32_t parse_count(const std::string& cell, std::size_t row,
                          const char* field) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    row_error(row, std::string("field '") + field + "' is not an integer: '" +
                       cell + "'");
  }
  if (value < 0 || value > static_cast<std::int64_t>(UINT32_MAX)) {
    throw ValidationError("topology row " + std::to_string(row) + ": field '" +
                          field + "' out of range");
  }
  return static_cast<std::uint32_t>(value);
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv: return "conv";
    case LayerKind::DepthwiseConv: return "dwconv";
    case LayerKind::FC: return "fc";
  }
  return "conv";
}

std::uint64_t LayerSpec::ifmap_bytes() const {
  return std::uint64_t{ifmap_h} * ifmap_w * channels_in * element_bytes;
}

std::uint64_t LayerSpec::ofmap_bytes() const {
  return std::uint64_t{ofmap_h()} * ofmap_w() * ofmap_channels() * element_bytes;
}

std::uint64_t LayerSpec::weight_bytes() const {
  std::uint64_t per_filter = std::uint64_t{filter_h} * filter_w * element_bytes;
  if (kind == LayerKind::DepthwiseConv) return per_filter * channels_in;
  return per_filter * channels_in * num_filters;
}

void validate(const LayerSpec& layer) {
  auto fail = [&](const char* field, const std::string& why) {
    throw ValidationError("layer '" + layer.name + "': field '" + field +
                          "' " + why);
  };
  const std::pair<const char*, std::uint32_t> positive[] = {
      {"ifmap_h", layer.ifmap_h},         {"ifmap_w", layer.ifmap_w},
      {"filter_h", layer.filter_h},       {"filter_w", layer.filter_w},
      {"channels", layer.channels_in},    {"num_filters", layer.num_filters},
      {"stride_h", layer.stride_h},       {"stride_w", layer.stride_w},
      {"element_bytes", layer.element_bytes},
  };
  for (auto [field, value] : positive) {
    if (value < 1) fail(field, "must be >= 1");
  }
  if (layer.filter_h > layer.ifmap_h) fail("filter_h", "exceeds ifmap_h");
  if (layer.filter_w > layer.ifmap_w) fail("filter_w", "exceeds ifmap_w");
  if (layer.kind == LayerKind::FC) {
    if (layer.ifmap_h != 1 || layer.ifmap_w != 1)
      fail("ifmap_h", "must be 1 for FC layers");
    if (layer.filter_h != 1 || layer.filter_w != 1)
      fail("filter_h", "must be 1 for FC layers");
  }
  if (layer.kind == LayerKind::DepthwiseConv &&
      layer.num_filters != layer.channels_in) {
    fail("num_filters", "must equal channels for depthwise layers");
  }
}

NetworkSpec parse_topology(std::string_view text, std::string name) {
  NetworkSpec net;
  net.name = std::move(name);

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::optional<Column>> columns;
  bool have_header = false;
  std::size_t row_index = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto cells = split_row(line);
    if (!have_header) {
      for (const auto& cell : cells) columns.push_back(column_for(normalize_key(cell)));
      auto has = [&](Column c) {
        return std::find(columns.begin(), columns.end(), c) != columns.end();
      };
      const Column required[] = {Column::Name,    Column::IfmapH,  Column::IfmapW,
                                 Column::FilterH, Column::FilterW, Column::Channels,
                                 Column::NumFilters};
      for (Column c : required) {
        if (!has(c)) throw ParseError("topology header missing a required column");
      }
      if (!has(Column::Stride) && !(has(Column::StrideH) && has(Column::StrideW)))
        throw ParseError("topology header missing a stride column");
      have_header = true;
      continue;
    }

    if (cells.size() != columns.size()) {
      row_error(row_index, "expected " + std::to_string(columns.size()) +
                               " fields, found " + std::to_string(cells.size()));
    }
    LayerSpec layer;
    std::optional<LayerKind> kind;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!columns[i]) continue;
      const auto& cell = cells[i];
      switch (*columns[i]) {
        case Column::Name: layer.name = cell; break;
        case Column::Kind:
          kind = parse_kind(cell);
          if (!kind) row_error(row_index, "unknown layer kind '" + cell + "'");
          break;
        case Column::IfmapH: layer.ifmap_h = parse_count(cell, row_index, "ifmap_h"); break;
        case Column::IfmapW: layer.ifmap_w = parse_count(cell, row_index, "ifmap_w"); break;
        case Column::FilterH: layer.filter_h = parse_count(cell, row_index, "filter_h"); break;
        case Column::FilterW: layer.filter_w = parse_count(cell, row_index, "filter_w"); break;
        case Column::Channels: layer.channels_in = parse_count(cell, row_index, "channels"); break;
        case Column::NumFilters:
          layer.num_filters = parse_count(cell, row_index, "num_filters");
          break;
        case Column::Stride:
          layer.stride_h = layer.stride_w = parse_count(cell, row_index, "stride");
          break;
        case Column::StrideH: layer.stride_h = parse_count(cell, row_index, "stride_h"); break;
        case Column::StrideW: layer.stride_w = parse_count(cell, row_index, "stride_w"); break;
        case Column::ElementBytes:
          layer.element_bytes = parse_count(cell, row_index, "element_bytes");
          break;
      }
    }
    if (layer.name.empty()) row_error(row_index, "empty layer name");
    if (kind) {
      layer.kind = *kind;
    } else {
      bool one_by_one = layer.ifmap_h == 1 && layer.ifmap_w == 1 &&
                        layer.filter_h == 1 && layer.filter_w == 1;
      layer.kind = one_by_one ? LayerKind::FC : LayerKind::Conv;
    }
    validate(layer);
    net.layers.push_back(std::move(layer));
    ++row_index;
  }
  if (!have_header) throw ParseError("topology has no header row");
  if (net.layers.empty()) throw ValidationError("topology '" + net.name + "' has no layers");
  return net;
}

NetworkSpec parse_topology_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open topology file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_topology(buf.str(), path.stem().string());
}

std::vector<GemmDims> derive_gemm(const LayerSpec& layer) {
  const std::uint64_t T = std::uint64_t{layer.ofmap_h()} * layer.ofmap_w();
  const std::uint64_t window = std::uint64_t{layer.filter_h} * layer.filter_w;
  switch (layer.kind) {
    case LayerKind::Conv:
      return {GemmDims{window * layer.channels_in, layer.num_filters, T}};
    case LayerKind::FC:
      return {GemmDims{layer.channels_in, layer.num_filters, 1}};
    case LayerKind::DepthwiseConv:
      return std::vector<GemmDims>(layer.channels_in, GemmDims{window, 1, T});
  }
  return {};
}

}  // namespace systolic3d
