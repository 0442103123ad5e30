#include "systolic3d/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "systolic3d/errors.hpp"
#include "systolic3d/kernels.hpp"

namespace systolic3d {

namespace {

constexpr double kMm = 1e-3;

std::array<std::ptrdiff_t, 6> neighbour_offsets(const ThermalSystem& s) {
  const auto nx = static_cast<std::ptrdiff_t>(s.nx);
  const auto pl = static_cast<std::ptrdiff_t>(s.plane());
  return {-1, 1, -nx, nx, -pl, pl};
}

}  // namespace

std::optional<std::size_t> ThermalSystem::device_layer(std::uint32_t tier) const {
  for (std::size_t l = 0; l < layers.size(); ++l)
    if (layers[l].role == LayerRole::Device && layers[l].tier == tier) return l;
  return std::nullopt;
}

std::optional<std::size_t> ThermalSystem::beol_layer(std::uint32_t tier) const {
  for (std::size_t l = 0; l < layers.size(); ++l)
    if (layers[l].role == LayerRole::Beol && layers[l].tier == tier) return l;
  return std::nullopt;
}

std::uint32_t ThermalSystem::tier_count() const {
  std::uint32_t n = 0;
  for (const auto& l : layers)
    if (l.tier) n = std::max(n, *l.tier + 1);
  return n;
}

std::vector<double> ThermalSystem::coverage(const Rect& r) const {
  std::vector<double> w(plane(), 0.0);
  const double cell_area = dx_mm * dy_mm;
  for (std::uint32_t iy = 0; iy < ny; ++iy) {
    for (std::uint32_t ix = 0; ix < nx; ++ix) {
      Rect cell{ix * dx_mm, iy * dy_mm, dx_mm, dy_mm};
      w[static_cast<std::size_t>(iy) * nx + ix] = cell.overlap_mm2(r) / cell_area;
    }
  }
  return w;
}

double ThermalSystem::entry(std::size_t i, std::size_t j) const {
  if (i == j) return diag[i];
  const auto off = neighbour_offsets(*this);
  for (std::size_t k = 0; k < 6; ++k)
    if (static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(i) == off[k]) return -coupling[k][i];
  return 0.0;
}

ThermalSystem build_grid(const ChipStack& stack, GridResolution res) {
  if (res.nx < 1 || res.ny < 1) throw ValidationError("thermal grid needs at least 1x1 cells");
  validate(stack);

  ThermalSystem s;
  s.nx = res.nx;
  s.ny = res.ny;
  s.dx_mm = stack.footprint_w_mm / res.nx;
  s.dy_mm = stack.footprint_h_mm / res.ny;
  s.ambient_c = stack.ambient_c;
  s.blocks = stack.blocks;

  s.layers.push_back({"spreader", LayerRole::Spreader, std::nullopt, stack.spreader_thickness_m,
                      stack.conductivity(stack.spreader_material)});
  for (std::uint32_t t = 0; t < stack.tiers.size(); ++t) {
    const Tier& tier = stack.tiers[t];
    if (t > 0)
      s.layers.push_back({"ild" + std::to_string(t), LayerRole::Ild, std::nullopt, stack.ild_thickness_m,
                          stack.conductivity(stack.ild_material)});
    s.layers.push_back({tier.name, LayerRole::Device, t, tier.thickness_m, stack.conductivity(tier.material)});
    if (tier.beol_thickness_m > 0)
      s.layers.push_back({tier.name + "_beol", LayerRole::Beol, t, tier.beol_thickness_m,
                          stack.conductivity(tier.beol_material)});
  }

  const std::size_t n = s.size();
  const std::size_t plane = s.plane();
  s.diag.assign(n, 0.0);
  for (auto& c : s.coupling) c.assign(n, 0.0);
  s.ambient.assign(n, 0.0);

  const double dx = s.dx_mm * kMm;
  const double dy = s.dy_mm * kMm;
  const double area = dx * dy;
  const double total_area = stack.footprint_mm2() * kMm * kMm;

  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    const auto& L = s.layers[l];
    const double gx = L.conductivity * L.thickness_m * dy / dx;
    const double gy = L.conductivity * L.thickness_m * dx / dy;
    double gz = 0.0;
    if (l + 1 < s.layers.size()) {
      const auto& U = s.layers[l + 1];
      gz = 1.0 / (L.thickness_m / (2 * L.conductivity * area) + U.thickness_m / (2 * U.conductivity * area));
    }
    double g_amb = 0.0;
    if (l == 0) {
      const double r = L.thickness_m / (2 * L.conductivity * area) +
                       stack.sink_thickness_m / (stack.conductivity(stack.sink_material) * area) +
                       stack.convection_c_per_w * total_area / area;
      g_amb = 1.0 / r;
    }
    for (std::uint32_t iy = 0; iy < s.ny; ++iy) {
      for (std::uint32_t ix = 0; ix < s.nx; ++ix) {
        const std::size_t i = s.index(ix, iy, l);
        if (ix > 0) s.coupling[0][i] = gx;
        if (ix + 1 < s.nx) s.coupling[1][i] = gx;
        if (iy > 0) s.coupling[2][i] = gy;
        if (iy + 1 < s.ny) s.coupling[3][i] = gy;
        if (l + 1 < s.layers.size()) {
          s.coupling[5][i] = gz;
          s.coupling[4][i + plane] = gz;
        }
        s.ambient[i] = g_amb;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double d = s.ambient[i];
    for (const auto& c : s.coupling) d += c[i];
    s.diag[i] = d;
  }

  // Thomas factors of every vertical column.
  s.line_lower.assign(n, 0.0);
  s.line_inv.assign(n, 0.0);
  s.line_upper.assign(n, 0.0);
  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    for (std::size_t j = 0; j < plane; ++j) {
      const std::size_t i = l * plane + j;
      const double a = -s.coupling[4][i];
      const double c = -s.coupling[5][i];
      const double prev_upper = l == 0 ? 0.0 : s.line_upper[i - plane];
      const double inv = 1.0 / (s.diag[i] - a * prev_upper);
      s.line_lower[i] = a;
      s.line_inv[i] = inv;
      s.line_upper[i] = c * inv;
    }
  }
  return s;
}

namespace {

std::vector<double> source_weights(const ThermalSystem& sys, const BlockPower& b) {
  std::vector<double> w(sys.size(), 0.0);
  const std::size_t plane = sys.plane();
  if (b.block.kind == BlockKind::Beol) {
    auto layer = sys.beol_layer(b.block.index);
    if (!layer) layer = sys.device_layer(b.block.index);
    if (!layer) throw FloorplanError("no tier " + std::to_string(b.block.index) + " for " + block_name(b.block));
    std::fill(w.begin() + static_cast<std::ptrdiff_t>(*layer * plane),
              w.begin() + static_cast<std::ptrdiff_t>((*layer + 1) * plane), 1.0 / static_cast<double>(plane));
    return w;
  }
  const std::string source = block_name(b.block);
  double total_area = 0.0;
  for (const auto& sb : sys.blocks)
    if (sb.source == source) total_area += sb.rect.area_mm2();
  if (!(total_area > 0)) throw FloorplanError("stack has no block for power source '" + source + "'");
  const double cell_area = sys.dx_mm * sys.dy_mm;
  for (const auto& sb : sys.blocks) {
    if (sb.source != source) continue;
    const auto layer = sys.device_layer(sb.tier);
    const auto cover = sys.coverage(sb.rect);
    for (std::size_t j = 0; j < plane; ++j) w[*layer * plane + j] += cover[j] * cell_area / total_area;
  }
  return w;
}

}  // namespace

std::vector<double> power_vector(const ThermalSystem& sys, const std::vector<BlockPower>& blocks) {
  std::vector<double> p(sys.size(), 0.0);
  for (const auto& b : blocks) {
    if (!b.on_chip()) continue;
    const double watts = b.total_w();
    if (watts < 0 || !std::isfinite(watts))
      throw ValidationError("block '" + block_name(b.block) + "' has invalid power");
    if (watts == 0) continue;
    const auto w = source_weights(sys, b);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += watts * w[i];
  }
  return p;
}

namespace {

void finish_field(const ThermalSystem& sys, TemperatureField& f) {
  f.nx = sys.nx;
  f.ny = sys.ny;
  f.max_per_tier.assign(sys.tier_count(), -std::numeric_limits<double>::infinity());
  f.max_overall = -std::numeric_limits<double>::infinity();
  const std::size_t plane = sys.plane();
  for (std::size_t l = 0; l < sys.layers.size(); ++l) {
    const auto begin = f.cells.begin() + static_cast<std::ptrdiff_t>(l * plane);
    const double m = *std::max_element(begin, begin + static_cast<std::ptrdiff_t>(plane));
    f.max_overall = std::max(f.max_overall, m);
    if (sys.layers[l].tier) f.max_per_tier[*sys.layers[l].tier] = std::max(f.max_per_tier[*sys.layers[l].tier], m);
  }
}

}  // namespace

TemperatureField solve_steady(const ThermalSystem& sys, const std::vector<double>& power, const SolveOptions& opts) {
  const std::size_t n = sys.size();
  if (power.size() != n) throw ValidationError("power vector does not match the thermal grid");
  const auto& k = kernels::active();
  const std::size_t plane = sys.plane();
  const std::size_t layers = sys.layers.size();

  TemperatureField field;
  std::vector<double> x(n, 0.0);
  const double bnorm = std::sqrt(k.dot(power.data(), power.data(), n));

  if (bnorm > 0) {
    kernels::Stencil st;
    st.diag = sys.diag.data();
    st.offset = neighbour_offsets(sys);
    for (std::size_t j = 0; j < 6; ++j) st.coeff[j] = sys.coupling[j].data();
    st.n = n;

    std::vector<double> r(power);
    std::vector<double> z(n);
    std::vector<double> ap(n);
    std::vector<double> p_store(n + 2 * plane, 0.0);
    double* p = p_store.data() + plane;

    auto precondition = [&]() {
      for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t o = l * plane;
        const double* prev = l == 0 ? r.data() : z.data() + o - plane;
        k.line_forward(r.data() + o, sys.line_lower.data() + o, prev, sys.line_inv.data() + o, z.data() + o, plane);
      }
      for (std::size_t l = layers - 1; l-- > 0;) {
        const std::size_t o = l * plane;
        k.line_backward(sys.line_upper.data() + o, z.data() + o + plane, z.data() + o, plane);
      }
    };

    precondition();
    std::copy(z.begin(), z.end(), p);
    double rz = k.dot(r.data(), z.data(), n);
    double rel = 1.0;
    std::uint32_t it = 0;
    while (true) {
      if (it >= opts.max_iterations)
        throw SolverError("thermal solve did not converge in " + std::to_string(opts.max_iterations) +
                              " iterations",
                          rel);
      ++it;
      k.stencil_apply(st, p, ap.data());
      const double alpha = rz / k.dot(p, ap.data(), n);
      k.axpy(alpha, p, x.data(), n);
      k.axpy(-alpha, ap.data(), r.data(), n);
      rel = std::sqrt(k.dot(r.data(), r.data(), n)) / bnorm;
      if (!std::isfinite(rel)) throw SolverError("thermal solve produced a non-finite residual", rel);
      if (rel <= opts.relative_tolerance) break;
      precondition();
      const double rz_next = k.dot(r.data(), z.data(), n);
      k.xpay(z.data(), rz_next / rz, p, n);
      rz = rz_next;
    }
    field.iterations = it;
    field.relative_residual = rel;
  }

  field.cells.resize(n);
  for (std::size_t i = 0; i < n; ++i) field.cells[i] = sys.ambient_c + x[i];
  finish_field(sys, field);
  return field;
}

double heat_to_ambient(const ThermalSystem& sys, const TemperatureField& field) {
  double q = 0.0;
  for (std::size_t i = 0; i < sys.plane(); ++i) q += sys.ambient[i] * (field.cells[i] - sys.ambient_c);
  return q;
}

std::vector<double> block_temperatures(const ThermalSystem& sys, const TemperatureField& field,
                                       const std::vector<BlockPower>& blocks, BlockTemperature mode) {
  std::vector<double> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) {
    if (!b.on_chip()) {
      out.push_back(sys.ambient_c);
      continue;
    }
    const auto w = source_weights(sys, b);
    double sum = 0.0;
    double weight = 0.0;
    double hottest = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] <= 0) continue;
      sum += w[i] * field.cells[i];
      weight += w[i];
      hottest = std::max(hottest, field.cells[i]);
    }
    out.push_back(mode == BlockTemperature::Max ? hottest : sum / weight);
  }
  return out;
}

FixedPointResult fixed_point(const ThermalSystem& sys, std::vector<BlockPower> blocks,
                             const std::vector<LeakageModel>& models, const FixedPointOptions& opts) {
  if (!(opts.tolerance_c > 0)) throw ValidationError("fixed-point tolerance must be positive");
  if (models.size() != blocks.size()) throw ValidationError("fixed point needs one leakage model per block");

  std::vector<double> history;
  std::vector<double> temps(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) temps[i] = models[i].reference_c;

  for (std::uint32_t it = 1; it <= opts.max_iterations; ++it) {
    const auto leak = leakage_power(models, temps);
    for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i].leakage_w = leak[i];
    auto field = solve_steady(sys, power_vector(sys, blocks), opts.solve);
    history.push_back(field.max_overall);
    auto next = block_temperatures(sys, field, blocks, opts.coupling);
    double delta = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) delta = std::max(delta, std::abs(next[i] - temps[i]));
    if (it > 1 && delta < opts.tolerance_c) {
      const auto settled = leakage_power(models, next);
      for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i].leakage_w = settled[i];
      return FixedPointResult{std::move(field), std::move(blocks), std::move(next), it, std::move(history)};
    }
    temps = std::move(next);
  }
  throw DivergenceError("leakage/temperature iteration did not settle within " +
                        std::to_string(opts.max_iterations) + " iterations");
}

void write_temperature_csv(std::ostream& os, const ThermalSystem& sys, const TemperatureField& field) {
  os << "layer,name,tier,ix,iy,x_mm,y_mm,temp_c\n";
  char buf[96];
  for (std::size_t l = 0; l < sys.layers.size(); ++l) {
    const auto& L = sys.layers[l];
    for (std::uint32_t iy = 0; iy < sys.ny; ++iy) {
      for (std::uint32_t ix = 0; ix < sys.nx; ++ix) {
        os << l << ',' << L.name << ',';
        if (L.tier) os << *L.tier;
        std::snprintf(buf, sizeof buf, ",%u,%u,%.6f,%.6f,%.6f\n", ix, iy, (ix + 0.5) * sys.dx_mm,
                      (iy + 0.5) * sys.dy_mm, field.cells[sys.index(ix, iy, l)]);
        os << buf;
      }
    }
  }
}

}  // namespace systolic3d
