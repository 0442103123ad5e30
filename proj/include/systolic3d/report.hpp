#pragma once
// Report serialisation: one JSON document per run, flat CSV for sweeps and
// comparisons, and the per-fold trace.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "systolic3d/dataflow.hpp"
#include "systolic3d/metrics.hpp"
#include "systolic3d/topology.hpp"

namespace systolic3d {

inline constexpr std::string_view kReportSchema = "systolic3d.report/1";

std::string report_to_json(const SimReport& r);
// Throws ParseError when the document is not a report of this schema.
SimReport report_from_json(std::string_view text, const std::string& origin);
SimReport load_report(const std::string& path);

void write_sweep_csv(std::ostream& os, const std::vector<SimReport>& reports);
void write_comparison_csv(std::ostream& os, const std::vector<Comparison>& comparisons);
void write_comparison_table(std::ostream& os, const Comparison& c);
void write_trace_csv(std::ostream& os, const NetworkSpec& net, const std::vector<LayerCycleReport>& reports);

// %.17g, stable across runs.
std::string format_double(double v);

}  // namespace systolic3d
