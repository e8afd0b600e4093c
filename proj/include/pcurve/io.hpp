#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcurve/dynamics.hpp"
#include "pcurve/trace.hpp"
#include "pcurve/validate.hpp"

namespace pcurve {

inline constexpr int kFormatVersion = 1;

// "# format_version=1", then s,x1..xd,zeta1..zeta{d-1},kappa1..kappa{d-1};
// 17 significant digits so that reading back is exact.
void write_trace_csv(std::ostream& out, const CurveTrace& trace);
CurveTrace read_trace_csv(std::istream& in);

void save_trace_csv(const std::filesystem::path& path, const CurveTrace& trace);
CurveTrace load_trace_csv(const std::filesystem::path& path);

// Solver config, restarts, stop reason and counters.
nlohmann::json trace_sidecar(const CurveTrace& trace, const SolverConfig& cfg);

nlohmann::json report_to_json(const ValidationReport& report);

struct HelixRow {
  double a = 0.0;
  double b = 0.0;
  double residual = 0.0;
  bool admissible = false;
};

void write_helix_csv(std::ostream& out, const std::vector<HelixRow>& rows);
std::vector<HelixRow> read_helix_csv(std::istream& in);

// Plain polyline: "# format_version=1", header t,x1..xd.
void write_polyline_csv(std::ostream& out, const std::vector<Vector>& points);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

// Comma-separated doubles, e.g. "1,0.5".
Vector parse_vector(const std::string& text);

}  // namespace pcurve
