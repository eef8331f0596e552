#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "jetflow/analysis.hpp"
#include "jetflow/dynamics.hpp"
#include "jetflow/jetspace.hpp"
#include "jetflow/periods.hpp"
#include "jetflow/polyvec.hpp"

namespace jetflow::io {

using json = nlohmann::json;

// JSON layouts list one row per component j, entries i = 0..k, matching the
// PolyVec coefficient convention.

json to_json(const PolyVec& F);
PolyVec polyvec_from_json(const json& j);

json to_json(const JetPoint& q);
JetPoint jetpoint_from_json(const json& j);
json to_json(const JetPointU& q);
JetPointU jetpointu_from_json(const json& j);

json to_json(const HillInterval& I);
json to_json(const PeriodData& pd);
json to_json(const GramMatrix& g);  // row-major matrix plus "lambda_min"
json to_json(const GeodesicClass& c);

/// Archival certificate record: all certificate fields plus the input pair.
json certificate_json(const Certificate& cert, const PolyVec& F, const HillInterval& I);

/// Header t,x,p_x,theta_0_1,...,theta_k_n (i-major, then j); one row per
/// accepted step, full round-trip precision.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
json trajectory_json(const Trajectory& traj);

struct TrajectoryTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
/// Parses the CSV layout above. Throws std::runtime_error on malformed input.
TrajectoryTable read_trajectory_csv(std::istream& is);

/// Static SVG polyline of one 2-D projection, with axes and labels.
void write_svg_polyline(std::ostream& os, const std::vector<double>& xs,
                        const std::vector<double>& ys, const std::string& x_label,
                        const std::string& y_label);

/// Write-then-rename so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace jetflow::io
