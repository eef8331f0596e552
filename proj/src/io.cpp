#include "jetflow/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace jetflow::io {

namespace {

json matrix_rows_per_component(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    json row = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_component_rows(const json& rows, const char* what) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array() || rows[0].empty())
    throw std::runtime_error(std::string(what) + ": expected a non-empty array of rows");
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index width = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(width, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (static_cast<Eigen::Index>(rows[j].size()) != width)
      throw std::runtime_error(std::string(what) + ": ragged rows");
    for (Eigen::Index i = 0; i < width; ++i) m(i, j) = rows[j][static_cast<size_t>(i)].get<double>();
  }
  return m;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* kind_name(GeodesicKind k) {
  switch (k) {
    case GeodesicKind::Line: return "Line";
    case GeodesicKind::XPeriodic: return "XPeriodic";
    case GeodesicKind::Critical: return "Critical";
    case GeodesicKind::Equilibrium: return "Equilibrium";
  }
  return "?";
}

}  // namespace

json to_json(const PolyVec& F) {
  json rows = json::array();
  for (const auto& row : F.coeffs()) rows.push_back(row);
  return json{{"n", F.components()}, {"k", F.degree_bound()}, {"coeffs", std::move(rows)}};
}

PolyVec polyvec_from_json(const json& j) {
  const auto& rows = j.at("coeffs");
  if (!rows.is_array() || rows.empty())
    throw std::runtime_error("PolyVec: \"coeffs\" must be a non-empty array of rows");
  std::vector<std::vector<double>> coeffs;
  coeffs.reserve(rows.size());
  for (const auto& row : rows) coeffs.push_back(row.get<std::vector<double>>());
  PolyVec F(std::move(coeffs));
  if (j.contains("n") && j.at("n").get<int>() != F.components())
    throw std::runtime_error("PolyVec: \"n\" does not match the coefficient rows");
  if (j.contains("k") && j.at("k").get<int>() != F.degree_bound())
    throw std::runtime_error("PolyVec: \"k\" does not match the coefficient rows");
  return F;
}

json to_json(const JetPoint& q) {
  return json{{"x", q.x}, {"theta", matrix_rows_per_component(q.theta)}};
}

JetPoint jetpoint_from_json(const json& j) {
  JetPoint q;
  q.x = j.at("x").get<double>();
  q.theta = matrix_from_component_rows(j.at("theta"), "JetPoint");
  return q;
}

json to_json(const JetPointU& q) {
  return json{{"x", q.x}, {"u", matrix_rows_per_component(q.u)}};
}

JetPointU jetpointu_from_json(const json& j) {
  JetPointU q;
  q.x = j.at("x").get<double>();
  q.u = matrix_from_component_rows(j.at("u"), "JetPointU");
  return q;
}

json to_json(const HillInterval& I) {
  if (!I.is_bounded()) return json{{"kind", "unbounded"}};
  auto name = [](EndpointKind k) { return k == EndpointKind::Regular ? "regular" : "critical"; };
  return json{{"kind", "bounded"},
              {"x0", I.x0()},
              {"x1", I.x1()},
              {"end0", name(I.end0())},
              {"end1", name(I.end1())}};
}

json to_json(const PeriodData& pd) {
  return json{{"L", pd.L}, {"delta_theta", matrix_rows_per_component(pd.delta_theta)}};
}

json to_json(const GramMatrix& g) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < g.G.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index m = 0; m < g.G.cols(); ++m) row.push_back(g.G(i, m));
    rows.push_back(std::move(row));
  }
  return json{{"G", std::move(rows)}, {"lambda_min", g.lambda_min}};
}

json to_json(const GeodesicClass& c) {
  json out{{"class", kind_name(c.kind)}};
  if (c.kind == GeodesicKind::XPeriodic) out["L"] = c.L;
  if (c.kind == GeodesicKind::Critical || c.kind == GeodesicKind::Equilibrium) {
    out["end0_critical"] = c.end0_critical;
    out["end1_critical"] = c.end1_critical;
  }
  return out;
}

json certificate_json(const Certificate& cert, const PolyVec& F, const HillInterval& I) {
  return json{{"verdict", cert.verdict == Verdict::NotPeriodic ? "NotPeriodic"
                                                               : "NumericallyInconclusive"},
              {"gram_lambda_min", cert.gram_lambda_min},
              {"delta_inf_norm", cert.delta_inf_norm},
              {"reconstructed", to_json(cert.reconstructed)},
              {"reconstruction_error", cert.reconstruction_error},
              {"quadrature_N", cert.quadrature_nodes},
              {"F", to_json(F)},
              {"interval", to_json(I)}};
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const int k = traj.F.degree_bound();
  const int n = traj.F.components();
  os << "t,x,p_x";
  for (int i = 0; i <= k; ++i)
    for (int j = 1; j <= n; ++j) os << ",theta_" << i << "_" << j;
  os << "\n";
  for (const auto& s : traj.samples) {
    os << fmt17(s.t) << "," << fmt17(s.x) << "," << fmt17(s.p_x);
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j < n; ++j) os << "," << fmt17(s.theta(i, j));
    os << "\n";
  }
}

json trajectory_json(const Trajectory& traj) {
  json samples = json::array();
  for (const auto& s : traj.samples) {
    samples.push_back(json{{"t", s.t},
                           {"x", s.x},
                           {"p_x", s.p_x},
                           {"theta", matrix_rows_per_component(s.theta)}});
  }
  return json{{"F", to_json(traj.F)},
              {"interval", to_json(traj.interval)},
              {"theta_init", matrix_rows_per_component(traj.theta_init)},
              {"samples", std::move(samples)},
              {"diagnostics",
               json{{"max_energy_drift", traj.max_energy_drift},
                    {"max_arclength_defect", traj.max_arclength_defect}}}};
}

TrajectoryTable read_trajectory_csv(std::istream& is) {
  TrajectoryTable table;
  std::string line;
  if (!std::getline(is, line) || line.empty())
    throw std::runtime_error("trajectory csv: missing header");
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  if (table.columns.empty() || table.columns[0] != "t")
    throw std::runtime_error("trajectory csv: header must start with t");

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::vector<double> values;
    while (std::getline(row, cell, ',')) {
      size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw std::runtime_error("trajectory csv: non-numeric cell '" + cell + "'");
      }
      if (used != cell.size())
        throw std::runtime_error("trajectory csv: non-numeric cell '" + cell + "'");
      values.push_back(v);
    }
    if (values.size() != table.columns.size())
      throw std::runtime_error("trajectory csv: row width does not match the header");
    table.rows.push_back(std::move(values));
  }
  return table;
}

void write_svg_polyline(std::ostream& os, const std::vector<double>& xs,
                        const std::vector<double>& ys, const std::string& x_label,
                        const std::string& y_label) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("svg: need at least two points");
  const double width = 800, height = 600, margin = 70;
  double xmin = xs[0], xmax = xs[0], ymin = ys[0], ymax = ys[0];
  for (size_t i = 0; i < xs.size(); ++i) {
    xmin = std::min(xmin, xs[i]);
    xmax = std::max(xmax, xs[i]);
    ymin = std::min(ymin, ys[i]);
    ymax = std::max(ymax, ys[i]);
  }
  if (xmax - xmin < 1e-12) { xmin -= 1.0; xmax += 1.0; }
  if (ymax - ymin < 1e-12) { ymin -= 1.0; ymax += 1.0; }
  auto px = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
  auto py = [&](double y) { return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
     << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
     << height - margin << "\" stroke=\"black\"/>\n";
  char buf[64];
  for (int tick = 0; tick <= 4; ++tick) {
    const double xv = xmin + (xmax - xmin) * tick / 4.0;
    const double yv = ymin + (ymax - ymin) * tick / 4.0;
    std::snprintf(buf, sizeof buf, "%.4g", xv);
    os << "<line x1=\"" << px(xv) << "\" y1=\"" << height - margin << "\" x2=\"" << px(xv)
       << "\" y2=\"" << height - margin + 6 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(xv) << "\" y=\"" << height - margin + 22
       << "\" font-size=\"12\" text-anchor=\"middle\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.4g", yv);
    os << "<line x1=\"" << margin - 6 << "\" y1=\"" << py(yv) << "\" x2=\"" << margin << "\" y2=\""
       << py(yv) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << margin - 10 << "\" y=\"" << py(yv) + 4
       << "\" font-size=\"12\" text-anchor=\"end\">" << buf << "</text>\n";
  }
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - margin + 45
     << "\" font-size=\"14\" text-anchor=\"middle\">" << x_label << "</text>\n";
  os << "<text x=\"18\" y=\"" << height / 2
     << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << height / 2
     << ")\">" << y_label << "</text>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.2\" points=\"";
  for (size_t i = 0; i < xs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(xs[i]), py(ys[i]));
    os << buf;
  }
  os << "\"/>\n</svg>\n";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace jetflow::io
