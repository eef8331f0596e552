// jetflow: construct, integrate, classify and certify sub-Riemannian
// geodesics of the jet space J^k(R,R^n). JSON specs in; JSON/CSV/SVG out.

#include <atomic>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jetflow/analysis.hpp"
#include "jetflow/dynamics.hpp"
#include "jetflow/errors.hpp"
#include "jetflow/io.hpp"
#include "jetflow/periods.hpp"
#include "jetflow/polyvec.hpp"

namespace {

using jetflow::io::json;

constexpr const char* kVersion = "1.0.0";
constexpr int kSchemaVersion = 1;

struct CliError {
  std::string code;
  std::string message;
};

struct RunSpec {
  jetflow::PolyVec F;
  std::optional<int> interval_index;
  std::optional<std::pair<double, double>> interval;
  std::optional<double> x_init;
  int px_sign = 1;
  std::optional<double> duration;
  std::optional<double> periods;
  double tol = 1e-10;
  int quadrature_N = 64;
  std::uint64_t seed = 0;
};

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError{"io_error", "cannot open spec file: " + path};
  json j;
  in >> j;
  return j;
}

RunSpec parse_spec(const json& j) {
  RunSpec spec;
  if (!j.contains("F")) throw CliError{"invalid_spec", "spec needs an \"F\" polynomial vector"};
  try {
    spec.F = jetflow::io::polyvec_from_json(j.at("F"));
  } catch (const std::exception& e) {
    throw CliError{"invalid_spec", std::string("bad \"F\": ") + e.what()};
  }
  if (j.contains("interval_index")) spec.interval_index = j.at("interval_index").get<int>();
  if (j.contains("interval")) {
    const auto& arr = j.at("interval");
    if (!arr.is_array() || arr.size() != 2)
      throw CliError{"invalid_spec", "\"interval\" must be [x0, x1]"};
    spec.interval = {arr[0].get<double>(), arr[1].get<double>()};
  }
  if (j.contains("x_init")) spec.x_init = j.at("x_init").get<double>();
  if (j.contains("px_sign")) spec.px_sign = j.at("px_sign").get<int>();
  if (spec.px_sign != 1 && spec.px_sign != -1)
    throw CliError{"invalid_spec", "\"px_sign\" must be +1 or -1"};
  if (j.contains("duration")) spec.duration = j.at("duration").get<double>();
  if (j.contains("periods")) spec.periods = j.at("periods").get<double>();
  if (j.contains("tol")) spec.tol = j.at("tol").get<double>();
  if (!(spec.tol > 0.0)) throw CliError{"invalid_spec", "\"tol\" must be positive"};
  if (j.contains("quadrature_N")) spec.quadrature_N = j.at("quadrature_N").get<int>();
  if (spec.quadrature_N < 8) throw CliError{"invalid_spec", "\"quadrature_N\" must be >= 8"};
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

jetflow::HillInterval select_interval(const RunSpec& spec) {
  const auto intervals = jetflow::hill_intervals(spec.F);
  if (spec.interval) {
    const auto [a, b] = *spec.interval;
    for (const auto& I : intervals) {
      if (!I.is_bounded()) continue;
      const double tol = 1e-6 * std::max({1.0, std::abs(a), std::abs(b)});
      if (std::abs(I.x0() - a) <= tol && std::abs(I.x1() - b) <= tol) return I;
    }
    throw CliError{"interval_not_found", "no Hill interval matches the requested [x0, x1]"};
  }
  const int index = spec.interval_index.value_or(0);
  if (index < 0 || index >= static_cast<int>(intervals.size()))
    throw CliError{"interval_index_out_of_range",
                   "interval_index " + std::to_string(index) + " of " +
                       std::to_string(intervals.size()) + " intervals"};
  return intervals[static_cast<size_t>(index)];
}

double select_x_init(const RunSpec& spec, const jetflow::HillInterval& I) {
  const double x = spec.x_init.value_or(I.is_bounded() ? I.midpoint() : 0.0);
  if (!I.contains(x, 1e-12 * std::max(1.0, std::abs(x))))
    throw CliError{"x_init_outside_hill_interval",
                   "x_init does not lie in the selected Hill interval"};
  return x;
}

std::string timestamp_utc() {
  char buf[32];
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_geodesic(const RunSpec& spec, const std::string& out_path, const std::string& format,
                 std::optional<double> duration_flag, std::optional<double> periods_flag) {
  const auto I = select_interval(spec);
  const double x0 = select_x_init(spec, I);
  const auto cls = jetflow::classify_with_start(spec.F, I, x0, spec.quadrature_N);

  std::optional<double> duration = duration_flag ? duration_flag : spec.duration;
  std::optional<double> periods = periods_flag ? periods_flag : spec.periods;
  double T = 0.0;
  if (duration && periods) throw CliError{"invalid_spec", "give either duration or periods"};
  if (duration) {
    T = *duration;
  } else if (periods) {
    if (cls.kind != jetflow::GeodesicKind::XPeriodic)
      throw CliError{"periods_requires_x_periodic",
                     "a periods count needs an x-periodic pair; this one is not"};
    T = *periods * cls.L;
  } else {
    throw CliError{"invalid_spec", "spec needs \"duration\" or \"periods\""};
  }
  if (!(T > 0.0)) throw CliError{"invalid_spec", "the run length must be positive"};

  const double px0 = jetflow::initial_momentum(spec.F, x0, spec.px_sign);
  jetflow::IntegrateOptions opts;
  opts.tol = spec.tol;
  const auto reduced = jetflow::integrate_reduced(spec.F, x0, px0, T, opts);
  const jetflow::Trajectory traj = jetflow::lift(spec.F, reduced);

  std::string payload;
  if (format == "csv") {
    std::ostringstream os;
    jetflow::io::write_trajectory_csv(os, traj);
    payload = os.str();
  } else if (format == "json") {
    payload = jetflow::io::trajectory_json(traj).dump(2) + "\n";
  } else {
    throw CliError{"invalid_spec", "format must be csv or json"};
  }
  jetflow::io::write_file_atomic(out_path, payload);

  json diag{{"classification", jetflow::io::to_json(cls)},
            {"interval", jetflow::io::to_json(I)},
            {"x_init", x0},
            {"p_x_init", px0},
            {"duration", T},
            {"samples", traj.samples.size()},
            {"max_energy_drift", traj.max_energy_drift},
            {"max_arclength_defect", traj.max_arclength_defect},
            {"out", out_path},
            {"meta", json{{"generated_at", timestamp_utc()}}}};
  print_json(diag);
  return 0;
}

int cmd_periods(const RunSpec& spec) {
  const auto I = select_interval(spec);
  const auto pd = jetflow::delta_theta(spec.F, I, spec.quadrature_N);
  print_json(jetflow::io::to_json(pd));
  return 0;
}

int cmd_classify(const RunSpec& spec) {
  const auto I = select_interval(spec);
  const auto cls = spec.x_init
                       ? jetflow::classify_with_start(spec.F, I, *spec.x_init, spec.quadrature_N)
                       : jetflow::classify(spec.F, I, spec.quadrature_N);
  json out = jetflow::io::to_json(cls);
  out["interval"] = jetflow::io::to_json(I);
  print_json(out);
  return 0;
}

int cmd_certify(const RunSpec& spec) {
  const auto I = select_interval(spec);
  jetflow::CertifyOptions copts;
  copts.nodes = spec.quadrature_N;
  const auto cert = jetflow::certify_not_periodic(spec.F, I, copts);
  print_json(jetflow::io::certificate_json(cert, spec.F, I));
  return 0;
}

unsigned sweep_worker_count(size_t cases) {
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("JETFLOW_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) threads = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<size_t>(threads, std::max<size_t>(cases, 1)));
}

int cmd_sweep(long count, std::uint64_t seed, int kmax, int nmax, int nodes,
              const std::string& archive_path, const std::string& summary_path) {
  if (count < 1) throw CliError{"invalid_spec", "count must be >= 1"};
  std::mt19937_64 rng(seed);
  std::vector<jetflow::RandomPair> pairs;
  pairs.reserve(static_cast<size_t>(count));
  for (long i = 0; i < count; ++i) pairs.push_back(jetflow::sample_random_pair(rng, kmax, nmax));

  jetflow::CertifyOptions copts;
  copts.nodes = nodes;
  std::vector<json> records(static_cast<size_t>(count));
  std::atomic<size_t> cursor{0};
  auto work = [&]() {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= pairs.size()) return;
      json rec{{"case", i}};
      try {
        const auto cert = jetflow::certify_not_periodic(pairs[i].F, pairs[i].I, copts);
        rec.update(jetflow::io::certificate_json(cert, pairs[i].F, pairs[i].I));
      } catch (const jetflow::Error& e) {
        rec["verdict"] = "NumericallyInconclusive";
        rec["error"] = e.code();
      }
      records[i] = std::move(rec);
    }
  };
  std::vector<std::thread> workers;
  const unsigned nworkers = sweep_worker_count(pairs.size());
  for (unsigned w = 0; w + 1 < nworkers; ++w) workers.emplace_back(work);
  work();
  for (auto& w : workers) w.join();

  long inconclusive = 0;
  double min_max_delta = std::numeric_limits<double>::infinity();
  double max_rec_err = 0.0;
  double min_lambda = std::numeric_limits<double>::infinity();
  std::string archive;
  for (const auto& rec : records) {
    archive += rec.dump() + "\n";
    if (rec.at("verdict").get<std::string>() != "NotPeriodic") {
      ++inconclusive;
      continue;
    }
    min_max_delta = std::min(min_max_delta, rec.at("delta_inf_norm").get<double>());
    max_rec_err = std::max(max_rec_err, rec.at("reconstruction_error").get<double>());
    min_lambda = std::min(min_lambda, rec.at("gram_lambda_min").get<double>());
  }
  jetflow::io::write_file_atomic(archive_path, archive);

  json summary{{"count", count},
               {"seed", seed},
               {"kmax", kmax},
               {"nmax", nmax},
               {"quadrature_N", nodes},
               {"inconclusive", inconclusive},
               {"min_max_abs_delta_theta", min_max_delta},
               {"max_reconstruction_error", max_rec_err},
               {"min_gram_lambda_min", min_lambda},
               {"archive", archive_path}};
  if (!summary_path.empty())
    jetflow::io::write_file_atomic(summary_path, summary.dump(2) + "\n");
  print_json(summary);
  return 0;
}

int cmd_plot(const std::string& traj_path, const std::string& projection,
             const std::string& out_path) {
  std::ifstream in(traj_path);
  if (!in) throw CliError{"io_error", "cannot open trajectory file: " + traj_path};
  jetflow::io::TrajectoryTable table;
  try {
    table = jetflow::io::read_trajectory_csv(in);
  } catch (const std::exception& e) {
    throw CliError{"malformed_trajectory_file", e.what()};
  }
  if (table.rows.size() < 2)
    throw CliError{"empty_trajectory", "need at least two samples to draw a projection"};

  const auto comma = projection.find(',');
  if (comma == std::string::npos)
    throw CliError{"invalid_projection", "projection must be \"colA,colB\""};
  const std::string cx = projection.substr(0, comma);
  const std::string cy = projection.substr(comma + 1);
  auto col_index = [&](const std::string& name) -> size_t {
    for (size_t c = 0; c < table.columns.size(); ++c) {
      if (table.columns[c] == name) return c;
    }
    throw CliError{"invalid_projection", "no column named \"" + name + "\""};
  };
  const size_t ix = col_index(cx), iy = col_index(cy);
  std::vector<double> xs, ys;
  xs.reserve(table.rows.size());
  ys.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    xs.push_back(row[ix]);
    ys.push_back(row[iy]);
  }
  std::ostringstream os;
  jetflow::io::write_svg_polyline(os, xs, ys, cx, cy);
  jetflow::io::write_file_atomic(out_path, os.str());
  json out{{"out", out_path}, {"points", xs.size()}, {"projection", projection}};
  print_json(out);
  return 0;
}

int fail(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sub-Riemannian geodesics of the jet space J^k(R,R^n)"};
  app.set_version_flag("--version",
                       std::string("jetflow ") + kVersion + " (spec schema " +
                           std::to_string(kSchemaVersion) + ")");
  app.require_subcommand(1);

  std::string spec_path, out_path = "trajectory.csv", format = "csv";
  std::optional<double> duration_flag, periods_flag;

  auto* geodesic = app.add_subcommand("geodesic", "integrate a geodesic and export it");
  geodesic->add_option("--spec", spec_path, "run spec JSON file")->required();
  geodesic->add_option("--out", out_path, "trajectory output path");
  geodesic->add_option("--format", format, "csv or json");
  double duration_opt = 0.0, periods_opt = 0.0;
  auto* dur = geodesic->add_option("--duration", duration_opt, "arclength to integrate");
  auto* per = geodesic->add_option("--periods", periods_opt, "x-periods to integrate");

  auto* periods_cmd = app.add_subcommand("periods", "x-period and holonomy increments");
  periods_cmd->add_option("--spec", spec_path, "run spec JSON file")->required();

  auto* classify_cmd = app.add_subcommand("classify", "classify the pair (F, I)");
  classify_cmd->add_option("--spec", spec_path, "run spec JSON file")->required();

  auto* certify_cmd = app.add_subcommand("certify", "non-periodicity certificate");
  certify_cmd->add_option("--spec", spec_path, "run spec JSON file")->required();

  long sweep_count = 100;
  std::uint64_t sweep_seed = 0;
  int sweep_kmax = 4, sweep_nmax = 3, sweep_nodes = 64;
  std::string archive_path = "sweep_certificates.jsonl", summary_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "randomized certificate sweep");
  sweep_cmd->add_option("--count", sweep_count, "number of random pairs");
  sweep_cmd->add_option("--seed", sweep_seed, "random seed");
  sweep_cmd->add_option("--kmax", sweep_kmax, "max polynomial degree");
  sweep_cmd->add_option("--nmax", sweep_nmax, "max component count");
  sweep_cmd->add_option("--nodes", sweep_nodes, "starting quadrature node count");
  sweep_cmd->add_option("--archive", archive_path, "certificate archive (JSON lines)");
  sweep_cmd->add_option("--summary", summary_path, "also write the summary JSON here");

  std::string traj_path, projection = "x,theta_0_1", plot_out = "plot.svg";
  auto* plot_cmd = app.add_subcommand("plot", "SVG projection of a trajectory CSV");
  plot_cmd->add_option("--traj", traj_path, "trajectory CSV file")->required();
  plot_cmd->add_option("--projection", projection, "two column names, e.g. x,theta_0_1");
  plot_cmd->add_option("--out", plot_out, "SVG output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::stringstream msg;
    msg << e.what();
    return fail("invalid_arguments", msg.str());
  }

  try {
    if (geodesic->parsed()) {
      if (dur->count()) duration_flag = duration_opt;
      if (per->count()) periods_flag = periods_opt;
      return cmd_geodesic(parse_spec(load_json_file(spec_path)), out_path, format, duration_flag,
                          periods_flag);
    }
    if (periods_cmd->parsed()) return cmd_periods(parse_spec(load_json_file(spec_path)));
    if (classify_cmd->parsed()) return cmd_classify(parse_spec(load_json_file(spec_path)));
    if (certify_cmd->parsed()) return cmd_certify(parse_spec(load_json_file(spec_path)));
    if (sweep_cmd->parsed())
      return cmd_sweep(sweep_count, sweep_seed, sweep_kmax, sweep_nmax, sweep_nodes, archive_path,
                       summary_path);
    if (plot_cmd->parsed()) return cmd_plot(traj_path, projection, plot_out);
    return fail("invalid_arguments", "no subcommand given");
  } catch (const CliError& e) {
    return fail(e.code, e.message);
  } catch (const jetflow::Error& e) {
    return fail(e.code(), e.what());
  } catch (const json::exception& e) {
    return fail("bad_json", e.what());
  } catch (const std::exception& e) {
    return fail("invalid_spec", e.what());
  }
}
