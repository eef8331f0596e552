#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("jetflow_cli_test_" + std::to_string(getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  const char* bin = std::getenv("JETFLOW_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "JETFLOW_BIN must point at the jetflow binary");
  static int counter = 0;
  const fs::path errfile = work_dir() / ("stderr_" + std::to_string(counter++) + ".txt");
  const std::string cmd = std::string(bin) + " " + args + " 2>" + errfile.string();
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  char buf[4096];
  size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, got);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream ein(errfile);
  std::stringstream ss;
  ss << ein.rdbuf();
  res.err = ss.str();
  return res;
}

std::string write_file(const std::string& name, const std::string& content) {
  const fs::path p = work_dir() / name;
  std::ofstream out(p);
  out << content;
  return p.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string harmonic_spec() {
  return write_file("harmonic.json",
                    R"({"F": {"n": 1, "k": 1, "coeffs": [[0.0, 1.0]]},
                        "x_init": 0.0, "px_sign": 1, "tol": 1e-11, "quadrature_N": 64})");
}

std::string critical_spec() {
  return write_file("critical.json",
                    R"({"F": {"n": 1, "k": 2, "coeffs": [[-1.0, 0.0, 2.0]]},
                        "interval_index": 1, "x_init": 0.5, "duration": 20.0})");
}

const double pi = std::numbers::pi;

}  // namespace

TEST_CASE("periods command emits the harmonic holonomy") {
  auto res = run_cli("periods --spec " + harmonic_spec());
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(std::abs(j.at("L").get<double>() - 2.0 * pi) <= 1e-9);
  CHECK(std::abs(j.at("delta_theta")[0][0].get<double>()) <= 1e-12);
  CHECK(std::abs(j.at("delta_theta")[0][1].get<double>() - pi) <= 1e-9);
}

TEST_CASE("certify command issues a NotPeriodic verdict") {
  auto res = run_cli("certify --spec " + harmonic_spec());
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(j.at("verdict").get<std::string>() == "NotPeriodic");
  CHECK(std::abs(j.at("reconstructed").at("coeffs")[0][1].get<double>() - 1.0) <= 1e-8);
  CHECK(j.at("gram_lambda_min").get<double>() > 0.0);
}

TEST_CASE("classify command flags critical endpoints") {
  auto res = run_cli("classify --spec " + critical_spec());
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(j.at("class").get<std::string>() == "Critical");
  CHECK(j.at("end0_critical").get<bool>());
  CHECK_FALSE(j.at("end1_critical").get<bool>());

  const std::string eq = write_file("equilibrium.json",
                                    R"({"F": {"coeffs": [[-1.0, 0.0, 2.0]]},
                                        "interval_index": 1, "x_init": 0.0})");
  auto res2 = run_cli("classify --spec " + eq);
  REQUIRE(res2.exit_code == 0);
  CHECK(json::parse(res2.out).at("class").get<std::string>() == "Equilibrium");
}

TEST_CASE("geodesic command exports roughly three periods of arclength") {
  const std::string out = (work_dir() / "traj.csv").string();
  auto res = run_cli("geodesic --spec " + harmonic_spec() + " --periods 3 --out " + out);
  REQUIRE(res.exit_code == 0);
  const json diag = json::parse(res.out);
  CHECK(diag.at("classification").at("class").get<std::string>() == "XPeriodic");
  CHECK(std::abs(diag.at("duration").get<double>() - 6.0 * pi) <= 1e-6);
  CHECK(diag.at("max_energy_drift").get<double>() <= 1e-8);

  std::ifstream csv(out);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,x,p_x,theta_0_1,theta_1_1");
  std::string line, last;
  size_t rows = 0;
  while (std::getline(csv, line)) {
    if (!line.empty()) {
      last = line;
      ++rows;
    }
  }
  CHECK(rows >= 100);
  CHECK(std::abs(std::stod(last) - 6.0 * pi) <= 1e-9);  // final time stamp
}

TEST_CASE("geodesic command: constant F classifies as a line") {
  const std::string spec = write_file("line.json",
                                      R"({"F": {"coeffs": [[0.6]]}, "x_init": 0.0,
                                          "duration": 5.0})");
  const std::string out = (work_dir() / "line.csv").string();
  auto res = run_cli("geodesic --spec " + spec + " --out " + out);
  REQUIRE(res.exit_code == 0);
  CHECK(json::parse(res.out).at("classification").at("class").get<std::string>() == "Line");
}

TEST_CASE("geodesic command: JSON trajectory format") {
  const std::string out = (work_dir() / "traj.json").string();
  auto res = run_cli("geodesic --spec " + harmonic_spec() + " --duration 3.0 --format json --out " +
                     out);
  REQUIRE(res.exit_code == 0);
  const json traj = json::parse(read_file(out));
  CHECK(traj.at("F").at("k").get<int>() == 1);
  CHECK(traj.at("samples").size() >= 10);
  CHECK(traj.at("diagnostics").contains("max_energy_drift"));
}

TEST_CASE("validation errors exit 2 with machine-readable codes") {
  const std::string outside = write_file("outside.json",
                                         R"({"F": {"coeffs": [[0.0, 1.0]]},
                                             "x_init": 5.0, "duration": 1.0})");
  auto res = run_cli("geodesic --spec " + outside);
  CHECK(res.exit_code == 2);
  CHECK(json::parse(res.err).at("error").get<std::string>() == "x_init_outside_hill_interval");

  auto res2 = run_cli("periods --spec " + critical_spec());
  CHECK(res2.exit_code == 2);
  CHECK(json::parse(res2.err).at("error").get<std::string>() == "infinite_period_critical_pair");

  const std::string garbage = write_file("garbage.json", "{not json");
  auto res3 = run_cli("classify --spec " + garbage);
  CHECK(res3.exit_code == 2);
  CHECK(json::parse(res3.err).at("error").get<std::string>() == "bad_json");

  // a periods count only makes sense for x-periodic pairs
  auto res4 = run_cli("geodesic --spec " + critical_spec() + " --periods 2");
  CHECK(res4.exit_code == 2);
  CHECK(json::parse(res4.err).at("error").get<std::string>() == "periods_requires_x_periodic");
}

TEST_CASE("explicit interval selection") {
  const std::string spec = write_file("explicit.json",
                                      R"({"F": {"coeffs": [[0.0, 1.0]]},
                                          "interval": [-1.0, 1.0]})");
  auto res = run_cli("periods --spec " + spec);
  REQUIRE(res.exit_code == 0);

  const std::string wrong = write_file("wrong_interval.json",
                                       R"({"F": {"coeffs": [[0.0, 1.0]]},
                                           "interval": [0.0, 2.0]})");
  auto res2 = run_cli("periods --spec " + wrong);
  CHECK(res2.exit_code == 2);
  CHECK(json::parse(res2.err).at("error").get<std::string>() == "interval_not_found");
}

TEST_CASE("sweep is deterministic and archives one record per case") {
  const std::string a1 = (work_dir() / "a1.jsonl").string();
  const std::string a2 = (work_dir() / "a2.jsonl").string();
  auto r1 = run_cli("sweep --count 6 --seed 7 --archive " + a1);
  auto r2 = run_cli("sweep --count 6 --seed 7 --archive " + a2);
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  CHECK(json::parse(r1.out).at("inconclusive").get<long>() == 0);
  // byte-identical summaries apart from the archive path we varied
  json s1 = json::parse(r1.out), s2 = json::parse(r2.out);
  s1.erase("archive");
  s2.erase("archive");
  CHECK(s1.dump() == s2.dump());
  CHECK(read_file(a1) == read_file(a2));

  const std::string one = (work_dir() / "one.jsonl").string();
  auto r3 = run_cli("sweep --count 1 --seed 3 --archive " + one);
  REQUIRE(r3.exit_code == 0);
  const std::string content = read_file(one);
  CHECK(std::count(content.begin(), content.end(), '\n') == 1);
}

TEST_CASE("plot renders an SVG polyline and rejects bad input") {
  const std::string traj = (work_dir() / "plot_traj.csv").string();
  auto gen = run_cli("geodesic --spec " + harmonic_spec() + " --periods 1 --out " + traj);
  REQUIRE(gen.exit_code == 0);
  const std::string svg = (work_dir() / "plot.svg").string();
  auto res = run_cli("plot --traj " + traj + " --projection x,theta_0_1 --out " + svg);
  REQUIRE(res.exit_code == 0);
  const std::string content = read_file(svg);
  CHECK(content.find("<svg") != std::string::npos);
  CHECK(content.find("<polyline") != std::string::npos);

  const std::string empty = write_file("empty.csv", "t,x,p_x,theta_0_1,theta_1_1\n");
  auto res2 = run_cli("plot --traj " + empty + " --out " + svg);
  CHECK(res2.exit_code == 2);
  CHECK(json::parse(res2.err).at("error").get<std::string>() == "empty_trajectory");

  const std::string malformed = write_file("malformed.csv", "t,x\n1.0,abc\n");
  auto res3 = run_cli("plot --traj " + malformed + " --out " + svg);
  CHECK(res3.exit_code == 2);
  CHECK(json::parse(res3.err).at("error").get<std::string>() == "malformed_trajectory_file");

  auto res4 = run_cli("plot --traj " + traj + " --projection x,theta_9_9 --out " + svg);
  CHECK(res4.exit_code == 2);
  CHECK(json::parse(res4.err).at("error").get<std::string>() == "invalid_projection");
}

TEST_CASE("version flag reports the schema") {
  auto res = run_cli("--version");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("jetflow") != std::string::npos);
  CHECK(res.out.find("schema") != std::string::npos);
}
