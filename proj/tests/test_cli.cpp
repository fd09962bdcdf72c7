#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"
#include "tkerr/cli/app.hpp"
#include "tkerr/cli/config.hpp"
#include "tkerr/cli/experiments.hpp"

namespace fs = std::filesystem;
using namespace tkerr;
using namespace tkerr::cli;
using nlohmann::json;

namespace {

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;

  json error() const { return json::parse(err); }
};

Invocation invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  Invocation r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class Workdir {
 public:
  Workdir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("tkerr_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~Workdir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  Workdir(const Workdir&) = delete;
  Workdir& operator=(const Workdir&) = delete;

  std::string write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string config(const std::string& name) { return std::string(TKERR_CONFIG_DIR) + "/" + name; }

const char* kCouplings = R"(experiment: couplings
output: c.csv
trap:
  omega_x_hz: 1.2e6
  omega_z_hz: 100e3
  l0_mm: 0.05
drive:
  force_yn: 700
  frequency_hz: 2.4e6
)";

}  // namespace

TEST_CASE("an empty config names the first missing field") {
  Workdir w;
  const auto r = invoke({"run", w.write("empty.yaml", "")});
  CHECK(r.code == kExitConfig);
  const auto e = r.error();
  CHECK(e["status"] == "error");
  CHECK(e["exit_code"] == 2);
  CHECK(e["kind"] == "config");
  CHECK(e["message"].get<std::string>().find("missing field: experiment") != std::string::npos);
}

TEST_CASE("unknown fields and sections are rejected") {
  CHECK_THROWS_AS(ConfigDocument::from_string(std::string(kCouplings) + "  bogus: 1\n").resolve(),
                  ConfigError);
  CHECK_THROWS_AS(ConfigDocument::from_string(std::string(kCouplings) + "extra:\n  a: 1\n").resolve(),
                  ConfigError);
  CHECK_THROWS_AS(ConfigDocument::from_string("experiment: nonsense\noutput: x.csv\n").resolve(),
                  ConfigError);
  auto doc = ConfigDocument::from_string(kCouplings);
  doc.set_override("trap.omega_z_hz=abc");
  CHECK_THROWS_AS(doc.resolve(), ConfigError);
}

TEST_CASE("config values convert to SI and overrides take precedence") {
  auto doc = ConfigDocument::from_string(kCouplings);
  auto c = doc.resolve();
  CHECK(c.experiment == Experiment::couplings);
  CHECK(c.trap.omega_x == doctest::Approx(angular(1.2e6)));
  CHECK(c.trap.l0 == doctest::Approx(0.05e-3));
  CHECK(c.drive.amplitude == doctest::Approx(700e-24));
  doc.set_override("trap.l0_mm=inf");
  doc.set_override("drive.force_yn=350");
  c = doc.resolve();
  CHECK(std::isinf(c.trap.l0));
  CHECK(c.trap.lambda() == 0.0);
  CHECK(c.drive.amplitude == doctest::Approx(350e-24));
  CHECK_THROWS_AS(doc.set_override("no_equals_sign"), ConfigError);
}

TEST_CASE("couplings manifest carries the library values exactly") {
  Workdir w;
  const auto out = w.file("couplings.csv");
  const auto r = invoke({"run", w.write("c.yaml", kCouplings), "-o", out});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("wrote " + out) != std::string::npos);

  const auto manifest = json::parse(slurp(out + ".manifest.json"));
  const auto k = effective_couplings(testing::fig2_trap(), testing::fig2_drive());
  CHECK(manifest["tool"] == "tkerr");
  CHECK(manifest["experiment"] == "couplings");
  CHECK(manifest["derived"]["K"].get<double>() == k.K);
  CHECK(manifest["derived"]["omega_eff"].get<double>() == k.omega_eff);
  CHECK(manifest["derived"]["epsilon"].get<double>() == k.epsilon);
  CHECK(manifest["config"]["trap"]["l0_mm"].get<double>() == 0.05);

  const auto csv = lines(slurp(out));
  REQUIRE(csv.size() == 2);
  CHECK(csv[0] == "lambda,drive_rate,K,omega_eff,epsilon,chi_res,offset,validity_worst");
}

TEST_CASE("fig2 run writes the paired trajectory and is reproducible") {
  Workdir w;
  const auto cfg = config("fig2.yaml");
  const std::vector<std::string> common{"--set", "space.dim_x=10",       "--set",
                                        "space.dim_z=4", "--set",        "propagation.t_final_ms=0.1",
                                        "--set",         "propagation.n_outputs=6"};
  auto args = std::vector<std::string>{"run", cfg, "-o", w.file("a/fig2.csv")};
  args.insert(args.end(), common.begin(), common.end());
  REQUIRE(invoke(args).code == kExitOk);
  args[3] = w.file("b/fig2.csv");
  REQUIRE(invoke(args).code == kExitOk);

  const auto a = slurp(w.file("a/fig2.csv"));
  CHECK(a == slurp(w.file("b/fig2.csv")));
  const auto rows = lines(a);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == "t,mean_nx_exact,mean_nx_effective,norm_exact");
  CHECK(rows[1].rfind("0.00000000000e+00,", 0) == 0);

  const auto manifest = json::parse(slurp(w.file("a/fig2.csv.manifest.json")));
  CHECK(manifest["experiment"] == "fig2");
  CHECK(manifest["config"]["space"]["dim_x"] == 10);
}

TEST_CASE("chain-gap run reports the gap") {
  Workdir w;
  const auto out = w.file("chain.csv");
  REQUIRE(invoke({"run", config("chain_gap.yaml"), "-o", out}).code == kExitOk);
  const auto manifest = json::parse(slurp(out + ".manifest.json"));
  CHECK(manifest["results"]["gap"].get<double>() == doctest::Approx(2e-2).epsilon(0.25));
  CHECK(lines(slurp(out)).size() == 11);
}

TEST_CASE("physics and integration failures map to their exit codes") {
  Workdir w;
  const auto cfg = w.write("c.yaml", kCouplings);
  auto r = invoke({"run", cfg, "-o", w.file("x.csv"), "--set", "drive.frequency_hz=100e3"});
  CHECK(r.code == kExitPhysics);
  CHECK(r.error()["kind"] == "physics");
  CHECK(r.error()["type"] == "ResonancePole");

  r = invoke({"run", config("custom.yaml"), "-o", w.file("y.csv"), "--set",
              "propagation.norm_drift_limit=1e-17", "--set", "propagation.step_tolerance=1e-3",
              "--set", "propagation.frame=interaction", "--set", "propagation.t_final_ms=0.05"});
  CHECK(r.code == kExitIntegration);
  CHECK(r.error()["kind"] == "integration");

  r = invoke({"run", w.file("does_not_exist.yaml")});
  CHECK(r.code == kExitConfig);
  r = invoke({"frobnicate"});
  CHECK(r.code == kExitConfig);
}

TEST_CASE("sweep grids") {
  const auto g = parse_grid("drive.force_yn=0:1000:5");
  CHECK(g.key == "drive.force_yn");
  REQUIRE(g.values.size() == 5);
  CHECK(std::stod(g.values[2]) == 500.0);
  CHECK(parse_grid("trap.l0_mm=1,2,inf").values.back() == "inf");
  CHECK_THROWS_AS(parse_grid("drive.force_yn="), ConfigError);
  CHECK_THROWS_AS(parse_grid("drive.force_yn=0:1:0"), ConfigError);
  CHECK_THROWS_AS(parse_grid("=1,2"), ConfigError);

  Workdir w;
  const auto r = invoke({"sweep", w.write("c.yaml", kCouplings), "--grid", "drive.force_yn=1:0:0",
                         "-o", w.file("s.csv")});
  CHECK(r.code == kExitConfig);
}

TEST_CASE("squeezing rate is linear in the drive with the off-resonant slope") {
  Workdir w;
  const auto out = w.file("sweep.csv");
  const auto r = invoke({"sweep", w.write("c.yaml", kCouplings), "--grid",
                         "drive.force_yn=0:1400:8", "--set", "drive.frequency_hz=2.5e6", "-o", out});
  REQUIRE(r.code == kExitOk);
  const auto t = testing::fig2_trap();
  const double phi = angular(2.5e6);
  const double slope = t.lambda() * phi / (phi * phi - t.omega_z * t.omega_z);
  int checked = 0;
  for (const auto& row : lines(slurp(out))) {
    const auto c1 = row.find(',');
    const auto c2 = row.find(',', c1 + 1);
    if (row.substr(c1 + 1, c2 - c1 - 1) != "epsilon") continue;
    const double force = std::stod(row.substr(0, c1)) * 1e-24;
    const double eps = std::stod(row.substr(c2 + 1));
    const double rate = t.r0z() * force / kHbar;
    CHECK(eps == doctest::Approx(rate * slope).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked == 8);
}

TEST_CASE("Kerr strength grows with the radial frequency in a two-axis sweep") {
  Workdir w;
  const auto out = w.file("k.csv");
  const auto r = invoke({"sweep", w.write("c.yaml", kCouplings), "--grid",
                         "trap.omega_x_hz=0.8e6,1.2e6,1.6e6", "--grid", "trap.l0_mm=0.05,0.1",
                         "-o", out});
  REQUIRE(r.code == kExitOk);
  const auto rows = lines(slurp(out));
  CHECK(rows[0] == "trap.omega_x_hz,trap.l0_mm,observable,value");
  std::vector<double> k_at_005;
  for (const auto& row : rows) {
    if (row.find(",K,") == std::string::npos) continue;
    if (row.find(",5.00000000000e-02,") == std::string::npos) continue;
    k_at_005.push_back(std::stod(row.substr(row.rfind(',') + 1)));
  }
  REQUIRE(k_at_005.size() == 3);
  CHECK(k_at_005[0] < k_at_005[1]);
  CHECK(k_at_005[1] < k_at_005[2]);
  CHECK(lines(slurp(out)).size() == 1 + 3 * 2 * 6);

  CHECK(invoke({"sweep", config("fig2.yaml"), "--grid", "drive.force_yn=1,2", "-o", w.file("z.csv")})
            .code == kExitConfig);
}
