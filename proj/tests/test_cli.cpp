#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "lagspace-cli-tests";
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& stdout_path) {
  std::string cmd = std::string(LAGSPACE_CLI) + " " + args + " > " + stdout_path.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("inspect prints the derived objects and exits 0") {
  fs::path out = scratch_dir() / "inspect.txt";
  int rc = run_cli("inspect --dim 2 --lagrangian \"y1^2 + y2^2 + 2*x1*y1\" --point \"1,2;3,4\"",
                   out);
  CHECK(rc == 0);
  std::string text = slurp(out);
  CHECK(text.find("S(L)         = 18") != std::string::npos);
  CHECK(text.find("E_L          = 25") != std::string::npos);
  CHECK(text.find("d_hL         = 6 0") != std::string::npos);
}

TEST_CASE("exit code contract") {
  fs::path out = scratch_dir() / "exitcodes.txt";
  // 2: malformed expression
  CHECK(run_cli("inspect --dim 2 --lagrangian \"y3\" --point \"0,0;1,1\"", out) == 2);
  // 2: malformed point
  CHECK(run_cli("inspect --dim 2 --lagrangian \"y1^2+y2^2\" --point \"zzz\"", out) == 2);
  // 2: unknown family
  CHECK(run_cli("counterexample --family no-such-family", out) == 2);
  // 2: unknown flag (CLI parser)
  CHECK(run_cli("verify --bogus-flag 3", out) == 2);
  // 3: degenerate Lagrangian
  CHECK(run_cli("inspect --dim 2 --lagrangian \"y1\" --point \"0,0;1,1\"", out) == 3);
  CHECK(run_cli("verify --dim 2 --lagrangian \"y1\" --samples 5", out) == 3);
  // 0: help
  CHECK(run_cli("--help", out) == 0);
}

TEST_CASE("verify emits a versioned JSON report") {
  fs::path out = scratch_dir() / "verify.txt";
  fs::path report_path = scratch_dir() / "verify-report.json";
  int rc = run_cli("verify --dim 2 --lagrangian \"y1^2 + y2^2 + 2*x1*y1\" --samples 15 --seed 5 "
                   "--json " + report_path.string(),
                   out);
  CHECK(rc == 0);

  nlohmann::json report = nlohmann::json::parse(slurp(report_path));
  CHECK(report["schema_version"] == 1);
  CHECK(report["command"] == "verify");
  CHECK(report["overall_pass"] == true);
  CHECK(report.contains("timestamp"));
  CHECK(report["config"]["seed"] == 5);
  REQUIRE(report["checks"].is_array());
  CHECK(report["checks"].size() == 7);
  bool saw_homogeneous_skip = false;
  for (const auto& check : report["checks"]) {
    CHECK(check.contains("name"));
    CHECK(check.contains("max_residual"));
    CHECK(check.contains("tolerance"));
    if (check["name"] == "homogeneous-laws") saw_homogeneous_skip = check["skipped"].get<bool>();
  }
  CHECK(saw_homogeneous_skip);  // the perturbed flat Lagrangian is not homogeneous
}

TEST_CASE("verify is byte-deterministic for a fixed seed") {
  fs::path out = scratch_dir() / "determinism.txt";
  fs::path a = scratch_dir() / "report-a.json";
  fs::path b = scratch_dir() / "report-b.json";
  const std::string base =
      "verify --family polar-linear-phi --samples 20 --seed 7 --no-timestamp --json ";
  CHECK(run_cli(base + a.string(), out) == 0);
  CHECK(run_cli(base + b.string(), out) == 0);
  const std::string ra = slurp(a);
  CHECK(!ra.empty());
  CHECK(ra == slurp(b));
  CHECK(ra.find("timestamp") == std::string::npos);
}

TEST_CASE("flow writes both trajectory CSVs") {
  fs::path out = scratch_dir() / "flow.txt";
  fs::path prefix = scratch_dir() / "traj";
  int rc = run_cli("flow --family homogeneous-control --point \"1,0;0,1\" --step 0.01 "
                   "--t-end 0.5 --csv " + prefix.string(),
                   out);
  CHECK(rc == 0);
  std::string text = slurp(out);
  CHECK(text.find("coincide") != std::string::npos);
  for (const char* suffix : {"-semispray.csv", "-horizontal.csv"}) {
    fs::path csv = scratch_dir() / (std::string("traj") + suffix);
    REQUIRE(fs::exists(csv));
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,x1,x2,y1,y2,L,E,SL,dhL_max");
  }
}

TEST_CASE("counterexample verdicts for a witness family and a control") {
  fs::path out = scratch_dir() / "cex.txt";
  fs::path report_path = scratch_dir() / "cex.json";
  int rc = run_cli("counterexample --family flat-quadratic-phi --samples 20 --seed 11 --json " +
                       report_path.string(),
                   out);
  CHECK(rc == 0);
  nlohmann::json report = nlohmann::json::parse(slurp(report_path));
  CHECK(report["overall_pass"] == true);
  CHECK(report["witness_max_dh"].get<double>() > 0.1);

  rc = run_cli("counterexample --family null-control --samples 20 --seed 11", out);
  CHECK(rc == 0);
}

TEST_CASE("expressions can come from a file") {
  fs::path expr_file = scratch_dir() / "lagrangian.txt";
  {
    std::ofstream f(expr_file);
    f << "y1^2 + y2^2\n";
  }
  fs::path out = scratch_dir() / "fromfile.txt";
  int rc = run_cli("inspect --dim 2 --lagrangian-file " + expr_file.string() + " --point \"0,0;3,4\"",
                   out);
  CHECK(rc == 0);
  CHECK(slurp(out).find("E_L          = 25") != std::string::npos);
}
