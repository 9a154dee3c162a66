#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = HEATVAR_CLI_PATH;

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

RunResult run(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / "heatvar_cli_stdout.txt";
  const std::string command = kCli + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(command.c_str());
  std::ifstream in(out);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return {WEXITSTATUS(status), buffer.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("kernel subcommands emit JSON values") {
  auto kappa = run("kernel kappa --variant rademacher");
  CHECK(kappa.exit_code == 0);
  const auto kdoc = json::parse(kappa.stdout_text);
  CHECK(kdoc.at("kappa_sq").get<double>() == doctest::Approx(6.0 / std::numbers::pi).epsilon(1e-12));
  CHECK(kdoc.at("truncation_error").get<double>() == 0.0);

  auto gamma = run("kernel gamma --k 1");
  CHECK(gamma.exit_code == 0);
  CHECK(json::parse(gamma.stdout_text).at("value").get<double>() ==
        doctest::Approx(0.5857864376).epsilon(1e-9));

  auto kfn = run("kernel K --x 0");
  CHECK(kfn.exit_code == 0);
  CHECK(json::parse(kfn.stdout_text).at("value").get<double>() == 0.0);

  // domain and resource errors exit with the usage code
  CHECK(run("kernel cov --s -1 --t 2").exit_code == 2);
  CHECK(run("kernel gamma --k 0").exit_code == 2);
  CHECK(run("kernel kappa --variant sideways").exit_code == 2);
  CHECK(run("kernel kappa --variant centered --tol 1e-30").exit_code == 2);
}

TEST_CASE("oracle subcommands") {
  auto biv = run("oracle biv --h1 x2m1 --h2 x2m1 --rho 0.5");
  CHECK(biv.exit_code == 0);
  CHECK(json::parse(biv.stdout_text).at("value").get<double>() ==
        doctest::Approx(0.5).epsilon(1e-9));
  auto m44 = run("oracle moment44 --rho 0");
  CHECK(json::parse(m44.stdout_text).at("value").get<double>() == 9.0);
  auto a31 = run("oracle admissibility --family signed");
  CHECK(a31.exit_code == 0);
  const auto adoc = json::parse(a31.stdout_text);
  CHECK(adoc.at("max_abs_mean").get<double>() < 1e-10);
  CHECK(adoc.at("fitted_L").get<double>() <= 5.0);
  CHECK(run("oracle biv --h1 x2m1 --h2 x2m1 --rho 1.0").exit_code == 2);
}

TEST_CASE("sample subcommand: reproducible files, strict seed requirement") {
  const auto dir_a = fresh_dir("heatvar_sample_a");
  const auto dir_b = fresh_dir("heatvar_sample_b");
  const std::string flags = "sample --n 16 --horizon 1 --seed 31415 --reps 3 --increments --out ";
  CHECK(run(flags + dir_a.string()).exit_code == 0);
  CHECK(run(flags + dir_b.string()).exit_code == 0);
  for (const char* name : {"path_00000.csv", "path_00002.csv", "increments_00001.csv"})
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));

  const auto meta = json::parse(slurp(dir_a / "metadata.json"));
  CHECK(meta.at("n") == 16);
  CHECK(meta.at("seed") == 31415);
  CHECK(meta.at("factorization").at("jitter_applied") == false);

  // path CSV includes t = 0 and one row per grid point
  std::istringstream csv(slurp(dir_a / "path_00000.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,F");
  std::getline(csv, line);
  CHECK(line.substr(0, 2) == "0,");
  int rows = 1;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 17);

  // a one-step grid gives exactly two data rows
  const auto tiny = fresh_dir("heatvar_sample_tiny");
  CHECK(run("sample --n 1 --horizon 1 --seed 7 --out " + tiny.string()).exit_code == 0);
  std::istringstream tiny_csv(slurp(tiny / "path_00000.csv"));
  int tiny_rows = -1;  // discount header
  while (std::getline(tiny_csv, line)) ++tiny_rows;
  CHECK(tiny_rows == 2);

  // stochastic subcommands demand a seed
  CHECK(run("sample --n 16 --horizon 1 --out " + dir_a.string()).exit_code == 2);
}

TEST_CASE("variation subcommand") {
  auto quartic = run("variation --functional quartic --n 32 --horizon 1 --seed 99 --format json");
  CHECK(quartic.exit_code == 0);
  const auto qdoc = json::parse(quartic.stdout_text);
  const auto& values = qdoc.at("series").at("values");
  double prev = 0.0;
  for (const auto& v : values) {
    CHECK(v.get<double>() >= prev);  // monotone
    prev = v.get<double>();
  }

  auto midpoint = run("variation --functional midpoint --n 32 --horizon 1 --seed 99");
  CHECK(midpoint.exit_code == 0);
  CHECK(json::parse(midpoint.stdout_text).at("diagnostics").at("max_identity_residual").get<double>() <
        1e-10);

  auto csv = run("variation --functional centered-sum --n 8 --horizon 1 --seed 5 --format csv");
  CHECK(csv.exit_code == 0);
  CHECK(csv.stdout_text.substr(0, 8) == "t,value\n");

  CHECK(run("variation --functional sideways --n 8 --horizon 1 --seed 5").exit_code == 2);
  CHECK(run("variation --functional quartic --n 8 --horizon 1").exit_code == 2);  // no seed
}

TEST_CASE("experiment subcommand: exit codes and determinism") {
  const auto dir = fresh_dir("heatvar_experiment");
  const fs::path spec_path = dir / "spec.json";
  {
    std::ofstream spec(spec_path);
    spec << R"({
      "master_seed": 271828,
      "studies": [
        {"name": "sm", "type": "second_moment", "variants": ["centered"],
         "n": 16, "pairs": [[0.0, 1.0]], "replications": 50}
      ]
    })";
  }
  const fs::path report1 = dir / "report1.json";
  const fs::path report8 = dir / "report8.json";
  CHECK(run("experiment --spec " + spec_path.string() + " --threads 1 --out " + report1.string())
            .exit_code == 0);
  CHECK(run("experiment --spec " + spec_path.string() + " --threads 8 --out " + report8.string())
            .exit_code == 0);
  auto one = json::parse(slurp(report1));
  auto eight = json::parse(slurp(report8));
  one.erase("timing");
  eight.erase("timing");
  CHECK(one.dump() == eight.dump());

  // usage failures exit 2: malformed spec, too few replications, missing file
  const fs::path bad_path = dir / "bad.json";
  {
    std::ofstream bad(bad_path);
    bad << R"({"master_seed": 1, "studies": [{"type": "second_moment",
               "variants": ["centered"], "n": 16, "pairs": [[0, 1]], "replications": 10}]})";
  }
  CHECK(run("experiment --spec " + bad_path.string()).exit_code == 2);
  CHECK(run("experiment --spec " + (dir / "missing.json").string()).exit_code == 2);
  const fs::path garbled = dir / "garbled.json";
  {
    std::ofstream g(garbled);
    g << "{not json";
  }
  CHECK(run("experiment --spec " + garbled.string()).exit_code == 2);

  // CSV summary parses
  const fs::path csv_path = dir / "summary.csv";
  CHECK(run("experiment --spec " + spec_path.string() + " --csv " + csv_path.string() +
            " --out " + (dir / "r.json").string())
            .exit_code == 0);
  const std::string csv = slurp(csv_path);
  CHECK(csv.rfind("study,variant,n,s,t,estimate,stderr,target,z,pass\n", 0) == 0);
}
