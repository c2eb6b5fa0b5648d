// Drives the ecd executable as a user would.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

fs::path work_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / "ecd_cli_test" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Result ecd(const std::string& args, const fs::path& dir = fs::temp_directory_path()) {
  const auto log = dir / "ecd_cli_output.txt";
  const std::string cmd = "cd '" + dir.string() + "' && '" + ECD_CLI_PATH + "' " + args + " > '" +
                          log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = slurp(log);
  fs::remove(log);
  return r;
}

bool contains(const std::string& text, const std::string& what) { return text.find(what) != std::string::npos; }

}  // namespace

TEST_CASE("help lists subcommands and defaults") {
  const auto top = ecd("--help");
  CHECK(top.code == 0);
  for (const char* sub : {"run", "compare", "calibrate", "fit", "synthesize", "gen-population"})
    CHECK(contains(top.output, sub));
  const auto run = ecd("run --help");
  CHECK(run.code == 0);
  CHECK(contains(run.output, "[-1.377]"));
  CHECK(contains(run.output, "[12.3]"));
  CHECK(contains(run.output, "[S1]"));
  CHECK(contains(ecd("--version").output, "0.1.0"));
}

TEST_CASE("usage and validation errors exit with status 2") {
  const auto dir = work_dir("errors");
  auto r = ecd("run --no-such-flag", dir);
  CHECK(r.code == 2);
  CHECK(contains(r.output, "no-such-flag"));
  r = ecd("run --population missing.csv", dir);
  CHECK(r.code == 2);
  CHECK(contains(r.output, "missing.csv"));
  r = ecd("run --scenario S9", dir);
  CHECK(r.code == 2);
  r = ecd("run --mode sample", dir);
  CHECK(r.code == 2);
  CHECK(contains(r.output, "--seed"));
  r = ecd("compare --scenario S1", dir);
  CHECK(r.code == 2);
  {
    std::ofstream(dir / "targets.json") << R"({"targets":[{"category":"groceries",)"
                                           R"("deliveries_per_person_month":-1,)"
                                           R"("purchase_value_per_household_month":11}]})";
  }
  r = ecd("calibrate --targets targets.json", dir);
  CHECK(r.code == 2);
  CHECK(contains(r.output, "groceries"));
  CHECK(contains(r.output, "deliveries_per_person_month"));
  {
    std::ofstream(dir / "pop.csv") << "household_id,size\nh1,2\nh2,0\n";
  }
  r = ecd("run --population pop.csv", dir);
  CHECK(r.code == 2);
  CHECK(contains(r.output, "line 3"));
  {
    std::ofstream(dir / "config.json") << R"({"sed": 3})";
  }
  r = ecd("run --config config.json", dir);
  CHECK(r.code == 2);
  CHECK(contains(r.output, "sed"));
  r = ecd("synthesize", dir);
  CHECK(r.code == 2);
}

TEST_CASE("run writes headed outputs and is reproducible") {
  const auto a = work_dir("run_a"), b = work_dir("run_b");
  const std::string args = "run --scenario S2 --mode sample --seed 3 --replications 5 --out out";
  REQUIRE(ecd(args + " --workers 1", a).code == 0);
  REQUIRE(ecd(args + " --workers 4", b).code == 0);
  for (const char* f : {"summary.csv", "cdf_total_value.csv", "cdf_frequency.csv", "households.csv"}) {
    CAPTURE(f);
    const auto text = slurp(a / "out" / f);
    CHECK(text.rfind("# ecd run config_hash=", 0) == 0);
    CHECK(contains(text.substr(0, text.find('\n')), " seed=3"));
    CHECK(text == slurp(b / "out" / f));
  }
}

TEST_CASE("compare reports four scenarios by default") {
  const auto dir = work_dir("compare");
  const auto r = ecd("compare --out .", dir);
  REQUIRE(r.code == 0);
  CHECK(contains(r.output, "S1 -> S2"));
  std::istringstream in(slurp(dir / "summary.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line.rfind("scenario,", 0) != 0) ++rows;
  CHECK(rows == 4);
  CHECK(slurp(dir / "deltas.csv").rfind("# ecd compare", 0) == 0);
}

TEST_CASE("config file values apply unless a flag overrides them") {
  const auto dir = work_dir("config");
  {
    std::ofstream(dir / "cfg.json") << R"({"run": {"scenario": "S2", "alpha": 9.0}})";
  }
  REQUIRE(ecd("run --config cfg.json --out a", dir).code == 0);
  REQUIRE(ecd("run --config cfg.json --alpha 12.3 --out b", dir).code == 0);
  REQUIRE(ecd("run --scenario S2 --out c", dir).code == 0);
  const auto a = slurp(dir / "a" / "summary.csv"), b = slurp(dir / "b" / "summary.csv"),
             c = slurp(dir / "c" / "summary.csv");
  CHECK(contains(a, "\nS2,"));
  auto body = [](const std::string& s) { return s.substr(s.find('\n') + 1); };
  CHECK(body(a) != body(c));
  CHECK(body(b) == body(c));
}

TEST_CASE("generators, calibration, fit and synthesis through the CLI") {
  const auto dir = work_dir("pipeline");
  REQUIRE(ecd("gen-population --count 50 --seed 2", dir).code == 0);
  CHECK(slurp(dir / "population.csv").rfind("# ecd gen-population config_hash=", 0) == 0);
  REQUIRE(ecd("gen-scenario --scenario S3", dir).code == 0);
  REQUIRE(ecd("run --scenario scenario_S3.json --population population.csv --out from_file", dir).code == 0);
  REQUIRE(ecd("run --scenario S3 --population population.csv --out builtin", dir).code == 0);
  auto body = [](const std::string& s) { return s.substr(s.find('\n') + 1); };
  CHECK(body(slurp(dir / "from_file" / "summary.csv")) == body(slurp(dir / "builtin" / "summary.csv")));

  REQUIRE(ecd("gen-params", dir).code == 0);
  REQUIRE(ecd("gen-targets", dir).code == 0);
  REQUIRE(ecd("gen-categories", dir).code == 0);
  REQUIRE(ecd("gen-dataset --observations 500 --seed 4", dir).code == 0);
  for (const char* f : {"choices_options.csv", "choices_order-value.csv", "choices_total-value.csv"})
    CHECK(fs::exists(dir / f));

  auto r = ecd("calibrate --population population.csv --category groceries --max-iterations 30", dir);
  REQUIRE(r.code == 0);
  CHECK(contains(slurp(dir / "calibration.json"), "\"converged\": false"));
  CHECK(fs::exists(dir / "params_groceries.json"));

  r = ecd("fit --options-data choices_options.csv --order-value-data choices_order-value.csv "
          "--total-value-data choices_total-value.csv",
          dir);
  REQUIRE(r.code == 0);
  CHECK(contains(slurp(dir / "fit.json"), "\"beta_fee\""));
  CHECK(fs::exists(dir / "params_fitted.json"));

  r = ecd("synthesize --population population.csv --weeks 2 --seed 5", dir);
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "packages.csv").rfind("# ecd synthesize config_hash=", 0) == 0);
  CHECK(contains(slurp(dir / "synthesis_summary.csv"), "groceries"));
}
