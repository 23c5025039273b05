#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "bess/scenario.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "bess_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(BESSPLAN_EXE) + " " + args + " >>" + (kWork / "log.txt").string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double expected_total(const fs::path& dir) {
  return nlohmann::json::parse(slurp(dir / "summary.json"))["expected"]["total"].get<double>();
}

struct Workdir {
  Workdir() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};

}  // namespace

TEST_CASE_FIXTURE(Workdir, "synth writes a loadable, reproducible week") {
  REQUIRE(run("synth --seed 1 --days 7 --out " + (kWork / "a").string()) == 0);
  REQUIRE(run("synth --seed 1 --days 7 --out " + (kWork / "b").string()) == 0);
  const bess::ScenarioSet set = bess::load_scenarios(kWork / "a/frequency.csv", kWork / "a/prices.csv",
                                                     kWork / "a/probabilities.csv");
  CHECK(set.size() == 7);
  for (const char* f : {"frequency.csv", "prices.csv", "probabilities.csv"})
    CHECK(slurp(kWork / "a" / f) == slurp(kWork / "b" / f));
  CHECK(run("synth --days 0 --out " + (kWork / "c").string()) == 2);
  CHECK(run("synth --days x") == 2);
  CHECK(run("") == 2);
}

TEST_CASE_FIXTURE(Workdir, "FCR-D on a flat 50 Hz day is accepted every hour") {
  std::vector<bess::Scenario> v{fixtures::flat_scenario("flat", 1.0, 50.0, 60, {10, 8, 40, 40}, 50, 30)};
  const bess::ScenarioSet set(std::move(v));
  const fs::path data = kWork / "flat";
  fs::create_directories(data);
  bess::save_scenarios(set, data / "frequency.csv", data / "prices.csv", data / "probabilities.csv");
  const fs::path out = kWork / "flat_out";
  REQUIRE(run("plan --data " + data.string() + " --markets D --cdeg 50 --out " + out.string()) == 0);
  CHECK(slurp(out / "participation.csv").find("FCRD,flat,100.0,100.0") != std::string::npos);
  CHECK(expected_total(out) == doctest::Approx(24 * 0.9 * 8));
  for (const char* f : {"solution.json", "model_summary.json", "participation.csv", "earnings.csv", "dispatch.csv"})
    CHECK(fs::exists(out / f));
}

TEST_CASE_FIXTURE(Workdir, "degradation cost lowers the expected total") {
  const std::string common = " --seed 3 --days 2 --hours 3 --markets N,D,SDCH,SCH";
  REQUIRE(run("plan" + common + " --cdeg 0 --out " + (kWork / "c0").string()) == 0);
  REQUIRE(run("plan" + common + " --cdeg 50 --out " + (kWork / "c50").string()) == 0);
  CHECK(expected_total(kWork / "c0") >= expected_total(kWork / "c50") - 1e-9);
}

TEST_CASE_FIXTURE(Workdir, "synthetic week with N, D and spot sale emits a report") {
  const fs::path out = kWork / "nds";
  const int code = run("plan --data " + std::string(BESS_DATA_DIR) + "/week --markets N,D,SDCH --step 60"
                       " --time-limit 20 --out " + out.string());
  CHECK((code == 0 || code == 4));
  const nlohmann::json sol = nlohmann::json::parse(slurp(out / "solution.json"));
  CHECK(std::abs(expected_total(out) - sol["objective"].get<double>()) <= 1e-6);
  CHECK(sol["objective"].get<double>() >= 0.0);
  CHECK(fs::exists(out / "participation.csv"));
}

TEST_CASE_FIXTURE(Workdir, "export is canonical and validates its flags") {
  const fs::path a = kWork / "m1.mps", b = kWork / "m2.mps";
  REQUIRE(run("export --seed 2 --days 1 --hours 2 --out " + a.string()) == 0);
  REQUIRE(run("export --seed 2 --days 1 --hours 2 --out " + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(run("export --format xls --out " + a.string()) == 2);
  CHECK(run("plan --markets Q") == 2);
  CHECK(run("plan --step 7") == 2);
}

TEST_CASE_FIXTURE(Workdir, "full-resolution week exports and refuses the built-in solver") {
  const fs::path week = kWork / "minute";
  REQUIRE(run("synth --seed 1 --days 7 --step 1 --out " + week.string()) == 0);
  const fs::path out = kWork / "full";
  CHECK(run("plan --data " + week.string() + " --step 1 --out " + out.string()) == 4);
  CHECK(slurp(kWork / "log.txt").find("--export-only") != std::string::npos);
  REQUIRE(run("plan --data " + week.string() + " --step 1 --export-only --out " + out.string()) == 0);
  CHECK(fs::file_size(out / "model.mps") > 0);
  const nlohmann::json summary = nlohmann::json::parse(slurp(out / "model_summary.json"));
  CHECK(summary["dimensions"]["steps"] == 1440);
  CHECK(summary["census"]["binaries"] == 24 * 4 + 7 * 24 * 4 + 7 * 24);
}

TEST_CASE_FIXTURE(Workdir, "data errors exit with code 3") {
  const fs::path bad = kWork / "bad";
  fs::create_directories(bad);
  {
    std::ofstream f(bad / "frequency.csv");
    f << "scenario_id,minute,freq_hz\nd1,1,50.0\n";
    std::ofstream p(bad / "prices.csv");
    p << "scenario_id,hour,market,threshold_price,balancing_up,balancing_down\n";
  }
  CHECK(run("plan --data " + bad.string() + " --step 60") == 3);
  const fs::path cfg = kWork / "cfg.json";
  {
    std::ofstream c(cfg);
    c << R"({"bess": {"m_0": 5.0}})";
  }
  CHECK(run("plan --config " + cfg.string()) == 3);
}
