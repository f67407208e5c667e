#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("srm_lab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(SRM_LAB_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = slurp(out);
  o.err = slurp(err);
  return o;
}

std::string design(const std::string& name) { return std::string(SRM_DATA_DIR) + "/designs/" + name + ".json"; }

}  // namespace

TEST_CASE("topology enumerate prints 12 rows with 8 feasible") {
  const auto dir = scratch("topology");
  const auto r = run("topology enumerate --phases 3 --cores-per-phase 2 --n-max 12 --format csv", dir);
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "q,m,n,N_s,N_r,feasible,reason");
  int rows = 0, feasible = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.find(",1,NONE") != std::string::npos) ++feasible;
  }
  CHECK(rows == 12);
  CHECK(feasible == 8);
}

TEST_CASE("design validate accepts the 12/14 design") {
  const auto dir = scratch("validate");
  const auto r = run("design validate --design " + design("table1_12_14") + " --out " + (dir / "out").string(), dir);
  CHECK(r.code == 0);
  CHECK(json::parse(r.out).empty());
  CHECK(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("solve writes a field file and a manifest") {
  const auto dir = scratch("solve");
  const auto out = dir / "out";
  const auto r =
      run("solve --design " + design("table1_12_14") + " --current A=5 --theta 0 --out " + out.string(), dir);
  REQUIRE(r.code == 0);
  CHECK(fs::file_size(out / "field.vtk") > 0);
  const json m = json::parse(slurp(out / "manifest.json"));
  CHECK(m.at("command") == "solve");
  CHECK(m.at("design_hash").get<std::string>().rfind("fnv1a64:", 0) == 0);
  const auto outputs = m.at("outputs").get<std::vector<std::string>>();
  CHECK(std::find(outputs.begin(), outputs.end(), "field.vtk") != outputs.end());
  CHECK(m.at("options").at("threads").is_number_integer());
  CHECK(m.contains("tool_version"));
  CHECK(m.contains("wall_clock_s"));
  const json s = json::parse(slurp(out / "solution.json"));
  const std::string region = s.at("max_B").at("region");
  CHECK((region.rfind("stator_yoke_", 0) == 0 || region.rfind("stator_tooth_", 0) == 0));
}

TEST_CASE("usage errors exit 2 and print the synopsis") {
  const auto dir = scratch("usage");
  auto r = run("", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("Usage") != std::string::npos);
  r = run("solve --current A=5", dir);
  CHECK(r.code == 2);
  r = run("sweep --design " + design("table1_12_14") + " --convention sideways", dir);
  CHECK(r.code == 2);
  r = run("solve --design " + design("table1_12_14") + " --current A5", dir);
  CHECK(r.code == 2);
}

TEST_CASE("domain errors exit 1 and leave no manifest") {
  const auto dir = scratch("domain");
  const auto out = dir / "out";
  auto r = run("mesh --design " + (dir / "missing.json").string() + " --out " + out.string(), dir);
  CHECK(r.code == 1);
  CHECK(r.err.find("IO") != std::string::npos);
  CHECK_FALSE(fs::exists(out / "manifest.json"));

  json j = json::parse(slurp(design("table1_12_14")));
  j["b_sy_mm"] = 30.0;
  const auto bad = dir / "bad.json";
  std::ofstream(bad) << j.dump(2);
  r = run("design validate --design " + bad.string() + " --out " + out.string(), dir);
  CHECK(r.code == 1);
  CHECK(!json::parse(r.out).empty());
  CHECK_FALSE(fs::exists(out / "manifest.json"));

  r = run("solve --design " + bad.string() + " --current A=5 --out " + out.string(), dir);
  CHECK(r.code == 1);
  CHECK(r.err.find("INFEASIBLE_GEOMETRY") != std::string::npos);
  CHECK_FALSE(fs::exists(out / "manifest.json"));
}

TEST_CASE("identical sweeps give byte-identical CSV for any thread count") {
  const auto dir = scratch("determinism");
  const std::string args = "sweep --design " + design("table1_12_14") + " --currents 3,5 --theta-count 7";
  REQUIRE(run(args + " --threads 1 --out " + (dir / "a").string(), dir).code == 0);
  REQUIRE(run(args + " --threads 3 --out " + (dir / "b").string(), dir).code == 0);
  REQUIRE(run(args + " --threads 1 --out " + (dir / "c").string(), dir).code == 0);
  for (const char* f : {"sweep.csv", "summary.csv"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "c" / f));
  }
}
