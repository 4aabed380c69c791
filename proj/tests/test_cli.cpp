#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fpplab-cli-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Result run(const std::string& args, const fs::path& out_dir, const std::string& err_file = "") {
  const std::string err = err_file.empty() ? "/dev/null" : err_file;
  const std::string cmd = std::string(FPPLAB_EXE) + " " + args + " --out " + out_dir.string() + " 2>" + err;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("deterministic simulation through the command line") {
  const auto dir = scratch("det");
  const auto r = run("simulate-mu --d 2 --dist deterministic:1.0 --n 10 --replicas 3", dir);
  CHECK(r.code == 0);
  CHECK(r.out == "quantity,d,n,replicas,mean,stderr,exact_fraction,seed\nmu_e1,2,10,3,1,0,1,1\n");
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  CHECK(run("", dir).code == 1);
  CHECK(run("no-such-command", dir).code == 1);
  CHECK(run("simulate-mu --d 2 --dist nonsense", dir).code == 1);
  CHECK(run("certify-shape --d 268337 --pipeline sideways", dir).code == 1);
  const std::string err = (dir / "err.txt").string();
  CHECK(run("certify-upper --d 10 --delta 0.5 --eta 1e-3 --B 1", dir, err).code == 2);
  CHECK(slurp(err).find("gate failed: ") != std::string::npos);
  CHECK(run("certify-upper --d 3", dir, err).code == 2);
  CHECK(slurp(err).find("no-valid-certificate-at-d") != std::string::npos);
  CHECK(run("certify-shape --d 1000 --dist shifted:0.5:exponential:1.0", dir, err).code == 2);
  CHECK(slurp(err).find("unsupported-regime") != std::string::npos);
}

TEST_CASE("alpha-star prints the constant") {
  const auto dir = scratch("alpha");
  const auto r = run("alpha-star", dir);
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["companion"].get<double>() == doctest::Approx(0.3313).epsilon(1e-3));
}

TEST_CASE("shape certificate document") {
  const auto dir = scratch("shape");
  const auto r = run("certify-shape --d 268337 --dist exponential:1.0", dir);
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["schema"] == "fpplab.certificate/1");
  CHECK(j["verdicts"]["ball_excluded"] == true);
  CHECK(j["values"]["mu_upper"].get<double>() <= 6.38e-4);
  CHECK(j.contains("preconditions"));
  CHECK(j.contains("grid_spec"));
  CHECK(j.contains("tool_version"));
  const std::string hash = j["manifest_hash"];
  CHECK(fs::exists(dir / ("certify-shape-" + hash + ".json")));
  CHECK(fs::exists(dir / ("certify-shape-" + hash + ".manifest.json")));
}

TEST_CASE("reruns reproduce byte-identical payloads") {
  const auto a = scratch("rerun-a");
  const auto b = scratch("rerun-b");
  const std::string args = "simulate-mu --d 3 --n 3 --replicas 6 --seed 12";
  REQUIRE(run(args, a).code == 0);
  REQUIRE(run(args, b).code == 0);
  int compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto name = e.path().filename();
    REQUIRE(fs::exists(b / name));
    if (name.string().ends_with(".manifest.json")) {
      auto ja = nlohmann::json::parse(slurp(e.path()));
      auto jb = nlohmann::json::parse(slurp(b / name));
      ja.erase("timestamps");
      jb.erase("timestamps");
      CHECK(ja == jb);
    } else {
      CHECK(slurp(e.path()) == slurp(b / name));
    }
    ++compared;
  }
  CHECK(compared == 3);
}

TEST_CASE("csv outputs cite their manifest") {
  const auto dir = scratch("cite");
  REQUIRE(run("rw-overlap --p 2 --n 3", dir).code == 0);
  int csvs = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    const std::string text = slurp(e.path());
    const auto stem = e.path().stem().string();
    const std::string hash = stem.substr(stem.rfind('-') + 1);
    CHECK(text.rfind("# manifest_hash=" + hash + "\n", 0) == 0);
    ++csvs;
  }
  CHECK(csvs == 1);
}

TEST_CASE("samples carry what is needed for replay") {
  const auto dir = scratch("samples");
  REQUIRE(run("simulate-mu --d 3 --n 2 --replicas 2 --seed 4 --max-settled 100000", dir).code == 0);
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.path().string().ends_with(".samples.csv")) continue;
    std::istringstream in(slurp(e.path()));
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    CHECK(line == "quantity,d,n,replica,seed,value,exact,max_settled,max_time,box_margin");
    std::getline(in, line);
    CHECK(line.find(",1,100000,none,20") != std::string::npos);
  }
}

TEST_CASE("config files mirror flags and flags win") {
  const auto dir = scratch("config");
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# sweep\nd = 2\ndist = deterministic:1.0\nn = 4\nreplicas = 2\n";
  const auto r = run("simulate-mu --config " + cfg.string() + " --replicas 5", dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("mu_e1,2,4,5,1,0,1,1") != std::string::npos);

  std::ofstream(dir / "bad.cfg") << "colour = blue\n";
  CHECK(run("simulate-mu --config " + (dir / "bad.cfg").string(), dir).code == 1);
}

TEST_CASE("environment sets the default output directory") {
  const auto dir = scratch("env");
  const std::string cmd = "FPPLAB_OUT_DIR=" + dir.string() + " " + FPPLAB_EXE + " saw --n 3 --d 2 >/dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  CHECK(files == 2);
}
