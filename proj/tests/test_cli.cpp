// End-to-end exercises of the command-line tool: exit-code taxonomy,
// report schemas, and byte-identical reproducibility across worker
// counts and manifest re-runs.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

#ifndef SHRINKLAB_CLI_PATH
#error "SHRINKLAB_CLI_PATH must name the built tool"
#endif

namespace {

const fs::path kTool = SHRINKLAB_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("shrinklab_cli_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run(const std::string& args) {
  const std::string cmd = kTool.string() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json slurp_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("identity suite runs clean") {
  TempDir tmp;
  CHECK(run("identity-suite --seed 5 --out " + (tmp.path / "ids").string() +
            " --config /dev/null") == 2);  // empty file is invalid JSON
  CHECK(run("identity-suite --seed 5 --out " + (tmp.path / "ids").string()) ==
        0);
  const json rep = slurp_json(tmp.path / "ids" / "identity_suite.json");
  CHECK(rep.at("all_pass").get<bool>());
  CHECK(rep.at("trials").get<int>() == 100000);
  CHECK(rep.at("config").at("seed").get<int>() == 5);
  CHECK(rep.contains("provenance"));
}

TEST_CASE("exit code taxonomy") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "cfg.json";

  // 2: schema violation points at the offending field
  write_file(cfg, R"({"dist":{"dist":"normal","sd":-1}})");
  CHECK(run("gfun --config " + cfg.string() + " --out " +
            (tmp.path / "a").string()) == 2);
  write_file(cfg, R"({"n":100})");
  CHECK(run("solve-rn --config " + cfg.string() + " --out " +
            (tmp.path / "b").string()) == 2);

  // 4: precondition failures (n below threshold; inapplicable regime)
  write_file(cfg,
             R"({"process":{"kind":"iid","marginal":{"dist":"normal"}},"n":1,"reps":500})");
  CHECK(run("solve-rn --config " + cfg.string() + " --out " +
            (tmp.path / "c").string()) == 4);
  write_file(
      cfg,
      R"({"process":{"kind":"cancellation_chain","lambda":0.4},"n_grid":[50],"reps":200})");
  CHECK(run("clt-run --config " + cfg.string() + " --out " +
            (tmp.path / "d").string()) == 4);

  // unknown subcommand / flag: parse error -> 2
  CHECK(run("no-such-command") == 2);
}

TEST_CASE("check-tails report discriminates the laplace law") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "cfg.json";
  write_file(cfg, R"({"dist":{"dist":"laplace","rate":1.0}})");
  const fs::path out = tmp.path / "tails";
  REQUIRE(run("check-tails --config " + cfg.string() + " --out " +
              out.string()) == 0);
  const json rep = slurp_json(out / "tail_report.json");
  CHECK(rep.at("holds_positivity").get<bool>());
  CHECK_FALSE(rep.at("holds_ratio_vanishes").get<bool>());
  for (const auto& pt : rep.at("ratio_curve")) {
    const double eps = pt.at("eps").get<double>();
    const double ratio = pt.at("ratio").get<double>();
    CHECK(ratio == doctest::Approx(std::exp(-eps)).epsilon(1e-6));
  }
}

TEST_CASE("cancellation demo report") {
  TempDir tmp;
  const fs::path out = tmp.path / "cd";
  REQUIRE(run("cancellation-demo --seed 9 --out " + out.string()) == 0);
  const json rep = slurp_json(out / "cancellation.json");
  const double freq = rep.at("empirical_zero_freq").get<double>();
  const double se = rep.at("freq_se").get<double>();
  CHECK(freq >= 0.6 - 3.0 * se);
  CHECK(rep.at("exact_rest_prob").get<double>() >= 0.6);
  CHECK(rep.at("lower_bound").get<double>() == doctest::Approx(0.6));
}

TEST_CASE("byte-identical outputs across worker counts and manifest reruns") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "cfg.json";
  write_file(
      cfg,
      R"({"process":{"kind":"gaussian_ar1","phi":0.5},"n":200,"reps":800,"tol":0.05,"seed":33})");

  const fs::path out1 = tmp.path / "w1";
  const fs::path out2 = tmp.path / "w2";
  const fs::path out3 = tmp.path / "rerun";
  REQUIRE(run("solve-rn --config " + cfg.string() + " --workers 1 --out " +
              out1.string()) == 0);
  REQUIRE(run("solve-rn --config " + cfg.string() + " --workers 4 --out " +
              out2.string()) == 0);
  // re-run from the manifest the first run wrote
  REQUIRE(run("solve-rn --config " + (out1 / "manifest.json").string() +
              " --workers 3 --out " + out3.string()) == 0);

  for (const char* name : {"rn_solve.json", "manifest.json"}) {
    const std::string a = slurp(out1 / name);
    CHECK(a == slurp(out2 / name));
    CHECK(a == slurp(out3 / name));
    CHECK_FALSE(a.empty());
  }

  // manifest command mismatch is a config error
  CHECK(run("gfun --config " + (out1 / "manifest.json").string() +
            " --out " + (tmp.path / "bad").string()) == 2);
}

TEST_CASE("sample-path csv export") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "cfg.json";
  write_file(
      cfg,
      R"({"process":{"kind":"cancellation_chain","lambda":0.4},"n":25,"seed":4})");
  const fs::path out = tmp.path / "path";
  REQUIRE(run("sample-path --config " + cfg.string() + " --out " +
              out.string()) == 0);
  const std::string csv = slurp(out / "path.csv");
  CHECK(csv.rfind("k,x,v\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 26);
}

TEST_CASE("mixing-exact on a matrix and on the chain") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "cfg.json";
  write_file(cfg, R"({"joint":[[0.5,0.0],[0.0,0.5]]})");
  const fs::path out = tmp.path / "mx";
  REQUIRE(run("mixing-exact --config " + cfg.string() + " --out " +
              out.string()) == 0);
  const json rep = slurp_json(out / "mixing.json");
  CHECK(rep.at("alpha").get<double>() == doctest::Approx(0.25));
  CHECK(rep.at("rho").get<double>() == doctest::Approx(1.0));

  write_file(cfg, R"({"chain":{"lambda":0.4,"max_lag":12}})");
  const fs::path out2 = tmp.path / "mxc";
  REQUIRE(run("mixing-exact --config " + cfg.string() + " --out " +
              out2.string()) == 0);
  const json chain = slurp_json(out2 / "mixing.json");
  CHECK(chain.at("theta").get<double>() == doctest::Approx(0.1));
  CHECK(chain.at("lag1").at("alpha").get<double>() <= 0.2);
  CHECK(chain.at("log_r_squared").get<double>() >= 0.99);
  CHECK(chain.at("excursion_boundary_correlation").get<double>() ==
        doctest::Approx(1.0).epsilon(1e-12));
}
