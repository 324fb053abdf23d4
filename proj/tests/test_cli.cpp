#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#include <sstream>

#include "test_support.hpp"

using namespace tabpfgen;
using namespace testsupport;

#ifndef TABPFGEN_CLI
#error "TABPFGEN_CLI must point at the CLI binary"
#endif

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args, const TempDir& dir, const std::string& tag) {
  const std::string out_path = dir.file("cli_" + tag + ".out");
  const std::string err_path = dir.file("cli_" + tag + ".err");
  const std::string cmd =
      std::string(TABPFGEN_CLI) + " " + args + " >" + out_path + " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

// Drops the timestamp plus the echoed out-dir, which differs between the
// paired runs by construction.
std::string strip_timestamps(const std::string& text) {
  std::stringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("timestamp") == std::string::npos && line.find("io.out_dir") == std::string::npos)
      out += line + "\n";
  return out;
}

std::string moons_csv(const TempDir& dir, Eigen::Index n, std::uint64_t seed) {
  const std::string path = dir.file("moons_" + std::to_string(n) + "_" + std::to_string(seed) + ".csv");
  save_csv(path, make_two_moons(n, 0.1, seed));
  return path;
}

}  // namespace

TEST_CASE("cli generate is byte-deterministic", "[cli]") {
  TempDir dir("gen_det");
  const std::string train = moons_csv(dir, 60, 1);
  const std::string base = " generate --input " + train +
                           " --counts 0:5,1:5 --seed 7 --sgld.eta 15 --label-col label";
  const auto a = run_cli(base + " --out-dir " + dir.file("a"), dir, "a");
  const auto b = run_cli(base + " --out-dir " + dir.file("b"), dir, "b");
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  const std::string csv_a = slurp(dir.file("a") + "/synthetic.csv");
  const std::string csv_b = slurp(dir.file("b") + "/synthetic.csv");
  REQUIRE(!csv_a.empty());
  CHECK(csv_a == csv_b);
  CHECK(strip_timestamps(slurp(dir.file("a") + "/generate_report.json")) ==
        strip_timestamps(slurp(dir.file("b") + "/generate_report.json")));
}

TEST_CASE("cli reports missing input files with a machine-parseable code", "[cli]") {
  TempDir dir("gen_missing");
  const auto r = run_cli(" generate --input " + dir.file("absent.csv") +
                             " --counts 0:1 --out-dir " + dir.str(),
                         dir, "x");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("error_code=io_missing_file") != std::string::npos);
  CHECK(r.err.find('\n') == r.err.size() - 1);  // single line
}

TEST_CASE("cli rejects unknown configuration keys", "[cli]") {
  TempDir dir("cfg_bad");
  write_file(dir.file("bad.cfg"), "sgld.alpha = 0.01\nnot.a.key = 1\n");
  const std::string train = moons_csv(dir, 20, 2);
  const auto r = run_cli(" generate --input " + train + " --counts 0:1,1:1 --config " +
                             dir.file("bad.cfg") + " --out-dir " + dir.str(),
                         dir, "x");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("error_code=unknown_config_key") != std::string::npos);
  CHECK(r.err.find("not.a.key") != std::string::npos);
}

TEST_CASE("cli full variant with zero lambda equals core bitwise", "[cli]") {
  TempDir dir("lambda0");
  const std::string train = moons_csv(dir, 50, 3);
  const std::string common = " generate --input " + train +
                             " --counts 0:6,1:6 --seed 11 --sgld.eta 12 ";
  const auto a =
      run_cli(common + "--energy.variant full --energy.lambda 0 --out-dir " + dir.file("full0"),
              dir, "a");
  const auto b = run_cli(common + "--energy.variant core --out-dir " + dir.file("core"), dir, "b");
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(dir.file("full0") + "/synthetic.csv") == slurp(dir.file("core") + "/synthetic.csv"));
}

TEST_CASE("cli balance equalizes and inspect confirms it", "[cli]") {
  TempDir dir("balance");
  Rng rng(5);
  Matrix x(100, 2);
  std::vector<int> y;
  for (Eigen::Index i = 0; i < 100; ++i) {
    const int cls = i < 90 ? 0 : 1;
    x(i, 0) = (cls == 0 ? -1.0 : 1.0) + 0.5 * rng.normal();
    x(i, 1) = rng.normal();
    y.push_back(cls);
  }
  save_csv(dir.file("imb.csv"), make_dataset(x, y, 2));

  const auto r = run_cli(" balance --input " + dir.file("imb.csv") +
                             " --target equalize --seed 3 --sgld.eta 10 --out-dir " + dir.str() +
                             " --emit-provenance",
                         dir, "bal");
  REQUIRE(r.exit_code == 0);
  const auto ins = run_cli(" inspect --input " + dir.str() + "/balanced.csv", dir, "ins");
  REQUIRE(ins.exit_code == 0);
  const auto j = nlohmann::json::parse(ins.out);
  REQUIRE(j["classes"].size() == 2);
  CHECK(j["classes"][0]["count"] == 90);
  CHECK(j["classes"][1]["count"] == 90);
  CHECK(j["synthetic_rows"] == 80);
}

TEST_CASE("cli impute reports rmse for both methods", "[cli]") {
  TempDir dir("impute");
  save_csv(dir.file("full.csv"), make_correlated_gaussian(60, 0.9, 4));
  const auto r = run_cli(" impute --input " + dir.file("full.csv") +
                             " --missing-fraction 0.3 --seed 5 --sgld.eta 40 --out-dir " +
                             dir.str(),
                         dir, "imp");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(slurp(dir.str() + "/impute_report.json"));
  REQUIRE(j["results"].size() == 1);
  CHECK(j["results"][0].contains("rmse_tabpfgen"));
  CHECK(j["results"][0].contains("rmse_mean"));
  CHECK(j["results"][0]["missing_cells"] == 36);  // 0.3 * 120 cells
}

TEST_CASE("cli demo writes well-formed svg and a full grid", "[cli]") {
  TempDir dir("demo");
  const auto r = run_cli(" demo-two-moons --demo.n 80 --sgld.eta 10 --seed 2 --out-dir " +
                             dir.str(),
                         dir, "demo");
  REQUIRE(r.exit_code == 0);
  for (const std::string name : {"two_moons_scatter.svg", "two_moons_contours.svg",
                                 "two_moons_marginal_x.svg", "two_moons_marginal_y.svg"}) {
    const std::string svg = slurp(dir.str() + "/" + name);
    REQUIRE(!svg.empty());
    std::size_t opens = 0, closes = 0, at = 0;
    while ((at = svg.find("<svg", at)) != std::string::npos) { ++opens; at += 4; }
    at = 0;
    while ((at = svg.find("</svg>", at)) != std::string::npos) { ++closes; at += 6; }
    CHECK(opens == 1);
    CHECK(closes == 1);
  }
  const std::string grid = slurp(dir.str() + "/two_moons_grid.csv");
  const auto lines = static_cast<std::size_t>(std::count(grid.begin(), grid.end(), '\n'));
  CHECK(lines == 10001);  // header + 100 x 100 cells
  CHECK(grid.rfind("x,y,density_real,density_synth\n", 0) == 0);
}

TEST_CASE("cli eval writes the requested grid and echoes defaults", "[cli]") {
  TempDir dir("eval");
  const std::string data = moons_csv(dir, 80, 6);
  const auto r = run_cli(" eval --input " + data +
                             " --tasks replace,augment --generators smote,sampling"
                             " --downstreams logreg --seeds 1,2,3 --out-dir " +
                             dir.file("e1") + " --emit-csv",
                         dir, "e1");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(slurp(dir.file("e1") + "/eval_report.json"));
  CHECK(j["cells"].size() == 4);  // 2 tasks x 2 generators x 1 downstream
  for (const auto& cell : j["cells"]) REQUIRE(cell["runs"].size() == 3);
  CHECK(j["config"]["eval.generators"] == "smote,sampling");

  // Determinism modulo the timestamp field.
  const auto r2 = run_cli(" eval --input " + data +
                              " --tasks replace,augment --generators smote,sampling"
                              " --downstreams logreg --seeds 1,2,3 --out-dir " +
                              dir.file("e2") + " --emit-csv",
                          dir, "e2");
  REQUIRE(r2.exit_code == 0);
  CHECK(strip_timestamps(slurp(dir.file("e1") + "/eval_report.json")) ==
        strip_timestamps(slurp(dir.file("e2") + "/eval_report.json")));
  CHECK(slurp(dir.file("e1") + "/eval_report.csv") == slurp(dir.file("e2") + "/eval_report.csv"));

  // Omitting the generator list falls back to the documented default set.
  const auto r3 = run_cli(" eval --input " + data +
                              " --tasks replace --downstreams knn --seeds 1 --out-dir " +
                              dir.file("e3"),
                          dir, "e3");
  REQUIRE(r3.exit_code == 0);
  const auto j3 = nlohmann::json::parse(slurp(dir.file("e3") + "/eval_report.json"));
  CHECK(j3["config"]["eval.generators"] == "original,sampling,smote,tabpfgen");
  CHECK(j3["cells"].size() == 4);
}

TEST_CASE("cli smote and mean-impute baselines run standalone", "[cli]") {
  TempDir dir("base");
  const std::string train = moons_csv(dir, 40, 8);
  const auto r = run_cli(" smote --input " + train + " --seed 4 --out-dir " + dir.str(), dir, "s");
  REQUIRE(r.exit_code == 0);
  const Dataset synth = load_csv(dir.str() + "/smote.csv", "label");
  CHECK(synth.class_histogram() == std::vector<long>{20, 20});

  save_csv(dir.file("full.csv"), make_correlated_gaussian(30, 0.8, 9));
  const auto m = run_cli(" mean-impute --input " + dir.file("full.csv") +
                             " --missing-fraction 0.2 --seed 3 --out-dir " + dir.str(),
                         dir, "m");
  REQUIRE(m.exit_code == 0);
  const auto j = nlohmann::json::parse(slurp(dir.str() + "/mean_impute_report.json"));
  CHECK(j["results"][0].contains("rmse_mean"));
  CHECK_FALSE(j["results"][0].contains("rmse_tabpfgen"));
}
