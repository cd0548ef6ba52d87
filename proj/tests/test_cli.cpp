#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "abco/cli.hpp"
#include "abco/io.hpp"
#include "support.hpp"

using namespace abco;
using namespace abco::test;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

std::size_t count_files(const std::filesystem::path& dir) {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) n += e.is_regular_file();
  return n;
}

// Simulated linear-one-cp data at <dir>/sim.csv.
void simulate_into(const TempDir& dir, const std::string& scenario = "linear-one-cp") {
  const auto r = cli({"simulate", "--scenario", scenario, "--t", "100", "--seed", "7", "--out-dir", dir.path.string(),
                      "--out", "sim"});
  REQUIRE(r.code == 0);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("simulate writes data and truth") {
    TempDir dir("cli_sim");
    const auto r = cli({"simulate", "--scenario", "linear-one-cp", "--t", "100", "--seed", "7", "--out-dir",
                        dir.path.string()});
    REQUIRE(r.code == 0);
    CHECK(count_files(dir.path) == 2);
    const auto csv = read_file(dir.file("linear-one-cp.csv"));
    CHECK(count_lines(csv) == 101);
    const auto truth = nlohmann::json::parse(read_file(dir.file("linear-one-cp.truth.json")));
    CHECK(truth.at("changepoints").size() == 1);
    CHECK(r.out.find("linear-one-cp.csv") != std::string::npos);
  }

  TEST_CASE("simulate replicates get numbered suffixes") {
    TempDir dir("cli_reps");
    const auto r = cli({"simulate", "--scenario", "mean-outliers", "--reps", "5", "--out-dir", dir.path.string()});
    REQUIRE(r.code == 0);
    CHECK(count_files(dir.path) == 10);
    for (int i = 0; i < 5; ++i) {
      CHECK(std::filesystem::exists(dir.file("mean-outliers_" + std::to_string(i) + ".csv")));
      CHECK(std::filesystem::exists(dir.file("mean-outliers_" + std::to_string(i) + ".truth.json")));
    }
    CHECK(read_file(dir.file("mean-outliers_0.csv")) != read_file(dir.file("mean-outliers_1.csv")));
  }

  TEST_CASE("simulate argument errors exit 2") {
    TempDir dir("cli_bad");
    auto r = cli({"simulate", "--scenario", "no-such-thing", "--out-dir", dir.path.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("error:") == 0);
    CHECK(count_files(dir.path) == 0);
    CHECK(cli({"simulate"}).code == 2);
    CHECK(cli({"simulate", "--scenario", "linear-one-cp", "--param", "novalue", "--out-dir", dir.path.string()}).code ==
          2);
    CHECK(cli({"frobnicate"}).code == 2);
  }

  TEST_CASE("simulate is deterministic and honours parameters") {
    TempDir a("cli_det_a"), b("cli_det_b");
    const std::vector<std::string> base{"simulate", "--scenario", "multi-cp-sv", "--seed", "3", "--param", "min_sep=50"};
    auto args = base;
    args.insert(args.end(), {"--out-dir", a.path.string()});
    REQUIRE(cli(args).code == 0);
    args = base;
    args.insert(args.end(), {"--out-dir", b.path.string()});
    REQUIRE(cli(args).code == 0);
    CHECK(read_file(a.file("multi-cp-sv.csv")) == read_file(b.file("multi-cp-sv.csv")));
    const auto truth = truth_from_json(read_file(a.file("multi-cp-sv.truth.json")));
    for (std::size_t i = 1; i < truth.changepoints.size(); ++i)
      CHECK(truth.changepoints[i] - truth.changepoints[i - 1] >= 50);
  }

  TEST_CASE("fit is deterministic and prints changepoints") {
    TempDir dir("cli_fit");
    simulate_into(dir);
    const std::vector<std::string> base{"fit", "--input", dir.file("sim.csv"), "--iters", "300", "--burn", "100",
                                        "--quiet"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", dir.file("a")});
    b.insert(b.end(), {"--out", dir.file("b")});
    const auto ra = cli(a), rb = cli(b);
    REQUIRE(ra.code == 0);
    REQUIRE(rb.code == 0);
    CHECK(ra.out == rb.out);
    CHECK(read_file(dir.file("a.json")) == read_file(dir.file("b.json")));
    CHECK(read_file(dir.file("a.csv")) == read_file(dir.file("b.csv")));
    const auto rep = report_from_json(read_file(dir.file("a.json")));
    CHECK(rep.method == "abco");
    CHECK(rep.draws == 200);
    std::string expected;
    for (auto cp : rep.changepoints) expected += std::to_string(cp) + "\n";
    CHECK(ra.out == expected);
  }

  TEST_CASE("fit flags") {
    TempDir dir("cli_flags");
    simulate_into(dir, "multi-cp-sv");
    const std::vector<std::string> base{"fit", "--input", dir.file("sim.csv"), "--iters", "120", "--burn", "20",
                                        "--quiet"};
    auto args = base;
    args.insert(args.end(), {"--horseshoe", "--out", dir.file("hs")});
    REQUIRE(cli(args).code == 0);
    CHECK(report_from_json(read_file(dir.file("hs.json"))).method == "horseshoe");

    args = base;
    args.insert(args.end(), {"--d", "4"});
    CHECK(cli(args).code == 2);
    args = base;
    args.insert(args.end(), {"--burn", "500"});
    CHECK(cli(args).code == 2);
    CHECK(cli({"fit", "--input", dir.file("missing.csv"), "--quiet"}).code == 2);

    args = base;
    args.insert(args.end(), {"--no-outliers", "--no-sv", "--out", dir.file("plain")});
    REQUIRE(cli(args).code == 0);
    const auto j = nlohmann::json::parse(read_file(dir.file("plain.json")));
    CHECK(j.at("outlier_scores").empty());
    CHECK(j.at("config").at("use_sv_noise") == false);
  }

  TEST_CASE("fit in interrupted series mode") {
    TempDir dir("cli_its");
    simulate_into(dir);
    const auto r = cli({"fit", "--input", dir.file("sim.csv"), "--iters", "150", "--burn", "50", "--intervention", "50",
                        "--quiet", "--out", dir.file("its")});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(read_file(dir.file("its.json")));
    CHECK(j.at("intervention").at("pi") == 50);
    CHECK(j.at("intervention").contains("level_shift"));
    CHECK(cli({"fit", "--input", dir.file("sim.csv"), "--iters", "150", "--burn", "50", "--intervention", "500",
               "--quiet"})
              .code == 2);
  }

  TEST_CASE("evaluate a single run") {
    TempDir dir("cli_eval");
    simulate_into(dir);
    const auto truth = dir.file("sim.truth.json");
    auto r = cli({"evaluate", "--pred", truth, "--truth", truth, "--out", dir.file("m.json")});
    REQUIRE(r.code == 0);
    const auto m = nlohmann::json::parse(read_file(dir.file("m.json")));
    CHECK(m.at("adjusted_rand") == 1.0);
    CHECK(m.at("rand") == 1.0);
    CHECK(m.at("diff_cp_count") == 0);
    CHECK(m.at("avg_dist_to_true") == 0.0);

    r = cli({"evaluate", "--pred", truth, "--truth", dir.file("nope.truth.json")});
    CHECK(r.code == 2);
    CHECK(r.err.find("error:") == 0);
  }

  TEST_CASE("evaluate runs a benchmark table") {
    TempDir dir("cli_bench");
    const auto r = cli({"evaluate", "--scenario", "linear-one-cp", "--reps", "2", "--methods", "abco,horseshoe,pelt",
                        "--iters", "120", "--burn", "20", "--jobs", "2", "--csv", "--out", dir.file("table")});
    REQUIRE(r.code == 0);
    CHECK(count_lines(r.out) == 4);
    CHECK(r.out.find("Method,Rand Avg.,Adj. Rand Avg.") == 0);
    CHECK(read_file(dir.file("table.csv")) == r.out);
    CHECK(std::filesystem::exists(dir.file("table.txt")));
    CHECK(cli({"evaluate", "--scenario", "linear-one-cp", "--methods", "magic"}).code == 2);
  }

  TEST_CASE("report rebuilds the flat csv") {
    TempDir dir("cli_report");
    simulate_into(dir);
    REQUIRE(cli({"fit", "--input", dir.file("sim.csv"), "--iters", "120", "--burn", "20", "--quiet", "--out",
                 dir.file("r")})
                .code == 0);
    const auto r = cli({"report", "--input", dir.file("r.json"), "--data", dir.file("sim.csv"), "--out",
                        dir.file("again.csv")});
    REQUIRE(r.code == 0);
    CHECK(read_file(dir.file("again.csv")) == read_file(dir.file("r.csv")));
    CHECK_FALSE(r.out.empty());
  }

  TEST_CASE("help for every command exits 0") {
    for (const std::vector<std::string>& args :
         {std::vector<std::string>{"--help"}, {"simulate", "--help"}, {"fit", "--help"}, {"evaluate", "--help"},
          {"report", "--help"}}) {
      const auto r = cli(args);
      CHECK(r.code == 0);
      CHECK_FALSE(r.out.empty());
    }
    const auto fit_help = cli({"fit", "--help"}).out;
    for (const char* flag : {"--input", "--d", "--iters", "--burn", "--thin", "--seed", "--no-sv", "--no-outliers",
                             "--horseshoe", "--intervention", "--out"})
      CHECK(fit_help.find(flag) != std::string::npos);
    const auto sim_help = cli({"simulate", "--help"}).out;
    for (const char* flag : {"--scenario", "--t", "--seed", "--reps", "--param", "--out-dir"})
      CHECK(sim_help.find(flag) != std::string::npos);
  }
}
