#include "smoothboot/cli.hpp"
#include "smoothboot/simulation.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace smoothboot;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
  auto dir = fs::temp_directory_path() / "smoothboot_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_file(const std::string& name, const std::string& body)
{
  auto p = scratch(name);
  std::ofstream(p, std::ios::binary) << body;
  return p;
}

fs::path sample_file(std::size_t n, std::uint64_t seed)
{
  Stream stream{ StreamKey(seed) };
  auto s = gen_sample(ScenarioSpec::quadratic(n), stream);
  auto p = scratch("sample_" + std::to_string(n) + "_" + std::to_string(seed) + ".csv");
  std::ofstream out(p, std::ios::binary);
  cli::write_sample_csv(out, s);
  return p;
}

std::pair<int, std::string> run_to_string(const cli::RunConfig& cfg, std::string* err = nullptr)
{
  std::ostringstream out, e;
  int code = cli::run(cfg, out, e);
  if (err) {
    *err = e.str();
  }
  return { code, out.str() };
}

} // namespace

TEST_CASE("load_csv", "[cli]")
{
  auto p = write_file("three.csv", "# comment\nx,y\n0.1,1\n0.5,2\n0.9,3\n");
  auto s = cli::load_csv(p.string());
  CHECK(s.xs() == std::vector<double>{ 0.1, 0.5, 0.9 });
  CHECK(s.ys() == std::vector<double>{ 1, 2, 3 });

  auto u = cli::load_csv(write_file("unsorted.csv", "x,y\n0.9,3\n0.1,1\n0.5,2\n0.5,4\n").string());
  CHECK(u.xs() == std::vector<double>{ 0.1, 0.5, 0.9 });
  CHECK(u.ys() == std::vector<double>{ 1, 3, 3 });
  CHECK(u.counts() == std::vector<std::size_t>{ 1, 2, 1 });

  CHECK_THROWS_WITH(cli::load_csv(write_file("bad.csv", "x,y\n0.1,1\n0.2,abc\n").string()),
                    Catch::Matchers::ContainsSubstring(":3: non-numeric value"));
  CHECK_THROWS_WITH(cli::load_csv(write_file("range.csv", "x,y\n1.5,1\n").string()),
                    Catch::Matchers::ContainsSubstring("x outside [0,1]"));
  CHECK_THROWS_WITH(cli::load_csv(write_file("header.csv", "a,b\n0.1,1\n").string()),
                    Catch::Matchers::ContainsSubstring("header"));
  CHECK_THROWS_WITH(cli::load_csv(write_file("cols.csv", "x,y\n0.1,1,2\n").string()),
                    Catch::Matchers::ContainsSubstring("two"));
  CHECK_THROWS_WITH(cli::load_csv(write_file("empty.csv", "x,y\n").string()),
                    Catch::Matchers::ContainsSubstring("empty input"));
  CHECK_THROWS_WITH(cli::load_csv(scratch("does_not_exist.csv").string()),
                    Catch::Matchers::ContainsSubstring("cannot open"));
}

TEST_CASE("mendota_transform", "[cli]")
{
  std::vector<double> years, days;
  for (int y = 1854; y <= 2010; ++y) {
    years.push_back(y);
    days.push_back(120.0 - 0.1 * (y - 1854));
  }
  auto s = cli::mendota_transform(years, days);
  for (std::size_t i = 0; i < years.size(); ++i) {
    REQUIRE(s.xs()[i] == (years[i] - 1853.0) / 158.0);
    REQUIRE(s.ys()[i] == days[days.size() - 1 - i]);
  }
  CHECK(s.xs().front() == 1.0 / 158.0);
  CHECK(s.xs().back() == 157.0 / 158.0);

  auto back = cli::mendota_transform(years, s.ys());
  CHECK(back.ys() == std::vector<double>(days.begin(), days.end()));

  std::vector<double> gap{ 1900, 1901, 1903 }, d3{ 1, 2, 3 };
  CHECK_THROWS(cli::mendota_transform(gap, d3));
  std::vector<double> early{ 1850, 1851, 1852 };
  CHECK_THROWS(cli::mendota_transform(early, d3));

  auto p = write_file("mendota.csv", "x,y\n1900,100\n1901,90\n1902,95\n");
  auto m = cli::load_csv(p.string(), true);
  CHECK(m.xs() == std::vector<double>{ 47.0 / 158.0, 48.0 / 158.0, 49.0 / 158.0 });
  CHECK(m.ys() == std::vector<double>{ 95, 90, 100 });
}

TEST_CASE("csv round trip", "[cli][property]")
{
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Stream stream{ StreamKey(seed) };
    auto s = gen_sample(ScenarioSpec::logistic(30 + seed), stream);
    auto p = scratch("roundtrip.csv");
    {
      std::ofstream out(p, std::ios::binary);
      cli::write_sample_csv(out, s);
    }
    auto back = cli::load_csv(p.string());
    REQUIRE(back.xs() == s.xs());
    REQUIRE(back.ys() == s.ys());
  }

  RegressionSample tied({ 0.2, 0.6 }, { 1.0, 2.0 }, { 2, 1 });
  std::ostringstream out;
  cli::write_sample_csv(out, tied);
  CHECK(out.str() == "x,y\n0.20000000000000001,1\n0.20000000000000001,1\n0.59999999999999998,2\n");
}

TEST_CASE("grids", "[cli]")
{
  auto g = cli::unit_grid(0.25, false);
  CHECK(g == std::vector<double>{ 0.25, 0.5, 0.75 });
  CHECK(cli::unit_grid(0.25, true).back() == 1.0);
  CHECK(cli::unit_grid(0.01, false).size() == 99);
  CHECK_THROWS(cli::unit_grid(0.3, false));
  CHECK_THROWS(cli::unit_grid(0.0, false));

  auto cs = cli::c_grid(0.01, 1.0, 0.01);
  CHECK(cs.size() == 100);
  CHECK(cs.front() == 0.01);
  CHECK(cs.back() == 1.0);
  CHECK(cs[29] == 0.3);
  CHECK_THROWS(cli::c_grid(0.0, 1.0, 0.1));
  CHECK_THROWS(cli::c_grid(0.5, 0.4, 0.1));
}

TEST_CASE("run produces identical output", "[cli]")
{
  cli::RunConfig cfg;
  cfg.input = sample_file(80, 3).string();
  cfg.B = 50;
  cfg.seed = 9;
  cfg.grid_step = 0.05;

  for (auto cmd : { cli::Command::fit, cli::Command::band }) {
    for (auto est : { Estimator::slse, Estimator::nw }) {
      for (auto fmt : { cli::Format::csv, cli::Format::json }) {
        cfg.command = cmd;
        cfg.estimator = est;
        cfg.format = fmt;
        cfg.threads = 1;
        auto [c1, o1] = run_to_string(cfg);
        cfg.threads = 3;
        auto [c2, o2] = run_to_string(cfg);
        REQUIRE(c1 == 0);
        REQUIRE(c2 == 0);
        REQUIRE(o1 == o2);
      }
    }
  }
}

TEST_CASE("output formats", "[cli]")
{
  cli::RunConfig cfg;
  cfg.input = sample_file(60, 4).string();
  cfg.command = cli::Command::band;
  cfg.B = 30;
  cfg.grid_step = 0.1;

  auto [code, csv] = run_to_string(cfg);
  REQUIRE(code == 0);
  std::istringstream lines(csv);
  std::string line;
  std::size_t meta = 0, rows = 0;
  bool header = false;
  while (std::getline(lines, line)) {
    if (line.rfind("# ", 0) == 0) {
      CHECK(!header);
      CHECK(line.find('=') != std::string::npos);
      ++meta;
    } else if (!header) {
      CHECK(line == "t,estimate,lower,upper");
      header = true;
    } else {
      ++rows;
    }
  }
  CHECK(meta > 0);
  CHECK(rows == 9);

  cfg.format = cli::Format::json;
  auto [jcode, js] = run_to_string(cfg);
  REQUIRE(jcode == 0);
  auto doc = nlohmann::json::parse(js);
  CHECK(doc["meta"]["B"] == 30);
  CHECK(doc["meta"]["estimator"] == "slse");
  CHECK(doc["data"].size() == 9);
  CHECK(doc["data"][0].contains("lower"));

  cfg.command = cli::Command::fit;
  cfg.step_output = scratch("step.json").string();
  auto [fcode, fjs] = run_to_string(cfg);
  REQUIRE(fcode == 0);
  auto fit = nlohmann::json::parse(fjs);
  CHECK(fit["meta"]["step"]["knots"].size() == fit["meta"]["step"]["values"].size());
  std::ifstream step_in(cfg.step_output);
  auto step = nlohmann::json::parse(step_in);
  CHECK(step["data"].size() == fit["meta"]["step"]["knots"].size());
}

TEST_CASE("bandwidth and simulate subcommands", "[cli]")
{
  cli::RunConfig cfg;
  cfg.input = sample_file(60, 5).string();
  cfg.command = cli::Command::bandwidth;
  cfg.B = 10;
  cfg.grid_step = 0.05;
  cfg.c_min = 0.2;
  cfg.c_max = 0.8;
  cfg.c_step = 0.2;
  cfg.format = cli::Format::json;
  auto [code, js] = run_to_string(cfg);
  REQUIRE(code == 0);
  auto doc = nlohmann::json::parse(js);
  CHECK(doc["data"].size() == 4);
  double chosen = doc["meta"]["chosen_c"];
  bool found = false;
  for (const auto& row : doc["data"]) {
    found = found || row["c"].get<double>() == chosen;
  }
  CHECK(found);

  cli::RunConfig sim;
  sim.command = cli::Command::simulate;
  sim.n = 40;
  sim.M = 4;
  sim.B = 10;
  sim.grid_step = 0.25;
  auto [scode, out] = run_to_string(sim);
  REQUIRE(scode == 0);
  CHECK(out.find("t,coverage\n") != std::string::npos);
}

TEST_CASE("errors are reported as one JSON line", "[cli]")
{
  cli::RunConfig cfg;
  cfg.command = cli::Command::band;
  cfg.input = scratch("missing_input.csv").string();
  std::string err;
  auto [code, out] = run_to_string(cfg, &err);
  CHECK(code == 1);
  CHECK(out.empty());
  REQUIRE(!err.empty());
  CHECK(err.back() == '\n');
  CHECK(err.find('\n') == err.size() - 1);
  auto rec = nlohmann::json::parse(err);
  CHECK(rec["command"] == "band");
  CHECK(rec["error"].get<std::string>().find("cannot open") != std::string::npos);

  cli::RunConfig sim;
  sim.command = cli::Command::simulate;
  sim.scenario = "cubic";
  auto [scode, sout] = run_to_string(sim, &err);
  CHECK(scode == 1);
  CHECK(nlohmann::json::parse(err)["error"].get<std::string>().find("cubic") != std::string::npos);
}
