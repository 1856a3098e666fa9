#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "qfel/cli/config.hpp"
#include "qfel/cli/runner.hpp"
#include "qfel/cli/svg.hpp"
#include "qfel/cli/worker_pool.hpp"

using namespace qfel;
using namespace qfel::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qfel_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> violations_of(const std::string& text) {
  try {
    validate_config_text(text);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v) {
    if (s.find(needle) != std::string::npos) return true;
  }
  return false;
}

// rows of a CSV as string cells, header dropped
std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

}  // namespace

TEST_CASE("minimal dispersion job gets defaults") {
  const auto cfg = validate_config_text(R"({"kind":"dispersion","alpha":0.1,"kappa_grid":[-2,2,401]})");
  CHECK(cfg.kind == JobKind::dispersion);
  const auto& job = std::get<DispersionJob>(cfg.spec);
  CHECK(job.alpha == 0.1);
  CHECK(job.kappa_grid.points == 401);
  CHECK(cfg.resolved.at("workers") == 0);
  CHECK(!cfg.resolved.contains("out"));
  const auto grid = job.kappa_grid.values();
  CHECK(grid.front() == -2.0);
  CHECK(grid.back() == 2.0);
  CHECK(grid[200] == 0.0);
}

TEST_CASE("violations are all reported") {
  const auto v = violations_of(R"({"kind":"dispersion","alpha":-1,"extra":1,"kappa_grid":[1,0,3],"workers":-2})");
  CHECK(mentions(v, "alpha must be positive"));
  CHECK(mentions(v, "unknown key 'extra'"));
  CHECK(mentions(v, "kappa_grid"));
  CHECK(mentions(v, "workers"));
  CHECK(v.size() == 4);

  CHECK(mentions(violations_of(R"({"kind":"dispersion"})"), "missing required key 'alpha'"));
  CHECK(mentions(violations_of(R"({"kind":"nope"})"), "kind must be one of"));
  CHECK(mentions(violations_of(R"({"kind":"evolve","model":{"n_electrons":2,"alpha":0.1,"spin":1},"tau_grid":[0,1,2]})"),
                 "unknown key 'model.spin'"));
  CHECK(mentions(violations_of(R"({"kind":"gain-curve","alphas":[0.1],"physical":{"g":1,"omega_r":1,"q":1,"n_electrons":1}})"),
                 "exactly one"));
  CHECK(mentions(violations_of(R"({"kind":"averaging-check","window":[-2,3]})"), "order 3 needs window containing [-3, 4]"));
  CHECK(mentions(violations_of(R"({"kind":"evolve","model":{"n_electrons":2,"alpha":0.1},"seed":{"kind":"fock","n0":1.5},"tau_grid":[0,1,2]})"),
                 "integer"));
}

TEST_CASE("parse errors carry line and column") {
  const auto v = violations_of("{\n  \"kind\": \"dispersion\",\n  \"alpha\": 0.1,,\n}\n");
  REQUIRE(v.size() == 1);
  CHECK(v[0].rfind("<config>:3:", 0) == 0);
}

TEST_CASE("figure defaults are echoed") {
  const auto cfg = validate_config_text(R"({"kind":"figure","figure":"fig5"})");
  CHECK(cfg.resolved.at("n0") == 100.0);
  CHECK(std::get<FigureJob>(cfg.spec).n0 == 100.0);
  const auto f3 = validate_config_text(R"({"kind":"figure","figure":"fig3"})");
  CHECK(std::get<FigureJob>(f3.spec).kappas == std::vector<double>{0.0, 1.0, 1.5, 1.9});
  CHECK(mentions(violations_of(R"({"kind":"figure","figure":"fig3","n0":5})"), "unknown key 'n0'"));
}

TEST_CASE("evolve defaults") {
  const auto cfg = validate_config_text(R"({"kind":"evolve","model":{"n_electrons":3,"alpha":0.3},"tau_grid":[0,2,5]})");
  const auto& job = std::get<EvolveJob>(cfg.spec);
  CHECK(job.model.n_electrons == 3);
  CHECK(job.model.alpha_n() == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(job.model.delta == 0.0);
  CHECK(job.basis.mu_min == -1);
  CHECK(job.basis.n_max == 16);
  CHECK(!job.basis.charge);
  CHECK(job.integrator.scheme == Scheme::cf4);
  CHECK(cfg.resolved.at("model").at("kappa") == 0.0);
  CHECK(cfg.resolved.at("integrator").at("rtol") == 1e-7);
}

TEST_CASE("worker pool keeps index order and reports the first failure") {
  std::vector<int> out(1000);
  parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));

  try {
    parallel_for(50, 1, [&](std::size_t i) {
      if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "7");
  }
  std::atomic<int> count{0};
  parallel_for(0, 8, [&](std::size_t) { ++count; });
  CHECK(count == 0);
}

TEST_CASE("sha256 and number formatting") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(std::nan("")) == "nan");
  for (double v : {1.0 / 3.0, 5506.6, 1e-300, -2.5e17}) CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("svg output") {
  Plot p;
  p.title = "a < b";
  p.log_y = true;
  p.series = {{"s1", {0, 1, 2, 3}, {1, 10, -1, 1000}}, {"s2", {0, 1}, {2, 3}}};
  const auto svg = render_svg(p);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("a &lt; b") != std::string::npos);
  // the nonpositive point splits s1 into two polylines
  std::size_t lines = 0;
  for (std::size_t at = svg.find("<polyline"); at != std::string::npos; at = svg.find("<polyline", at + 1)) ++lines;
  CHECK(lines == 3);
}

TEST_CASE("fig3 job") {
  const auto dir = scratch("fig3");
  const auto cfg = validate_config_text(R"({"kind":"figure","figure":"fig3","workers":3})");
  const auto report = run(cfg, {dir, true, false});
  const auto table = rows(slurp(dir / "fig3.csv"));
  CHECK(table.size() == 4 * 201);
  bool found = false;
  for (const auto& r : table) {
    if (r[0] == "10" && r[1] == "0") {
      CHECK(std::abs(std::stod(r[2]) - std::pow(std::sinh(5.0), 2)) < 1e-9 * 5506.6);
      found = true;
    }
  }
  CHECK(found);
  CHECK(fs::exists(dir / "fig3.svg"));
  for (const auto& c : report.checks) CHECK(c.at("pass").get<bool>());
  fs::remove_all(dir);
}

TEST_CASE("fig6 job") {
  const auto dir = scratch("fig6");
  const auto report = run(validate_config_text(R"({"kind":"figure","figure":"fig6"})"), {dir, false, false});
  double gap = -1.0;
  for (const auto& r : rows(slurp(dir / "fig6.csv"))) {
    if (r[0] != "0.1" || r[4] == "nan" || std::abs(std::stod(r[1])) > 1.5) continue;
    gap = std::max(gap, std::abs(std::stod(r[4]) - std::stod(r[5])));
  }
  CHECK(gap >= 0.0);
  CHECK(gap <= 1e-4);
  for (const auto& c : report.checks) CHECK(c.at("pass").get<bool>());
  fs::remove_all(dir);
}

TEST_CASE("averaging-check job") {
  const auto dir = scratch("avg");
  const auto cfg = validate_config_text(R"({"kind":"averaging-check","n_electrons":[2],"dump_operators":true})");
  const auto report = run(cfg, {dir, false, false});
  bool seen = false;
  for (const auto& c : report.checks) {
    if (c.at("name") == "max|H2_analytic - H2_averaged| <= 1e-12 (interior)") {
      seen = true;
      CHECK(c.at("pass").get<bool>());
    }
  }
  CHECK(seen);
  CHECK(fs::exists(dir / "operators" / "H3_averaged_N2.txt"));
  fs::remove_all(dir);
}

TEST_CASE("reports list every file and outputs are deterministic") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto cfg = validate_config_text(
      R"({"kind":"evolve","model":{"n_electrons":2,"alpha":0.2},"basis":{"charge":0},"tau_grid":[0,3,7]})");
  const auto ra = run(cfg, {a, true, true});
  const auto rb = run(cfg, {b, true, true});
  REQUIRE(ra.files.size() == 2);
  for (const auto& f : ra.files) {
    const auto bytes = slurp(a / f.name);
    CHECK(bytes == slurp(b / f.name));
    CHECK(f.bytes == bytes.size());
    CHECK(f.sha256 == sha256_hex(bytes));
  }
  auto ja = json::parse(slurp(a / "report.json"));
  auto jb = json::parse(slurp(b / "report.json"));
  ja.erase("timing");
  jb.erase("timing");
  CHECK(ja == jb);
  CHECK(ja.at("audit").contains("max_leakage"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("failed runs leave nothing behind") {
  const auto dir = scratch("rollback");
  fs::create_directories(dir / "report.json");  // blocks the final write
  std::ofstream(dir / "keep.txt") << "mine";
  const auto cfg = validate_config_text(R"({"kind":"figure","figure":"fig5"})");
  CHECK_THROWS_AS(run(cfg, {dir, false, false}), JobError);
  CHECK(!fs::exists(dir / "fig5_fock.csv"));
  CHECK(slurp(dir / "keep.txt") == "mine");

  // a capacity failure before any write removes the directory it created
  const auto fresh = scratch("rollback_fresh");
  const auto big = validate_config_text(
      R"({"kind":"evolve","model":{"n_electrons":3,"alpha":0.1},"basis":{"n_max":2},"seed":{"kind":"fock","n0":5},"tau_grid":[0,1,2]})");
  try {
    run(big, {fresh, false, false});
    FAIL("expected failure");
  } catch (const JobError& e) {
    CHECK(std::string(e.what()).rfind("evolve job failed", 0) == 0);
  }
  CHECK(!fs::exists(fresh));
  fs::remove_all(dir);
}

#ifdef QFEL_BIN
#include <sys/wait.h>

TEST_CASE("binary exit codes") {
  const auto dir = scratch("exit");
  fs::create_directories(dir);
  auto status = [&](const std::string& body, const std::string& extra = "") {
    std::ofstream(dir / "job.json") << body;
    const std::string cmd = std::string(QFEL_BIN) + " run --config " + (dir / "job.json").string() + " --out " +
                            (dir / "out").string() + extra + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  CHECK(status(R"({"kind":"dispersion","alpha":0.1})") == 0);
  CHECK(fs::exists(dir / "out" / "report.json"));
  CHECK(status(R"({"kind":"dispersion","alpha":-0.1})") == 2);
  CHECK(status("{ not json") == 2);
  CHECK(status(R"({"kind":"dispersion","alpha":0.1})", " --no-such-flag") == 2);
  fs::remove_all(dir / "out");
  CHECK(status(R"({"kind":"evolve","model":{"n_electrons":2,"alpha":0.1},"seed":{"kind":"fock","n0":40},"tau_grid":[0,1,2]})") == 1);
  CHECK(!fs::exists(dir / "out"));
  // leaking run: a strict audit turns the raised flag into a failure
  const std::string leaky =
      R"({"kind":"evolve","model":{"n_electrons":2,"alpha":0.6},"basis":{"window":[-1,2],"n_max":3,"charge":0},)"
      R"("tau_grid":[0,6,7],"integrator":{"hard_factor":1000}})";
  CHECK(status(leaky) == 0);
  CHECK(status(leaky, " --audit") == 1);
  fs::remove_all(dir);
}
#endif
