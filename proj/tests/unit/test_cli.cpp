#ifndef LEVYMAX_NO_CLI

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "experiments.hpp"

namespace fs = std::filesystem;
using namespace levymax::cli;

namespace {

const std::string kBdg = R"(kind: bdg
seed: 1
p: 2
horizon: 1
space: {kind: lq, dim: 1, q: 2, r: 2}
marks:
  atoms:
    - {id: unit, weight: 1.0, value: [1.0]}
mc: {n_paths: 500, n_steps: 4}
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("levymax-test-" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& file, const std::string& text) const {
    std::ofstream(path / file) << text;
    return path / file;
  }
};

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("valid config parses with defaults") {
    const ExperimentConfig c = parse_config(kBdg);
    CHECK(c.kind == "bdg");
    CHECK(c.space.dim == 1);
    CHECK(c.marks.atoms.size() == 1);
    CHECK(c.integrand.name == "marks");
    CHECK(c.integrand.scale == 1.0);
    CHECK(c.mc.n_paths == 500);
    CHECK_FALSE(c.semigroup.has_value());
  }

  TEST_CASE("r outside (1,2] is rejected with its line") {
    const std::string msg = error_of(replace(kBdg, "r: 2}", "r: 3}"));
    CHECK(msg.find("line 5") != std::string::npos);
    CHECK(msg.find("space.r") != std::string::npos);
    CHECK(msg.find("(1,2]") != std::string::npos);
  }

  TEST_CASE("unknown keys are rejected at any depth") {
    CHECK(error_of(kBdg + "colour: blue\n").find("unknown key 'colour'") != std::string::npos);
    const std::string nested = error_of(replace(kBdg, "n_steps: 4", "n_steps: 4, n_pahts: 3"));
    CHECK(nested.find("unknown key 'n_pahts'") != std::string::npos);
    CHECK(nested.find("line 9") != std::string::npos);
  }

  TEST_CASE("blocks foreign to the kind are rejected") {
    const std::string msg = error_of(kBdg + "tail: {lambda: 0.1}\n");
    CHECK(msg.find("not used by kind 'bdg'") != std::string::npos);
  }

  TEST_CASE("type and hypothesis errors") {
    CHECK(error_of(replace(kBdg, "p: 2", "p: two")).find("wrong type") != std::string::npos);
    CHECK(error_of(replace(kBdg, "weight: 1.0", "weight: -1.0")).find("positive") != std::string::npos);
    CHECK(error_of(replace(kBdg, "value: [1.0]", "value: [1.0, 2.0]")).find("dimension 1") != std::string::npos);
    CHECK(error_of(replace(kBdg, "kind: bdg", "kind: nonsense")).find("unknown experiment kind") != std::string::npos);
    CHECK(error_of("kind: lp\np: 1.5\nspace: {kind: lq, dim: 1}\nmarks: {atoms: [{weight: 1, value: 1}]}\n")
              .find("p >= r") != std::string::npos);
    CHECK(error_of("kind: conv-maximal\nspace: {kind: lq, dim: 1}\nmarks: {atoms: [{weight: 1, value: 1}]}\n")
              .find("semigroup") != std::string::npos);
    CHECK_FALSE(error_of("").empty());
    CHECK(error_of("kind: [unclosed\n").find("line") != std::string::npos);
  }

  TEST_CASE("layered marks allow zero mass") {
    const ExperimentConfig c = parse_config(
        "kind: integral\nspace: {kind: lq, dim: 1}\nmarks:\n  layers:\n"
        "    - {id: off, mass: 0, law: {kind: point, value: 1}}\n");
    REQUIRE(c.marks.layers.size() == 1);
    CHECK(c.marks.layers[0].mass == 0.0);
  }

  TEST_CASE("config hash is stable and sensitive") {
    const std::string h = config_hash(parse_config(kBdg));
    CHECK(h.size() == 16);
    CHECK(h == config_hash(parse_config(kBdg)));
    // Comments, key order and worker count do not matter.
    CHECK(h == config_hash(parse_config("# comment\n" + kBdg)));
    CHECK(h == config_hash(parse_config(replace(kBdg, "n_steps: 4", "n_steps: 4, jobs: 3"))));
    CHECK(h != config_hash(parse_config(replace(kBdg, "seed: 1", "seed: 2"))));
    CHECK(h != config_hash(parse_config(replace(kBdg, "weight: 1.0", "weight: 1.5"))));
  }

  TEST_CASE("csv rendering") {
    const std::string csv = render_csv({}, "0123456789abcdef", 1);
    CHECK(csv == std::string(kCsvHeader) + "\n");
    const std::string header = kCsvHeader;
    for (const char* col : {"name", "lhs", "rhs", "ratio", "verdict", "config_hash", "seed"})
      CHECK(header.find(col) != std::string::npos);
  }

  TEST_CASE("describe covers every kind") {
    for (const auto& kind : experiment_kinds()) CHECK_FALSE(describe(kind).empty());
    CHECK_THROWS_AS(describe("nonsense"), ConfigError);
    std::ostringstream out, err;
    CHECK(describe_command("nonsense", out, err) == kExitError);
    CHECK_FALSE(err.str().empty());
  }

  TEST_CASE("run writes reports and returns the verdict code") {
    TempDir tmp("run");
    const fs::path cfg = tmp.write("bdg.yaml", kBdg);
    RunOptions opt;
    opt.out_dir = (tmp.path / "out").string();
    std::ostringstream out, err;
    REQUIRE(run_command(cfg.string(), opt, out, err) == kExitHolds);
    for (const char* f : {"manifest.json", "report.json", "report.csv"}) CHECK(fs::exists(tmp.path / "out" / f));
    CHECK(out.str().find("verdict: holds") != std::string::npos);
    const std::string manifest = slurp(tmp.path / "out" / "manifest.json");
    CHECK(manifest.find(config_hash(parse_config(kBdg))) != std::string::npos);
  }

  TEST_CASE("violated run exits 2, errors exit 1") {
    TempDir tmp("codes");
    RunOptions opt;
    opt.out_dir = (tmp.path / "out").string();
    std::ostringstream out, err;
    CHECK(run_command(std::string(LEVYMAX_TEST_DATA) + "/violated.yaml", opt, out, err) == kExitViolated);
    CHECK(run_command((tmp.path / "missing.yaml").string(), opt, out, err) == kExitError);
    const fs::path bad = tmp.write("bad.yaml", replace(kBdg, "r: 2}", "r: 3}"));
    std::ostringstream err2;
    CHECK(run_command(bad.string(), opt, out, err2) == kExitError);
    CHECK(err2.str().find("line 5") != std::string::npos);
  }

  TEST_CASE("reports do not depend on the worker count") {
    TempDir tmp("jobs");
    const fs::path cfg = tmp.write("lp.yaml", slurp(std::string(LEVYMAX_TEST_DATA) + "/lp.yaml"));
    std::ostringstream out, err;
    RunOptions a, b;
    a.out_dir = (tmp.path / "a").string();
    a.jobs = 1;
    b.out_dir = (tmp.path / "b").string();
    b.jobs = 3;
    REQUIRE(run_command(cfg.string(), a, out, err) == kExitHolds);
    REQUIRE(run_command(cfg.string(), b, out, err) == kExitHolds);
    CHECK(slurp(tmp.path / "a" / "report.json") == slurp(tmp.path / "b" / "report.json"));
    CHECK(slurp(tmp.path / "a" / "report.csv") == slurp(tmp.path / "b" / "report.csv"));
  }

  TEST_CASE("seed override changes the hash") {
    TempDir tmp("seed");
    const fs::path cfg = tmp.write("bdg.yaml", kBdg);
    RunOptions opt;
    opt.out_dir = (tmp.path / "out").string();
    opt.seed = 99;
    std::ostringstream out, err;
    REQUIRE(run_command(cfg.string(), opt, out, err) == kExitHolds);
    CHECK(slurp(tmp.path / "out" / "manifest.json").find("\"seed\": 99") != std::string::npos);
  }

  TEST_CASE("sweeps") {
    TempDir tmp("sweep");
    const fs::path cfg = tmp.write("bdg.yaml", kBdg);
    RunOptions opt;
    opt.out_dir = (tmp.path / "out").string();
    std::ostringstream out, err;
    REQUIRE(sweep_command(cfg.string(), {"scale=0.25,1,4"}, opt, out, err) == kExitHolds);
    const std::string csv = slurp(tmp.path / "out" / "sweep.csv");
    CHECK(csv.rfind("scale,", 0) == 0);
    CHECK(csv.find("sweep.homogeneity") != std::string::npos);

    const std::string tail = slurp(std::string(LEVYMAX_TEST_DATA) + "/tail.yaml");
    const fs::path tcfg = tmp.write("tail.yaml", tail);
    opt.out_dir = (tmp.path / "tail").string();
    REQUIRE(sweep_command(tcfg.string(), {"radius=1,2,4"}, opt, out, err) == kExitHolds);
    CHECK(slurp(tmp.path / "tail" / "sweep.csv").find("sweep.monotone") != std::string::npos);

    std::ostringstream e1, e2, e3;
    CHECK(sweep_command(cfg.string(), {"colour=1,2"}, opt, out, e1) == kExitError);
    CHECK(sweep_command(cfg.string(), {"scale=1,x"}, opt, out, e2) == kExitError);
    CHECK(sweep_command(cfg.string(), {}, opt, out, e3) == kExitError);
  }

  TEST_CASE("dt sweep on the Wiener residual fits a slope") {
    TempDir tmp("dt");
    const fs::path cfg = tmp.write("levy.yaml", slurp(std::string(LEVYMAX_TEST_DATA) + "/ito-levy.yaml"));
    RunOptions opt;
    opt.out_dir = (tmp.path / "out").string();
    std::ostringstream out, err;
    const int code = sweep_command(cfg.string(), {"dt=0.015625,0.00390625,0.0009765625"}, opt, out, err);
    CHECK(code != kExitError);
    CHECK(slurp(tmp.path / "out" / "sweep.csv").find("sweep.slope") != std::string::npos);
  }
}

#endif
