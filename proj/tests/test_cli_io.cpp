#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spe/driver.hpp"
#include "spe/io.hpp"

using namespace spe;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("spe_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kSmallConfig = R"(
# small smoke configuration
domain.L = 2.0
domain.depth = 1.0
domain.Nx = 3
domain.Nz = 3
grid.t_end = 0.5
grid.n_steps = 20
noise.kind = additive
noise.d_W = 3
noise.sigma = 0.2
solver.eps = 1e-2 1e-3
experiment.paths = 3
experiment.master_seed = 99
init.v = 1:1:1.0
init.T = 1:1:0.4
)";

int run(const std::string& name, const RunConfig& cfg, const std::string& out) {
  std::ostringstream log;
  return run_subcommand(name, cfg, out, log);
}

}  // namespace

TEST_CASE("parse_config: defaults, validation, duplicate and unknown keys") {
  SUBCASE("empty text yields the documented defaults") {
    const ParseResult res = parse_config("");
    REQUIRE(res.ok);
    CHECK(res.config.domain.Nx == 8);
    CHECK(res.config.grid.n_steps == 400);
    CHECK(res.config.noise_kind == NoiseKind::additive);
    CHECK(res.config.lambda_exponent == 0.25);
    CHECK(res.config.paths == 64);
    CHECK(res.config.out_dir == "out");
  }

  SUBCASE("deviation-scale exponent outside (0, 1/2)") {
    const ParseResult res = parse_config("solver.lambda_exponent = 0.6\n");
    REQUIRE_FALSE(res.ok);
    REQUIRE(res.issues.size() == 1);
    CHECK(res.issues[0].line == 1);
    CHECK(res.issues[0].message.find("(0, 1/2)") != std::string::npos);
  }

  SUBCASE("duplicate keys name both lines") {
    const ParseResult res = parse_config("domain.Nx = 4\n\ndomain.Nx = 5\n");
    REQUIRE_FALSE(res.ok);
    REQUIRE(res.issues.size() == 1);
    CHECK(res.issues[0].line == 3);
    CHECK(res.issues[0].message.find("line 1") != std::string::npos);
  }

  SUBCASE("unknown keys are rejected, all errors reported") {
    const ParseResult res =
        parse_config("domain.Nx = 0\nnots.key = 1\ngrid.t_end = -2\n");
    REQUIRE_FALSE(res.ok);
    CHECK(res.issues.size() == 3);
  }

  SUBCASE("init modes outside the band") {
    const ParseResult res = parse_config("domain.Nx = 2\ndomain.Nz = 2\ninit.v = 3:1:1.0\n");
    REQUIRE_FALSE(res.ok);
    CHECK(res.issues.size() == 1);
    CHECK(res.issues[0].message.find("outside the band") != std::string::npos);
  }

  SUBCASE("comments and blank lines are ignored") {
    const ParseResult res = parse_config("# hello\n\n  domain.Nx = 5 # inline\n");
    REQUIRE(res.ok);
    CHECK(res.config.domain.Nx == 5);
  }
}

TEST_CASE("config digest: canonical, order independent, execution keys excluded") {
  const ParseResult a = parse_config("domain.Nx = 4\ngrid.n_steps = 100\n");
  const ParseResult b = parse_config("grid.n_steps = 100\ndomain.Nx = 4\n");
  REQUIRE(a.ok);
  REQUIRE(b.ok);
  CHECK(a.config.digest() == b.config.digest());

  const ParseResult c = parse_config("domain.Nx = 4\ngrid.n_steps = 101\n");
  CHECK(a.config.digest() != c.config.digest());

  const ParseResult d =
      parse_config("domain.Nx = 4\ngrid.n_steps = 100\nexperiment.threads = 2\noutput.directory = elsewhere\n");
  REQUIRE(d.ok);
  CHECK(a.config.digest() == d.config.digest());
}

TEST_CASE("subcommands: artifacts, exit codes, determinism") {
  const ParseResult parsed = parse_config(kSmallConfig);
  REQUIRE(parsed.ok);
  const RunConfig cfg = parsed.config;

  SUBCASE("identities") {
    const fs::path out = temp_dir("identities");
    CHECK(run("identities", cfg, out.string()) == kExitOk);
    const std::string csv = slurp((out / "identities.csv").string());
    CHECK(csv.find("trial,res_31") == 0);
    CHECK(read_csv_digest((out / "identities.csv").string()) == cfg.digest());
  }

  SUBCASE("hypotheses") {
    const fs::path out = temp_dir("hypotheses");
    CHECK(run("hypotheses", cfg, out.string()) == kExitOk);
    const std::string csv = slurp((out / "hypotheses.csv").string());
    CHECK(csv.find("additive") != std::string::npos);
    CHECK(csv.find("bounded_diagonal") != std::string::npos);
    CHECK(csv.find("linear_diagonal") != std::string::npos);
  }

  SUBCASE("strong with zero noise: exit 0, regression skipped") {
    RunConfig mute = cfg;
    mute.noise_sigma = {0.0};
    const fs::path out = temp_dir("strong0");
    CHECK(run("strong", mute, out.string()) == kExitOk);
    const std::string csv = slurp((out / "strong.csv").string());
    CHECK(csv.find("regression,skipped") != std::string::npos);
  }

  SUBCASE("simulate reruns are byte-identical") {
    const fs::path out1 = temp_dir("sim1");
    const fs::path out2 = temp_dir("sim2");
    CHECK(run("simulate", cfg, out1.string()) == kExitOk);
    CHECK(run("simulate", cfg, out2.string()) == kExitOk);
    CHECK(slurp((out1 / "trajectory.csv").string()) == slurp((out2 / "trajectory.csv").string()));
  }

  SUBCASE("binary trajectory layout") {
    RunConfig bcfg = cfg;
    bcfg.write_binary = true;
    const fs::path out = temp_dir("simbin");
    CHECK(run("simulate", bcfg, out.string()) == kExitOk);
    std::ifstream bin(out / "trajectory.bin", std::ios::binary);
    REQUIRE(bin);
    std::uint64_t magic = 0, dig = 0;
    std::uint32_t nx = 0, nz = 0, ns = 0;
    bin.read(reinterpret_cast<char*>(&magic), 8);
    bin.read(reinterpret_cast<char*>(&nx), 4);
    bin.read(reinterpret_cast<char*>(&nz), 4);
    bin.read(reinterpret_cast<char*>(&ns), 4);
    bin.read(reinterpret_cast<char*>(&dig), 8);
    CHECK(magic == 0x314a415254455053ULL);
    CHECK(nx == 3);
    CHECK(nz == 3);
    CHECK(ns == 21);
    double t0 = -1.0;
    bin.read(reinterpret_cast<char*>(&t0), 8);
    CHECK(t0 == 0.0);
  }

  SUBCASE("blow-up maps to exit 3 and an error artifact") {
    RunConfig bad = cfg;
    bad.blowup_guard = 1e-6;
    bad.eps_list = {1e-2};
    const fs::path out = temp_dir("blow");
    CHECK(run("simulate", bad, out.string()) == kExitBlowup);
    const std::string err = slurp((out / "error.csv").string());
    CHECK(err.find("code,where,message") == 0);
    CHECK(err.find("3,simulate") != std::string::npos);
  }

  SUBCASE("skeleton and rate artifacts") {
    RunConfig rc = cfg;
    rc.noise_d_w = 1;
    rc.rate_iters = 300;
    const fs::path out = temp_dir("rate");
    CHECK(run("skeleton", rc, out.string()) == kExitOk);
    CHECK(fs::exists(out / "skeleton.csv"));
    CHECK(run("rate", rc, out.string()) == kExitOk);
    const std::string csv = slurp((out / "rate.csv").string());
    CHECK(csv.find("adjoint_closed_form") != std::string::npos);
    CHECK(csv.find("gradient_descent") != std::string::npos);
  }
}

TEST_CASE("artifact digest mixing is rejected") {
  const fs::path out = temp_dir("mix");
  const ParseResult a = parse_config(kSmallConfig);
  REQUIRE(a.ok);
  RunConfig other = a.config;
  other.master_seed = 1;
  CHECK(run("simulate", a.config, (out / "a").string()) == kExitOk);
  CHECK(run("simulate", other, (out / "b").string()) == kExitOk);
  CHECK_NOTHROW(require_same_digest((out / "a" / "trajectory.csv").string(),
                                    (out / "a" / "trajectory.csv").string()));
  CHECK_THROWS_AS(require_same_digest((out / "a" / "trajectory.csv").string(),
                                      (out / "b" / "trajectory.csv").string()),
                  config_error);
}

TEST_CASE("CLI argument handling") {
  const fs::path dir = temp_dir("cli");
  const fs::path cfg_path = dir / "run.conf";
  {
    std::ofstream out(cfg_path);
    out << kSmallConfig << "output.directory = " << (dir / "out").string() << "\n";
  }

  auto call = [&](std::vector<std::string> args) {
    std::vector<const char*> argv = {"spe"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return std::pair<int, std::string>(code, err.str());
  };

  auto [code_ok, err_ok] = call({"simulate", "--config", cfg_path.string()});
  CHECK(code_ok == kExitOk);

  auto [code_unknown, err_unknown] = call({"frobnicate", "--config", cfg_path.string()});
  CHECK(code_unknown == kExitConfigError);
  CHECK(err_unknown.find("usage:") != std::string::npos);

  auto [code_none, err_none] = call({});
  CHECK(code_none == kExitConfigError);

  auto [code_missing, err_missing] = call({"simulate"});
  CHECK(code_missing == kExitConfigError);
  CHECK(err_missing.find("--config is required") != std::string::npos);

  // --seed override changes the sampled path, hence the artifact
  auto [c1, e1] = call({"simulate", "--config", cfg_path.string(), "--out", (dir / "s1").string()});
  auto [c2, e2] = call({"simulate", "--config", cfg_path.string(), "--seed", "7",
                        "--out", (dir / "s2").string()});
  CHECK(c1 == kExitOk);
  CHECK(c2 == kExitOk);
  CHECK(slurp((dir / "s1" / "trajectory.csv").string()) !=
        slurp((dir / "s2" / "trajectory.csv").string()));

  // bad config file: every issue with its line number
  const fs::path bad_path = dir / "bad.conf";
  {
    std::ofstream out(bad_path);
    out << "domain.Nx = 0\nsolver.lambda_exponent = 0.9\n";
  }
  auto [code_bad, err_bad] = call({"simulate", "--config", bad_path.string()});
  CHECK(code_bad == kExitConfigError);
  CHECK(err_bad.find(":1:") != std::string::npos);
  CHECK(err_bad.find(":2:") != std::string::npos);

  // with --out known, parse failures also leave a machine-readable error
  auto [code_bad2, err_bad2] =
      call({"simulate", "--config", bad_path.string(), "--out", (dir / "bad_out").string()});
  CHECK(code_bad2 == kExitConfigError);
  CHECK(slurp((dir / "bad_out" / "error.csv").string()).find("2,simulate") != std::string::npos);
}

TEST_CASE("simulate at eps = 0 runs the deterministic branch") {
  ParseResult parsed = parse_config(kSmallConfig);
  REQUIRE(parsed.ok);
  RunConfig cfg = parsed.config;
  cfg.eps_list = {0.0};
  const fs::path out = temp_dir("simdet");
  std::ostringstream log;
  CHECK(run_subcommand("simulate", cfg, out.string(), log) == kExitOk);
  CHECK(fs::exists(out / "trajectory.csv"));
}
