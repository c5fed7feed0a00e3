// End-to-end checks of the command-line tool: spawns the built binary and
// inspects its outputs and exit codes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bgs/matrices.hpp"

namespace {

namespace fs = std::filesystem;

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "bgs_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BGS_CLI_PATH) + " " + args + " > " +
                          (work_dir() / "stdout.txt").string() + " 2> " +
                          (work_dir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string read_stdout() {
  std::ifstream in(work_dir() / "stdout.txt");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("generate then read back") {
  const auto out = work_dir() / "gen";
  REQUIRE(run_cli("--out " + out.string() +
                  " generate --kind alpha_beta --n 8 --alpha 1 --beta 4 --file a.spdmat") == 0);
  const bgs::SpdMatrix a = bgs::read_matrix((out / "a.spdmat").string());
  CHECK(a.n() == 8);
  CHECK(a(0, 0) == doctest::Approx(1.5));
}

TEST_CASE("estimate prints the key=value block") {
  REQUIRE(run_cli("estimate --kind alpha_beta --n 8 --alpha 1 --beta 4 --sampler random --p 2") ==
          0);
  const std::string text = read_stdout();
  CHECK(text.find("mu=") != std::string::npos);
  CHECK(text.find("nu=") != std::string::npos);
  CHECK(text.find("method=exact_enumeration") != std::string::npos);
}

TEST_CASE("solve writes a trace csv") {
  const auto out = work_dir() / "solve";
  REQUIRE(run_cli("--out " + out.string() +
                  " solve --kind alpha_beta --n 16 --alpha 1 --beta 20 --solver "
                  "accel_gauss_seidel --constants exact --sampler random --p 4 --iters 400 "
                  "--seed 3 --threshold 1e-8 --trace-out t.csv") == 0);
  std::ifstream in(out / "t.csv");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# solver=accel_gauss_seidel", 0) == 0);
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("iter,seconds,rel_err,f_value", 0) == 0) header = true;
  }
  CHECK(header);
}

TEST_CASE("constraint violations exit with code 1") {
  CHECK(run_cli("generate --kind alpha_beta --n 8 --alpha 0 --beta 1 --file bad.spdmat") == 1);
  CHECK(run_cli("solve --kind alpha_beta --n 8 --alpha 1 --beta 1 --solver nope") == 1);
}

TEST_CASE("numerical failures exit with code 2") {
  // ACDM over a single full block degenerates the scalar recursion.
  CHECK(run_cli("solve --kind alpha_beta --n 8 --alpha 1 --beta 1 --solver acdm "
                "--sampler fixed --p 8 --iters 5") == 2);
}

TEST_CASE("bench consumes a config file") {
  const auto out = work_dir() / "bench";
  const auto cfg_path = work_dir() / "exp.cfg";
  {
    std::ofstream cfg(cfg_path);
    cfg << "[system]\nkind = alpha_beta\nn = 16\nalpha = 1\nbeta = 20\nrhs_seed = 1\n"
        << "[sampler uniform]\nmode = random\np = 4\n"
        << "[solver gs]\nmethod = gauss_seidel\n"
        << "[run]\niters = 500\nseeds = 1\nthresholds = 1e-2 1e-4\nout = " << out.string()
        << "\n";
  }
  REQUIRE(run_cli("bench --config " + cfg_path.string()) == 0);
  CHECK(fs::exists(out / "summary.csv"));
  CHECK(fs::exists(out / "trace_gs_uniform_seed1.csv"));
}

TEST_CASE("krr subcommand runs on synthetic blobs") {
  const auto out = work_dir() / "krr";
  REQUIRE(run_cli("--out " + out.string() +
                  " krr --blobs 80,2,5 --gamma 0.5 --lambda 0.1 --solver accel_gauss_seidel "
                  "--sampler random --block-size 8 --iters 600 --seed 1 --threshold 1e-6 "
                  "--trace-out k.csv") == 0);
  CHECK(fs::exists(out / "k.csv"));
  CHECK(read_stdout().find("final_rel_err") != std::string::npos);
}

TEST_CASE("constants-report emits the table") {
  const auto out = work_dir() / "report";
  REQUIRE(run_cli("--out " + out.string() + " constants-report --n 8 --p-list 2 --file c.csv") ==
          0);
  std::ifstream in(out / "c.csv");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "ensemble,p,mu,nu,nu_lower,nu_upper,tightness");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("tune prints a selected pair") {
  REQUIRE(run_cli("tune --kind alpha_beta --n 12 --alpha 1 --beta 10 --sampler random --p 3 "
                  "--mu-grid 0.1,0.3 --nu-grid 2,4 --pilot-iters 150 --threshold 1e-4") == 0);
  const std::string text = read_stdout();
  CHECK(text.find("mu=") != std::string::npos);
  CHECK(text.find("tau=") != std::string::npos);
}

TEST_CASE("sweep emits its summary") {
  const auto out = work_dir() / "sweep";
  REQUIRE(run_cli("--out " + out.string() +
                  " sweep --kind alpha_beta --n 16 --alpha 1 --beta 10 --solver gauss_seidel "
                  "--sampler random --p-list 2,4 --iters 2000 --seeds 1,2 --threshold 1e-4") ==
          0);
  CHECK(fs::exists(out / "sweep_summary.csv"));
}
