#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "tlra/oracle.hpp"
#include "tlra/report.hpp"

using namespace tlra;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  if (const char* env = std::getenv("TLRA_BIN")) return env;
  return "./tlra";
}

bool cli_available() { return fs::exists(cli_path()); }

int run(const std::string& args) { return std::system((cli_path() + " " + args + " >/dev/null 2>&1").c_str()); }

}  // namespace

TEST_CASE("matrix file round trip") {
  Rng rng(501);
  SymToeplitz T = oracle::random_psd_toeplitz(32, 3, 0.1, rng).to_toeplitz();
  const std::string path = "test_cli_matrix.txt";
  io::write_matrix(path, T);
  SymToeplitz R = io::read_matrix(path);
  CHECK(R.d == T.d);
  CHECK((R.col - T.col).norm() <= 1e-14 * T.col.norm());
  fs::remove(path);
}

TEST_CASE("matrix file errors carry positions") {
  const std::string path = "test_cli_bad.txt";
  io::write_text(path, "4\n1.0\n2.0\n");
  CHECK_THROWS_WITH_AS(io::read_matrix(path), doctest::Contains(":"), std::runtime_error);
  fs::remove(path);
}

TEST_CASE("signal file round trip") {
  SparseSignal x(64, {0.1, 0.9}, {{1.0, 0.5}, {1.0, -0.5}});
  const std::string path = "test_cli_signal.json";
  io::write_signal(path, x);
  SparseSignal y = io::read_signal(path);
  CHECK(y.d == 64);
  REQUIRE(y.freqs.size() == 2);
  CHECK(y.coeffs[0] == Complex(1.0, 0.5));
  fs::remove(path);
}

TEST_CASE("truth reconstruct and round trip") {
  io::Truth t;
  t.d = 32;
  t.k = 1;
  t.seed = 7;
  t.freqs = {0.25, 0.75};
  t.weights = {1.0, 1.0};
  t.noise_floor = 0.5;
  SymToeplitz T = t.reconstruct();
  CHECK(T.col[0] == doctest::Approx(2.5));  // pair weight sum + floor
  io::Truth u = io::Truth::from_json(t.to_json());
  CHECK(u.d == t.d);
  CHECK(u.freqs == t.freqs);
  CHECK(u.noise_floor == doctest::Approx(0.5));
}

TEST_CASE("sample file round trip") {
  MatrixXd data(4, 3);
  int v = 0;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 4; ++i) data(i, j) = v++;
  SampleSet X(4, 3, data);
  const std::string path = "test_cli_samples.bin";
  io::write_samples(path, X);
  MatrixXd R = io::read_samples(path);
  CHECK((R - data).norm() == doctest::Approx(0.0));
  fs::remove(path);
}

TEST_CASE("cli end-to-end flows" * doctest::skip(false)) {
  if (!cli_available()) {
    MESSAGE("cli binary not found next to the test; skipping");
    return;
  }
  fs::create_directories("cli_t");

  SUBCASE("gen is deterministic and exact-rank") {
    REQUIRE(run("gen --seed 11 --d 128 --k 2 --out cli_t") == 0);
    REQUIRE(run("gen --seed 11 --d 128 --k 2 --out cli_t2") == 0);
    const std::string a = io::read_text("cli_t/instance-11.matrix.txt");
    const std::string b = io::read_text("cli_t2/instance-11.matrix.txt");
    CHECK(a == b);
    SymToeplitz T = io::read_matrix("cli_t/instance-11.matrix.txt");
    // numerical rank 4 (two conjugate pairs)
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(oracle::dense_from_col(T));
    int significant = 0;
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
    for (int i = 0; i < T.d; ++i)
      if (std::fabs(eig.eigenvalues()[i]) > 1e-9 * top) ++significant;
    CHECK(significant == 4);
    fs::remove_all("cli_t2");
  }

  SUBCASE("gen with a noise floor lifts the tail spectrum") {
    REQUIRE(run("gen --seed 12 --d 128 --k 1 --noise 0.25 --out cli_t") == 0);
    SymToeplitz T = io::read_matrix("cli_t/instance-12.matrix.txt");
    const double tail = oracle::rank_k_tail(T, 2);
    // white floor of weight 0.25 on all remaining directions
    CHECK(tail == doctest::Approx(0.25 * std::sqrt(128.0 - 2.0)).epsilon(0.05));
  }

  SUBCASE("lowrank and eval join") {
    REQUIRE(run("gen --seed 13 --d 256 --k 1 --out cli_t") == 0);
    const int rc = run("lowrank --matrix cli_t/instance-13.matrix.txt --k 1 --delta 1e-3 --seed 21 --out cli_t");
    CHECK((rc == 0 || rc == 3 * 256));  // system() encodes exit codes
    REQUIRE(fs::exists("cli_t/lowrank-21.json"));
    REQUIRE(run("eval --truth cli_t/instance-13.truth.json --reports cli_t/lowrank-21.json --out cli_t") == 0);
    const std::string csv = io::read_text("cli_t/eval.csv");
    CHECK(csv.find("error_rel") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one row
  }

  SUBCASE("eval with no reports emits the header only") {
    REQUIRE(run("gen --seed 14 --d 64 --k 1 --out cli_t") == 0);
    REQUIRE(run("eval --truth cli_t/instance-14.truth.json --out cli_t") == 0);
    const std::string csv = io::read_text("cli_t/eval.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
  }

  SUBCASE("validation failures exit with code 2") {
    const int rc = run("lowrank --matrix does_not_exist.txt --k 1");
    CHECK(rc == 2 * 256);
  }

  fs::remove_all("cli_t");
}
