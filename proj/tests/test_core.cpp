#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tlra/core.hpp"
#include "tlra/oracle.hpp"
#include "tlra/rng.hpp"

using namespace tlra;

TEST_CASE("wrap_dist basics") {
  CHECK(wrap_dist(0.1, 0.9) == doctest::Approx(0.2));
  CHECK(wrap_dist(0.3, 0.3) == doctest::Approx(0.0));
  CHECK(wrap_dist(0.0, 0.5) == doctest::Approx(0.5));
  // symmetry and circle triangle inequality on random triples
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform01(), b = rng.uniform01(), c = rng.uniform01();
    CHECK(wrap_dist(a, b) == doctest::Approx(wrap_dist(b, a)));
    CHECK(wrap_dist(a, c) <= wrap_dist(a, b) + wrap_dist(b, c) + 1e-12);
    CHECK(wrap_dist(a, b) <= 0.5);
  }
}

TEST_CASE("FourierToeplitz entries at a conjugate pair") {
  FourierToeplitz F(4, {0.25, 0.75}, {1.0, 1.0});
  CHECK(F.entry(0, 0) == doctest::Approx(2.0));
  CHECK(F.entry(1, 0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(F.entry(2, 0) == doctest::Approx(-2.0));
  CHECK(F.is_conjugate_closed());
}

TEST_CASE("conjugate-closed sets give real symmetric Toeplitz matrices") {
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const int d = 24;
    std::vector<double> fs, ws;
    for (int p = 0; p < 3; ++p) {
      const double f = rng.uniform(0.01, 0.49);
      const double w = rng.uniform(0.1, 2.0);
      fs.push_back(f);
      ws.push_back(w);
      fs.push_back(wrap01(1.0 - f));
      ws.push_back(w);
    }
    FourierToeplitz F(d, fs, ws);
    const double tol = 1e-10 * F.sum_abs_weights();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        CHECK(std::fabs(F.entry_complex(i, j).imag()) <= tol);
        CHECK(F.entry(i, j) == doctest::Approx(F.entry(j, i)));
        CHECK(F.entry(i, j) == doctest::Approx(F.entry(0, std::abs(i - j))));
      }
  }
}

TEST_CASE("broken conjugate closure is reported") {
  FourierToeplitz F(8, {0.3}, {1.0});
  CHECK_THROWS(F.entry(1, 0));
}

TEST_CASE("dense_dtft oracle") {
  const int d = 16;
  VectorXcd x(d);
  for (int t = 0; t < d; ++t) x[t] = unit_phase(3.0 / d * t);
  auto spec = oracle::dense_dtft(x, d);
  for (int m = 0; m < d; ++m) {
    if (m == 3)
      CHECK(std::abs(spec[m]) == doctest::Approx(16.0));
    else
      CHECK(std::abs(spec[m]) < 1e-9);
  }

  VectorXcd z = VectorXcd::Zero(d);
  auto zspec = oracle::dense_dtft(z, d);
  CHECK(zspec.norm() == doctest::Approx(0.0));

  // off-grid tone localized by a fine grid
  const int d2 = 256, grid = 4096;
  VectorXcd y(d2);
  for (int t = 0; t < d2; ++t) y[t] = unit_phase(0.1003 * t);
  auto yspec = oracle::dense_dtft(y, grid);
  int best = 0;
  for (int m = 1; m < grid; ++m)
    if (std::abs(yspec[m]) > std::abs(yspec[best])) best = m;
  CHECK(wrap_dist(static_cast<double>(best) / grid, 0.1003) <= 1.0 / grid);
}

TEST_CASE("best_rank_k oracle") {
  // exact rank-2 factored input
  FourierToeplitz F(32, {0.2, 0.8}, {1.5, 1.5});
  SymToeplitz T = F.to_toeplitz();
  auto [Tk, err] = oracle::best_rank_k(T, 2);
  CHECK(err <= 1e-8 * T.frob_norm());

  // identity, k = 0
  VectorXd e0 = VectorXd::Zero(16);
  e0[0] = 1.0;
  SymToeplitz I16(16, e0);
  auto [T0, err0] = oracle::best_rank_k(I16, 0);
  CHECK(err0 == doctest::Approx(4.0));

  // tail matches an independent accumulation of eigenvalues
  Rng rng(3);
  VectorXd col(64);
  for (int i = 0; i < 64; ++i) col[i] = rng.normal();
  SymToeplitz R = oracle::psd_project(col);
  auto [Rk, errk] = oracle::best_rank_k(R, 4);
  const double tail = oracle::rank_k_tail(R, 4);
  CHECK(errk == doctest::Approx(tail).epsilon(1e-8));
  // and the dense residual agrees
  MatrixXd Mr = oracle::dense_from_col(R);
  CHECK((Mr - Rk).norm() == doctest::Approx(errk).epsilon(1e-8));
}

TEST_CASE("psd_project") {
  Rng rng(5);
  // fixed point on an already PSD column
  FourierToeplitz F(32, {0.15, 0.85, 0.0}, {1.0, 1.0, 0.5});
  SymToeplitz T = F.to_toeplitz();
  SymToeplitz P = oracle::psd_project(T.col);
  CHECK((P.col - T.col).norm() <= 1e-10 * T.col.norm());

  VectorXd e0 = VectorXd::Zero(16);
  e0[0] = 1.0;
  SymToeplitz I16 = oracle::psd_project(e0);
  CHECK((I16.col - e0).norm() <= 1e-12);

  for (int trial = 0; trial < 5; ++trial) {
    VectorXd col(32);
    for (int i = 0; i < 32; ++i) col[i] = rng.normal();
    SymToeplitz Q = oracle::psd_project(col);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(oracle::dense_from_col(Q));
    const double lmin = eig.eigenvalues().minCoeff();
    const double l2 = std::max(std::fabs(eig.eigenvalues().maxCoeff()), std::fabs(lmin));
    CHECK(lmin >= -1e-8 * l2);
  }
}

TEST_CASE("oracle cap is enforced") {
  VectorXd col = VectorXd::Zero(oracle::kDenseCap + 1);
  col[0] = 1.0;
  SymToeplitz T(oracle::kDenseCap + 1, col);
  CHECK_THROWS(oracle::best_rank_k(T, 1));
}

TEST_CASE("EntryOracle counts distinct reads once") {
  int calls = 0;
  EntryOracle o([&](int i, int j) {
    ++calls;
    return static_cast<double>(i * 100 + j);
  });
  CHECK(o(1, 2) == doctest::Approx(102.0));
  CHECK(o(1, 2) == doctest::Approx(102.0));
  CHECK(o(2, 1) == doctest::Approx(201.0));
  CHECK(o.queries_used() == 2);
  CHECK(calls == 2);

  Rng rng(9);
  EntryOracle o2([](int i, int j) { return static_cast<double>(i + j); });
  std::vector<std::pair<int, int>> touched;
  for (int n = 0; n < 500; ++n) {
    const int i = static_cast<int>(rng.uniform_int(0, 19));
    const int j = static_cast<int>(rng.uniform_int(0, 19));
    o2(i, j);
    touched.emplace_back(i, j);
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  CHECK(o2.queries_used() == static_cast<std::int64_t>(touched.size()));
}

TEST_CASE("EntryOracle budget") {
  EntryOracle o([](int, int) { return 1.0; }, 3);
  o(0, 0);
  o(0, 1);
  o(0, 2);
  o(0, 0);  // memoized, free
  CHECK_THROWS(o(0, 3));
}

TEST_CASE("Parseval for on-grid sparse signals") {
  Rng rng(13);
  const int d = 64;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> fs;
    std::vector<Complex> cs;
    for (int p = 0; p < 4; ++p) {
      fs.push_back(static_cast<double>(rng.uniform_int(0, d - 1)) / d);
      cs.push_back({rng.normal(), rng.normal()});
    }
    SparseSignal x(d, fs, cs);
    double coeff_energy = 0;
    // merge duplicate grid frequencies before applying Parseval
    std::vector<Complex> merged(d, Complex(0, 0));
    for (std::size_t p = 0; p < fs.size(); ++p)
      merged[static_cast<int>(std::lround(fs[p] * d)) % d] += cs[p];
    for (const auto& c : merged) coeff_energy += std::norm(c);
    CHECK(x.norm_d_sq() == doctest::Approx(d * coeff_energy).epsilon(1e-9));
  }
}

TEST_CASE("norm compression for random PSD matrices") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 * static_cast<int>(rng.uniform_int(4, 64));
    MatrixXd G(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) G(i, j) = rng.normal();
    MatrixXd A = G * G.transpose();
    const int h = d / 2;
    const double whole = A.norm();
    const double top = A.topLeftCorner(h, h).norm();
    const double bot = A.bottomRightCorner(h, h).norm();
    CHECK(whole <= top + bot + 1e-9 * whole);
  }
}

TEST_CASE("first-half-column lower bound for PSD Toeplitz") {
  Rng rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 * static_cast<int>(rng.uniform_int(8, 128));
    const int pairs = 1 + static_cast<int>(rng.uniform_int(1, std::max(2, d / 3)));
    SymToeplitz T = oracle::random_psd_toeplitz(d, pairs, 0.2, rng).to_toeplitz();
    const double fro = T.frob_norm();
    if (fro < 1e-12) continue;
    const double half_col = T.col.head(d / 2).norm();
    CHECK(half_col >= 0.49 * fro / std::sqrt(static_cast<double>(d)));
  }
}

TEST_CASE("rng determinism and forking") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng f1 = a.fork("stream");
  Rng f2 = b.fork("stream");
  for (int i = 0; i < 100; ++i) CHECK(f1.next() == f2.next());
  // fork independent of parent's consumption
  Rng c(42);
  c.next();
  Rng f3 = c.fork("stream");
  Rng f4 = Rng(42).fork("stream");
  CHECK(f3.next() == f4.next());
}
