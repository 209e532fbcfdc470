#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tlra/oracle.hpp"
#include "tlra/recovery.hpp"

using namespace tlra;

TEST_CASE("heavy_column_sample chunk semantics") {
  Rng rng(301);
  const int d = 64;
  FourierToeplitz F(d, {0.2, 0.8}, {1.0, 1.0});
  SymToeplitz T = F.to_toeplitz();

  SUBCASE("Toeplitz oracle gives the first half-column for any i") {
    for (int trial = 0; trial < 10; ++trial) {
      EntryOracle oracle([&](int i, int j) { return T.entry(i, j); });
      Rng local = rng.fork(trial);
      ColumnSample cs = heavy_column_sample(oracle, d, local);
      for (int t = 0; t < d / 2; ++t)
        CHECK(cs.accessor(t).real() == doctest::Approx(T.col[t]));
      CHECK(cs.accessor(-1) == Complex(0, 0));
      CHECK(cs.accessor(d / 2) == Complex(0, 0));
    }
  }

  SUBCASE("noise concentrated on column 0 vanishes for i != 0") {
    EntryOracle oracle([&](int i, int j) {
      double v = T.entry(i, j);
      if (j == 0 || i == 0) v += 100.0;
      return v;
    });
    for (int trial = 0; trial < 50; ++trial) {
      Rng local = rng.fork(100 + trial);
      EntryOracle fresh([&](int i, int j) {
        double v = T.entry(i, j);
        if (j == 0 || i == 0) v += 100.0;
        return v;
      });
      ColumnSample cs = heavy_column_sample(fresh, d, local);
      if (cs.index == 0) continue;
      for (int t = 0; t < d / 2; ++t)
        CHECK(cs.accessor(t).real() == doctest::Approx(T.col[t]));
    }
  }

  SUBCASE("chunk noise obeys the Markov bound") {
    Rng gen(55);
    MatrixXd E(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j) E(i, j) = E(j, i) = gen.normal();
    const double efro_sq = E.squaredNorm();
    int heavy = 0;
    const int draws = 10000;
    for (int it = 0; it < draws; ++it) {
      const int i = static_cast<int>(gen.uniform_int(0, d / 2 - 1));
      double chunk = 0;
      for (int t = 0; t < d / 2; ++t) chunk += E(i + t, i) * E(i + t, i);
      if (chunk > 100.0 / d * efro_sq) ++heavy;
    }
    CHECK(static_cast<double>(heavy) / draws <= 0.01);
  }
}

TEST_CASE("expand_grid") {
  SUBCASE("anchors nearest a recovered frequency") {
    GridSpec g;
    g.d = 16;
    g.r2 = 1;
    g.gamma = 1e-9;
    // window capturing exactly the two anchors bracketing 0.25
    auto s = expand_grid({0.25}, g, 1.4 / 16.0);
    // anchors 7/32 and 9/32, each with +-gamma offsets plus conjugates
    CHECK(s.size() == 8);
    for (double f : s) {
      const double rep = std::min(f, wrap01(1.0 - f));
      const bool near7 = std::fabs(rep - 7.0 / 32) <= 2e-9;
      const bool near9 = std::fabs(rep - 9.0 / 32) <= 2e-9;
      CHECK((near7 || near9));
    }
  }

  SUBCASE("empty list") {
    GridSpec g = GridSpec::defaults(64, 1e-3);
    CHECK(expand_grid({}, g, 0.1).empty());
  }

  SUBCASE("every emitted frequency lies near some list entry") {
    Rng rng(307);
    GridSpec g = GridSpec::defaults(1024, 1e-3);
    std::vector<double> L;
    for (int i = 0; i < 10; ++i) L.push_back(rng.uniform01());
    const double window = 3.0 / 1024;
    auto s = expand_grid(L, g, window);
    CHECK(!s.empty());
    for (double f : s) {
      double best = 1;
      for (double l : L) best = std::min({best, wrap_dist(f, l), wrap_dist(wrap01(1.0 - f), l)});
      CHECK(best <= window + g.r2 * g.gamma + 1.0 / (2.0 * 1024) + 1e-12);
    }
    // conjugate closure
    CHECK_NOTHROW(ConjugatePairing::from_closed_set(s, 1e-13));
  }
}

TEST_CASE("robust_lowrank end to end") {
  SUBCASE("zero matrix gives the zero output") {
    const int d = 256;
    EntryOracle oracle([](int, int) { return 0.0; });
    Rng rng(311);
    PipelineConfig cfg;
    RecoveryReport rep = robust_lowrank(oracle, d, 2, 1e-3, cfg, rng);
    CHECK(rep.output.rank() == 0);
    CHECK(rep.zero_fallback);
  }

  SUBCASE("exact factored rank-2 is recovered to machine precision") {
    const int d = 1024;
    const double anchor = 411.0 / (2.0 * d);
    FourierToeplitz truth(d, {anchor, 1.0 - anchor}, {1.0, 1.0});
    EntryOracle oracle([&](int i, int j) { return truth.entry(i, j); });
    Rng rng(313);
    PipelineConfig cfg;
    RecoveryReport rep = lowrank(oracle, d, 2, 1e-3, cfg, rng);
    VectorXd w = weight_vector(d);
    const double err = (w.asDiagonal() * (truth.first_column() - rep.output.first_column())).norm();
    CHECK(err <= 1e-6 * truth.to_toeplitz().frob_norm());
    CHECK(rep.queries_total <= static_cast<std::int64_t>(d) * d / 10);
    CHECK(rep.queries_total == rep.queries_column_stage + rep.queries_regression_stage);
    CHECK(rep.output.is_conjugate_closed(1e-9));
  }

  SUBCASE("zero-fallback dominance and accounting on a noisy run") {
    const int d = 512;
    Rng rng(317);
    Rng gen = rng.fork("gen");
    FourierToeplitz truth = oracle::random_psd_toeplitz(d, 2, 0.0, gen);
    SymToeplitz T = truth.to_toeplitz();
    MatrixXd E(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j) E(i, j) = E(j, i) = gen.normal();
    E *= 0.05 * T.frob_norm() / E.norm();
    EntryOracle oracle([&](int i, int j) { return T.entry(i, j) + E(i, j); });
    PipelineConfig cfg;
    RecoveryReport rep = robust_lowrank(oracle, d, 4, 1e-3, cfg, rng);
    CHECK(rep.sampled_cost <= rep.sampled_cost_zero + 1e-12);
    CHECK(rep.output.is_conjugate_closed(1e-9));
    CHECK(rep.expanded_size <= 512);
    CHECK(rep.queries_total == rep.queries_column_stage + rep.queries_regression_stage);
  }
}

TEST_CASE("report serializes to json") {
  const int d = 256;
  FourierToeplitz truth(d, {0.25, 0.75}, {1.0, 1.0});
  EntryOracle oracle([&](int i, int j) { return truth.entry(i, j); });
  Rng rng(331);
  PipelineConfig cfg;
  RecoveryReport rep = lowrank(oracle, d, 2, 1e-2, cfg, rng);
  const std::string j = rep.to_json();
  CHECK(j.find("queries_total") != std::string::npos);
  CHECK(j.find("sfft_config") != std::string::npos);
}
