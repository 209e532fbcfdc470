#include "tlra/recovery.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace tlra {

GridSpec GridSpec::defaults(int d, double delta) {
  GridSpec g;
  g.d = d;
  g.r2 = 2;
  // The nominal spacing delta / 2^{C log^7 d} underflows doubles; keep the
  // cluster structurally present just above the dedup resolution.
  const double nominal = delta * std::pow(2.0, -std::pow(std::log2(static_cast<double>(d)), 7.0));
  g.gamma = std::max(nominal, std::pow(2.0, -40) / d);
  return g;
}

std::vector<double> expand_grid(const std::vector<double>& freqs, const GridSpec& grid,
                                double window) {
  // Collect pair representatives in [0, 1/2]; conjugate closure is then by
  // construction, immune to asymmetric dedup rounding.
  std::vector<double> reps;
  const int d = grid.d;
  for (double f : freqs) {
    const double lo = f - window;
    const int i_lo = static_cast<int>(std::floor((lo * 2.0 * d - 1.0) / 2.0));
    const int i_hi = i_lo + static_cast<int>(std::ceil(window * 2.0 * d)) + 2;
    for (int i = i_lo; i <= i_hi; ++i) {
      int ii = i % d;
      if (ii < 0) ii += d;
      const double a = grid.anchor(ii);
      if (wrap_dist(a, f) > window + 1e-15) continue;
      for (int j = 1; j <= grid.r2; ++j) {
        for (double off : {a + grid.gamma * j, a - grid.gamma * j}) {
          const double x = wrap01(off);
          reps.push_back(std::min(x, wrap01(1.0 - x)));
        }
      }
    }
  }
  std::sort(reps.begin(), reps.end());
  reps.erase(std::unique(reps.begin(), reps.end(),
                         [](double a, double b) { return std::fabs(a - b) <= 1e-15; }),
             reps.end());
  std::vector<double> out;
  for (double x : reps) {
    out.push_back(x);
    const double conj = wrap01(1.0 - x);
    if (std::fabs(conj - x) > 1e-15) out.push_back(conj);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ColumnSample heavy_column_sample(EntryOracle& oracle, int d, Rng& rng) {
  if (d < 4 || d % 2 != 0) throw std::invalid_argument("heavy_column_sample: d must be even, >= 4");
  ColumnSample cs;
  cs.index = static_cast<int>(rng.uniform_int(0, d / 2 - 1));
  const int i = cs.index;
  const int half = d / 2;
  // the oracle reference must outlive the accessor; the pipeline guarantees it
  EntryOracle* o = &oracle;
  cs.accessor = [o, i, half](std::int64_t t) -> Complex {
    if (t < 0 || t >= half) return {0, 0};
    return {(*o)(i + static_cast<int>(t), i), 0.0};
  };
  return cs;
}

RecoveryReport robust_lowrank(EntryOracle& oracle, int d, int k, double delta,
                              const PipelineConfig& cfg, Rng& rng) {
  RecoveryReport rep;
  rep.d = d;
  rep.k = k;
  rep.delta = delta;
  rep.seed = rng.base_seed();

  // (1) random half-column chunk
  Rng col_rng = rng.fork("column");
  ColumnSample col = heavy_column_sample(oracle, d, col_rng);
  rep.column_index = col.index;
  const int n = d / 2;

  // (2) sparse recovery on the chunk; conjugate pairs double the tone count
  const double sfft_delta = std::max(delta / std::sqrt(static_cast<double>(d)),
                                     cfg.sfft_delta_floor);
  const int k_sfft = std::clamp(2 * std::max(1, k), 2, std::min(cfg.k_sfft_cap, n / 64));
  RecoveryConfig scfg =
      cfg.sfft ? *cfg.sfft : RecoveryConfig::defaults(k_sfft, n, sfft_delta);
  rep.sfft_config_json = scfg.to_json();
  Rng sfft_rng = rng.fork("sfft");
  FrequencyList list = sparse_recover(col.accessor, scfg, sfft_rng);
  rep.list_size = static_cast<int>(list.freqs.size());
  rep.list_good = static_cast<int>(list.good().size());
  rep.queries_column_stage = oracle.queries_used();
  for (int f : list.flags)
    if (f == 1) rep.degraded = true;

  // (3) grid expansion
  GridSpec grid = GridSpec::defaults(d, delta);
  const double wcap = cfg.window_cap > 0 ? cfg.window_cap : 8.0 / d;
  rep.window = std::min({list.window, wcap, 1.0 / (4.0 * std::max(1, k))});
  std::vector<double> expanded = expand_grid(list.good(), grid, rep.window);
  if (static_cast<int>(expanded.size()) > cfg.rank_cap) {
    // truncate whole conjugate pairs, keeping representatives closest to a
    // recovered list entry
    std::vector<double> reps;
    for (double f : expanded)
      if (f <= 0.5 + 1e-15) reps.push_back(f);
    const auto good = list.good();
    auto dist_to_list = [&](double x) {
      double best = 1.0;
      for (double g : good) best = std::min({best, wrap_dist(x, g), wrap_dist(wrap01(1.0 - x), g)});
      return best;
    };
    std::stable_sort(reps.begin(), reps.end(),
                     [&](double a, double b) { return dist_to_list(a) < dist_to_list(b); });
    reps.resize(std::max<std::size_t>(1, cfg.rank_cap / 2));
    std::sort(reps.begin(), reps.end());
    expanded.clear();
    for (double x : reps) {
      expanded.push_back(x);
      const double conj = wrap01(1.0 - x);
      if (std::fabs(conj - x) > 1e-15) expanded.push_back(conj);
    }
    std::sort(expanded.begin(), expanded.end());
    rep.degraded = true;
  }
  rep.expanded_size = static_cast<int>(expanded.size());

  // (4) two-sided sampled regression over S(L')
  ConjugatePairing pairing;
  MatrixRegressionResult reg;
  Rng reg_rng = rng.fork("regression");
  if (!expanded.empty()) {
    pairing = ConjugatePairing::from_closed_set(expanded, 1e-13);
    const int m = static_cast<int>(expanded.size());
    const int s_cap = std::min(cfg.s_max, std::max(cfg.s_min, d / 4));
    const int s = std::clamp(static_cast<int>(std::lround(cfg.c_s * m)), cfg.s_min, s_cap);
    rep.regression_samples = s;
    reg = solve_matrix_regression(oracle, d, pairing, s, reg_rng);
  } else {
    reg = solve_matrix_regression(oracle, d, pairing, cfg.s_min, reg_rng);
  }
  rep.sampled_cost = reg.sampled_cost;
  rep.sampled_cost_zero = reg.sampled_cost_zero;
  if (reg.conditioning_flag) rep.degraded = true;

  // (5) zero-matrix fallback: keep the better sampled candidate
  if (reg.sampled_cost <= reg.sampled_cost_zero && reg.coeffs.size() > 0) {
    rep.output = pairing.expand(d, reg.coeffs);
  } else {
    rep.output = FourierToeplitz(d, {}, {});
    rep.zero_fallback = true;
    rep.sampled_cost = reg.sampled_cost_zero;
  }
  rep.queries_regression_stage = oracle.queries_used() - rep.queries_column_stage;
  rep.queries_total = oracle.queries_used();
  return rep;
}

std::string RecoveryReport::to_json() const {
  nlohmann::json j{{"d", d},
                   {"k", k},
                   {"delta", delta},
                   {"seed", seed},
                   {"zero_fallback", zero_fallback},
                   {"degraded", degraded},
                   {"column_index", column_index},
                   {"list_size", list_size},
                   {"list_good", list_good},
                   {"expanded_size", expanded_size},
                   {"regression_samples", regression_samples},
                   {"queries_total", queries_total},
                   {"queries_column_stage", queries_column_stage},
                   {"queries_regression_stage", queries_regression_stage},
                   {"sampled_cost", sampled_cost},
                   {"sampled_cost_zero", sampled_cost_zero},
                   {"window", window},
                   {"rank", output.rank()},
                   {"freqs", output.freqs},
                   {"weights", output.weights},
                   {"sfft_config", nlohmann::json::parse(
                                       sfft_config_json.empty() ? "{}" : sfft_config_json)}};
  return j.dump();
}

}  // namespace tlra
