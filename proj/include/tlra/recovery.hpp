#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tlra/core.hpp"
#include "tlra/regression.hpp"
#include "tlra/rng.hpp"
#include "tlra/sfft.hpp"

namespace tlra {

/// Candidate frequency grid of the factored output: anchors at odd multiples
/// of 1/2d, each expanded into r2 offsets of spacing gamma on both sides.
struct GridSpec {
  int d = 0;
  int r2 = 2;
  double gamma = 0;

  static GridSpec defaults(int d, double delta);
  double anchor(int i) const { return (2.0 * i + 1.0) / (2.0 * d); }
};

/// Grid expansion of a recovered list: all gamma-offsets around every anchor
/// within `window` of some list entry, conjugate-closed and deduplicated at
/// 1e-15 spacing.
std::vector<double> expand_grid(const std::vector<double>& freqs, const GridSpec& grid,
                                double window);

/// Uniformly random column chunk accessor: x(t) = oracle[i+t, i] for
/// t in [0, d/2), zero outside. Reads are counted by the oracle.
struct ColumnSample {
  int index = 0;
  SignalFn accessor;
};

ColumnSample heavy_column_sample(EntryOracle& oracle, int d, Rng& rng);

/// End-to-end pipeline knobs on top of the sfft configuration.
struct PipelineConfig {
  double c_s = 2.0;           // regression samples per side: s = c_s * |M|
  int s_min = 32;
  int s_max = 256;
  double window_cap = 0;      // 0: use min(list window, 8/d)
  int k_sfft_cap = 10;
  double sfft_delta_floor = 1e-4;
  int rank_cap = 512;         // |S(L')| guard
  std::optional<RecoveryConfig> sfft;  // full override of the sfft stage
};

struct RecoveryReport {
  int d = 0;
  int k = 0;
  double delta = 0;
  std::uint64_t seed = 0;

  FourierToeplitz output;
  bool zero_fallback = false;
  bool degraded = false;

  int column_index = 0;
  int list_size = 0;
  int list_good = 0;
  int expanded_size = 0;
  int regression_samples = 0;

  std::int64_t queries_total = 0;
  std::int64_t queries_column_stage = 0;
  std::int64_t queries_regression_stage = 0;

  double sampled_cost = 0;
  double sampled_cost_zero = 0;
  double window = 0;
  std::string sfft_config_json;

  std::string to_json() const;
};

/// Theorem-1 pipeline: column sparse recovery, grid expansion, two-sided
/// sampled diagonal regression with the zero-matrix fallback.
RecoveryReport robust_lowrank(EntryOracle& oracle, int d, int k, double delta,
                              const PipelineConfig& cfg, Rng& rng);

/// Noiseless alias (Theorem 2): identical path with E = 0 supplied by the
/// caller's oracle.
inline RecoveryReport lowrank(EntryOracle& oracle, int d, int k, double delta,
                              const PipelineConfig& cfg, Rng& rng) {
  return robust_lowrank(oracle, d, k, delta, cfg, rng);
}

}  // namespace tlra
