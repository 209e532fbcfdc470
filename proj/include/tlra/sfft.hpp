#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tlra/core.hpp"
#include "tlra/hashing.hpp"
#include "tlra/rng.hpp"

namespace tlra {

/// All tunables of the sparse recovery pipeline. The asymptotic parameter
/// orders come from the algorithm statements; the concrete constants are
/// desk-scale calibrations, serialized into every run report.
struct RecoveryConfig {
  int k = 1;
  int d = 1024;
  double delta = 1e-2;

  // outer sigma=1 split
  int B_outer = 4;
  double w_outer = 0.1;

  // inner integer-sigma hashing
  int B_inner = 4;
  double w_inner = 0.1;
  double Delta = 0;          // cluster width parameter
  double sigma_c_hi = 200;   // sigma uniform in [1/(hi*B*k*Delta), 1/(lo*B*k*Delta)]
  double sigma_c_lo = 100;

  // window function H
  double h_bandwidth = 0;    // delta_h override used by the pipeline
  int h_order = 4;           // kernel order l used by the pipeline filter

  // one-cluster locator
  int m_onegood = 64;        // probe pool size
  int t_ary = 13;            // voting cells per round
  double vote_slack = 0.125;  // alias-free for t_ary <= 2/slack cells
  int r_loc = 5;             // votes per round (majority required)
  double beta_cap_frac = 0.25;
  int median_runs = 5;
  int onegood_retries = 5;
  double onegood_pair_tol = 0.08;  // acceptance constant for the sample-pair test
  double empty_bin_rel = 1e-3;   // vs the peak bin
  double empty_bin_total = 5e-3;  // vs total probe energy across bins     // bins below this share of peak energy are skipped

  double window = 0;   // confidence radius for list matching
  int list_cap = 256;
  int outer_reps = 2;  // independent outer splits unioned by sparse_recover

  /// Desk-scale defaults for a length-d instance with sparsity k.
  static RecoveryConfig defaults(int k, int d, double delta);

  std::string to_json() const;
};

/// Recovered frequency candidates. flags: 0 ok, 1 degraded consensus,
/// 2 empty/failed bin.
struct FrequencyList {
  std::vector<double> freqs;
  std::vector<int> flags;
  std::vector<std::string> provenance;
  double window = 0;
  std::int64_t reads = 0;            // distinct oracle entries (filled by callers)
  std::int64_t nominal_samples = 0;  // folding-tap sample count of all stages

  std::vector<double> good() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < freqs.size(); ++i)
      if (flags[i] == 0) out.push_back(freqs[i]);
    return out;
  }
};

/// Probe pool for OneGoodSample: m uniform time probes weighted by observed
/// energy. Draws follow the empirical-energy distribution D_m.
class OneGoodSampler {
 public:
  OneGoodSampler(const SignalFn& z, int d, int m, Rng& rng);

  /// alpha ~ D_m. Throws std::runtime_error("signal empty at probes") when
  /// every probe was zero.
  std::int64_t draw(Rng& rng) const;

  double total_energy() const { return total_; }
  const std::vector<std::int64_t>& probes() const { return probes_; }

 private:
  std::vector<std::int64_t> probes_;
  std::vector<double> cum_;
  double total_ = 0;
};

/// Single draw form of OneGoodSample (builds a fresh pool).
std::int64_t one_good_sample(const SignalFn& z, const RecoveryConfig& cfg, Rng& rng);

/// One voting round over t_ary cells of [center-width/2, center+width/2].
/// Returns the refined center of a majority cell, or nullopt on no consensus.
std::optional<double> locate1_inner(const SignalFn& z, const OneGoodSampler& sampler,
                                    const RecoveryConfig& cfg, double center, double width,
                                    Rng& rng);

struct LocateResult {
  double freq = 0;
  bool degraded = false;
  int stages_ok = 0;
  int stages_total = 0;
};

/// Geometric refinement of locate1_inner from |I| down to the beta cap.
/// Throws std::runtime_error when fewer than half the stages reach consensus.
LocateResult locate1_signal(const SignalFn& z, const RecoveryConfig& cfg, double center,
                            double width, Rng& rng);

/// Median of median_runs independent locate1_signal runs (circular median
/// inside the interval).
LocateResult frequency_recovery_1cluster(const SignalFn& z, const RecoveryConfig& cfg,
                                         double center, double width, Rng& rng);

/// Frequency recovery for one bounded instance: inner hashing into B_inner
/// buckets, one frequency (or flagged placeholder) per bucket.
FrequencyList recover_bounded(const BoundedInstance& inst, const RecoveryConfig& cfg, Rng& rng);

/// Full pipeline: outer split into bounded instances, inner recovery on each,
/// union of the per-instance lists.
FrequencyList sparse_recover(const SignalFn& x, const RecoveryConfig& cfg, Rng& rng);

/// Circular median of values constrained to an arc around `center`.
double circular_median(std::vector<double> values, double center);

}  // namespace tlra
