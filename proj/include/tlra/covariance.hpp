#pragma once

#include <memory>
#include <set>
#include <string>

#include "tlra/core.hpp"
#include "tlra/recovery.hpp"
#include "tlra/rng.hpp"

namespace tlra {

/// s vector samples from N(0, T). Entry reads are tracked per index: the
/// entry sample complexity of index-set access is identical across samples,
/// so one set of touched indices serves all of them.
class SampleSet {
 public:
  SampleSet(int d, int s, MatrixXd data) : d_(d), s_(s), data_(std::move(data)) {}

  int d() const { return d_; }
  int s() const { return s_; }

  /// Entry j of sample i, with ESC accounting.
  double read(int sample, int index) {
    touched_.insert(index);
    return data_(index, sample);
  }

  /// Entries touched per sample (identical for all samples by construction).
  std::int64_t esc() const { return static_cast<std::int64_t>(touched_.size()); }
  std::int64_t vsc() const { return s_; }

  const MatrixXd& raw() const { return data_; }

 private:
  int d_;
  int s_;
  MatrixXd data_;  // d x s, columns are samples
  std::set<int> touched_;
};

/// Gaussian sampling through a dense symmetric factorization (desk scale;
/// negative eigenvalues clipped at -1e-10 ||T||_2).
SampleSet sample_gaussian_toeplitz(const SymToeplitz& T, int s, Rng& rng);

/// Gaussian sampling straight from the factored form: sqrt(2) Re(F_S D^{1/2} g)
/// with complex standard normal g has covariance F_S D F_S^*.
SampleSet sample_gaussian_toeplitz(const FourierToeplitz& T, int s, Rng& rng);

/// (1/s) sum_k x_k[i] x_k[j], reading entries i and j of every sample once.
double sample_cov_entry(SampleSet& X, int i, int j);

struct CovarianceReport {
  RecoveryReport recovery;
  std::int64_t esc = 0;
  std::int64_t vsc = 0;
  std::int64_t cov_entries = 0;  // distinct (i,j) pairs touched
  double delta_used = 0;
  std::string to_json() const;
};

/// Theorem-3 pipeline: robust low-rank recovery against the sample covariance
/// oracle with delta = epsilon / sqrt(d).
CovarianceReport covariance_estimate(SampleSet& X, int k, double epsilon,
                                     const PipelineConfig& cfg, Rng& rng);

struct ConcentrationReport {
  int s = 0;
  double full_err = 0;        // ||XX^T - T||_F
  double offprojection = 0;   // ||XX^T - P_k XX^T P_k||_F
  double projected_err = 0;   // ||P_k XX^T P_k - T_k||_F
  double bound_term = 0;      // sqrt(||T-T_k||_2 tr T + ||T-T_k||_F tr T / k)
  double spectral = 0;        // ||T||_2
  double full_ratio = 0;      // full_err / (bound_term + spectral scale)
  std::string to_json() const;
};

/// Monte-Carlo measurement of the sample-covariance concentration quantities
/// against their stated bounds (dense eigendecomposition oracle, desk scale).
ConcentrationReport concentration_check(const SymToeplitz& T, int k, int s, int trials, Rng& rng);

}  // namespace tlra
