#pragma once

#include <functional>
#include <vector>

#include "tlra/core.hpp"
#include "tlra/rng.hpp"

namespace tlra {

/// Constants for the sampling machinery. The band multiplier accounts for the
/// factor-2 weight spread inside each dyadic band; the third-term constant
/// scales the r^6 log^3 block bound.
struct RegressionConfig {
  double c_band = 2.0;
  double c_r6 = 1.0;
  double ridge_rel = 1e-10;
  double cond_limit = 1e12;
};

/// w[0] = sqrt(d), w[i] = sqrt(2(d-i)) for i >= 1. Satisfies
/// ||W(T1 - T1~)||_2 = ||T - T~||_F for symmetric Toeplitz pairs.
VectorXd weight_vector(int d);

/// Frequency-set-independent leverage score upper bounds for the weighted
/// Fourier design W F_S M_S, assembled block-wise over dyadic row bands.
struct LeverageProfile {
  int d = 0;
  int r = 0;
  VectorXd tau;
  double total = 0;
};

LeverageProfile leverage_bounds(int d, int r, const RegressionConfig& cfg = {});

/// m i.i.d. row draws from the mixed distribution p_j = (tau_j/total + 1/d)/2,
/// with scales 1/sqrt(m p_j).
struct SamplingRows {
  std::vector<int> idx;
  std::vector<double> scale;
  int m = 0;
  VectorXd p;
};

SamplingRows draw_sampling_rows(const LeverageProfile& prof, int m, Rng& rng);

/// Entrywise access to a column vector (reads are the caller's query cost).
using ColumnFn = std::function<double(int)>;

struct RegressionResult {
  VectorXd coeffs;          // one per conjugate pair
  double sampled_cost = 0;  // residual norm on the sampled rows
  bool conditioning_flag = false;
};

/// Least squares on the sampled rows of min_a ||W F_S R_S a - W T1||_2.
/// Touches T1 only at the sampled indices.
RegressionResult solve_weighted_column_regression(const ColumnFn& column,
                                                  const ConjugatePairing& pairing,
                                                  const SamplingRows& rows,
                                                  const RegressionConfig& cfg = {});

/// Full (unsampled) weighted column cost of given coefficients; test oracle.
double weighted_column_cost(const VectorXd& t1, const ConjugatePairing& pairing,
                            const VectorXd& coeffs);

/// Dense optimum of the weighted column fit; test oracle.
RegressionResult dense_weighted_optimum(const VectorXd& t1, const ConjugatePairing& pairing,
                                        const RegressionConfig& cfg = {});

struct RefineResult {
  std::vector<double> freqs;  // union frequency set, conjugate closed
  VectorXd coeffs;            // per pair of the union pairing
  ConjugatePairing pairing;
  double sampled_cost = 0;
  bool conditioning_flag = false;
};

/// Fits the residual T_R = T1 - F_S~ R_S~ a~ against each candidate frequency
/// set on a fresh sample set and returns the union solution with the best
/// sampled cost.
RefineResult refine_residual(const ColumnFn& column, const ConjugatePairing& prior,
                             const VectorXd& prior_coeffs,
                             const std::vector<std::vector<double>>& candidates,
                             const SamplingRows& rows2, const RegressionConfig& cfg = {});

/// Two-sided sampled solve of min over diagonal D of ||B - F_M D F_M^*||_F
/// with conjugate-tied real unknowns. Draws independent row/column samples
/// from the leverage profile and reads only the s x s sampled entries of B.
struct MatrixRegressionResult {
  VectorXd coeffs;               // per conjugate pair of M
  double sampled_cost = 0;       // cost of the fit on the sampled entries
  double sampled_cost_zero = 0;  // cost of the D = 0 candidate on the same entries
  bool conditioning_flag = false;
  std::int64_t entries_read = 0;
};

MatrixRegressionResult solve_matrix_regression(EntryOracle& entries, int d,
                                               const ConjugatePairing& pairing, int s, Rng& rng,
                                               const RegressionConfig& cfg = {});

/// Desk-scale brute-force search over all anchor subsets of size r1 with
/// expanded gamma-offset clusters, scored by one shared sample set.
struct BruteForceConfig {
  int r1 = 1;
  int r2 = 1;
  double gamma = 1e-6;
  int m_samples = 48;
  int max_candidates = 8192;
};

FourierToeplitz brute_force_toeplitz_fit(const SymToeplitz& T, int k, const BruteForceConfig& cfg,
                                         Rng& rng);

/// Dense leverage scores of a real matrix (rows of the thin-Q Gram); oracle
/// for the dominance tests.
VectorXd dense_leverage_scores(const MatrixXd& A);

/// Design matrix W F_S R_S for a pairing (real, d x pairs); test helper.
MatrixXd weighted_pair_design(int d, const ConjugatePairing& pairing);

}  // namespace tlra
