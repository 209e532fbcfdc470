#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tlra/core.hpp"
#include "tlra/rng.hpp"

// Dense brute-force reference computations. Everything here materializes
// d x d matrices or scans full grids, so it is capped at desk scale and must
// never be called from the sublinear recovery path (test and generator code
// only).
namespace tlra::oracle {

inline constexpr int kDenseCap = 4096;

inline void check_cap(int d) {
  if (d > kDenseCap) throw std::invalid_argument("oracle: dimension exceeds dense cap");
}

inline MatrixXd dense_from_col(const SymToeplitz& T) {
  check_cap(T.d);
  MatrixXd M(T.d, T.d);
  for (int i = 0; i < T.d; ++i)
    for (int j = 0; j < T.d; ++j) M(i, j) = T.entry(i, j);
  return M;
}

inline MatrixXd dense_from_fourier(const FourierToeplitz& F) {
  return dense_from_col(F.to_toeplitz());
}

/// Best rank-k approximation via dense eigendecomposition.
/// Returns (T_k, ||T - T_k||_F).
inline std::pair<MatrixXd, double> best_rank_k(const SymToeplitz& T, int k) {
  check_cap(T.d);
  if (k > T.d) throw std::invalid_argument("best_rank_k: k > d");
  const MatrixXd M = dense_from_col(T);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(M);
  const VectorXd lam = eig.eigenvalues();  // ascending
  const MatrixXd U = eig.eigenvectors();
  // Keep the k eigenvalues of largest magnitude.
  std::vector<int> idx(T.d);
  for (int i = 0; i < T.d; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return std::fabs(lam[a]) > std::fabs(lam[b]); });
  MatrixXd Tk = MatrixXd::Zero(T.d, T.d);
  for (int r = 0; r < k; ++r) {
    const int i = idx[r];
    Tk.noalias() += lam[i] * U.col(i) * U.col(i).transpose();
  }
  double tail = 0;
  for (int r = k; r < T.d; ++r) tail += lam[idx[r]] * lam[idx[r]];
  return {std::move(Tk), std::sqrt(tail)};
}

/// ||T - T_k||_F without materializing T_k.
inline double rank_k_tail(const SymToeplitz& T, int k) {
  check_cap(T.d);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(dense_from_col(T));
  VectorXd lam = eig.eigenvalues();
  std::vector<double> mags(T.d);
  for (int i = 0; i < T.d; ++i) mags[i] = std::fabs(lam[i]);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  double tail = 0;
  for (int i = k; i < T.d; ++i) tail += mags[i] * mags[i];
  return std::sqrt(tail);
}

/// Alternating projections between the PSD cone (eigenvalue clipping) and the
/// Toeplitz subspace (diagonal re-averaging), iterated until the minimum
/// eigenvalue clears -1e-8 * ||T||_2. Helper for synthetic instance generation.
inline SymToeplitz psd_project(const VectorXd& colvec) {
  const int d = static_cast<int>(colvec.size());
  check_cap(d);
  MatrixXd M = dense_from_col(SymToeplitz(d, colvec));
  VectorXd col = colvec;
  for (int iter = 0; iter < 2000; ++iter) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(M);
    const VectorXd lam = eig.eigenvalues();
    const MatrixXd& U = eig.eigenvectors();
    const double top = std::max(std::fabs(lam[0]), std::fabs(lam[d - 1]));
    if (lam[0] >= -1e-9 * top || top == 0.0) break;
    MatrixXd P = MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
      if (lam[i] > 0) P.noalias() += lam[i] * U.col(i) * U.col(i).transpose();
    for (int l = 0; l < d; ++l) {
      double s = 0;
      for (int i = 0; i + l < d; ++i) s += P(i + l, i);
      col[l] = s / (d - l);
    }
    M = dense_from_col(SymToeplitz(d, col));
  }
  return SymToeplitz(d, col);
}

/// Random PSD Toeplitz instance in factored form: nonnegative conjugate-paired
/// spectrum at uniformly random frequencies, optionally with a zero-frequency term.
inline FourierToeplitz random_psd_toeplitz(int d, int pairs, double dc_weight, Rng& rng) {
  std::vector<double> fs, ws;
  for (int p = 0; p < pairs; ++p) {
    const double f = rng.uniform(1e-4, 0.5 - 1e-4);
    const double w = std::fabs(rng.normal());
    fs.push_back(f);
    ws.push_back(w);
    fs.push_back(1.0 - f);
    ws.push_back(w);
  }
  if (dc_weight > 0) {
    fs.push_back(0.0);
    ws.push_back(dc_weight);
  }
  return FourierToeplitz(d, std::move(fs), std::move(ws));
}

/// Dense DTFT of a length-d sample vector on a uniform grid of `grid_size`
/// frequencies m/grid_size. Brute-force recovery oracle.
inline VectorXcd dense_dtft(const VectorXcd& x, int grid_size) {
  const int d = static_cast<int>(x.size());
  if (grid_size < d) throw std::invalid_argument("dense_dtft: grid_size < d");
  VectorXcd spec(grid_size);
  for (int m = 0; m < grid_size; ++m) {
    const double f = static_cast<double>(m) / grid_size;
    Complex acc = 0;
    for (int n = 0; n < d; ++n) acc += x[n] * unit_phase(-f * n);
    spec[m] = acc;
  }
  return spec;
}

/// Exact minimum over diagonal D of ||B - F_M D F_M^*||_F for a dense B,
/// with conjugate-tied real unknowns. Uses the closed-form Gram matrix
/// <M_p, M_q>_F so no d^2 x m design is materialized.
/// Returns (optimal tied coefficients per pair, optimal cost).
inline std::pair<VectorXd, double> dense_diagonal_fit(const MatrixXd& B,
                                                      const ConjugatePairing& pairing) {
  const int d = static_cast<int>(B.rows());
  check_cap(d);
  const int P = static_cast<int>(pairing.size());
  if (P == 0) return {VectorXd(), B.norm()};
  // Pair-p basis matrix M_p(i,j) = sum over the pair's freqs of e^{2 pi i f (i-j)}
  //   = pairing.basis(p, i - j), real symmetric Toeplitz.
  // Gram entries <M_p, M_q>_F = sum_{i,j} basis_p(i-j) basis_q(i-j)
  //   = sum_{l=-(d-1)}^{d-1} (d-|l|) basis_p(l) basis_q(l).
  MatrixXd G(P, P);
  VectorXd rhs(P);
  std::vector<VectorXd> basis(P, VectorXd(d));
  for (int p = 0; p < P; ++p)
    for (int l = 0; l < d; ++l) basis[p][l] = pairing.basis(p, l);
  for (int p = 0; p < P; ++p) {
    for (int q = p; q < P; ++q) {
      double s = static_cast<double>(d) * basis[p][0] * basis[q][0];
      for (int l = 1; l < d; ++l) s += 2.0 * (d - l) * basis[p][l] * basis[q][l];
      G(p, q) = G(q, p) = s;
    }
    double r = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) r += B(i, j) * basis[p][std::abs(i - j)];
    rhs[p] = r;
  }
  // Tiny ridge for the near-duplicate columns produced by clustered grids.
  const double ridge = 1e-10 * G.norm() / P;
  MatrixXd Gr = G + ridge * MatrixXd::Identity(P, P);
  VectorXd a = Gr.ldlt().solve(rhs);
  const double cost_sq = B.squaredNorm() - 2.0 * a.dot(rhs) + a.dot(G * a);
  return {std::move(a), std::sqrt(std::max(0.0, cost_sq))};
}

}  // namespace tlra::oracle
