#include "tlra/covariance.hpp"

#include <cmath>

#include <json.hpp>

#include "tlra/oracle.hpp"

namespace tlra {

SampleSet sample_gaussian_toeplitz(const SymToeplitz& T, int s, Rng& rng) {
  if (s < 1) throw std::invalid_argument("sample_gaussian_toeplitz: s < 1");
  const int d = T.d;
  oracle::check_cap(d);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(oracle::dense_from_col(T));
  const VectorXd lam = eig.eigenvalues();
  const MatrixXd& U = eig.eigenvectors();
  const double top = std::max(std::fabs(lam[0]), std::fabs(lam[d - 1]));
  VectorXd root(d);
  for (int i = 0; i < d; ++i) {
    if (lam[i] < -1e-10 * top)
      throw std::invalid_argument("sample_gaussian_toeplitz: matrix not PSD within tolerance");
    root[i] = std::sqrt(std::max(0.0, lam[i]));
  }
  MatrixXd G(d, s);
  for (int j = 0; j < s; ++j)
    for (int i = 0; i < d; ++i) G(i, j) = rng.normal();
  MatrixXd X = U * root.asDiagonal() * G;
  return SampleSet(d, s, std::move(X));
}

SampleSet sample_gaussian_toeplitz(const FourierToeplitz& T, int s, Rng& rng) {
  if (s < 1) throw std::invalid_argument("sample_gaussian_toeplitz: s < 1");
  if (!T.is_conjugate_closed(1e-10))
    throw std::invalid_argument("sample_gaussian_toeplitz: set not conjugate closed");
  const int d = T.d;
  const int r = T.rank();
  for (double w : T.weights)
    if (w < -1e-12) throw std::invalid_argument("sample_gaussian_toeplitz: negative weight");
  MatrixXd X(d, s);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<double> root(r);
  for (int p = 0; p < r; ++p) root[p] = std::sqrt(std::max(0.0, T.weights[p]));
  for (int j = 0; j < s; ++j) {
    // x = sqrt(2) Re(F_S D^{1/2} g), complex standard normal g
    std::vector<Complex> g(r);
    for (int p = 0; p < r; ++p) g[p] = Complex(rng.normal(), rng.normal()) * inv_sqrt2;
    for (int t = 0; t < d; ++t) {
      Complex acc = 0;
      for (int p = 0; p < r; ++p) acc += root[p] * g[p] * unit_phase(T.freqs[p] * t);
      X(t, j) = std::sqrt(2.0) * acc.real();
    }
  }
  return SampleSet(d, s, std::move(X));
}

double sample_cov_entry(SampleSet& X, int i, int j) {
  double acc = 0;
  for (int kk = 0; kk < X.s(); ++kk) acc += X.read(kk, i) * X.read(kk, j);
  return acc / X.s();
}

CovarianceReport covariance_estimate(SampleSet& X, int k, double epsilon,
                                     const PipelineConfig& cfg, Rng& rng) {
  if (X.s() < 1) throw std::invalid_argument("covariance_estimate: empty sample set");
  CovarianceReport rep;
  const int d = X.d();
  rep.vsc = X.vsc();
  rep.delta_used = epsilon / std::sqrt(static_cast<double>(d));
  SampleSet* xs = &X;
  EntryOracle oracle([xs](int i, int j) { return sample_cov_entry(*xs, i, j); });
  rep.recovery = robust_lowrank(oracle, d, k, rep.delta_used, cfg, rng);
  rep.cov_entries = oracle.queries_used();
  rep.esc = X.esc();
  return rep;
}

ConcentrationReport concentration_check(const SymToeplitz& T, int k, int s, int trials, Rng& rng) {
  oracle::check_cap(T.d);
  const int d = T.d;
  const MatrixXd Tm = oracle::dense_from_col(T);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Tm);
  const VectorXd lam = eig.eigenvalues();
  const MatrixXd& U = eig.eigenvectors();
  std::vector<int> idx(d);
  for (int i = 0; i < d; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return std::fabs(lam[a]) > std::fabs(lam[b]); });
  MatrixXd Pk = MatrixXd::Zero(d, d);
  MatrixXd Tk = MatrixXd::Zero(d, d);
  for (int r = 0; r < k; ++r) {
    const int i = idx[r];
    Pk.noalias() += U.col(i) * U.col(i).transpose();
    Tk.noalias() += lam[i] * U.col(i) * U.col(i).transpose();
  }
  const double tail2 = (Tm - Tk).operatorNorm();
  const double tailF = (Tm - Tk).norm();
  const double trace = Tm.trace();

  ConcentrationReport rep;
  rep.s = s;
  rep.spectral = std::fabs(lam[idx[0]]);
  rep.bound_term = std::sqrt(std::max(0.0, tail2 * trace + tailF * trace / std::max(1, k)));

  double full = 0, offp = 0, proj = 0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng local = rng.fork(4000 + trial);
    SampleSet X = sample_gaussian_toeplitz(T, s, local);
    MatrixXd C = X.raw() * X.raw().transpose() / s;
    full += (C - Tm).norm();
    MatrixXd PCP = Pk * C * Pk;
    offp += (C - PCP).norm();
    proj += (PCP - Tk).norm();
  }
  rep.full_err = full / trials;
  rep.offprojection = offp / trials;
  rep.projected_err = proj / trials;
  rep.full_ratio = rep.full_err / std::max(rep.bound_term + 1e-3 * rep.spectral, 1e-300);
  return rep;
}

std::string CovarianceReport::to_json() const {
  nlohmann::json j{{"esc", esc},
                   {"vsc", vsc},
                   {"cov_entries", cov_entries},
                   {"delta_used", delta_used},
                   {"recovery", nlohmann::json::parse(recovery.to_json())}};
  return j.dump();
}

std::string ConcentrationReport::to_json() const {
  nlohmann::json j{{"s", s},
                   {"full_err", full_err},
                   {"offprojection", offprojection},
                   {"projected_err", projected_err},
                   {"bound_term", bound_term},
                   {"spectral", spectral},
                   {"full_ratio", full_ratio}};
  return j.dump();
}

}  // namespace tlra
