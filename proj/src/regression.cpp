#include "tlra/regression.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tlra {

VectorXd weight_vector(int d) {
  if (d < 1) throw std::invalid_argument("weight_vector: d < 1");
  VectorXd w(d);
  w[0] = std::sqrt(static_cast<double>(d));
  for (int i = 1; i < d; ++i) w[i] = std::sqrt(2.0 * (d - i));
  return w;
}

LeverageProfile leverage_bounds(int d, int r, const RegressionConfig& cfg) {
  if (r > d) throw std::invalid_argument("leverage_bounds: r > d");
  LeverageProfile prof;
  prof.d = d;
  prof.r = std::max(r, 1);
  prof.tau = VectorXd::Ones(d);
  const double r6 = cfg.c_r6 * std::pow(static_cast<double>(prof.r), 6.0) *
                    std::pow(std::log(static_cast<double>(prof.r) + 1.0), 3.0);
  int band_start = 0;
  int remaining = d;
  while (band_start < d) {
    const int len = std::max(1, remaining / 2);  // band i holds ~d/2^i rows
    const int band_end = std::min(d, band_start + len);
    const int n = band_end - band_start;
    if (n > prof.r) {
      for (int j = 1; j <= n; ++j) {
        const double edge = cfg.c_band * prof.r / static_cast<double>(std::min(j, n + 1 - j));
        const double block = r6 / static_cast<double>(n);
        prof.tau[band_start + j - 1] = std::min(1.0, std::min(edge, block));
      }
    }
    band_start = band_end;
    remaining -= len;
  }
  prof.total = prof.tau.sum();
  return prof;
}

SamplingRows draw_sampling_rows(const LeverageProfile& prof, int m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("draw_sampling_rows: m < 1");
  const int d = prof.d;
  SamplingRows rows;
  rows.m = m;
  rows.p = VectorXd(d);
  for (int j = 0; j < d; ++j) rows.p[j] = 0.5 * (prof.tau[j] / prof.total + 1.0 / d);
  VectorXd cum(d);
  double acc = 0;
  for (int j = 0; j < d; ++j) {
    acc += rows.p[j];
    cum[j] = acc;
  }
  rows.idx.reserve(m);
  rows.scale.reserve(m);
  for (int a = 0; a < m; ++a) {
    const double u = rng.uniform01() * acc;
    const int j = static_cast<int>(std::lower_bound(cum.data(), cum.data() + d, u) - cum.data());
    const int jj = std::min(j, d - 1);
    rows.idx.push_back(jj);
    rows.scale.push_back(1.0 / std::sqrt(static_cast<double>(m) * rows.p[jj]));
  }
  return rows;
}

namespace {

// Column-pivoted QR with a ridge-regularized fallback when the condition
// estimate blows up (near-duplicate columns from gamma-clustered grids).
RegressionResult solve_ls(const MatrixXd& A, const VectorXd& rhs, const RegressionConfig& cfg) {
  RegressionResult res;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(A);
  const auto& R = qr.matrixR();
  const int rank = std::min<int>(A.rows(), A.cols());
  double dmax = 0, dmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < rank; ++i) {
    const double v = std::fabs(R(i, i));
    dmax = std::max(dmax, v);
    dmin = std::min(dmin, v);
  }
  const bool ill = !(dmin > 0) || dmax / dmin > cfg.cond_limit;
  if (!ill) {
    res.coeffs = qr.solve(rhs);
  } else {
    res.conditioning_flag = true;
    const double lambda = cfg.ridge_rel * A.squaredNorm() / std::max<int>(1, A.cols());
    MatrixXd G = A.transpose() * A + lambda * MatrixXd::Identity(A.cols(), A.cols());
    res.coeffs = G.ldlt().solve(A.transpose() * rhs);
  }
  res.sampled_cost = (A * res.coeffs - rhs).norm();
  return res;
}

MatrixXd sampled_pair_design(const ConjugatePairing& pairing, const SamplingRows& rows,
                             const VectorXd& w) {
  const int m = rows.m;
  const int P = static_cast<int>(pairing.size());
  MatrixXd A(m, P);
  for (int a = 0; a < m; ++a) {
    const int j = rows.idx[a];
    const double sw = rows.scale[a] * w[j];
    for (int p = 0; p < P; ++p) A(a, p) = sw * pairing.basis(p, j);
  }
  return A;
}

}  // namespace

RegressionResult solve_weighted_column_regression(const ColumnFn& column,
                                                  const ConjugatePairing& pairing,
                                                  const SamplingRows& rows,
                                                  const RegressionConfig& cfg) {
  if (pairing.size() == 0) {
    RegressionResult res;
    res.coeffs = VectorXd();
    double c = 0;
    // cost of the empty fit on the sampled rows
    // (weights looked up per sampled index below)
    const int d_guess = rows.p.size() ? static_cast<int>(rows.p.size()) : 1;
    VectorXd w = weight_vector(d_guess);
    for (int a = 0; a < rows.m; ++a) {
      const double v = rows.scale[a] * w[rows.idx[a]] * column(rows.idx[a]);
      c += v * v;
    }
    res.sampled_cost = std::sqrt(c);
    return res;
  }
  const int d = static_cast<int>(rows.p.size());
  VectorXd w = weight_vector(d);
  MatrixXd A = sampled_pair_design(pairing, rows, w);
  VectorXd rhs(rows.m);
  for (int a = 0; a < rows.m; ++a) rhs[a] = rows.scale[a] * w[rows.idx[a]] * column(rows.idx[a]);
  return solve_ls(A, rhs, cfg);
}

double weighted_column_cost(const VectorXd& t1, const ConjugatePairing& pairing,
                            const VectorXd& coeffs) {
  const int d = static_cast<int>(t1.size());
  VectorXd w = weight_vector(d);
  double c = 0;
  for (int j = 0; j < d; ++j) {
    double fit = 0;
    for (std::size_t p = 0; p < pairing.size(); ++p) fit += coeffs[p] * pairing.basis(p, j);
    const double v = w[j] * (fit - t1[j]);
    c += v * v;
  }
  return std::sqrt(c);
}

RegressionResult dense_weighted_optimum(const VectorXd& t1, const ConjugatePairing& pairing,
                                        const RegressionConfig& cfg) {
  const int d = static_cast<int>(t1.size());
  VectorXd w = weight_vector(d);
  const int P = static_cast<int>(pairing.size());
  MatrixXd A(d, P);
  VectorXd rhs(d);
  for (int j = 0; j < d; ++j) {
    for (int p = 0; p < P; ++p) A(j, p) = w[j] * pairing.basis(p, j);
    rhs[j] = w[j] * t1[j];
  }
  return solve_ls(A, rhs, cfg);
}

RefineResult refine_residual(const ColumnFn& column, const ConjugatePairing& prior,
                             const VectorXd& prior_coeffs,
                             const std::vector<std::vector<double>>& candidates,
                             const SamplingRows& rows2, const RegressionConfig& cfg) {
  ColumnFn residual = [&](int j) {
    double fit = 0;
    for (std::size_t p = 0; p < prior.size(); ++p) fit += prior_coeffs[p] * prior.basis(p, j);
    return column(j) - fit;
  };
  RefineResult best;
  bool have = false;
  for (const auto& cand : candidates) {
    const ConjugatePairing cp = ConjugatePairing::from_closed_set(cand);
    RegressionResult r = solve_weighted_column_regression(residual, cp, rows2, cfg);
    if (!have || r.sampled_cost < best.sampled_cost) {
      have = true;
      best.sampled_cost = r.sampled_cost;
      best.conditioning_flag = r.conditioning_flag;
      // union solution: prior pairs keep their coefficients, new pairs append
      best.pairing = prior;
      best.coeffs = VectorXd(prior.size() + cp.size());
      for (std::size_t p = 0; p < prior.size(); ++p) best.coeffs[p] = prior_coeffs[p];
      for (std::size_t p = 0; p < cp.size(); ++p) {
        best.pairing.rep.push_back(cp.rep[p]);
        best.pairing.self_conj.push_back(cp.self_conj[p]);
        best.coeffs[prior.size() + p] = r.coeffs[p];
      }
    }
  }
  if (!have) {
    best.pairing = prior;
    best.coeffs = prior_coeffs;
  }
  best.freqs.clear();
  for (std::size_t p = 0; p < best.pairing.size(); ++p) {
    best.freqs.push_back(best.pairing.rep[p]);
    if (!best.pairing.self_conj[p]) best.freqs.push_back(wrap01(1.0 - best.pairing.rep[p]));
  }
  return best;
}

MatrixRegressionResult solve_matrix_regression(EntryOracle& entries, int d,
                                               const ConjugatePairing& pairing, int s, Rng& rng,
                                               const RegressionConfig& cfg) {
  MatrixRegressionResult out;
  const std::int64_t before = entries.queries_used();
  const int P = static_cast<int>(pairing.size());
  if (P == 0) {
    out.coeffs = VectorXd();
    // ||B||_F estimate over a sampled grid is still the zero-candidate cost
    LeverageProfile prof = leverage_bounds(d, 1, cfg);
    Rng r1 = rng.fork("rows");
    Rng r2 = rng.fork("cols");
    SamplingRows rows = draw_sampling_rows(prof, s, r1);
    SamplingRows cols = draw_sampling_rows(prof, s, r2);
    double c = 0;
    for (int a = 0; a < s; ++a)
      for (int b = 0; b < s; ++b) {
        const double v = rows.scale[a] * cols.scale[b] * entries(rows.idx[a], cols.idx[b]);
        c += v * v;
      }
    out.sampled_cost = out.sampled_cost_zero = std::sqrt(c);
    out.entries_read = entries.queries_used() - before;
    return out;
  }
  LeverageProfile prof = leverage_bounds(d, std::max(1, 2 * P), cfg);
  Rng rrow = rng.fork("rows");
  Rng rcol = rng.fork("cols");
  SamplingRows rows = draw_sampling_rows(prof, s, rrow);
  SamplingRows cols = draw_sampling_rows(prof, s, rcol);

  MatrixXd A(static_cast<std::int64_t>(s) * s, P);
  VectorXd rhs(static_cast<std::int64_t>(s) * s);
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) {
      const std::int64_t row = static_cast<std::int64_t>(a) * s + b;
      const double sc = rows.scale[a] * cols.scale[b];
      const int off = rows.idx[a] - cols.idx[b];
      for (int p = 0; p < P; ++p) A(row, p) = sc * pairing.basis(p, off);
      rhs[row] = sc * entries(rows.idx[a], cols.idx[b]);
    }
  }
  RegressionResult ls = solve_ls(A, rhs, cfg);
  out.coeffs = ls.coeffs;
  out.sampled_cost = ls.sampled_cost;
  out.conditioning_flag = ls.conditioning_flag;
  out.sampled_cost_zero = rhs.norm();
  out.entries_read = entries.queries_used() - before;
  return out;
}

FourierToeplitz brute_force_toeplitz_fit(const SymToeplitz& T, int k, const BruteForceConfig& cfg,
                                         Rng& rng) {
  const int d = T.d;
  if (d > 64 || cfg.r1 > 2) throw std::invalid_argument("brute_force_toeplitz_fit: desk scale only");
  if (k <= 0) return FourierToeplitz(d, {}, {});

  std::vector<double> anchors;
  for (int i = 0; i < d; ++i) anchors.push_back((2.0 * i + 1.0) / (2.0 * d));

  std::vector<std::vector<double>> candidates;
  auto expand = [&](const std::vector<double>& base) {
    std::vector<double> s;
    for (double f : base) {
      for (int j = 1; j <= cfg.r2; ++j) {
        for (double off : {f + cfg.gamma * j, f - cfg.gamma * j}) {
          const double fo = wrap01(off);
          s.push_back(fo);
          s.push_back(wrap01(1.0 - fo));
        }
      }
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end(), [](double a, double b) { return std::fabs(a - b) < 1e-15; }),
            s.end());
    return s;
  };
  if (cfg.r1 == 1) {
    for (double a : anchors) candidates.push_back(expand({a}));
  } else {
    for (std::size_t i = 0; i < anchors.size(); ++i)
      for (std::size_t j = i + 1; j < anchors.size(); ++j)
        candidates.push_back(expand({anchors[i], anchors[j]}));
  }
  if (static_cast<int>(candidates.size()) > cfg.max_candidates)
    throw std::invalid_argument("brute_force_toeplitz_fit: search space over cap");

  LeverageProfile prof = leverage_bounds(d, std::max(2, 4 * cfg.r1 * cfg.r2), {});
  SamplingRows rows = draw_sampling_rows(prof, cfg.m_samples, rng);
  ColumnFn column = [&](int j) { return T.col[j]; };

  double best_cost = std::numeric_limits<double>::infinity();
  ConjugatePairing best_pairing;
  VectorXd best_coeffs;
  for (const auto& cand : candidates) {
    ConjugatePairing cp = ConjugatePairing::from_closed_set(cand);
    RegressionResult r = solve_weighted_column_regression(column, cp, rows);
    if (r.sampled_cost < best_cost) {
      best_cost = r.sampled_cost;
      best_pairing = cp;
      best_coeffs = r.coeffs;
    }
  }
  if (!std::isfinite(best_cost)) return FourierToeplitz(d, {}, {});
  return best_pairing.expand(d, best_coeffs);
}

VectorXd dense_leverage_scores(const MatrixXd& A) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(A);
  MatrixXd thinQ = qr.householderQ() * MatrixXd::Identity(A.rows(), qr.rank());
  VectorXd tau(A.rows());
  for (int j = 0; j < A.rows(); ++j) tau[j] = thinQ.row(j).squaredNorm();
  return tau;
}

MatrixXd weighted_pair_design(int d, const ConjugatePairing& pairing) {
  VectorXd w = weight_vector(d);
  MatrixXd A(d, pairing.size());
  for (int j = 0; j < d; ++j)
    for (std::size_t p = 0; p < pairing.size(); ++p) A(j, p) = w[j] * pairing.basis(p, j);
  return A;
}

}  // namespace tlra
