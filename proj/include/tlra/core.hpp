#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace tlra {

using Complex = std::complex<double>;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Unit-modulus exponential e^{2*pi*i*x}.
inline Complex unit_phase(double x) {
  const double a = kTwoPi * x;
  return {std::cos(a), std::sin(a)};
}

/// Circular distance between two frequencies in [0,1].
inline double wrap_dist(double f1, double f2) {
  double diff = std::fabs(f1 - f2);
  diff = diff - std::floor(diff);  // tolerate inputs at the 1.0 boundary
  return std::min(diff, 1.0 - diff);
}

/// Canonicalize a frequency to [0,1).
inline double wrap01(double f) {
  double r = f - std::floor(f);
  if (r >= 1.0) r = 0.0;
  return r;
}

/// Real symmetric d x d Toeplitz matrix stored as its first column.
/// entry(i,j) == col[|i-j|].
struct SymToeplitz {
  int d = 0;
  VectorXd col;

  SymToeplitz() = default;
  SymToeplitz(int dim, VectorXd first_col) : d(dim), col(std::move(first_col)) {
    if (col.size() != d) throw std::invalid_argument("SymToeplitz: column length != d");
  }

  double entry(int i, int j) const { return col[std::abs(i - j)]; }

  /// Frobenius norm from the first column: d*c0^2 + sum 2(d-l) c_l^2.
  double frob_norm() const {
    double s = static_cast<double>(d) * col[0] * col[0];
    for (int l = 1; l < d; ++l) s += 2.0 * (d - l) * col[l] * col[l];
    return std::sqrt(s);
  }
};

/// Factored symmetric Toeplitz matrix F_S diag(a) F_S^*.
///
/// Frequencies live in [0,1). For every f not in {0, 1/2} the conjugate
/// (1-f) mod 1 must also be present with equal weight, which makes all
/// entries real.
struct FourierToeplitz {
  int d = 0;
  std::vector<double> freqs;    // sorted ascending
  std::vector<double> weights;  // one per frequency

  FourierToeplitz() = default;
  FourierToeplitz(int dim, std::vector<double> f, std::vector<double> w)
      : d(dim), freqs(std::move(f)), weights(std::move(w)) {
    if (freqs.size() != weights.size())
      throw std::invalid_argument("FourierToeplitz: freqs/weights size mismatch");
    sort_by_freq();
  }

  int rank() const { return static_cast<int>(freqs.size()); }

  /// Checks the conjugate-closure invariant at the given match tolerance.
  bool is_conjugate_closed(double tol = 1e-12) const {
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      const double f = freqs[i];
      if (wrap_dist(f, 0.0) <= tol || wrap_dist(f, 0.5) <= tol) continue;
      const double conj = wrap01(1.0 - f);
      bool found = false;
      for (std::size_t j = 0; j < freqs.size(); ++j) {
        if (std::fabs(freqs[j] - conj) <= tol &&
            std::fabs(weights[j] - weights[i]) <= tol * (1.0 + std::fabs(weights[i]))) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
    return true;
  }

  double sum_abs_weights() const {
    double s = 0;
    for (double w : weights) s += std::fabs(w);
    return s;
  }

  /// Complex value of entry (i,j) before discarding the imaginary residue.
  Complex entry_complex(int i, int j) const {
    Complex acc = 0;
    for (std::size_t p = 0; p < freqs.size(); ++p)
      acc += weights[p] * unit_phase(freqs[p] * (i - j));
    return acc;
  }

  /// Real matrix entry. Throws if the imaginary residue exceeds
  /// 1e-10 * sum|a_f| (broken conjugate closure).
  double entry(int i, int j) const {
    const Complex v = entry_complex(i, j);
    const double tol = 1e-10 * std::max(sum_abs_weights(), 1e-300);
    if (std::fabs(v.imag()) > tol)
      throw std::runtime_error("FourierToeplitz: imaginary residue exceeds tolerance");
    return v.real();
  }

  /// First column as a real vector (length d).
  VectorXd first_column() const {
    VectorXd c(d);
    for (int t = 0; t < d; ++t) c[t] = entry(t, 0);
    return c;
  }

  SymToeplitz to_toeplitz() const { return SymToeplitz(d, first_column()); }

 private:
  void sort_by_freq() {
    std::vector<std::size_t> idx(freqs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return freqs[a] < freqs[b]; });
    std::vector<double> f(freqs.size()), w(freqs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      f[i] = freqs[idx[i]];
      w[i] = weights[idx[i]];
    }
    freqs = std::move(f);
    weights = std::move(w);
  }
};

/// Entrywise query access to a matrix with exact query accounting.
///
/// Repeated reads of the same entry are memoized and counted once. Single
/// writer; concurrent trials must each own their oracle.
class EntryOracle {
 public:
  using Source = std::function<double(int, int)>;

  EntryOracle(Source source, std::optional<std::int64_t> budget = std::nullopt)
      : source_(std::move(source)), budget_(budget) {}

  double operator()(int i, int j) {
    const std::int64_t key = (static_cast<std::int64_t>(i) << 32) | static_cast<std::uint32_t>(j);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    if (budget_ && queries_used_ >= *budget_)
      throw std::runtime_error("EntryOracle: query budget exhausted");
    ++queries_used_;
    const double v = source_(i, j);
    memo_.emplace(key, v);
    return v;
  }

  std::int64_t queries_used() const { return queries_used_; }

 private:
  Source source_;
  std::optional<std::int64_t> budget_;
  std::int64_t queries_used_ = 0;
  std::unordered_map<std::int64_t, double> memo_;
};

/// Sparse exponential sum x(t) = sum_f a_f e^{2*pi*i*f*t} on domain [d].
struct SparseSignal {
  int d = 0;
  std::vector<double> freqs;
  std::vector<Complex> coeffs;

  SparseSignal() = default;
  SparseSignal(int dim, std::vector<double> f, std::vector<Complex> a)
      : d(dim), freqs(std::move(f)), coeffs(std::move(a)) {
    if (freqs.size() != coeffs.size())
      throw std::invalid_argument("SparseSignal: freqs/coeffs size mismatch");
  }

  Complex eval(std::int64_t t) const {
    Complex acc = 0;
    for (std::size_t p = 0; p < freqs.size(); ++p)
      acc += coeffs[p] * unit_phase(freqs[p] * static_cast<double>(t));
    return acc;
  }

  /// Energy on the length-d grid: sum_{t in [d]} |x(t)|^2.
  double norm_d_sq() const {
    double s = 0;
    for (int t = 0; t < d; ++t) s += std::norm(eval(t));
    return s;
  }
};

/// Pairs a conjugate-closed frequency set into |S|/2-ish real degrees of
/// freedom. Each pair is (representative frequency in [0, 1/2], self-conjugate
/// flag); the collapsing map places equal unit entries on f and (1-f).
struct ConjugatePairing {
  std::vector<double> rep;        // representative (smaller) frequency per pair
  std::vector<bool> self_conj;    // f in {0, 1/2}

  static ConjugatePairing from_closed_set(const std::vector<double>& freqs, double tol = 1e-12) {
    ConjugatePairing p;
    std::vector<bool> used(freqs.size(), false);
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      const double f = wrap01(freqs[i]);
      if (wrap_dist(f, 0.0) <= tol || wrap_dist(f, 0.5) <= tol) {
        p.rep.push_back(f);
        p.self_conj.push_back(true);
        continue;
      }
      const double conj = wrap01(1.0 - f);
      bool matched = false;
      for (std::size_t j = i + 1; j < freqs.size(); ++j) {
        if (!used[j] && std::fabs(wrap01(freqs[j]) - conj) <= tol) {
          used[j] = true;
          matched = true;
          break;
        }
      }
      if (!matched) throw std::invalid_argument("ConjugatePairing: set not conjugate-closed");
      p.rep.push_back(std::min(f, conj));
      p.self_conj.push_back(false);
    }
    return p;
  }

  std::size_t size() const { return rep.size(); }

  /// Real value of sum over the pair's frequencies of e^{2 pi i f t}.
  double basis(std::size_t pair, std::int64_t t) const {
    if (self_conj[pair]) return std::cos(kTwoPi * rep[pair] * static_cast<double>(t));
    return 2.0 * std::cos(kTwoPi * rep[pair] * static_cast<double>(t));
  }

  /// Expand per-pair coefficients back to a conjugate-closed FourierToeplitz.
  FourierToeplitz expand(int d, const VectorXd& a) const {
    std::vector<double> fs, ws;
    for (std::size_t p = 0; p < rep.size(); ++p) {
      if (self_conj[p]) {
        fs.push_back(rep[p]);
        ws.push_back(a[p]);
      } else {
        fs.push_back(rep[p]);
        ws.push_back(a[p]);
        fs.push_back(wrap01(1.0 - rep[p]));
        ws.push_back(a[p]);
      }
    }
    return FourierToeplitz(d, std::move(fs), std::move(ws));
  }
};

}  // namespace tlra
