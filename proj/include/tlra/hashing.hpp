#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "tlra/core.hpp"
#include "tlra/filters.hpp"
#include "tlra/rng.hpp"

namespace tlra {

/// Integer-time signal access. Implementations must return 0 outside their
/// domain; HashToBins relies on that convention for out-of-range reads.
using SignalFn = std::function<Complex(std::int64_t)>;

struct HashParams {
  std::int64_t sigma = 1;
  double b = 0.0;  // in [0, 1]
  int B = 2;
};

/// Frequency-domain hash bin: round(B * frac(sigma*(f-b))) mod B.
/// Half-integers round up.
int hash_freq(const HashParams& p, double f);

/// Draws sigma uniformly from the integer interval
/// [1/(200 B k Delta), 1/(100 B k Delta)] and b uniformly from [0, 1/sigma].
/// Throws std::invalid_argument when the interval is empty or starts below 2.
HashParams sample_hash_params(int B, int k, double Delta, Rng& rng);

/// Folding + DFT evaluation of all B bucket convolutions at time tau:
///   u[m] = ((W) * G^{(m)}_{sigma,b})(tau)
/// where W is the already-windowed signal (x * H). Reads exactly the samples
/// {W(tau + sigma*j)} for |j| <= B*D with D = ceil(time_support/B).
VectorXcd hash_to_bins_windowed(const SignalFn& windowed, const FilterG& g, const HashParams& p,
                                std::int64_t tau);

/// Spec-facing form: alpha indexes time as tau = sigma*alpha and the window H
/// is applied to x internally.
VectorXcd hash_to_bins(const SignalFn& x, const FilterH& h, const FilterG& g,
                       const HashParams& p, std::int64_t alpha);

/// Reference evaluation of one bucket by direct dense summation of the
/// convolution over the filter support (test oracle path, no folding/DFT).
Complex dense_bin_convolution(const SignalFn& windowed, const FilterG& g, const HashParams& p,
                              int j, std::int64_t tau);

/// Cached access to the hashed bucket signals of one (sigma, b, B) stage.
/// value_at(j, tau) = ((W) * G^{(j)}_{sigma,b})(tau). All B buckets of a
/// given tau are computed by one fold + DFT and cached, so per-bucket
/// consumers share samples. Read-only after construction apart from the
/// cache; per-call sample positions are identical across buckets.
class BinAccessor {
 public:
  BinAccessor(SignalFn windowed, FilterG g, HashParams p);

  Complex value_at(int j, std::int64_t tau) const;
  Complex value(int j, std::int64_t alpha) const { return value_at(j, p_.sigma * alpha); }
  const VectorXcd& all_bins(std::int64_t tau) const;

  const HashParams& params() const { return p_; }
  int fold_depth() const { return D_; }
  std::int64_t taus_evaluated() const { return static_cast<std::int64_t>(cache_.size()); }
  /// Distinct windowed-signal reads per fresh tau.
  std::int64_t samples_per_call() const { return 2 * static_cast<std::int64_t>(p_.B) * D_ + 1; }

 private:
  SignalFn windowed_;
  FilterG g_;
  HashParams p_;
  int D_ = 0;
  std::vector<Complex> taps_;  // G(j) * e^{-2 pi i sigma b j}, j in [-BD, BD]
  mutable std::unordered_map<std::int64_t, VectorXcd> cache_;
};

/// One sigma=1 outer bucket: accessor for the bounded instance plus its
/// frequency interval (center b + j/B, width 1/B, modulo 1).
struct BoundedInstance {
  int bucket = 0;
  double center = 0.0;
  double lo = 0.0;  // interval endpoints mod 1 (lo + width wraps)
  double width = 0.0;
  std::shared_ptr<BinAccessor> bins;

  Complex operator()(std::int64_t t) const { return bins->value_at(bucket, t); }
  bool contains(double f) const { return wrap_dist(f, center) <= 0.5 * width + 1e-15; }
};

/// Splits a general instance into B bounded instances with the sigma = 1
/// hashing and a uniformly random shift b. The windowed signal (x * H) is
/// shared by all instances.
std::vector<BoundedInstance> outer_split(const SignalFn& x, int d, const FilterH& h, int B,
                                         double w, double delta, int k, Rng& rng);

}  // namespace tlra
