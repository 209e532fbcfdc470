#include "tlra/hashing.hpp"

#include <cmath>
#include <stdexcept>

namespace tlra {

int hash_freq(const HashParams& p, double f) {
  const double arg = static_cast<double>(p.sigma) * (f - p.b);
  double frac = arg - std::floor(arg);
  if (frac >= 1.0) frac = 0.0;
  const auto bin = static_cast<std::int64_t>(std::floor(p.B * frac + 0.5));  // half-up
  return static_cast<int>(bin % p.B);
}

HashParams sample_hash_params(int B, int k, double Delta, Rng& rng) {
  if (B < 2 || k < 1 || Delta <= 0) throw std::invalid_argument("sample_hash_params: bad arguments");
  const double lo_real = 1.0 / (200.0 * B * k * Delta);
  const double hi_real = 1.0 / (100.0 * B * k * Delta);
  if (lo_real < 2.0)
    throw std::invalid_argument(
        "sample_hash_params: sigma interval starts below 2; increase d or decrease B");
  const auto lo = static_cast<std::int64_t>(std::ceil(lo_real));
  const auto hi = static_cast<std::int64_t>(std::floor(hi_real));
  if (hi < lo) throw std::invalid_argument("sample_hash_params: empty sigma interval");
  HashParams p;
  p.B = B;
  p.sigma = rng.uniform_int(lo, hi);
  p.b = rng.uniform01() / static_cast<double>(p.sigma);
  return p;
}

namespace {

int fold_depth_for(const FilterG& g) {
  return static_cast<int>((g.time_support + g.B - 1) / g.B);
}

}  // namespace

BinAccessor::BinAccessor(SignalFn windowed, FilterG g, HashParams p)
    : windowed_(std::move(windowed)), g_(std::move(g)), p_(p) {
  if (p_.B != g_.B) throw std::invalid_argument("BinAccessor: filter bucket count mismatch");
  D_ = fold_depth_for(g_);
  const std::int64_t half = static_cast<std::int64_t>(p_.B) * D_;
  taps_.resize(2 * half + 1);
  for (std::int64_t j = -half; j <= half; ++j) {
    const double tap = g_.time_tap(j);
    taps_[j + half] = tap * unit_phase(-static_cast<double>(p_.sigma) * p_.b * static_cast<double>(j));
  }
}

const VectorXcd& BinAccessor::all_bins(std::int64_t tau) const {
  auto it = cache_.find(tau);
  if (it != cache_.end()) return it->second;
  const int B = p_.B;
  const std::int64_t half = static_cast<std::int64_t>(B) * D_;
  // Fold the weighted samples V[j] = G(j) e^{-2 pi i sigma b j} W(tau + sigma j)
  // into B cells, then take a length-B DFT.
  VectorXcd folded = VectorXcd::Zero(B);
  for (std::int64_t j = -half; j <= half; ++j) {
    const Complex tap = taps_[j + half];
    if (tap == Complex(0, 0)) continue;
    const Complex w = windowed_(tau + p_.sigma * j);
    if (w == Complex(0, 0)) continue;
    std::int64_t cell = j % B;
    if (cell < 0) cell += B;
    folded[cell] += tap * w;
  }
  VectorXcd u(B);
  for (int m = 0; m < B; ++m) {
    Complex acc = 0;
    for (int l = 0; l < B; ++l) acc += folded[l] * unit_phase(-static_cast<double>(l) * m / B);
    u[m] = acc;
  }
  return cache_.emplace(tau, std::move(u)).first->second;
}

Complex BinAccessor::value_at(int j, std::int64_t tau) const { return all_bins(tau)[j]; }

VectorXcd hash_to_bins_windowed(const SignalFn& windowed, const FilterG& g, const HashParams& p,
                                std::int64_t tau) {
  BinAccessor acc(windowed, g, p);
  return acc.all_bins(tau);
}

VectorXcd hash_to_bins(const SignalFn& x, const FilterH& h, const FilterG& g, const HashParams& p,
                       std::int64_t alpha) {
  SignalFn windowed = [&x, &h](std::int64_t t) -> Complex {
    return x(t) * h.eval(t);
  };
  return hash_to_bins_windowed(windowed, g, p, p.sigma * alpha);
}

Complex dense_bin_convolution(const SignalFn& windowed, const FilterG& g, const HashParams& p,
                              int j, std::int64_t tau) {
  // ((W) * G^{(j)}_{sigma,b})(tau) with the filter's closed-form time taps on
  // the sigma-grid: G^{(j)}(sigma n) = G(-n) e^{2 pi i n j / B} e^{2 pi i sigma b n}.
  const std::int64_t half = g.time_support + 1;
  Complex acc = 0;
  for (std::int64_t n = -half; n <= half; ++n) {
    const double tap = g.time_tap(-n);
    if (tap == 0.0) continue;
    const Complex filt =
        tap * unit_phase(static_cast<double>(n) * j / p.B +
                         static_cast<double>(p.sigma) * p.b * static_cast<double>(n));
    acc += windowed(tau - p.sigma * n) * filt;
  }
  return acc;
}

std::vector<BoundedInstance> outer_split(const SignalFn& x, int d, const FilterH& h, int B,
                                         double w, double delta, int k, Rng& rng) {
  FilterG g = build_filter_g(B, w, delta, k);
  HashParams p;
  p.sigma = 1;
  p.b = rng.uniform01();
  p.B = B;
  SignalFn windowed = [x, h](std::int64_t t) -> Complex { return x(t) * h.eval(t); };
  // One shared accessor; every instance indexes its own bucket of the cache.
  auto bins = std::make_shared<BinAccessor>(windowed, g, p);
  std::vector<BoundedInstance> out;
  out.reserve(B);
  for (int j = 0; j < B; ++j) {
    BoundedInstance inst;
    inst.bucket = j;
    inst.center = wrap01(p.b + static_cast<double>(j) / B);
    inst.width = 1.0 / B;
    inst.lo = wrap01(inst.center - 0.5 * inst.width);
    inst.bins = bins;
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace tlra
