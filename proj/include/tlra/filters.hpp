#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tlra/core.hpp"
#include "tlra/rng.hpp"

namespace tlra {

/// Constants steering the filter constructions. The lemma contracts only pin
/// the property masks; the concrete parameter formulas are artifact choices
/// and every knob here is config-visible and serialized with the filter.
struct FilterConfig {
  // H: taper order l = clamp(round(c_l * log2(k/delta)), l_min, l_max).
  double c_l = 0.30;
  int l_min = 4;
  int l_max = 10;
  // H: fraction of the 1% energy budget spent on the transition band. The
  // frequency support is set to delta_h = c_bw * l / d unless overridden.
  double c_bw = 124.0;
  double max_delta_h = 0.49;
  // G: transition completes within this many gaussian sigmas.
  double g_sigma_mult = 1.0;

  // Optional override of the H frequency-support width (absolute, in [0,1)).
  // The recovery pipeline narrows the filter well below the standalone
  // default to keep hashed clusters thin.
  double delta_h_override = 0.0;
};

/// Compact window function approximating the indicator of [0, d].
///
/// Time domain: unit boxcar of width d*s3 centered at d/2, convolved with the
/// normalized kernel K(t) = c * sinc(t * delta_h / l)^l. Frequency domain:
/// the order-l B-spline bump (box of width delta_h/l self-convolved l times)
/// times the boxcar's sinc, so supp(H^) is exactly [-delta_h/2, delta_h/2].
class FilterH {
 public:
  int k = 0;
  double delta = 0;
  int d = 0;
  int l = 0;
  double s0 = 0;      // envelope scale fitted at construction
  double s1 = 0;      // transition count: boxcar width = d*s3, s3 = 1 - 1/s1
  double s3 = 0;
  double delta_h = 0; // |supp(H^)| = s1*l/(d*s3)

  double eval(std::int64_t t) const;

  /// Property III decay envelope, valid for |t - d/2| >= d*s3/2.
  double envelope(std::int64_t t) const;

  /// Average of H(t)^2 over [d] (the single-tone Property VI ratio).
  double mean_square_in_window() const;

  /// Analytic bound on sum_{|t-d/2| > radius} H(t)^2 via the envelope.
  double tail_energy_bound(double radius) const;

  std::string to_json() const;

  // construction internals
  double kernel_cdf(double x) const;  // CDF of the normalized sinc^l kernel
  std::vector<double> cdf_table;      // tabulated on [0, cdf_xmax]
  double cdf_step = 0;
  double cdf_xmax = 0;
  double half_width = 0;  // boxcar half width: d*s3/2 plus the calibrated margin
  double scale = 1.0;     // peak renormalization so max H == 1
};

/// Bucketing filter. Frequency response is a box of half-width
/// (2-w)/(4B) convolved with a gaussian of deviation sigma_g, evaluated in
/// closed form with erf; time domain is the matching sinc * gaussian product,
/// hard-truncated at |t| > time_support.
class FilterG {
 public:
  int B = 0;
  double w = 0;
  double delta = 0;   // leakage level delta/k on the stopband
  int k = 1;
  int l = 0;          // taper order implied by the truncation point
  double box_half = 0;
  double sigma_g = 0;
  std::int64_t time_support = 0;  // G(t) == 0 for |t| > time_support
  double max_time_value = 0;      // computable bound on max |G(t)|

  double freq_response(double f) const;   // G^(f), real
  double time_tap(std::int64_t t) const;  // G(t), real (even)

  std::string to_json() const;
};

/// Builds H for sparsity k, error delta, length d.
/// Throws std::invalid_argument when d is too small for the requested k
/// (delta_h would reach 1/2 or s3 would leave (0,1)).
FilterH build_filter_h(int k, double delta, int d, const FilterConfig& cfg = {});

/// Builds G for B buckets, transition width w, leakage delta/k.
FilterG build_filter_g(int B, double w, double delta, int k, const FilterConfig& cfg = {});

inline double eval_h(const FilterH& h, std::int64_t t) { return h.eval(t); }
inline double eval_g_freq(const FilterG& g, double f) { return g.freq_response(f); }
inline Complex eval_g_time(const FilterG& g, std::int64_t t) { return {g.time_tap(t), 0.0}; }

struct HValidationReport {
  bool pass = true;
  double worst_in_window_ratio = 1.0;   // min over trials of ||x*H||^2/||x||^2
  double worst_out_window_ratio = 0.0;  // max over trials of out-energy/||x||^2
  double plateau_min = 1.0;             // min H on the Property-I band
  double range_violation = 0.0;         // max excursion outside [0,1]
  double envelope_violation = 0.0;      // max H(t)/envelope(t) - 1 in the tail
  double support_leak = 0.0;            // DTFT mass outside [-delta_h/2, delta_h/2]
  std::string to_json() const;
};

struct GValidationReport {
  bool pass = true;
  double passband_min = 1.0;   // min G^ on |f| <= (1-w)/2B
  double stopband_max = 0.0;   // max |G^| for |f| >= 1/2B (sampled)
  double range_violation = 0.0;
  bool monotone_rolloff = true;
  bool support_ok = true;
  std::string to_json() const;
};

/// Checks Properties I-VI on `trials` random k-sparse signals. Sums are
/// truncated to |t - d/2| <= 8d and the remainder is bounded analytically
/// with the Property III envelope.
HValidationReport validate_h(const FilterH& h, int trials, Rng& rng);

GValidationReport validate_g(const FilterG& g);

}  // namespace tlra
