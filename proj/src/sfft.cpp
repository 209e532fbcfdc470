#include "tlra/sfft.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "tlra/filters.hpp"

namespace tlra {

RecoveryConfig RecoveryConfig::defaults(int k, int d, double delta) {
  RecoveryConfig cfg;
  cfg.k = std::max(1, k);
  cfg.d = d;
  cfg.delta = delta;
  cfg.B_outer = std::clamp(cfg.k + 2, 4, 8);
  // narrow-order kernel below ~1.5k samples so hashed clusters stay thin
  cfg.h_order = d < 1536 ? 2 : 4;
  const double h_floor = (6.5 * cfg.h_order + 0.5) / d;
  // keep the sigma-dilated cluster below ~a third of an inner bucket
  const int smear_cap = std::max(
      2, static_cast<int>(std::floor(0.35 / (6.0 * h_floor))));
  cfg.B_inner = std::clamp(cfg.k * cfg.k, 2, std::min(16, smear_cap));
  // sigma drawn from roughly [4, 8]: Delta = 1/(4 * c_hi * B * k)
  cfg.Delta = 1.0 / (4.0 * cfg.sigma_c_hi * cfg.B_inner * cfg.k);
  cfg.h_bandwidth = std::max(h_floor, 8.0 * cfg.Delta);
  cfg.t_ary = std::max(8, static_cast<int>(std::ceil(std::log2(static_cast<double>(d)))));
  // phase aliases must fall outside the cell grid: t_ary < 2 / vote_slack
  cfg.t_ary = std::min(cfg.t_ary, static_cast<int>(2.0 / cfg.vote_slack) - 1);
  cfg.m_onegood = std::max(32, static_cast<int>(8.0 * cfg.k * std::log2(static_cast<double>(d))));
  cfg.r_loc = 5;
  cfg.median_runs = 5;
  // locator accuracy floor: a few final voting cells
  const double beta_cap = cfg.beta_cap_frac * d;
  const double cell_floor = cfg.t_ary * cfg.vote_slack / (2.0 * beta_cap) / cfg.t_ary;
  const double tol = cfg.k * cfg.Delta * std::sqrt(cfg.k * cfg.Delta * d);
  cfg.window = std::min(std::max(tol, 3.0 * cell_floor), 1.0 / (4.0 * cfg.k));
  cfg.list_cap = 2 * cfg.outer_reps * cfg.B_outer * cfg.B_inner;
  return cfg;
}

std::string RecoveryConfig::to_json() const {
  nlohmann::json j{{"k", k},
                   {"d", d},
                   {"delta", delta},
                   {"B_outer", B_outer},
                   {"w_outer", w_outer},
                   {"B_inner", B_inner},
                   {"w_inner", w_inner},
                   {"Delta", Delta},
                   {"sigma_c_hi", sigma_c_hi},
                   {"sigma_c_lo", sigma_c_lo},
                   {"h_bandwidth", h_bandwidth},
                   {"m_onegood", m_onegood},
                   {"t_ary", t_ary},
                   {"vote_slack", vote_slack},
                   {"r_loc", r_loc},
                   {"beta_cap_frac", beta_cap_frac},
                   {"median_runs", median_runs},
                   {"window", window},
                   {"list_cap", list_cap},
                   {"outer_reps", outer_reps}};
  return j.dump();
}

OneGoodSampler::OneGoodSampler(const SignalFn& z, int d, int m, Rng& rng) {
  probes_.reserve(m);
  cum_.reserve(m);
  double acc = 0;
  for (int i = 0; i < m; ++i) {
    const std::int64_t t = rng.uniform_int(0, d - 1);
    probes_.push_back(t);
    acc += std::norm(z(t));
    cum_.push_back(acc);
  }
  total_ = acc;
}

std::int64_t OneGoodSampler::draw(Rng& rng) const {
  if (total_ <= 0) throw std::runtime_error("signal empty at probes");
  const double u = rng.uniform01() * total_;
  const auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
  const std::size_t i = std::min<std::size_t>(it - cum_.begin(), probes_.size() - 1);
  return probes_[i];
}

std::int64_t one_good_sample(const SignalFn& z, const RecoveryConfig& cfg, Rng& rng) {
  OneGoodSampler pool(z, cfg.d, cfg.m_onegood, rng);
  return pool.draw(rng);
}

namespace {

double circ_cycles(double x) {
  // distance of x to the nearest integer, in cycles
  const double f = x - std::floor(x);
  return std::min(f, 1.0 - f);
}

double phase_cycles(Complex v) { return std::arg(v) / kTwoPi; }

}  // namespace

std::optional<double> locate1_inner(const SignalFn& z, const OneGoodSampler& sampler,
                                    const RecoveryConfig& cfg, double center, double width,
                                    Rng& rng) {
  const int t = cfg.t_ary;
  const double s = cfg.vote_slack;
  const double beta_cap = cfg.beta_cap_frac * cfg.d;
  const double beta_hat = std::min(t * s / (2.0 * width), beta_cap);
  const auto beta_lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(0.5 * beta_hat)));
  const auto beta_hi = std::max<std::int64_t>(beta_lo, static_cast<std::int64_t>(std::floor(beta_hat)));

  std::vector<int> votes(t, 0);
  for (int round = 0; round < cfg.r_loc; ++round) {
    const std::int64_t beta = rng.uniform_int(beta_lo, beta_hi);
    Complex za(0, 0), zb(0, 0);
    bool ok = false;
    for (int attempt = 0; attempt < cfg.onegood_retries; ++attempt) {
      const std::int64_t alpha = sampler.draw(rng);
      za = z(alpha);
      zb = z(alpha + beta);
      if (std::abs(za) > 0 && std::abs(zb) > 0) {
        ok = true;
        break;
      }
    }
    if (!ok) continue;
    const double theta = phase_cycles(zb / za);  // ~ f0 * beta (mod 1)
    for (int q = 0; q < t; ++q) {
      const double fq = center - 0.5 * width + (q + 0.5) * width / t;
      if (circ_cycles(theta - beta * fq) <= 0.5 * s) {
        votes[q] += 1;
        if (q > 0) votes[q - 1] += 1;
        if (q + 1 < t) votes[q + 1] += 1;
      }
    }
  }
  int best = -1;
  for (int q = 0; q < t; ++q)
    if (2 * votes[q] > cfg.r_loc && (best < 0 || votes[q] > votes[best])) best = q;
  if (best < 0) return std::nullopt;
  return center - 0.5 * width + (best + 0.5) * width / t;
}

LocateResult locate1_signal(const SignalFn& z, const RecoveryConfig& cfg, double center,
                            double width, Rng& rng) {
  OneGoodSampler sampler(z, cfg.d, cfg.m_onegood, rng);
  if (sampler.total_energy() <= 0) throw std::runtime_error("signal empty at probes");

  const double beta_cap = cfg.beta_cap_frac * cfg.d;
  const double paper_cap = cfg.d / std::pow(std::max(cfg.d * cfg.Delta, 1e-9), 1.5);
  const double cap = std::min(beta_cap, paper_cap);
  const double shrink = std::max(2.0, cfg.t_ary / 4.0);

  LocateResult res;
  double cur_center = center;
  double cur_width = width;
  // Fixed geometric schedule: the width shrinks every stage whether or not the
  // stage reached consensus, so the loop always terminates at the beta cap.
  for (int stage = 0; stage < 64; ++stage) {
    const double beta_hat = cfg.t_ary * cfg.vote_slack / (2.0 * cur_width);
    const bool last = beta_hat >= cap;
    ++res.stages_total;
    std::optional<double> refined;
    for (int attempt = 0; attempt < 2 && !refined; ++attempt)
      refined = locate1_inner(z, sampler, cfg, cur_center, cur_width, rng);
    if (refined) {
      ++res.stages_ok;
      // keep the center inside the original interval
      const double lo = center - 0.5 * width, hi = center + 0.5 * width;
      cur_center = std::clamp(*refined, lo, hi);
    } else {
      res.degraded = true;
    }
    if (last) break;
    cur_width = std::max(cur_width / shrink, 1e-15);
  }
  if (2 * res.stages_ok < res.stages_total) throw std::runtime_error("no consensus");
  res.freq = wrap01(cur_center);
  return res;
}

double circular_median(std::vector<double> values, double center) {
  if (values.empty()) throw std::invalid_argument("circular_median: empty");
  for (double& v : values) {
    double diff = v - center;
    diff -= std::round(diff);
    v = diff;
  }
  std::sort(values.begin(), values.end());
  return wrap01(center + values[values.size() / 2]);
}

namespace {

// Phase-coherence validation of a located frequency: the sample-pair test of
// OneGoodSample evaluated at f~. A genuine tone keeps
// |z(a+b) - z(a) e^{2 pi i f b}| small relative to the sample magnitudes.
bool coherent_at(const SignalFn& z, const OneGoodSampler& sampler, const RecoveryConfig& cfg,
                 double freq, Rng& rng) {
  const auto beta = static_cast<std::int64_t>(
      std::clamp(0.05 / std::max(cfg.window, 1e-12), 1.0, cfg.d / 8.0));
  int pass = 0, tried = 0;
  for (int i = 0; i < 8; ++i) {
    std::int64_t alpha;
    try {
      alpha = sampler.draw(rng);
    } catch (const std::runtime_error&) {
      return false;
    }
    const Complex za = z(alpha);
    const Complex zb = z(alpha + beta);
    const double mag = std::abs(za) + std::abs(zb);
    if (mag == 0) continue;
    ++tried;
    if (std::abs(zb - za * unit_phase(freq * static_cast<double>(beta))) <= 0.6 * mag) ++pass;
  }
  return tried > 0 && 2 * pass >= tried;
}

}  // namespace

LocateResult frequency_recovery_1cluster(const SignalFn& z, const RecoveryConfig& cfg,
                                         double center, double width, Rng& rng) {
  std::vector<double> runs;
  LocateResult agg;
  int failures = 0;
  for (int r = 0; r < cfg.median_runs; ++r) {
    Rng local = rng.fork(1000 + r);
    try {
      LocateResult one = locate1_signal(z, cfg, center, width, local);
      runs.push_back(one.freq);
      agg.stages_ok += one.stages_ok;
      agg.stages_total += one.stages_total;
    } catch (const std::runtime_error&) {
      ++failures;
    }
  }
  if (runs.empty()) throw std::runtime_error("all locate runs failed");
  agg.degraded = 2 * failures >= cfg.median_runs;
  agg.freq = circular_median(runs, center);
  {
    Rng check_rng = rng.fork("coherence");
    OneGoodSampler pool(z, cfg.d, std::min(cfg.m_onegood, 48), check_rng);
    if (!coherent_at(z, pool, cfg, agg.freq, check_rng)) agg.degraded = true;
  }
  return agg;
}

FrequencyList recover_bounded(const BoundedInstance& inst, const RecoveryConfig& cfg, Rng& rng) {
  FrequencyList out;
  out.window = cfg.window;

  FilterG g_in = build_filter_g(cfg.B_inner, cfg.w_inner, cfg.delta, cfg.k);
  HashParams p;
  {
    Rng hash_rng = rng.fork("hash_params");
    const double lo_real = 1.0 / (cfg.sigma_c_hi * cfg.B_inner * cfg.k * cfg.Delta);
    const double hi_real = 1.0 / (cfg.sigma_c_lo * cfg.B_inner * cfg.k * cfg.Delta);
    const auto lo = static_cast<std::int64_t>(std::ceil(lo_real));
    const auto hi = std::max(lo, static_cast<std::int64_t>(std::floor(hi_real)));
    if (lo < 2) throw std::invalid_argument("recover_bounded: sigma interval below 2");
    p.B = cfg.B_inner;
    p.sigma = hash_rng.uniform_int(lo, hi);
    p.b = hash_rng.uniform01() / static_cast<double>(p.sigma);
  }
  SignalFn base = [inst](std::int64_t t) { return inst(t); };
  auto bins = std::make_shared<BinAccessor>(base, g_in, p);

  // Shared probe pool; per-bin empirical energies decide which bins to work.
  Rng pool_rng = rng.fork("probes");
  std::vector<std::int64_t> probes(cfg.m_onegood);
  for (auto& t : probes) t = pool_rng.uniform_int(0, cfg.d - 1);
  std::vector<double> bin_energy(cfg.B_inner, 0.0);
  for (const auto t : probes) {
    const VectorXcd& u = bins->all_bins(t);
    for (int j = 0; j < cfg.B_inner; ++j) bin_energy[j] += std::norm(u[j]);
  }
  const double peak = *std::max_element(bin_energy.begin(), bin_energy.end());
  double total = 0;
  for (double e : bin_energy) total += e;

  for (int j = 0; j < cfg.B_inner; ++j) {
    const std::string tag = "bin " + std::to_string(j);
    if (peak <= 0 || bin_energy[j] < cfg.empty_bin_rel * peak ||
        bin_energy[j] < cfg.empty_bin_total * total) {
      out.freqs.push_back(inst.center);
      out.flags.push_back(2);
      out.provenance.push_back(tag + " empty");
      continue;
    }
    SignalFn zj = [bins, j](std::int64_t t) { return bins->value_at(j, t); };
    Rng bin_rng = rng.fork(37 * (j + 1));
    const double search_width = inst.width * (1.0 + cfg.w_outer) + cfg.h_bandwidth;
    try {
      LocateResult loc = frequency_recovery_1cluster(zj, cfg, inst.center, search_width, bin_rng);
      out.freqs.push_back(loc.freq);
      out.flags.push_back(loc.degraded ? 1 : 0);
      out.provenance.push_back(tag);
    } catch (const std::runtime_error& e) {
      out.freqs.push_back(inst.center);
      out.flags.push_back(2);
      out.provenance.push_back(tag + " failed: " + e.what());
    }
  }
  out.nominal_samples =
      bins->taus_evaluated() * bins->samples_per_call() * inst.bins->samples_per_call();
  return out;
}

FrequencyList sparse_recover(const SignalFn& x, const RecoveryConfig& cfg, Rng& rng) {
  FilterConfig fcfg;
  fcfg.delta_h_override = cfg.h_bandwidth;
  fcfg.l_min = fcfg.l_max = cfg.h_order;
  FilterH h = build_filter_h(cfg.k, cfg.delta, cfg.d, fcfg);

  // Raw union over outer_reps independent splits: a tone cut by one shift b
  // lands cleanly inside a bucket of another with high probability.
  FrequencyList raw;
  for (int rep = 0; rep < cfg.outer_reps; ++rep) {
    Rng split_rng = rng.fork(9000 + rep);
    auto instances = outer_split(x, cfg.d, h, cfg.B_outer, cfg.w_outer, cfg.delta, cfg.k, split_rng);
    for (std::size_t i = 0; i < instances.size(); ++i) {
      Rng inst_rng = rng.fork(500 + 100 * rep + i);
      FrequencyList part = recover_bounded(instances[i], cfg, inst_rng);
      raw.nominal_samples += part.nominal_samples;
      for (std::size_t e = 0; e < part.freqs.size(); ++e) {
        raw.freqs.push_back(part.freqs[e]);
        raw.flags.push_back(part.flags[e]);
        raw.provenance.push_back("rep " + std::to_string(rep) + " outer " + std::to_string(i) +
                                 " " + part.provenance[e]);
      }
    }
  }
  // Deduplicate within half a window, preferring clean entries.
  std::vector<std::size_t> order(raw.freqs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw.flags[a] < raw.flags[b]; });
  FrequencyList out;
  out.window = cfg.window;
  out.nominal_samples = raw.nominal_samples;
  for (std::size_t oi : order) {
    if (raw.flags[oi] == 2) continue;  // failed placeholders are dropped from the union
    bool dup = false;
    for (std::size_t e = 0; e < out.freqs.size(); ++e)
      if (wrap_dist(out.freqs[e], raw.freqs[oi]) <= cfg.window) dup = true;
    if (dup) continue;
    if (static_cast<int>(out.freqs.size()) >= cfg.list_cap) break;
    out.freqs.push_back(raw.freqs[oi]);
    out.flags.push_back(raw.flags[oi]);
    out.provenance.push_back(raw.provenance[oi]);
  }
  return out;
}

}  // namespace tlra
