// Command-line harness: synthetic instance generation, pipeline runs, and
// report evaluation. Exit codes: 0 success, 2 validation error, 3 pipeline
// degraded, 4 internal error.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "tlra/covariance.hpp"
#include "tlra/oracle.hpp"
#include "tlra/recovery.hpp"
#include "tlra/report.hpp"

using namespace tlra;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitDegraded = 3;
constexpr int kExitInternal = 4;

struct CommonOpts {
  std::uint64_t seed = 1;
  int trials = 1;
  int jobs = 4;
  std::string config_path;
  std::string out_dir = ".";
};

void apply_config_overrides(const nlohmann::json& j, PipelineConfig& cfg) {
  if (j.contains("c_s")) cfg.c_s = j["c_s"].get<double>();
  if (j.contains("s_min")) cfg.s_min = j["s_min"].get<int>();
  if (j.contains("s_max")) cfg.s_max = j["s_max"].get<int>();
  if (j.contains("window_cap")) cfg.window_cap = j["window_cap"].get<double>();
  if (j.contains("k_sfft_cap")) cfg.k_sfft_cap = j["k_sfft_cap"].get<int>();
  if (j.contains("rank_cap")) cfg.rank_cap = j["rank_cap"].get<int>();
  if (j.contains("sfft_delta_floor")) cfg.sfft_delta_floor = j["sfft_delta_floor"].get<double>();
}

void apply_config_overrides(const nlohmann::json& j, RecoveryConfig& cfg) {
  if (j.contains("B_outer")) cfg.B_outer = j["B_outer"].get<int>();
  if (j.contains("B_inner")) cfg.B_inner = j["B_inner"].get<int>();
  if (j.contains("w_outer")) cfg.w_outer = j["w_outer"].get<double>();
  if (j.contains("w_inner")) cfg.w_inner = j["w_inner"].get<double>();
  if (j.contains("Delta")) cfg.Delta = j["Delta"].get<double>();
  if (j.contains("h_bandwidth")) cfg.h_bandwidth = j["h_bandwidth"].get<double>();
  if (j.contains("m_onegood")) cfg.m_onegood = j["m_onegood"].get<int>();
  if (j.contains("t_ary")) cfg.t_ary = j["t_ary"].get<int>();
  if (j.contains("vote_slack")) cfg.vote_slack = j["vote_slack"].get<double>();
  if (j.contains("r_loc")) cfg.r_loc = j["r_loc"].get<int>();
  if (j.contains("median_runs")) cfg.median_runs = j["median_runs"].get<int>();
  if (j.contains("outer_reps")) cfg.outer_reps = j["outer_reps"].get<int>();
  if (j.contains("window")) cfg.window = j["window"].get<double>();
  if (j.contains("list_cap")) cfg.list_cap = j["list_cap"].get<int>();
}

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  return nlohmann::json::parse(io::read_text(path));
}

/// Runs `trial_fn(seed)` for seeds seed..seed+trials-1 on a bounded pool.
/// Returns the worst exit code.
int run_trials(const CommonOpts& opts, const std::function<int(std::uint64_t)>& trial_fn) {
  if (opts.trials <= 1) return trial_fn(opts.seed);
  std::atomic<int> next{0};
  std::atomic<int> worst{kExitOk};
  const int workers = std::max(1, std::min(opts.jobs, opts.trials));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= opts.trials) break;
        int code = kExitInternal;
        try {
          code = trial_fn(opts.seed + static_cast<std::uint64_t>(i));
        } catch (const std::exception& e) {
          std::fprintf(stderr, "trial %d failed: %s\n", i, e.what());
        }
        int cur = worst.load();
        while (code > cur && !worst.compare_exchange_weak(cur, code)) {
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  return worst.load();
}

io::Truth generate_instance(int d, int pairs, double noise_floor, std::uint64_t seed,
                            bool offgrid) {
  Rng rng(seed);
  io::Truth truth;
  truth.d = d;
  truth.k = pairs;
  truth.seed = seed;
  truth.noise_floor = noise_floor;
  for (int p = 0; p < pairs; ++p) {
    double f;
    while (true) {
      const int a = 2 * static_cast<int>(rng.uniform_int(2, d - 3)) + 1;
      f = a / (2.0 * d);
      if (offgrid) f = wrap01(f + rng.uniform(-0.2, 0.2) / d);
      bool clear = true;
      for (double g : truth.freqs)
        if (wrap_dist(f, g) < 4.0 / d) clear = false;
      if (clear && f < 0.5 - 2.0 / d && f > 2.0 / d) break;
    }
    const double w = rng.uniform(0.5, 1.5);
    truth.freqs.push_back(f);
    truth.weights.push_back(w);
    truth.freqs.push_back(wrap01(1.0 - f));
    truth.weights.push_back(w);
  }
  SymToeplitz T = truth.reconstruct();
  truth.frob = T.frob_norm();
  if (d <= oracle::kDenseCap) truth.tail_frob = oracle::rank_k_tail(T, 2 * pairs);
  return truth;
}

/// Seeded symmetric noise with relative Frobenius norm `rel`.
MatrixXd noise_matrix(int d, double rel, double t_frob, Rng& rng) {
  MatrixXd E(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) E(i, j) = E(j, i) = rng.normal();
  E *= rel * t_frob / E.norm();
  return E;
}

double factored_error(const io::Truth& truth, const FourierToeplitz& out) {
  SymToeplitz T = truth.reconstruct();
  VectorXd out_col = out.rank() ? out.first_column() : VectorXd::Zero(truth.d);
  VectorXd w = weight_vector(truth.d);
  return (w.asDiagonal() * (T.col - out_col)).norm();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sublinear-query low-rank approximation of PSD Toeplitz matrices"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOpts opts;
  app.add_option("--seed", opts.seed, "base random seed");
  app.add_option("--trials", opts.trials, "number of seeded trials (seed..seed+N-1)");
  app.add_option("--jobs", opts.jobs, "worker pool size for --trials");
  app.add_option("--config", opts.config_path, "JSON config overriding flags field-by-field");
  app.add_option("--out", opts.out_dir, "output directory");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic instance");
  int gen_d = 1024, gen_k = 2;
  double gen_noise_floor = 0.0;
  bool gen_offgrid = false;
  gen->add_option("--d", gen_d, "dimension");
  gen->add_option("--k", gen_k, "planted conjugate pairs");
  gen->add_option("--noise", gen_noise_floor, "white noise-floor weight on the diagonal");
  gen->add_flag("--offgrid", gen_offgrid, "perturb frequencies off the anchor grid");

  // sfft
  auto* sfft = app.add_subcommand("sfft", "sparse frequency recovery of a signal file");
  std::string sfft_signal;
  int sfft_k = 2;
  double sfft_delta = 1e-2;
  sfft->add_option("--signal", sfft_signal, "signal JSON file")->required();
  sfft->add_option("--k", sfft_k, "sparsity");
  sfft->add_option("--delta", sfft_delta, "error parameter");

  // lowrank
  auto* low = app.add_subcommand("lowrank", "low-rank approximation of a matrix file");
  std::string low_matrix;
  int low_k = 2;
  double low_delta = 1e-3, low_noise = 0.0;
  low->add_option("--matrix", low_matrix, "matrix file")->required();
  low->add_option("--k", low_k, "target rank parameter");
  low->add_option("--delta", low_delta, "error parameter");
  low->add_option("--noise", low_noise, "relative Frobenius norm of seeded entry noise");

  // covest
  auto* cov = app.add_subcommand("covest", "covariance estimation from Gaussian samples");
  std::string cov_matrix;
  int cov_k = 2, cov_samples = 1000;
  double cov_eps = 0.1;
  cov->add_option("--matrix", cov_matrix, "covariance matrix file")->required();
  cov->add_option("--k", cov_k, "target rank parameter");
  cov->add_option("--epsilon", cov_eps, "error parameter");
  cov->add_option("--samples", cov_samples, "vector sample count");

  // eval
  auto* ev = app.add_subcommand("eval", "join reports with ground truth into CSV");
  std::string ev_truth;
  std::vector<std::string> ev_reports;
  ev->add_option("--truth", ev_truth, "truth JSON")->required();
  ev->add_option("--reports", ev_reports, "report JSON files")->expected(-1);

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(opts.out_dir);
    const nlohmann::json cfg_json = load_config(opts.config_path);

    if (gen->parsed()) {
      return run_trials(opts, [&](std::uint64_t seed) {
        io::Truth truth = generate_instance(gen_d, gen_k, gen_noise_floor, seed, gen_offgrid);
        const std::string stem = opts.out_dir + "/instance-" + std::to_string(seed);
        io::write_matrix(stem + ".matrix.txt", truth.reconstruct());
        std::vector<Complex> coeffs;
        for (double w : truth.weights) coeffs.emplace_back(w, 0.0);
        SparseSignal column(truth.d, truth.freqs, coeffs);
        io::write_signal(stem + ".signal.json", column);
        io::write_text_atomic(stem + ".truth.json", truth.to_json());
        return kExitOk;
      });
    }

    if (sfft->parsed()) {
      SparseSignal sig = io::read_signal(sfft_signal);
      return run_trials(opts, [&](std::uint64_t seed) {
        Rng rng(seed);
        RecoveryConfig rcfg = RecoveryConfig::defaults(sfft_k, sig.d, sfft_delta);
        apply_config_overrides(cfg_json, rcfg);
        EntryOracle reads([&sig](int t, int) { return sig.eval(t).real(); });
        SignalFn x = [&](std::int64_t t) -> Complex {
          if (t < 0 || t >= sig.d) return {0, 0};
          return {reads(static_cast<int>(t), 0), 0.0};
        };
        FrequencyList L = sparse_recover(x, rcfg, rng);
        L.reads = reads.queries_used();
        nlohmann::json j{{"seed", seed},          {"freqs", L.freqs},
                         {"flags", L.flags},      {"provenance", L.provenance},
                         {"window", L.window},    {"reads", L.reads},
                         {"config", nlohmann::json::parse(rcfg.to_json())}};
        io::write_text_atomic(opts.out_dir + "/sfft-" + std::to_string(seed) + ".json", j.dump(2));
        for (int f : L.flags)
          if (f != 0) return kExitDegraded;
        return kExitOk;
      });
    }

    if (low->parsed()) {
      SymToeplitz T = io::read_matrix(low_matrix);
      return run_trials(opts, [&](std::uint64_t seed) {
        Rng rng(seed);
        PipelineConfig pcfg;
        apply_config_overrides(cfg_json, pcfg);
        std::shared_ptr<MatrixXd> E;
        if (low_noise > 0) {
          Rng noise_rng = rng.fork("noise");
          E = std::make_shared<MatrixXd>(noise_matrix(T.d, low_noise, T.frob_norm(), noise_rng));
        }
        EntryOracle oracle([&T, E](int i, int j) {
          return T.entry(i, j) + (E ? (*E)(i, j) : 0.0);
        });
        RecoveryReport rep = robust_lowrank(oracle, T.d, low_k, low_delta, pcfg, rng);
        io::write_text_atomic(opts.out_dir + "/lowrank-" + std::to_string(seed) + ".json",
                              rep.to_json());
        return rep.degraded ? kExitDegraded : kExitOk;
      });
    }

    if (cov->parsed()) {
      SymToeplitz T = io::read_matrix(cov_matrix);
      return run_trials(opts, [&](std::uint64_t seed) {
        Rng rng(seed);
        PipelineConfig pcfg;
        apply_config_overrides(cfg_json, pcfg);
        Rng sample_rng = rng.fork("samples");
        SampleSet X = sample_gaussian_toeplitz(T, cov_samples, sample_rng);
        CovarianceReport rep = covariance_estimate(X, cov_k, cov_eps, pcfg, rng);
        io::write_text_atomic(opts.out_dir + "/covest-" + std::to_string(seed) + ".json",
                              rep.to_json());
        return rep.recovery.degraded ? kExitDegraded : kExitOk;
      });
    }

    if (ev->parsed()) {
      io::Truth truth = io::Truth::from_json(io::read_text(ev_truth));
      std::ostringstream csv;
      csv << "report,seed,d,k,rank,queries,error_rel,zero_fallback,degraded\n";
      for (const auto& path : ev_reports) {
        nlohmann::json j = nlohmann::json::parse(io::read_text(path));
        if (j.contains("recovery")) j = j["recovery"];
        FourierToeplitz out(truth.d, j.at("freqs").get<std::vector<double>>(),
                            j.at("weights").get<std::vector<double>>());
        const double err = factored_error(truth, out) / std::max(truth.frob, 1e-300);
        csv << path << "," << j.value("seed", 0ull) << "," << j.value("d", 0) << ","
            << j.value("k", 0) << "," << j.value("rank", 0) << "," << j.value("queries_total", 0ll)
            << "," << err << "," << j.value("zero_fallback", false) << ","
            << j.value("degraded", false) << "\n";
      }
      io::write_text_atomic(opts.out_dir + "/eval.csv", csv.str());
      std::cout << csv.str();
      return kExitOk;
    }
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
