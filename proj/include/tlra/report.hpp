#pragma once

#include <string>
#include <vector>

#include "tlra/core.hpp"
#include "tlra/covariance.hpp"

// Plain-text and JSON file formats shared by the CLI and the test harnesses.
namespace tlra::io {

/// Matrix file: line 1 holds d, the next d lines the first-column values.
void write_matrix(const std::string& path, const SymToeplitz& T);
SymToeplitz read_matrix(const std::string& path);

/// Sparse-signal file: JSON {d, freqs[], coeffs[[re,im],...]}.
void write_signal(const std::string& path, const SparseSignal& x);
SparseSignal read_signal(const std::string& path);

/// Ground truth emitted by the generator.
struct Truth {
  int d = 0;
  int k = 0;            // planted conjugate pairs
  std::uint64_t seed = 0;
  std::vector<double> freqs;
  std::vector<double> weights;
  double noise_floor = 0;  // white diagonal weight added to the column
  double frob = 0;         // ||T||_F
  double tail_frob = 0;    // ||T - T_k||_F with k = 2*pairs, dense oracle
  double noise_rel = 0;    // requested ||E||_F / ||T||_F for noisy runs

  SymToeplitz reconstruct() const;
  std::string to_json() const;
  static Truth from_json(const std::string& text);
};

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// Atomic write: temp file in the same directory, then rename.
void write_text_atomic(const std::string& path, const std::string& text);

/// Sample-set persistence: header (int64 d, int64 s), then s rows of d
/// float64 values, one row per sample.
void write_samples(const std::string& path, const SampleSet& X);
MatrixXd read_samples(const std::string& path);

}  // namespace tlra::io
