#include "tlra/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tlra::io {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  write_text(tmp, text);
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("atomic rename failed: " + path);
}

void write_matrix(const std::string& path, const SymToeplitz& T) {
  std::ostringstream ss;
  ss.precision(17);
  ss << T.d << "\n";
  for (int i = 0; i < T.d; ++i) ss << T.col[i] << "\n";
  write_text(path, ss.str());
}

SymToeplitz read_matrix(const std::string& path) {
  std::istringstream in(read_text(path));
  int d = 0;
  if (!(in >> d) || d < 1) throw std::runtime_error(path + ":1: expected positive dimension");
  VectorXd col(d);
  for (int i = 0; i < d; ++i)
    if (!(in >> col[i]))
      throw std::runtime_error(path + ":" + std::to_string(i + 2) + ": expected column value");
  return SymToeplitz(d, col);
}

void write_signal(const std::string& path, const SparseSignal& x) {
  nlohmann::json j;
  j["d"] = x.d;
  j["freqs"] = x.freqs;
  auto& coeffs = j["coeffs"] = nlohmann::json::array();
  for (const auto& c : x.coeffs) coeffs.push_back({c.real(), c.imag()});
  write_text(path, j.dump(2));
}

SparseSignal read_signal(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  SparseSignal x;
  x.d = j.at("d").get<int>();
  x.freqs = j.at("freqs").get<std::vector<double>>();
  for (const auto& c : j.at("coeffs")) x.coeffs.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
  if (x.freqs.size() != x.coeffs.size())
    throw std::runtime_error(path + ": freqs/coeffs size mismatch");
  return x;
}

SymToeplitz Truth::reconstruct() const {
  FourierToeplitz F(d, freqs, weights);
  VectorXd col = F.first_column();
  col[0] += noise_floor;
  return SymToeplitz(d, col);
}

std::string Truth::to_json() const {
  nlohmann::json j{{"d", d},
                   {"k", k},
                   {"seed", seed},
                   {"freqs", freqs},
                   {"weights", weights},
                   {"noise_floor", noise_floor},
                   {"frob", frob},
                   {"tail_frob", tail_frob},
                   {"noise_rel", noise_rel}};
  return j.dump(2);
}

Truth Truth::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Truth t;
  t.d = j.at("d").get<int>();
  t.k = j.at("k").get<int>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.freqs = j.at("freqs").get<std::vector<double>>();
  t.weights = j.at("weights").get<std::vector<double>>();
  t.noise_floor = j.at("noise_floor").get<double>();
  t.frob = j.at("frob").get<double>();
  t.tail_frob = j.at("tail_frob").get<double>();
  t.noise_rel = j.value("noise_rel", 0.0);
  return t;
}

void write_samples(const std::string& path, const SampleSet& X) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const std::int64_t d = X.d(), s = X.s();
  out.write(reinterpret_cast<const char*>(&d), sizeof(d));
  out.write(reinterpret_cast<const char*>(&s), sizeof(s));
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < d; ++j) {
      const double v = X.raw()(j, i);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
}

MatrixXd read_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::int64_t d = 0, s = 0;
  in.read(reinterpret_cast<char*>(&d), sizeof(d));
  in.read(reinterpret_cast<char*>(&s), sizeof(s));
  if (!in || d < 1 || s < 1) throw std::runtime_error(path + ": bad sample header");
  MatrixXd X(d, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < d; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      if (!in) throw std::runtime_error(path + ": truncated sample data");
      X(j, i) = v;
    }
  return X;
}

}  // namespace tlra::io
