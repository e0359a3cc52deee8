#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace locscale {

inline const std::vector<std::string>& store_parameter_names() {
  static const std::vector<std::string> names{"beta",  "gamma",  "alpha", "delta",
                                              "cbeta", "calpha", "sigma2"};
  return names;
}

// Metadata written alongside the seven sample files.
struct RunManifest {
  long sweeps = 0, burn = 0, thin = 1;
  std::uint64_t seed = 0;
  long retained = 0;
  std::string formula;
  std::map<std::string, std::string> priors;
  std::string generator;
  long data_rows = 0, data_cols = 0;
  std::string data_hash;
  int dropped_rows = 0;
  int n = 0, p1 = 0, p2 = 0;
  std::string store_dir;
  double wall_clock_seconds = 0.0;
  double tuning_h = 1.0, tuning_f2 = 1.0, tuning_g2 = 1.0;
  std::map<std::string, double> acceptance;  // post-burn-in rates per move
  double max_abs_colsum_z_alpha = 0.0;       // determinant-one diagnostic
  std::map<std::string, std::vector<std::string>> columns;  // labels per file

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

// Append-only writer for one chain. One line per retained sweep per file,
// numbers at 17 significant digits so the text round-trips binary64 exactly.
class SampleStore {
 public:
  explicit SampleStore(std::string directory);
  ~SampleStore();
  SampleStore(const SampleStore&) = delete;
  SampleStore& operator=(const SampleStore&) = delete;

  void write_sweep(const Eigen::VectorXd& beta, const std::vector<std::uint8_t>& gamma,
                   const Eigen::VectorXd& alpha, const std::vector<std::uint8_t>& delta,
                   double c_beta, double c_alpha, double sigma2);
  void finalize(const RunManifest& manifest);
  const std::string& directory() const { return dir_; }
  long lines_written() const { return lines_; }

 private:
  std::string dir_;
  std::vector<std::FILE*> files_;
  long lines_ = 0;
};

struct SampleMatrix {
  Eigen::MatrixXd values;  // retained sweeps x parameter columns
  std::vector<std::string> labels;
};

RunManifest read_manifest(const std::string& store_dir);
SampleMatrix read_parameter(const std::string& store_dir, const std::string& name);

struct ColumnSummary {
  std::string label;
  double mean = 0, sd = 0, naive_se = 0, ts_se = 0;
  double q025 = 0, q25 = 0, q50 = 0, q75 = 0, q975 = 0;
};

// Mean/sd/SEs and quantiles per column; the time-series SE uses batch means
// with floor(sqrt(S)) batches.
std::vector<ColumnSummary> chain_summary(const SampleMatrix& samples);

// Type-7 empirical quantile (interpolated order statistic).
double quantile(std::vector<double> v, double p);

}  // namespace locscale
