#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "locscale/formula.hpp"
#include "locscale/table.hpp"

namespace locscale {

enum class BasisKind { rd1, tl, rd2 };

struct KnotSet {
  Eigen::MatrixXd pts;  // m x 1, or m x 2 for bivariate radial knots
  bool quantile_default = true;
};

// Quantile knot placement: min, equally spaced quantiles, max (type-7
// interpolation). Coincident quantiles are collapsed with a warning.
KnotSet place_knots(std::vector<double> values, int count, const std::string& varname,
                    std::vector<std::string>* warnings = nullptr);

// Basis evaluation at a single point. rd1: [u, r^2 log r^2 per knot];
// tl: [u, (u - xi)_+ per knot]; rd2: [u1, u2, r^2 log r^2 per knot pair].
// The r -> 0 limit is taken as 0.
Eigen::VectorXd eval_basis(BasisKind kind, const Eigen::VectorXd& x, const KnotSet& knots);

// Per-variable input to a term: numeric values or categorical level indices.
struct TermInput {
  bool categorical = false;
  Eigen::VectorXd numeric;
  std::vector<int> level;  // indices into the owning block's level list
};

struct TermBlock {
  Term term;               // kind resolved against the data
  int begin = 0, end = 0;  // column range within the gamma/delta index space
  KnotSet knots;
  std::vector<std::string> levels;  // categorical terms and smooth interactions
  int cat_var = -1;                 // which term variable is categorical, if any
  std::vector<std::string> labels;  // one per column
  // Observed range per continuous variable, for grid evaluation.
  double lo1 = 0, hi1 = 0, lo2 = 0, hi2 = 0;

  int size() const { return end - begin; }
};

// Raw (uncentered) design columns for one term; inputs in term-variable order.
Eigen::MatrixXd term_raw_columns(const TermBlock& block, const std::vector<TermInput>& inputs);

struct DesignMatrices {
  ModelSpec spec;  // term kinds resolved (linear vs categorical)
  Eigen::VectorXd y;
  Eigen::MatrixXd Xstar;  // n x (1+p1); column 0 is the intercept
  Eigen::MatrixXd Z;      // n x p2
  std::vector<TermBlock> mean_blocks;
  std::vector<TermBlock> var_blocks;
  std::vector<std::string> x_labels;  // size 1+p1
  std::vector<std::string> z_labels;  // size p2
  Eigen::VectorXd x_offsets;          // subtracted column means, size 1+p1
  Eigen::VectorXd z_offsets;          // size p2
  int n = 0, p1 = 0, p2 = 0;
  int dropped_rows = 0;
  std::vector<std::string> warnings;
};

DesignMatrices build_design(const ModelSpec& spec, const DataTable& data);

// Evaluate a fitted design on new data using the stored knots, offsets and
// level encodings. Out-of-range covariates extrapolate with a warning.
void build_newdata(const DesignMatrices& design, const DataTable& newdata,
                   Eigen::MatrixXd* Xstar_new, Eigen::MatrixXd* Z_new,
                   std::vector<std::string>* warnings = nullptr);

Eigen::MatrixXd read_knots_csv(const std::string& path);

}  // namespace locscale
