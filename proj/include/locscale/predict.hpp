#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "locscale/basis.hpp"
#include "locscale/rng.hpp"
#include "locscale/store.hpp"

namespace locscale {

struct PredictionTable {
  enum class Kind { credible, prediction };
  Kind kind = Kind::credible;
  double level = 0.8;
  std::vector<double> fit, lwr, upr;  // one entry per newdata row
  std::vector<std::string> warnings;

  std::string to_csv() const;
};

// Posterior of the mean response at new covariate vectors; intervals are
// pointwise empirical quantiles of mu_i per retained sweep.
PredictionTable predict_mean(const std::string& store_dir, const DesignMatrices& design,
                             const DataTable& newdata, double level);

// Posterior predictive of a future response: one Gaussian draw per sweep and
// row. fit stays the posterior mean of mu_i.
PredictionTable predict_response(const std::string& store_dir, const DesignMatrices& design,
                                 const DataTable& newdata, double level, Rng& rng);

enum class TermSide { mean, stdev };

struct TermGrid {
  std::vector<std::string> coord_names;       // 1 or 2 covariate columns
  std::vector<Eigen::VectorXd> coords;        // per grid row
  std::vector<std::string> level_names;       // interaction grids: level per row
  std::vector<double> fit;                    // posterior mean per row
  std::vector<double> quantile_levels;
  std::vector<std::vector<double>> quantiles;  // [quantile][row]
  bool intercept = true;
  bool centre_effects = false;

  std::string to_csv() const;
};

// Per-term posterior curves on a covariate grid. Mean side evaluates the
// term's coefficient contribution (plus beta_0 when intercept is set); stdev
// side evaluates exp(contribution/2), scaled by sigma when intercept is set.
// centre_effects centres each sweep's curve: subtracting the grid mean on the
// mean side, rescaling to grid mean one on the stdev side.
TermGrid term_grid(const std::string& store_dir, const DesignMatrices& design, TermSide side,
                   const std::string& term_label, int grid_n, bool intercept, bool centre_effects,
                   const std::vector<double>& quantile_levels);

}  // namespace locscale
