#pragma once

#include <string>
#include <vector>

#include "locscale/basis.hpp"
#include "locscale/store.hpp"

namespace locscale {

struct InclusionProbs {
  std::vector<std::string> mean_labels, var_labels;
  std::vector<double> mean_probs, var_probs;
};

// Column means of the gamma/delta indicator samples.
InclusionProbs marginal_inclusion(const std::string& store_dir);

struct ModelRow {
  std::vector<std::uint8_t> mean_pattern, var_pattern;
  long freq = 0;
  double prob = 0.0;        // percent
  double cumulative = 0.0;  // percent
};

struct ModelTable {
  std::vector<ModelRow> rows;          // most frequent first
  long visited = 0;                    // distinct (gamma, delta) patterns
  long retained = 0;
  std::vector<std::string> mean_labels, var_labels;
};

// The n_models most frequently visited joint (mean, variance) models; ties
// broken by first visit.
ModelTable top_models(const std::string& store_dir, int n_models);

struct Deviances {
  double null_deviance = 0.0;
  double mean_posterior = 0.0;
};

// Null deviance: intercept-only Gaussian model at its MLE. Mean posterior
// deviance: -2 log-likelihood averaged over retained sweeps.
Deviances deviances(const std::string& store_dir, const DesignMatrices& design);

// The print-style report: sample count and marginal inclusion probabilities.
std::string print_report(const std::string& store_dir);

// The summary-style report: model/priors header, deviances, top models.
std::string summary_report(const std::string& store_dir, const DesignMatrices& design,
                           int n_models);
std::string summary_json(const std::string& store_dir, const DesignMatrices& design, int n_models);

// Coefficient chain summary block, coda style.
std::string parameter_summary_report(const std::string& store_dir, const std::string& name);

}  // namespace locscale
