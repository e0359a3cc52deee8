#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "locscale/formula.hpp"
#include "locscale/rng.hpp"

namespace locscale {

// Full prior configuration for one model fit. Beta pairs are per selectable
// term; a single prior string recycles across terms.
struct PriorConfig {
  double a_beta = 0.5, b_beta = 1.0;    // c_beta ~ IG(a,b); default b = n/2
  double a_alpha = 1.1, b_alpha = 1.1;  // c_alpha ~ IG(a,b)
  std::vector<std::pair<double, double>> pi_mu;     // Beta(c,d) per mean term
  std::vector<std::pair<double, double>> pi_sigma;  // Beta(c,d) per variance term
  bool sigma2_ig = false;               // default half-normal on sigma
  double a_sigma = 1.1, b_sigma = 1.1;  // IG case
  double phi2_sigma = 2.0;              // HN case: |sigma| ~ N(0, phi2)

  static PriorConfig build(long n, int k_mean_terms, int k_var_terms,
                           const std::string& c_beta_prior, const std::string& c_alpha_prior,
                           const std::vector<std::string>& pi_mu_priors,
                           const std::vector<std::string>& pi_sigma_priors,
                           const std::string& sigma_prior);

  std::vector<std::string> describe() const;
};

double log_ig_pdf(double x, double a, double b);
double log_beta_pdf(double x, double a, double b);
// Density of sigma > 0 under |sigma| ~ N(0, phi2).
double log_halfnormal_pdf(double sigma, double phi2);

// Pólya-urn predictive P(next indicator = 1) after `assigned` indicators with
// `on` of them set, under a Beta(c,d) prior on the inclusion probability.
double bernoulli_predictive(int on, int assigned, double c, double d);

// Conditional prior mass of a block of indicators given the rest of its term:
// Beta(c + N, d + q - N) / Beta(c + rest_on, d + q - L - rest_on) with
// N = rest_on + popcount(block). Computed in log space.
double block_conditional_prior_mass(const std::vector<std::uint8_t>& block, int rest_on, int q,
                                    double c, double d);

// Draws a block from the conditional prior by sequential predictive draws;
// the induced pmf equals block_conditional_prior_mass exactly.
std::vector<std::uint8_t> sample_block_from_conditional_prior(Rng& rng, int block_len, int rest_on,
                                                              int q, double c, double d);

}  // namespace locscale
