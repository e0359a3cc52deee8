#pragma once

#include <cstdint>
#include <string>

#include "locscale/table.hpp"

namespace locscale {

// Synthetic data generators used by the simulation studies:
//   m1   - y ~ N(2u, (0.1+u)^2), u ~ U(0,1) sorted
//   m2   - mean and sd built from a two-component normal-density mixture
//   biv  - bivariate surface from two Gaussian bumps, covariates w1, w2
//   gam4 - additive mean / multiplicative sd in four covariates w1..w4
DataTable simulate_mechanism(const std::string& mechanism, long n, std::uint64_t seed);

void write_csv(const DataTable& table, const std::string& path);

}  // namespace locscale
