#include "locscale/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "locscale/rng.hpp"

namespace locscale {

namespace {

double dnorm(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

// Bivariate normal density with explicit 2x2 covariance.
double dmvnorm2(double x1, double x2, double m1, double m2, double s11, double s12, double s22) {
  const double det = s11 * s22 - s12 * s12;
  const double d1 = x1 - m1, d2 = x2 - m2;
  const double quad = (s22 * d1 * d1 - 2.0 * s12 * d1 * d2 + s11 * d2 * d2) / det;
  return std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * std::sqrt(det));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DataTable make_table(const std::vector<std::string>& names,
                     const std::vector<std::vector<double>>& cols) {
  std::vector<std::vector<std::string>> rows(cols[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& c : cols) rows[i].push_back(fmt(c[i]));
  return DataTable::from_cells(names, rows);
}

}  // namespace

DataTable simulate_mechanism(const std::string& mechanism, long n, std::uint64_t seed) {
  if (n < 1) throw std::runtime_error("simulate: n must be positive");
  Rng rng(seed);
  const auto size = static_cast<std::size_t>(n);

  if (mechanism == "m1" || mechanism == "m2") {
    std::vector<double> u(size);
    for (auto& v : u) v = rng.uniform();
    std::sort(u.begin(), u.end());
    std::vector<double> y(size);
    for (std::size_t i = 0; i < size; ++i) {
      double mu, sd;
      if (mechanism == "m1") {
        mu = 2.0 * u[i];
        sd = 0.1 + u[i];
      } else {
        const double mix = dnorm(u[i], 0.2, 0.004) + dnorm(u[i], 0.6, 0.1);
        mu = mix / 4.0;
        sd = mix / 6.0;
      }
      y[i] = rng.normal(mu, sd);
    }
    return make_table({"y", "u"}, {y, u});
  }

  if (mechanism == "biv") {
    std::vector<double> w1(size), w2(size), y(size);
    for (auto& v : w1) v = rng.uniform();
    for (auto& v : w2) v = rng.uniform();
    for (std::size_t i = 0; i < size; ++i) {
      const double bumps = dmvnorm2(w1[i], w2[i], 0.25, 0.75, 0.03, 0.01, 0.03) +
                           dmvnorm2(w1[i], w2[i], 0.65, 0.35, 0.09, 0.01, 0.09);
      const double mu = 0.1 + bumps;
      const double var = 0.1 + bumps / 2.0;
      y[i] = rng.normal(mu, std::sqrt(var));
    }
    return make_table({"y", "w1", "w2"}, {y, w1, w2});
  }

  if (mechanism == "gam4") {
    std::vector<std::vector<double>> w(4, std::vector<double>(size));
    for (auto& col : w)
      for (auto& v : col) v = rng.uniform();
    std::vector<double> y(size);
    for (std::size_t i = 0; i < size; ++i) {
      const double w1 = w[0][i], w2 = w[1][i], w3 = w[2][i], w4 = w[3][i];
      const double mu = 1.5 * w1 + (dnorm(w2, 0.2, 0.004) + dnorm(w2, 0.6, 0.1)) / 2.0 +
                        1.0 + std::sin(2.0 * std::numbers::pi * w3) - w4;
      const double sd = ((dnorm(w1, 0.2, 0.004) + dnorm(w1, 0.6, 0.1)) / 2.0) *
                        (0.6 + 0.5 * std::sin(2.0 * std::numbers::pi * w2)) * (1.1 - w3) *
                        (0.2 + 1.5 * w4);
      y[i] = rng.normal(mu, std::abs(sd));
    }
    return make_table({"y", "w1", "w2", "w3", "w4"}, {y, w[0], w[1], w[2], w[3]});
  }

  throw std::runtime_error("unknown mechanism '" + mechanism + "' (expected m1, m2, biv, gam4)");
}

void write_csv(const DataTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t j = 0; j < table.n_cols(); ++j) {
    if (j) out << ",";
    out << table.columns()[j].name;
  }
  out << "\n";
  for (std::size_t i = 0; i < table.n_rows(); ++i) {
    for (std::size_t j = 0; j < table.n_cols(); ++j) {
      if (j) out << ",";
      out << table.columns()[j].labels[i];
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failure on " + path);
}

}  // namespace locscale
