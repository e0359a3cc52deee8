#include "locscale/priors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace locscale {

namespace {

double lbeta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

std::pair<double, double> two_params(const PriorSpec& p) { return {p.param1, p.param2}; }

PriorSpec parse_family(const std::string& text, long n, PriorSpec::Family expected,
                       const char* what) {
  PriorSpec p = parse_prior_string(text, n);
  if (p.family != expected)
    throw std::runtime_error(std::string(what) + ": expected prior family does not match '" +
                             text + "'");
  return p;
}

}  // namespace

PriorConfig PriorConfig::build(long n, int k_mean_terms, int k_var_terms,
                               const std::string& c_beta_prior, const std::string& c_alpha_prior,
                               const std::vector<std::string>& pi_mu_priors,
                               const std::vector<std::string>& pi_sigma_priors,
                               const std::string& sigma_prior) {
  PriorConfig cfg;
  {
    const PriorSpec p = parse_family(c_beta_prior.empty() ? "IG(0.5,0.5*n)" : c_beta_prior, n,
                                     PriorSpec::Family::ig, "c.beta");
    std::tie(cfg.a_beta, cfg.b_beta) = two_params(p);
  }
  {
    const PriorSpec p = parse_family(c_alpha_prior.empty() ? "IG(1.1,1.1)" : c_alpha_prior, n,
                                     PriorSpec::Family::ig, "c.alpha");
    std::tie(cfg.a_alpha, cfg.b_alpha) = two_params(p);
  }
  auto recycle = [n](const std::vector<std::string>& in, int k, const char* what) {
    std::vector<std::pair<double, double>> out;
    if (in.empty()) {
      out.assign(static_cast<std::size_t>(k), {1.0, 1.0});
      return out;
    }
    if (in.size() != 1 && static_cast<int>(in.size()) != k)
      throw std::runtime_error(std::string(what) + ": got " + std::to_string(in.size()) +
                               " priors for " + std::to_string(k) + " terms");
    for (int i = 0; i < k; ++i) {
      const auto& s = in.size() == 1 ? in[0] : in[static_cast<std::size_t>(i)];
      const PriorSpec p = parse_family(s, n, PriorSpec::Family::beta, what);
      out.emplace_back(p.param1, p.param2);
    }
    return out;
  };
  cfg.pi_mu = recycle(pi_mu_priors, k_mean_terms, "pi.mu");
  cfg.pi_sigma = recycle(pi_sigma_priors, k_var_terms, "pi.sigma");
  {
    const PriorSpec p = parse_prior_string(sigma_prior.empty() ? "HN(2)" : sigma_prior, n);
    if (p.family == PriorSpec::Family::ig) {
      cfg.sigma2_ig = true;
      std::tie(cfg.a_sigma, cfg.b_sigma) = two_params(p);
    } else if (p.family == PriorSpec::Family::hn) {
      cfg.sigma2_ig = false;
      cfg.phi2_sigma = p.param1;
    } else {
      throw std::runtime_error("sigma prior must be IG or HN: " + sigma_prior);
    }
  }
  return cfg;
}

std::vector<std::string> PriorConfig::describe() const {
  auto fmt = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  std::vector<std::string> out;
  out.push_back("c.beta = IG(" + fmt(a_beta) + "," + fmt(b_beta) + ")");
  out.push_back("c.alpha = IG(" + fmt(a_alpha) + "," + fmt(b_alpha) + ")");
  auto beta_list = [&fmt](const std::vector<std::pair<double, double>>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      s += "Beta(" + fmt(v[i].first) + "," + fmt(v[i].second) + ")";
    }
    return s.empty() ? std::string("(none)") : s;
  };
  out.push_back("pi.mu = " + beta_list(pi_mu));
  out.push_back("pi.sigma = " + beta_list(pi_sigma));
  if (sigma2_ig)
    out.push_back("sigma2 = IG(" + fmt(a_sigma) + "," + fmt(b_sigma) + ")");
  else
    out.push_back("sigma = HN(" + fmt(phi2_sigma) + ")");
  return out;
}

double log_ig_pdf(double x, double a, double b) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
}

double log_beta_pdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return -std::numeric_limits<double>::infinity();
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta(a, b);
}

double log_halfnormal_pdf(double sigma, double phi2) {
  if (sigma <= 0.0) return -std::numeric_limits<double>::infinity();
  return 0.5 * std::log(2.0 / (std::numbers::pi * phi2)) - sigma * sigma / (2.0 * phi2);
}

double bernoulli_predictive(int on, int assigned, double c, double d) {
  return (c + on) / (c + d + assigned);
}

double block_conditional_prior_mass(const std::vector<std::uint8_t>& block, int rest_on, int q,
                                    double c, double d) {
  const int len = static_cast<int>(block.size());
  int on = 0;
  for (const auto b : block) on += b ? 1 : 0;
  const int n_total = rest_on + on;
  const double log_mass = lbeta(c + n_total, d + q - n_total) -
                          lbeta(c + rest_on, d + q - len - rest_on);
  return std::exp(log_mass);
}

std::vector<std::uint8_t> sample_block_from_conditional_prior(Rng& rng, int block_len, int rest_on,
                                                              int q, double c, double d) {
  std::vector<std::uint8_t> block(static_cast<std::size_t>(block_len), 0);
  int on = rest_on;
  int assigned = q - block_len;
  for (int j = 0; j < block_len; ++j) {
    const double p = bernoulli_predictive(on, assigned, c, d);
    const bool bit = rng.bernoulli(p);
    block[static_cast<std::size_t>(j)] = bit ? 1 : 0;
    on += bit ? 1 : 0;
    ++assigned;
  }
  return block;
}

}  // namespace locscale
