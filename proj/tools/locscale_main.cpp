#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "locscale/basis.hpp"
#include "locscale/formula.hpp"
#include "locscale/predict.hpp"
#include "locscale/sampler.hpp"
#include "locscale/simulate.hpp"
#include "locscale/store.hpp"
#include "locscale/summarize.hpp"

namespace {

using namespace locscale;

struct CommonArgs {
  std::string data_path;
  std::vector<std::string> factors;
  std::string store_dir;
};

void add_store_dir(CLI::App* cmd, std::string* out) {
  const char* env = std::getenv("LOCSCALE_STORE");
  if (env) *out = env;
  cmd->add_option("--store-dir", *out, "directory holding the posterior sample files")
      ->default_str(env ? env : "");
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
  std::vector<double> out;
  if (text == "none" || text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw std::runtime_error(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  return out;
}

// Rebuild the fitted design from the original data; the store only keeps
// samples, so prediction and plotting re-derive knots and offsets from the
// recorded formula. A fingerprint mismatch means different data.
DesignMatrices design_from_store(const std::string& store_dir, const std::string& data_path,
                                 const std::vector<std::string>& factors) {
  const RunManifest manifest = read_manifest(store_dir);
  const DataTable data = DataTable::read_csv(data_path, factors);
  std::ostringstream hash;
  hash << "fnv1a:" << std::hex << data.fingerprint();
  if (hash.str() != manifest.data_hash)
    std::cerr << "warning: --data does not match the fingerprint recorded at fit time\n";
  const ModelSpec spec = parse_model_formula(manifest.formula);
  return build_design(spec, data);
}

void write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << text;
}

int cmd_fit(const std::string& data_path, const std::vector<std::string>& factors,
            const std::string& formula_text, const std::string& store_dir, long sweeps, long burn,
            long thin, std::uint64_t seed, int chains, const PriorStrings& priors,
            const std::string& block_probs) {
  if (store_dir.empty())
    throw std::runtime_error("no --store-dir given (and LOCSCALE_STORE unset); "
                             "posterior samples need a storage directory");
  const DataTable data = DataTable::read_csv(data_path, factors);
  const ModelSpec spec = parse_model_formula(formula_text);
  RunConfig config;
  config.sweeps = sweeps;
  config.burn = burn;
  config.thin = thin;
  config.block_size_probs = parse_number_list(block_probs, "--block-size-probs");

  std::vector<std::string> dirs;
  if (chains <= 1) {
    dirs.push_back(store_dir);
  } else {
    for (int c = 0; c < chains; ++c)
      dirs.push_back((std::filesystem::path(store_dir) / ("chain_" + std::to_string(c))).string());
  }

  std::vector<std::thread> workers;
  std::vector<std::string> errors(dirs.size());
  for (std::size_t c = 0; c < dirs.size(); ++c) {
    workers.emplace_back([&, c] {
      try {
        RunConfig cfg = config;
        cfg.seed = seed + c;
        cfg.store_dir = dirs[c];
        run_chain(spec, data, priors, cfg);
      } catch (const std::exception& e) {
        errors[c] = e.what();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);

  for (const auto& dir : dirs) {
    const RunManifest manifest = read_manifest(dir);
    std::cout << "Fit complete: " << manifest.retained << " retained sweeps in " << dir << " ("
              << manifest.wall_clock_seconds << " s)\n";
    if (manifest.dropped_rows > 0)
      std::cout << "Dropped " << manifest.dropped_rows << " rows with missing values\n";
    std::cout << "\n" << print_report(dir);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian semiparametric location-scale regression with "
               "spike-and-slab variable selection"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "run the MCMC sampler and store posterior samples");
  std::string data_path, formula_text, store_dir;
  std::vector<std::string> factors;
  long sweeps = 0, burn = 0, thin = 1;
  std::uint64_t seed = 1;
  int chains = 1;
  PriorStrings priors;
  std::string block_probs;
  fit->add_option("--data", data_path, "CSV file with a header row")->required();
  fit->add_option("--formula", formula_text,
                  "two-part model formula, e.g. \"y ~ sm(u, k = 20) | sm(u, k = 20)\"")
      ->required();
  fit->add_option("--sweeps", sweeps, "total MCMC sweeps")->required();
  fit->add_option("--burn", burn, "burn-in sweeps to discard");
  fit->add_option("--thin", thin, "retain every thin-th post-burn-in sweep");
  fit->add_option("--seed", seed, "random generator seed");
  fit->add_option("--chains", chains, "independent chains (seed + j, chain_j subdirectories)")
      ->check(CLI::PositiveNumber);
  add_store_dir(fit, &store_dir);
  fit->add_option("--c-beta-prior", priors.c_beta, "e.g. IG(0.5,0.5*n)");
  fit->add_option("--c-alpha-prior", priors.c_alpha, "e.g. IG(1.1,1.1)");
  fit->add_option("--pi-mu-prior", priors.pi_mu, "Beta prior per mean term (repeatable)");
  fit->add_option("--pi-sigma-prior", priors.pi_sigma, "Beta prior per variance term (repeatable)");
  fit->add_option("--sigma-prior", priors.sigma, "HN(phi2) or IG(a,b)");
  fit->add_option("--block-size-probs", block_probs,
                  "comma-separated block size weights for the indicator moves");
  fit->add_option("--factor", factors, "force a column to be treated as categorical (repeatable)");

  // summary
  auto* summary = app.add_subcommand("summary", "model-space and deviance summary of a fit");
  std::string s_data, s_store, s_json, s_coefs;
  std::vector<std::string> s_factors;
  int n_models = 5;
  summary->add_option("--data", s_data, "the CSV used at fit time")->required();
  summary->add_option("--factor", s_factors, "categorical columns, as at fit time");
  add_store_dir(summary, &s_store);
  summary->add_option("--n-models", n_models, "how many top models to display");
  summary->add_option("--json", s_json, "also write a machine-readable summary to this file");
  summary->add_option("--coefs", s_coefs,
                      "print a chain summary for one parameter file (beta, alpha, ...)");

  // predict
  auto* predict = app.add_subcommand("predict", "predictions at new covariate vectors");
  std::string p_data, p_newdata, p_store, p_interval = "credible", p_out;
  std::vector<std::string> p_factors;
  double p_level = -1.0;
  std::uint64_t p_seed = 1;
  predict->add_option("--data", p_data, "the CSV used at fit time")->required();
  predict->add_option("--newdata", p_newdata, "CSV of covariate vectors to predict at")->required();
  add_store_dir(predict, &p_store);
  predict->add_option("--interval", p_interval, "credible or prediction")
      ->check(CLI::IsMember({"credible", "prediction"}));
  predict->add_option("--level", p_level, "interval level (default 0.80 credible, 0.95 prediction)");
  predict->add_option("--seed", p_seed, "seed for posterior predictive draws");
  predict->add_option("--out", p_out, "write CSV here instead of stdout");
  predict->add_option("--factor", p_factors, "categorical columns, as at fit time");

  // plotdata
  auto* plotdata = app.add_subcommand("plotdata", "per-term posterior curves on a grid (CSV)");
  std::string g_data, g_store, g_side = "mean", g_term = "1", g_quantiles = "0.1,0.9", g_out;
  std::vector<std::string> g_factors;
  int grid_n = 30;
  bool g_intercept = true, g_centre = false;
  plotdata->add_option("--data", g_data, "the CSV used at fit time")->required();
  add_store_dir(plotdata, &g_store);
  plotdata->add_option("--side", g_side, "mean or stdev")
      ->check(CLI::IsMember({"mean", "stdev"}));
  plotdata->add_option("--term", g_term, "term label, e.g. \"sm(u)\", or 1-based index");
  plotdata->add_option("--grid", grid_n, "grid points per axis");
  plotdata->add_flag("--intercept,!--no-intercept", g_intercept,
                     "include the intercept (mean) or sigma (stdev)");
  plotdata->add_flag("--centre-effects", g_centre, "centre each sweep's curve over the grid");
  plotdata->add_option("--quantiles", g_quantiles, "comma-separated quantiles, or 'none'");
  plotdata->add_option("--out", g_out, "write CSV here instead of stdout");
  plotdata->add_option("--factor", g_factors, "categorical columns, as at fit time");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset CSV");
  std::string m_mech, m_out;
  long m_n = 500;
  std::uint64_t m_seed = 1;
  simulate->add_option("--mechanism", m_mech, "m1, m2, biv or gam4")->required();
  simulate->add_option("--n", m_n, "sample size");
  simulate->add_option("--seed", m_seed, "random generator seed");
  simulate->add_option("--out", m_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit)
      return cmd_fit(data_path, factors, formula_text, store_dir, sweeps, burn, thin, seed, chains,
                     priors, block_probs);
    if (*summary) {
      const DesignMatrices design = design_from_store(s_store, s_data, s_factors);
      std::cout << summary_report(s_store, design, n_models);
      if (!s_coefs.empty()) std::cout << "\n" << parameter_summary_report(s_store, s_coefs);
      if (!s_json.empty()) {
        std::ofstream out(s_json);
        if (!out) throw std::runtime_error("cannot write " + s_json);
        out << summary_json(s_store, design, n_models) << "\n";
      }
      return 0;
    }
    if (*predict) {
      const DesignMatrices design = design_from_store(p_store, p_data, p_factors);
      const DataTable newdata = DataTable::read_csv(p_newdata, p_factors);
      PredictionTable table;
      if (p_interval == "credible") {
        table = predict_mean(p_store, design, newdata, p_level < 0 ? 0.80 : p_level);
      } else {
        Rng rng(p_seed);
        table = predict_response(p_store, design, newdata, p_level < 0 ? 0.95 : p_level, rng);
      }
      for (const auto& w : table.warnings) std::cerr << "warning: " << w << "\n";
      write_or_print(table.to_csv(), p_out);
      return 0;
    }
    if (*plotdata) {
      const DesignMatrices design = design_from_store(g_store, g_data, g_factors);
      const TermGrid grid =
          term_grid(g_store, design, g_side == "mean" ? TermSide::mean : TermSide::stdev, g_term,
                    grid_n, g_intercept, g_centre,
                    parse_number_list(g_quantiles, "--quantiles"));
      write_or_print(grid.to_csv(), g_out);
      return 0;
    }
    if (*simulate) {
      write_csv(simulate_mechanism(m_mech, m_n, m_seed), m_out);
      std::cout << "wrote " << m_n << " rows to " << m_out << "\n";
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
