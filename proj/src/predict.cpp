#include "locscale/predict.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace locscale {

namespace {

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::pair<double, double> interval_probs(double level) {
  const double tail = (1.0 - level) / 2.0;
  return {tail, 1.0 - tail};
}

Eigen::MatrixXd mu_draws(const std::string& store_dir, const DesignMatrices& design,
                         const DataTable& newdata, std::vector<std::string>* warnings) {
  Eigen::MatrixXd xnew;
  build_newdata(design, newdata, &xnew, nullptr, warnings);
  const SampleMatrix beta = read_parameter(store_dir, "beta");
  return xnew * beta.values.transpose();  // rows x sweeps
}

}  // namespace

std::string PredictionTable::to_csv() const {
  std::ostringstream os;
  os << "fit,lwr,upr\n";
  for (std::size_t i = 0; i < fit.size(); ++i)
    os << csv_number(fit[i]) << "," << csv_number(lwr[i]) << "," << csv_number(upr[i]) << "\n";
  return os.str();
}

PredictionTable predict_mean(const std::string& store_dir, const DesignMatrices& design,
                             const DataTable& newdata, double level) {
  PredictionTable out;
  out.kind = PredictionTable::Kind::credible;
  out.level = level;
  const Eigen::MatrixXd draws = mu_draws(store_dir, design, newdata, &out.warnings);
  const auto [plo, phi] = interval_probs(level);
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    std::vector<double> row(draws.row(i).begin(), draws.row(i).end());
    out.fit.push_back(draws.row(i).mean());
    out.lwr.push_back(quantile(row, plo));
    out.upr.push_back(quantile(row, phi));
  }
  return out;
}

PredictionTable predict_response(const std::string& store_dir, const DesignMatrices& design,
                                 const DataTable& newdata, double level, Rng& rng) {
  PredictionTable out;
  out.kind = PredictionTable::Kind::prediction;
  out.level = level;
  const Eigen::MatrixXd mu = mu_draws(store_dir, design, newdata, &out.warnings);
  Eigen::MatrixXd log_var;  // rows x sweeps
  {
    const SampleMatrix sigma2 = read_parameter(store_dir, "sigma2");
    log_var = Eigen::MatrixXd::Zero(mu.rows(), mu.cols());
    if (design.p2 > 0) {
      Eigen::MatrixXd znew;
      build_newdata(design, newdata, nullptr, &znew, &out.warnings);
      const SampleMatrix alpha = read_parameter(store_dir, "alpha");
      log_var = znew * alpha.values.transpose();
    }
    for (Eigen::Index s = 0; s < log_var.cols(); ++s)
      log_var.col(s).array() += std::log(sigma2.values(s, 0));
  }
  const auto [plo, phi] = interval_probs(level);
  std::vector<double> draws(static_cast<std::size_t>(mu.cols()));
  for (Eigen::Index i = 0; i < mu.rows(); ++i) {
    for (Eigen::Index s = 0; s < mu.cols(); ++s)
      draws[static_cast<std::size_t>(s)] = mu(i, s) + std::exp(0.5 * log_var(i, s)) * rng.normal();
    out.fit.push_back(mu.row(i).mean());
    out.lwr.push_back(quantile(draws, plo));
    out.upr.push_back(quantile(draws, phi));
  }
  return out;
}

std::string TermGrid::to_csv() const {
  std::ostringstream os;
  for (std::size_t c = 0; c < coord_names.size(); ++c) {
    if (c) os << ",";
    os << coord_names[c];
  }
  if (!level_names.empty()) os << ",level";
  os << ",fit";
  for (const double q : quantile_levels) os << ",q" << csv_number(q);
  os << "\n";
  for (std::size_t i = 0; i < fit.size(); ++i) {
    for (std::size_t c = 0; c < coords.size(); ++c) {
      if (c) os << ",";
      os << csv_number(coords[c](static_cast<Eigen::Index>(i)));
    }
    if (!level_names.empty()) os << "," << level_names[i];
    os << "," << csv_number(fit[i]);
    for (const auto& q : quantiles) os << "," << csv_number(q[i]);
    os << "\n";
  }
  return os.str();
}

TermGrid term_grid(const std::string& store_dir, const DesignMatrices& design, TermSide side,
                   const std::string& term_label, int grid_n, bool intercept, bool centre_effects,
                   const std::vector<double>& quantile_levels) {
  const auto& blocks = side == TermSide::mean ? design.mean_blocks : design.var_blocks;
  const TermBlock* block = nullptr;
  for (const auto& b : blocks)
    if (b.term.label() == term_label) block = &b;
  if (!block) {
    // Allow a 1-based term index instead of a label.
    try {
      const std::size_t idx = std::stoul(term_label);
      if (idx >= 1 && idx <= blocks.size()) block = &blocks[idx - 1];
    } catch (...) {
    }
  }
  if (!block) throw std::runtime_error("unknown term '" + term_label + "' on the requested side");
  if (grid_n < 2) throw std::runtime_error("grid must have at least 2 points");

  TermGrid out;
  out.intercept = intercept;
  out.centre_effects = centre_effects;
  out.quantile_levels = quantile_levels;

  // Assemble the grid rows and the term's raw basis columns at those rows.
  const Term& t = block->term;
  std::vector<TermInput> inputs;
  Eigen::Index rows = 0;
  auto linspace = [](double lo, double hi, int m) {
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i)
      v(i) = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
    return v;
  };
  if (t.kind == TermKind::categorical) {
    rows = static_cast<Eigen::Index>(block->levels.size());
    TermInput in;
    in.categorical = true;
    for (std::size_t l = 0; l < block->levels.size(); ++l) {
      in.level.push_back(static_cast<int>(l));
      out.level_names.push_back(block->levels[l]);
    }
    inputs.push_back(in);
    out.coord_names.push_back(t.vars[0]);
    Eigen::VectorXd code(rows);
    for (Eigen::Index i = 0; i < rows; ++i) code(i) = static_cast<double>(i);
    out.coords.push_back(code);
  } else if (t.kind == TermKind::linear || (t.kind == TermKind::smooth && t.vars.size() == 1)) {
    rows = grid_n;
    TermInput in;
    in.numeric = linspace(block->lo1, block->hi1, grid_n);
    inputs.push_back(in);
    out.coord_names.push_back(t.vars[0]);
    out.coords.push_back(in.numeric);
  } else if (t.kind == TermKind::smooth && block->cat_var < 0) {
    rows = static_cast<Eigen::Index>(grid_n) * grid_n;  // lattice in long format
    const Eigen::VectorXd g1 = linspace(block->lo1, block->hi1, grid_n);
    const Eigen::VectorXd g2 = linspace(block->lo2, block->hi2, grid_n);
    TermInput in1, in2;
    in1.numeric.resize(rows);
    in2.numeric.resize(rows);
    Eigen::Index r = 0;
    for (int j = 0; j < grid_n; ++j)
      for (int i = 0; i < grid_n; ++i, ++r) {
        in1.numeric(r) = g1(i);
        in2.numeric(r) = g2(j);
      }
    inputs.push_back(in1);
    inputs.push_back(in2);
    out.coord_names.push_back(t.vars[0]);
    out.coord_names.push_back(t.vars[1]);
    out.coords.push_back(in1.numeric);
    out.coords.push_back(in2.numeric);
  } else {  // smooth-by-categorical interaction: grid per level, long format
    const auto n_levels = static_cast<Eigen::Index>(block->levels.size());
    rows = static_cast<Eigen::Index>(grid_n) * n_levels;
    const Eigen::VectorXd g = linspace(block->lo1, block->hi1, grid_n);
    TermInput cont, cat;
    cat.categorical = true;
    cont.numeric.resize(rows);
    Eigen::Index r = 0;
    for (Eigen::Index l = 0; l < n_levels; ++l)
      for (int i = 0; i < grid_n; ++i, ++r) {
        cont.numeric(r) = g(i);
        cat.level.push_back(static_cast<int>(l));
        out.level_names.push_back(block->levels[static_cast<std::size_t>(l)]);
      }
    if (block->cat_var == 0) {
      inputs.push_back(cat);
      inputs.push_back(cont);
    } else {
      inputs.push_back(cont);
      inputs.push_back(cat);
    }
    const int cont_var = block->cat_var == 0 ? 1 : 0;
    out.coord_names.push_back(t.vars[static_cast<std::size_t>(cont_var)]);
    out.coords.push_back(cont.numeric);
  }

  Eigen::MatrixXd cols = term_raw_columns(*block, inputs);
  const Eigen::VectorXd& offsets = side == TermSide::mean ? design.x_offsets : design.z_offsets;
  const int offset_base = side == TermSide::mean ? 1 + block->begin : block->begin;
  for (Eigen::Index j = 0; j < cols.cols(); ++j)
    cols.col(j).array() -= offsets(offset_base + j);

  // Coefficient draws restricted to this term's columns.
  const SampleMatrix coef =
      read_parameter(store_dir, side == TermSide::mean ? "beta" : "alpha");
  const int coef_base = side == TermSide::mean ? 1 + block->begin : block->begin;
  Eigen::MatrixXd curve =
      cols * coef.values.middleCols(coef_base, block->size()).transpose();  // rows x sweeps

  if (side == TermSide::mean) {
    if (intercept) curve.rowwise() += coef.values.col(0).transpose();
    if (centre_effects) {
      const Eigen::RowVectorXd grid_means = curve.colwise().mean();
      curve.rowwise() -= grid_means;
    }
  } else {
    curve = (0.5 * curve.array()).exp().matrix();
    if (intercept) {
      const SampleMatrix sigma2 = read_parameter(store_dir, "sigma2");
      for (Eigen::Index s = 0; s < curve.cols(); ++s)
        curve.col(s) *= std::sqrt(sigma2.values(s, 0));
    }
    if (centre_effects) {
      for (Eigen::Index s = 0; s < curve.cols(); ++s) curve.col(s) /= curve.col(s).mean();
    }
  }

  out.quantiles.resize(quantile_levels.size());
  for (auto& q : out.quantiles) q.resize(static_cast<std::size_t>(rows));
  for (Eigen::Index i = 0; i < rows; ++i) {
    out.fit.push_back(curve.row(i).mean());
    if (!quantile_levels.empty()) {
      std::vector<double> row(curve.row(i).begin(), curve.row(i).end());
      for (std::size_t q = 0; q < quantile_levels.size(); ++q)
        out.quantiles[q][static_cast<std::size_t>(i)] = quantile(row, quantile_levels[q]);
    }
  }
  return out;
}

}  // namespace locscale
