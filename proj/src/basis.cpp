#include "locscale/basis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace locscale {

namespace {

// Type-7 quantile on sorted values.
double quantile_sorted(const std::vector<double>& v, double p) {
  const double h = p * (static_cast<double>(v.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

double r2logr2(double r2) { return r2 > 0.0 ? r2 * std::log(r2) : 0.0; }

}  // namespace

KnotSet place_knots(std::vector<double> values, int count, const std::string& varname,
                    std::vector<std::string>* warnings) {
  if (count < 2) throw std::runtime_error("knot count must be at least 2 for " + varname);
  std::sort(values.begin(), values.end());
  std::size_t distinct = values.empty() ? 0 : 1;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] != values[i - 1]) ++distinct;
  if (distinct < static_cast<std::size_t>(count)) {
    throw std::runtime_error("variable " + varname + " has only " + std::to_string(distinct) +
                             " distinct values; cannot place " + std::to_string(count) + " knots");
  }
  std::vector<double> knots;
  knots.reserve(count);
  knots.push_back(values.front());
  for (int j = 1; j <= count - 2; ++j)
    knots.push_back(quantile_sorted(values, static_cast<double>(j) / (count - 1)));
  knots.push_back(values.back());
  std::vector<double> unique_knots;
  for (double k : knots)
    if (unique_knots.empty() || k > unique_knots.back()) unique_knots.push_back(k);
  if (unique_knots.size() < knots.size() && warnings) {
    warnings->push_back("coincident quantile knots for " + varname + ": reduced from " +
                        std::to_string(knots.size()) + " to " +
                        std::to_string(unique_knots.size()));
  }
  KnotSet ks;
  ks.pts.resize(static_cast<Eigen::Index>(unique_knots.size()), 1);
  for (std::size_t i = 0; i < unique_knots.size(); ++i) ks.pts(static_cast<Eigen::Index>(i), 0) = unique_knots[i];
  return ks;
}

Eigen::VectorXd eval_basis(BasisKind kind, const Eigen::VectorXd& x, const KnotSet& knots) {
  const Eigen::Index m = knots.pts.rows();
  switch (kind) {
    case BasisKind::rd1: {
      Eigen::VectorXd out(m + 1);
      out(0) = x(0);
      for (Eigen::Index j = 0; j < m; ++j) {
        const double d = x(0) - knots.pts(j, 0);
        out(j + 1) = r2logr2(d * d);
      }
      return out;
    }
    case BasisKind::tl: {
      Eigen::VectorXd out(m + 1);
      out(0) = x(0);
      for (Eigen::Index j = 0; j < m; ++j) out(j + 1) = std::max(x(0) - knots.pts(j, 0), 0.0);
      return out;
    }
    case BasisKind::rd2: {
      Eigen::VectorXd out(m + 2);
      out(0) = x(0);
      out(1) = x(1);
      for (Eigen::Index j = 0; j < m; ++j) {
        const double d1 = x(0) - knots.pts(j, 0);
        const double d2 = x(1) - knots.pts(j, 1);
        out(j + 2) = r2logr2(d1 * d1 + d2 * d2);
      }
      return out;
    }
  }
  throw std::logic_error("unreachable basis kind");
}

Eigen::MatrixXd read_knots_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open knots file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool ok = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) ok = false;
        row.push_back(v);
      } catch (...) {
        ok = false;
      }
    }
    if (!ok) {
      if (first) {  // header line
        first = false;
        continue;
      }
      throw std::runtime_error("non-numeric knot entry in " + path);
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("ragged knot rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("no knots found in " + path);
  const auto cols = rows.front().size();
  if (cols != 1 && cols != 2)
    throw std::runtime_error("knots file must have 1 or 2 columns: " + path);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

namespace {

BasisKind smooth_basis_kind(const Term& t, bool bivariate_continuous) {
  if (bivariate_continuous) return BasisKind::rd2;  // rd is the only surface basis
  return t.basis == BasisCode::rd ? BasisKind::rd1 : BasisKind::tl;
}

std::vector<double> distinct_sorted(const Eigen::VectorXd& v) {
  std::vector<double> x(v.data(), v.data() + v.size());
  std::sort(x.begin(), x.end());
  x.erase(std::unique(x.begin(), x.end()), x.end());
  return x;
}

}  // namespace

Eigen::MatrixXd term_raw_columns(const TermBlock& block, const std::vector<TermInput>& inputs) {
  const Term& t = block.term;
  const Eigen::Index n =
      inputs[0].categorical ? static_cast<Eigen::Index>(inputs[0].level.size()) : inputs[0].numeric.size();
  switch (t.kind) {
    case TermKind::intercept:
      return Eigen::MatrixXd(n, 0);
    case TermKind::linear: {
      Eigen::MatrixXd out(n, 1);
      out.col(0) = inputs[0].numeric;
      return out;
    }
    case TermKind::categorical: {
      const auto levels = static_cast<Eigen::Index>(block.levels.size());
      Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, levels - 1);
      for (Eigen::Index i = 0; i < n; ++i) {
        const int lev = inputs[0].level[static_cast<std::size_t>(i)];
        if (lev > 0) out(i, lev - 1) = 1.0;
      }
      return out;
    }
    case TermKind::smooth: {
      if (t.vars.size() == 1) {
        const Eigen::Index q = block.knots.pts.rows() + 1;
        Eigen::MatrixXd out(n, q);
        Eigen::VectorXd x(1);
        for (Eigen::Index i = 0; i < n; ++i) {
          x(0) = inputs[0].numeric(i);
          out.row(i) = eval_basis(smooth_basis_kind(t, false), x, block.knots).transpose();
        }
        return out;
      }
      if (block.cat_var < 0) {
        const Eigen::Index q = block.knots.pts.rows() + 2;
        Eigen::MatrixXd out(n, q);
        Eigen::VectorXd x(2);
        for (Eigen::Index i = 0; i < n; ++i) {
          x(0) = inputs[0].numeric(i);
          x(1) = inputs[1].numeric(i);
          out.row(i) = eval_basis(BasisKind::rd2, x, block.knots).transpose();
        }
        return out;
      }
      // Smooth-by-categorical interaction: the continuous basis replicated per
      // level and masked by the level indicator.
      const int cont = block.cat_var == 0 ? 1 : 0;
      const auto n_levels = static_cast<Eigen::Index>(block.levels.size());
      const Eigen::Index q = block.knots.pts.rows() + 1;
      Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n_levels * q);
      Eigen::VectorXd x(1);
      for (Eigen::Index i = 0; i < n; ++i) {
        x(0) = inputs[static_cast<std::size_t>(cont)].numeric(i);
        const Eigen::VectorXd phi = eval_basis(smooth_basis_kind(t, false), x, block.knots);
        const int lev = inputs[static_cast<std::size_t>(block.cat_var)].level[static_cast<std::size_t>(i)];
        out.block(i, static_cast<Eigen::Index>(lev) * q, 1, q) = phi.transpose();
      }
      return out;
    }
  }
  throw std::logic_error("unreachable term kind");
}

namespace {

struct SideBuild {
  Eigen::MatrixXd cols;  // raw, pre-centering
  std::vector<TermBlock> blocks;
  std::vector<std::string> labels;
  std::vector<char> is_categorical_col;
};

std::vector<std::string> sorted_levels(const Column& col, const std::vector<Eigen::Index>& keep) {
  std::set<std::string> s;
  for (const auto i : keep) s.insert(col.labels[static_cast<std::size_t>(i)]);
  return {s.begin(), s.end()};
}

TermInput make_input(const Column& col, const std::vector<Eigen::Index>& keep, bool categorical,
                     const std::vector<std::string>& levels) {
  TermInput in;
  in.categorical = categorical;
  if (categorical) {
    in.level.reserve(keep.size());
    for (const auto i : keep) {
      const auto& lab = col.labels[static_cast<std::size_t>(i)];
      const auto it = std::lower_bound(levels.begin(), levels.end(), lab);
      if (it == levels.end() || *it != lab)
        throw std::runtime_error("unseen level '" + lab + "' for variable " + col.name);
      in.level.push_back(static_cast<int>(it - levels.begin()));
    }
  } else {
    if (!col.numeric)
      throw std::runtime_error("variable " + col.name + " is categorical but used as continuous");
    in.numeric.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i)
      in.numeric(static_cast<Eigen::Index>(i)) = col.values[static_cast<std::size_t>(keep[i])];
  }
  return in;
}

// Resolve a parsed term against the data: bare identifiers referencing
// categorical columns become categorical terms; smooth terms locate their
// categorical variable (at most one allowed).
TermBlock resolve_term(const Term& term, const DataTable& data,
                       const std::vector<Eigen::Index>& keep,
                       std::vector<std::string>* warnings) {
  TermBlock block;
  block.term = term;
  if (term.kind == TermKind::intercept) return block;

  std::vector<const Column*> cols;
  for (const auto& v : term.vars) cols.push_back(&data.column(v));

  if (term.kind == TermKind::linear && !cols[0]->numeric) block.term.kind = TermKind::categorical;

  if (block.term.kind == TermKind::categorical) {
    block.levels = sorted_levels(*cols[0], keep);
    if (block.levels.size() < 2)
      throw std::runtime_error("categorical variable " + term.vars[0] + " has a single level");
    return block;
  }
  if (block.term.kind == TermKind::linear) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto i : keep) {
      lo = std::min(lo, cols[0]->values[static_cast<std::size_t>(i)]);
      hi = std::max(hi, cols[0]->values[static_cast<std::size_t>(i)]);
    }
    block.lo1 = lo;
    block.hi1 = hi;
    return block;
  }

  // Smooth terms.
  int n_cat = 0;
  for (std::size_t v = 0; v < cols.size(); ++v) {
    if (!cols[v]->numeric) {
      ++n_cat;
      block.cat_var = static_cast<int>(v);
    }
  }
  if (n_cat > 1) throw std::runtime_error("sm(" + term.vars[0] + "," + term.vars[1] +
                                          "): at most one variable may be categorical");
  if (cols.size() == 1 && n_cat == 1)
    throw std::runtime_error("sm(" + term.vars[0] + "): smooth variable is categorical");

  if (block.cat_var >= 0) {
    block.levels = sorted_levels(*cols[static_cast<std::size_t>(block.cat_var)], keep);
    if (block.levels.size() < 2)
      throw std::runtime_error("categorical variable " + term.vars[static_cast<std::size_t>(block.cat_var)] +
                               " has a single level");
  }

  auto kept_values = [&keep](const Column& c) {
    std::vector<double> v;
    v.reserve(keep.size());
    for (const auto i : keep) v.push_back(c.values[static_cast<std::size_t>(i)]);
    return v;
  };

  const bool bivariate_continuous = cols.size() == 2 && block.cat_var < 0;
  const int cont1 = block.cat_var == 0 ? 1 : 0;
  const auto v1 = kept_values(*cols[static_cast<std::size_t>(cont1)]);
  block.lo1 = *std::min_element(v1.begin(), v1.end());
  block.hi1 = *std::max_element(v1.begin(), v1.end());

  if (!term.knots_path.empty()) {
    Eigen::MatrixXd user = read_knots_csv(term.knots_path);
    if (bivariate_continuous) {
      if (user.cols() != 2)
        throw std::runtime_error("bivariate smooth needs a two-column knots file: " + term.knots_path);
      block.knots.pts = user;
    } else {
      // For interactions a two-column table enumerates (knot, level-code)
      // pairs; the unique first-column values are the knots.
      std::vector<double> k(user.col(0).data(), user.col(0).data() + user.rows());
      std::sort(k.begin(), k.end());
      k.erase(std::unique(k.begin(), k.end()), k.end());
      block.knots.pts.resize(static_cast<Eigen::Index>(k.size()), 1);
      for (std::size_t i = 0; i < k.size(); ++i) block.knots.pts(static_cast<Eigen::Index>(i), 0) = k[i];
    }
    block.knots.quantile_default = false;
  } else if (bivariate_continuous) {
    const auto v2 = kept_values(*cols[1]);
    const KnotSet k1 = place_knots(v1, term.k, term.vars[0], warnings);
    const KnotSet k2 = place_knots(v2, term.k, term.vars[1], warnings);
    block.knots.pts.resize(k1.pts.rows() * k2.pts.rows(), 2);
    Eigen::Index r = 0;
    for (Eigen::Index j = 0; j < k2.pts.rows(); ++j)
      for (Eigen::Index i = 0; i < k1.pts.rows(); ++i, ++r) {
        block.knots.pts(r, 0) = k1.pts(i, 0);
        block.knots.pts(r, 1) = k2.pts(j, 0);
      }
  } else {
    block.knots = place_knots(v1, term.k, term.vars[static_cast<std::size_t>(cont1)], warnings);
  }

  if (bivariate_continuous) {
    const auto v2 = kept_values(*cols[1]);
    block.lo2 = *std::min_element(v2.begin(), v2.end());
    block.hi2 = *std::max_element(v2.begin(), v2.end());
  }
  return block;
}

std::vector<std::string> block_labels(const TermBlock& block) {
  const Term& t = block.term;
  std::vector<std::string> labels;
  switch (t.kind) {
    case TermKind::intercept:
      break;
    case TermKind::linear:
      labels.push_back(t.vars[0]);
      break;
    case TermKind::categorical:
      for (std::size_t l = 1; l < block.levels.size(); ++l)
        labels.push_back(t.vars[0] + block.levels[l]);
      break;
    case TermKind::smooth: {
      const std::string base = t.label();
      if (t.vars.size() == 1) {
        labels.push_back(t.vars[0]);
        for (Eigen::Index j = 0; j < block.knots.pts.rows(); ++j)
          labels.push_back(base + "." + std::to_string(j + 1));
      } else if (block.cat_var < 0) {
        labels.push_back(t.vars[0]);
        labels.push_back(t.vars[1]);
        for (Eigen::Index j = 0; j < block.knots.pts.rows(); ++j)
          labels.push_back(base + "." + std::to_string(j + 1));
      } else {
        for (const auto& lev : block.levels) {
          labels.push_back(base + "." + lev);
          for (Eigen::Index j = 0; j < block.knots.pts.rows(); ++j)
            labels.push_back(base + "." + lev + "." + std::to_string(j + 1));
        }
      }
      break;
    }
  }
  return labels;
}

SideBuild build_side(const std::vector<Term>& terms, const DataTable& data,
                     const std::vector<Eigen::Index>& keep, std::vector<std::string>* warnings) {
  SideBuild side;
  const auto n = static_cast<Eigen::Index>(keep.size());
  std::vector<Eigen::MatrixXd> pieces;
  Eigen::Index total = 0;
  for (const auto& term : terms) {
    if (term.kind == TermKind::intercept) continue;
    TermBlock block = resolve_term(term, data, keep, warnings);
    std::vector<TermInput> inputs;
    for (std::size_t v = 0; v < block.term.vars.size(); ++v) {
      const bool cat = (block.term.kind == TermKind::categorical) ||
                       (static_cast<int>(v) == block.cat_var);
      inputs.push_back(make_input(data.column(block.term.vars[v]), keep, cat, block.levels));
    }
    Eigen::MatrixXd cols = term_raw_columns(block, inputs);
    block.begin = static_cast<int>(total);
    block.end = static_cast<int>(total + cols.cols());
    block.labels = block_labels(block);
    const bool cat_cols = block.term.kind == TermKind::categorical;
    for (Eigen::Index j = 0; j < cols.cols(); ++j) side.is_categorical_col.push_back(cat_cols ? 1 : 0);
    side.labels.insert(side.labels.end(), block.labels.begin(), block.labels.end());
    side.blocks.push_back(std::move(block));
    total += cols.cols();
    pieces.push_back(std::move(cols));
  }
  side.cols.resize(n, total);
  Eigen::Index at = 0;
  for (const auto& p : pieces) {
    side.cols.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  return side;
}

}  // namespace

DesignMatrices build_design(const ModelSpec& spec, const DataTable& data) {
  DesignMatrices d;
  d.spec = spec;

  std::vector<std::string> used{spec.response};
  for (const auto* side : {&spec.mean_terms, &spec.var_terms})
    for (const auto& t : *side)
      for (const auto& v : t.vars) used.push_back(v);
  for (const auto& v : used)
    if (!data.has_column(v)) throw std::runtime_error("unknown column: " + v);
  if (!data.column(spec.response).numeric)
    throw std::runtime_error("response " + spec.response + " must be numeric");

  // Listwise deletion over the used columns.
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    bool ok = true;
    for (const auto& v : used)
      if (data.column(v).missing[i]) ok = false;
    if (ok) keep.push_back(static_cast<Eigen::Index>(i));
  }
  d.dropped_rows = static_cast<int>(data.n_rows() - keep.size());
  if (d.dropped_rows > 0)
    d.warnings.push_back("removed " + std::to_string(d.dropped_rows) +
                         " rows with missing values in model variables");
  d.n = static_cast<int>(keep.size());
  if (d.n == 0) throw std::runtime_error("no complete rows remain after removing missing values");

  d.y.resize(d.n);
  const Column& resp = data.column(spec.response);
  for (int i = 0; i < d.n; ++i) d.y(i) = resp.values[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])];

  SideBuild mean_side = build_side(spec.mean_terms, data, keep, &d.warnings);
  SideBuild var_side = build_side(spec.var_terms, data, keep, &d.warnings);
  d.p1 = static_cast<int>(mean_side.cols.cols());
  d.p2 = static_cast<int>(var_side.cols.cols());
  d.mean_blocks = std::move(mean_side.blocks);
  d.var_blocks = std::move(var_side.blocks);

  d.Xstar.resize(d.n, 1 + d.p1);
  d.Xstar.col(0).setOnes();
  d.Xstar.rightCols(d.p1) = mean_side.cols;
  d.Z = std::move(var_side.cols);

  d.x_labels.push_back("(Intercept)");
  d.x_labels.insert(d.x_labels.end(), mean_side.labels.begin(), mean_side.labels.end());
  d.z_labels = std::move(var_side.labels);

  d.x_offsets = Eigen::VectorXd::Zero(1 + d.p1);
  for (int j = 0; j < d.p1; ++j) {
    if (mean_side.is_categorical_col[static_cast<std::size_t>(j)]) continue;
    const double m = d.Xstar.col(1 + j).mean();
    d.Xstar.col(1 + j).array() -= m;
    d.x_offsets(1 + j) = m;
  }
  d.z_offsets = Eigen::VectorXd::Zero(d.p2);
  for (int j = 0; j < d.p2; ++j) {
    if (var_side.is_categorical_col[static_cast<std::size_t>(j)]) continue;
    const double m = d.Z.col(j).mean();
    d.Z.col(j).array() -= m;
    d.z_offsets(j) = m;
  }

  const int largest_basis = std::max(
      [&d] {
        int m = 0;
        for (const auto& b : d.mean_blocks) m = std::max(m, b.size());
        return m;
      }(),
      [&d] {
        int m = 0;
        for (const auto& b : d.var_blocks) m = std::max(m, b.size());
        return m;
      }());
  if (d.n < largest_basis)
    d.warnings.push_back("sample size " + std::to_string(d.n) +
                         " is smaller than the largest basis dimension " +
                         std::to_string(largest_basis));
  return d;
}

namespace {

Eigen::MatrixXd newdata_side(const std::vector<TermBlock>& blocks, const DataTable& newdata,
                             Eigen::Index n, std::vector<std::string>* warnings) {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.size();
  Eigen::MatrixXd out(n, total);
  std::vector<Eigen::Index> keep(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) keep[static_cast<std::size_t>(i)] = i;
  Eigen::Index at = 0;
  for (const auto& block : blocks) {
    std::vector<TermInput> inputs;
    for (std::size_t v = 0; v < block.term.vars.size(); ++v) {
      const auto& name = block.term.vars[v];
      if (!newdata.has_column(name)) throw std::runtime_error("newdata lacks column: " + name);
      const Column& col = newdata.column(name);
      for (std::size_t i = 0; i < col.missing.size(); ++i)
        if (col.missing[i]) throw std::runtime_error("newdata has missing values in " + name);
      const bool cat = (block.term.kind == TermKind::categorical) ||
                       (static_cast<int>(v) == block.cat_var);
      inputs.push_back(make_input(col, keep, cat, block.levels));
      if (!cat && block.term.kind == TermKind::smooth && warnings) {
        const bool first_cont = (block.cat_var == 0 ? v == 1 : v == 0);
        const double lo = first_cont ? block.lo1 : block.lo2;
        const double hi = first_cont ? block.hi1 : block.hi2;
        if (inputs.back().numeric.minCoeff() < lo || inputs.back().numeric.maxCoeff() > hi)
          warnings->push_back("newdata " + name + " lies outside the fitted range; basis extrapolates");
      }
    }
    out.middleCols(at, block.size()) = term_raw_columns(block, inputs);
    at += block.size();
  }
  return out;
}

}  // namespace

void build_newdata(const DesignMatrices& design, const DataTable& newdata,
                   Eigen::MatrixXd* Xstar_new, Eigen::MatrixXd* Z_new,
                   std::vector<std::string>* warnings) {
  const auto n = static_cast<Eigen::Index>(newdata.n_rows());
  if (Xstar_new) {
    Eigen::MatrixXd raw = newdata_side(design.mean_blocks, newdata, n, warnings);
    Xstar_new->resize(n, 1 + design.p1);
    Xstar_new->col(0).setOnes();
    Xstar_new->rightCols(design.p1) = raw;
    for (int j = 0; j < design.p1; ++j) Xstar_new->col(1 + j).array() -= design.x_offsets(1 + j);
  }
  if (Z_new) {
    Eigen::MatrixXd raw = newdata_side(design.var_blocks, newdata, n, warnings);
    *Z_new = std::move(raw);
    for (int j = 0; j < design.p2; ++j) Z_new->col(j).array() -= design.z_offsets(j);
  }
}

}  // namespace locscale
