#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "locscale/basis.hpp"
#include "locscale/formula.hpp"
#include "locscale/rng.hpp"

using namespace locscale;

namespace {

DataTable table_1col(const std::string& name, const std::vector<double>& v) {
  std::vector<std::vector<std::string>> rows;
  for (double x : v) rows.push_back({std::to_string(x)});
  return DataTable::from_cells({name}, rows);
}

}  // namespace

TEST_CASE("place_knots: min / median / max") {
  const KnotSet k = place_knots({0.0, 0.25, 0.5, 0.75, 1.0}, 3, "u");
  REQUIRE(k.pts.rows() == 3);
  CHECK(k.pts(0, 0) == 0.0);
  CHECK(k.pts(1, 0) == 0.5);
  CHECK(k.pts(2, 0) == 1.0);
}

TEST_CASE("place_knots matches a quantile oracle on a uniform grid") {
  std::vector<double> grid(101);
  for (int i = 0; i <= 100; ++i) grid[static_cast<std::size_t>(i)] = i / 100.0;
  const KnotSet k = place_knots(grid, 5, "u");
  // Independent oracle: order statistics interpolated at h = p (m - 1).
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  REQUIRE(k.pts.rows() == 5);
  for (int j = 0; j < 5; ++j) {
    const double p = j / 4.0;
    const double h = p * 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double expect =
        lo + 1 < sorted.size() ? sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo]) : sorted[lo];
    CHECK(k.pts(j, 0) == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(k.pts(1, 0) == doctest::Approx(0.25));
  CHECK(k.pts(3, 0) == doctest::Approx(0.75));
}

TEST_CASE("place_knots rejects degenerate variables") {
  CHECK_THROWS_WITH_AS(place_knots({1.0, 1.0, 1.0}, 2, "w"),
                       doctest::Contains("w"), std::runtime_error);
}

TEST_CASE("place_knots collapses coincident quantiles with a warning") {
  std::vector<double> values(96, 0.0);
  values.push_back(1.0);
  values.push_back(2.0);
  values.push_back(3.0);
  values.push_back(4.0);
  values.push_back(5.0);
  std::vector<std::string> warnings;
  const KnotSet k = place_knots(values, 5, "v", &warnings);
  CHECK(k.pts.rows() < 5);
  CHECK(k.pts(0, 0) == 0.0);
  CHECK(!warnings.empty());
}

TEST_CASE("place_knots is invariant to permutation of inputs") {
  std::vector<double> v(137);
  std::mt19937 gen(42);
  std::uniform_real_distribution<double> unif(0, 1);
  for (auto& x : v) x = unif(gen);
  const KnotSet a = place_knots(v, 7, "u");
  std::shuffle(v.begin(), v.end(), gen);
  const KnotSet b = place_knots(v, 7, "u");
  CHECK(a.pts == b.pts);
}

TEST_CASE("radial basis values") {
  KnotSet k;
  k.pts.resize(1, 1);
  k.pts(0, 0) = 0.25;
  Eigen::VectorXd x(1);

  x(0) = 0.25;  // at the knot: 0 log 0 -> 0
  CHECK(eval_basis(BasisKind::rd1, x, k)(1) == 0.0);

  x(0) = 0.5;  // 0.0625 ln 0.0625
  const Eigen::VectorXd v = eval_basis(BasisKind::rd1, x, k);
  CHECK(v(0) == 0.5);
  CHECK(v(1) == doctest::Approx(0.0625 * std::log(0.0625)).epsilon(1e-12));
  CHECK(v(1) == doctest::Approx(-0.173287).epsilon(1e-5));
}

TEST_CASE("truncated-linear basis clamps below the knot") {
  KnotSet k;
  k.pts.resize(1, 1);
  k.pts(0, 0) = 0.5;
  Eigen::VectorXd x(1);
  x(0) = 0.3;
  const Eigen::VectorXd v = eval_basis(BasisKind::tl, x, k);
  CHECK(v(0) == 0.3);
  CHECK(v(1) == 0.0);
  x(0) = 0.7;
  CHECK(eval_basis(BasisKind::tl, x, k)(1) == doctest::Approx(0.2));
}

TEST_CASE("rd1 is continuous across its knots") {
  KnotSet k;
  k.pts.resize(3, 1);
  k.pts << 0.2, 0.5, 0.8;
  const double eps = 1e-9;
  for (int j = 0; j < 3; ++j) {
    Eigen::VectorXd lo(1), hi(1);
    lo(0) = k.pts(j, 0) - eps;
    hi(0) = k.pts(j, 0) + eps;
    const Eigen::VectorXd a = eval_basis(BasisKind::rd1, lo, k);
    const Eigen::VectorXd b = eval_basis(BasisKind::rd1, hi, k);
    for (Eigen::Index c = 0; c < a.size(); ++c) CHECK(a(c) == doctest::Approx(b(c)).epsilon(1e-8));
  }
}

TEST_CASE("rd2 basis length and linear leading columns") {
  KnotSet k;
  k.pts.resize(4, 2);
  k.pts << 0, 0, 0, 1, 1, 0, 1, 1;
  Eigen::VectorXd x(2);
  x << 0.3, 0.6;
  const Eigen::VectorXd v = eval_basis(BasisKind::rd2, x, k);
  REQUIRE(v.size() == 6);
  CHECK(v(0) == 0.3);
  CHECK(v(1) == 0.6);
  const double r2 = 0.3 * 0.3 + 0.6 * 0.6;
  CHECK(v(2) == doctest::Approx(r2 * std::log(r2)));
}

TEST_CASE("build_design centers a linear column") {
  DataTable data = DataTable::from_cells(
      {"y", "u"}, {{"1", "1"}, {"2", "2"}, {"3", "3"}, {"4", "4"}});
  const auto spec = parse_model_formula("y ~ u | 1");
  const DesignMatrices d = build_design(spec, data);
  CHECK(d.n == 4);
  CHECK(d.p1 == 1);
  CHECK(d.p2 == 0);
  CHECK(d.Xstar.col(0).isOnes());
  CHECK(d.Xstar(0, 1) == doctest::Approx(-1.5));
  CHECK(d.Xstar(3, 1) == doctest::Approx(1.5));
  CHECK(d.x_offsets(1) == doctest::Approx(2.5));
  CHECK(d.Z.cols() == 0);
}

TEST_CASE("smooth design dimensions match the paper's q1 = q2 = 21") {
  std::vector<std::vector<std::string>> rows;
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int i = 0; i < 200; ++i) {
    const double u = unif(gen);
    rows.push_back({std::to_string(2 * u), std::to_string(u)});
  }
  DataTable data = DataTable::from_cells({"y", "u"}, rows);
  const auto spec =
      parse_model_formula("y ~ sm(u, k = 20, bs = \"rd\") | sm(u, k = 20, bs = \"rd\")");
  const DesignMatrices d = build_design(spec, data);
  CHECK(d.Xstar.cols() == 22);  // intercept + 21 basis columns
  CHECK(d.Z.cols() == 21);
  CHECK(d.x_labels[1] == "u");
  CHECK(d.x_labels[2] == "sm(u).1");
  CHECK(d.z_labels[20] == "sm(u).20");
  // centering invariant
  for (int j = 0; j < d.p1; ++j) CHECK(std::abs(d.Xstar.col(1 + j).mean()) < 1e-10);
  for (int j = 0; j < d.p2; ++j) CHECK(std::abs(d.Z.col(j).mean()) < 1e-10);
  REQUIRE(d.mean_blocks.size() == 1);
  CHECK(d.mean_blocks[0].begin == 0);
  CHECK(d.mean_blocks[0].end == 21);
}

TEST_CASE("build_design is deterministic") {
  std::vector<std::vector<std::string>> rows;
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int i = 0; i < 60; ++i) {
    const double u = unif(gen);
    rows.push_back({std::to_string(u + 1), std::to_string(u)});
  }
  DataTable data = DataTable::from_cells({"y", "u"}, rows);
  const auto spec = parse_model_formula("y ~ sm(u, k = 7)");
  const DesignMatrices a = build_design(spec, data);
  const DesignMatrices b = build_design(spec, data);
  CHECK(a.Xstar == b.Xstar);
  CHECK(a.Z == b.Z);
  CHECK(a.x_offsets == b.x_offsets);
}

TEST_CASE("categorical terms use reference dummies and stay uncentered") {
  DataTable data = DataTable::from_cells(
      {"y", "f"}, {{"1", "b"}, {"2", "a"}, {"3", "c"}, {"4", "a"}, {"5", "b"}});
  const auto spec = parse_model_formula("y ~ f | 1");
  const DesignMatrices d = build_design(spec, data);
  CHECK(d.p1 == 2);  // levels a,b,c -> dummies for b and c
  CHECK(d.x_labels[1] == "fb");
  CHECK(d.x_labels[2] == "fc");
  CHECK(d.Xstar(0, 1) == 1.0);
  CHECK(d.Xstar(1, 1) == 0.0);
  CHECK(d.Xstar(2, 2) == 1.0);
  CHECK(d.x_offsets(1) == 0.0);
  CHECK(d.mean_blocks[0].term.kind == TermKind::categorical);
}

TEST_CASE("single-level categorical is an error") {
  DataTable data = DataTable::from_cells({"y", "f"}, {{"1", "a"}, {"2", "a"}});
  CHECK_THROWS_AS(build_design(parse_model_formula("y ~ f"), data), std::runtime_error);
}

TEST_CASE("smooth-by-categorical interaction builds level-wise copies") {
  std::vector<std::vector<std::string>> rows;
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int i = 0; i < 80; ++i) {
    const double u = unif(gen);
    rows.push_back({std::to_string(u), std::to_string(u), i % 2 ? "M" : "F"});
  }
  DataTable data = DataTable::from_cells({"y", "u", "f"}, rows);
  const auto spec = parse_model_formula("y ~ sm(u, f, k = 4) | 1");
  const DesignMatrices d = build_design(spec, data);
  REQUIRE(d.mean_blocks.size() == 1);
  const TermBlock& blk = d.mean_blocks[0];
  CHECK(blk.levels == std::vector<std::string>{"F", "M"});
  CHECK(blk.size() == 2 * 5);  // 2 levels x (4 knots + linear column)
  // Before centering each row has one active level slice; after centering the
  // sum of the two level slices of the linear column reproduces centered u.
  const int q = 5;
  Eigen::VectorXd recon = d.Xstar.col(1) + d.Xstar.col(1 + q);
  Eigen::VectorXd u(d.n);
  for (int i = 0; i < d.n; ++i) u(i) = data.column("u").values[static_cast<std::size_t>(i)];
  u.array() -= u.mean();
  CHECK((recon - u).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("missing rows are dropped and counted") {
  DataTable data = DataTable::from_cells(
      {"y", "u"}, {{"1", "0.1"}, {"NA", "0.2"}, {"3", ""}, {"4", "0.4"}});
  const DesignMatrices d = build_design(parse_model_formula("y ~ u"), data);
  CHECK(d.n == 2);
  CHECK(d.dropped_rows == 2);
}

TEST_CASE("unknown column error") {
  DataTable data = table_1col("y", {1, 2, 3});
  CHECK_THROWS_WITH_AS(build_design(parse_model_formula("y ~ nope"), data),
                       doctest::Contains("nope"), std::runtime_error);
}

TEST_CASE("newdata evaluation uses stored knots and offsets") {
  std::vector<std::vector<std::string>> rows;
  std::mt19937 gen(9);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int i = 0; i < 50; ++i) {
    const double u = unif(gen);
    rows.push_back({std::to_string(u * 2), std::to_string(u)});
  }
  DataTable data = DataTable::from_cells({"y", "u"}, rows);
  const DesignMatrices d = build_design(parse_model_formula("y ~ sm(u, k = 5) | sm(u, k = 5)"), data);
  // Reusing the training rows must reproduce the training design exactly.
  Eigen::MatrixXd xnew, znew;
  build_newdata(d, data, &xnew, &znew);
  CHECK((xnew - d.Xstar).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((znew - d.Z).lpNorm<Eigen::Infinity>() == 0.0);
  // Out-of-range values extrapolate with a warning rather than an error.
  DataTable wide = DataTable::from_cells({"u"}, {{"1.5"}, {"-0.5"}});
  std::vector<std::string> warnings;
  Eigen::MatrixXd xw;
  build_newdata(d, wide, &xw, nullptr, &warnings);
  CHECK(!warnings.empty());
}
