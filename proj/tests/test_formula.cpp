#include <doctest.h>

#include "locscale/formula.hpp"
#include "locscale/rng.hpp"

using namespace locscale;

TEST_CASE("paper formula with smooths on both sides") {
  const auto spec =
      parse_model_formula("y ~ sm(u, k = 20, bs = \"rd\") | sm(u, k = 20, bs = \"rd\")");
  CHECK(spec.response == "y");
  REQUIRE(spec.mean_terms.size() == 1);
  REQUIRE(spec.var_terms.size() == 1);
  const Term& m = spec.mean_terms[0];
  CHECK(m.kind == TermKind::smooth);
  CHECK(m.vars == std::vector<std::string>{"u"});
  CHECK(m.k == 20);
  CHECK(m.basis == BasisCode::rd);
  CHECK(spec.var_terms[0] == m);
}

TEST_CASE("intercept-only model expands both sides") {
  const auto spec = parse_model_formula("y ~ 1");
  REQUIRE(spec.mean_terms.size() == 1);
  CHECK(spec.mean_terms[0].kind == TermKind::intercept);
  REQUIRE(spec.var_terms.size() == 1);
  CHECK(spec.var_terms[0].kind == TermKind::intercept);
}

TEST_CASE("cars subset-selection formula") {
  const auto spec = parse_model_formula("mpg ~ disp + hp + wt + qsec | 1");
  CHECK(spec.response == "mpg");
  REQUIRE(spec.mean_terms.size() == 4);
  for (const auto& t : spec.mean_terms) CHECK(t.kind == TermKind::linear);
  CHECK(spec.mean_terms[1].vars[0] == "hp");
  REQUIRE(spec.var_terms.size() == 1);
  CHECK(spec.var_terms[0].kind == TermKind::intercept);
}

TEST_CASE("defaults: k = 10, rd basis, intercept-only variance side") {
  const auto spec = parse_model_formula("y ~ sm(x)");
  CHECK(spec.mean_terms[0].k == 10);
  CHECK(spec.mean_terms[0].basis == BasisCode::rd);
  CHECK(spec.var_terms[0].kind == TermKind::intercept);
}

TEST_CASE("bivariate smooth and knots path") {
  const auto spec = parse_model_formula(
      "lwage ~ fmarried + sm(ntenure) + sm(nexper, ffemale, knots = \"knotsD.csv\") | sm(nexper)");
  REQUIRE(spec.mean_terms.size() == 3);
  const Term& inter = spec.mean_terms[2];
  CHECK(inter.vars == std::vector<std::string>{"nexper", "ffemale"});
  CHECK(inter.knots_path == "knotsD.csv");
  CHECK(inter.label() == "sm(nexper,ffemale)");
}

TEST_CASE("round-trip through canonical rendering") {
  const char* cases[] = {
      "y ~ sm(u, k = 20, bs = \"rd\") | sm(u, k = 20, bs = \"rd\")",
      "mpg ~ disp + hp + wt + qsec | 1",
      "y ~ 1",
      "y ~ sm(w1, w2, k = 10, bs = \"rd\") | sm(w1, w2, k = 10, bs = \"rd\")",
      "y ~ x + sm(u, k = 5, bs = \"tl\")",
  };
  for (const auto* text : cases) {
    const auto spec = parse_model_formula(text);
    const auto again = parse_model_formula(spec.render());
    CHECK(spec == again);
  }
}

TEST_CASE("whitespace-insensitive outside identifiers") {
  const auto a = parse_model_formula("y~sm(u,k=20,bs=\"rd\")|sm(u,k=20,bs=\"rd\")");
  const auto b =
      parse_model_formula("  y  ~  sm( u , k = 20 , bs = \"rd\" )  |  sm(u, k = 20, bs = \"rd\")");
  CHECK(a == b);
}

TEST_CASE("formula errors carry positions") {
  CHECK_THROWS_AS(parse_model_formula("y ~ sm(u, bs = \"ps\")"), ParseError);
  CHECK_THROWS_AS(parse_model_formula("y ~ sm(u, k = 1)"), ParseError);
  CHECK_THROWS_AS(parse_model_formula("y ~ sm(a, b, c)"), ParseError);
  CHECK_THROWS_AS(parse_model_formula("y ~ "), ParseError);
  CHECK_THROWS_AS(parse_model_formula("y ~ u + u"), ParseError);
  CHECK_THROWS_AS(parse_model_formula("~ u"), ParseError);
  try {
    parse_model_formula("y ~ sm(u, bs = \"ps\")");
  } catch (const ParseError& e) {
    CHECK(e.offset() > 1);
  }
}

TEST_CASE("prior strings evaluate n") {
  const auto ig = parse_prior_string("IG(0.5,0.5*n)", 500);
  CHECK(ig.family == PriorSpec::Family::ig);
  CHECK(ig.param1 == doctest::Approx(0.5));
  CHECK(ig.param2 == doctest::Approx(250.0));

  const auto beta = parse_prior_string("Beta(1,1)", 17);
  CHECK(beta.family == PriorSpec::Family::beta);
  CHECK(beta.param1 == 1.0);
  CHECK(beta.param2 == 1.0);

  const auto hn = parse_prior_string("HN(2)", 99);
  CHECK(hn.family == PriorSpec::Family::hn);
  CHECK(hn.param1 == 2.0);
}

TEST_CASE("prior expression is exactly 0.4 * n over a sweep of sizes") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const long n = 1 + static_cast<long>(rng.uniform_index(1000000));
    const auto p = parse_prior_string("IG(1,0.4*n)", n);
    CHECK(p.param2 == 0.4 * static_cast<double>(n));
  }
}

TEST_CASE("prior string errors") {
  CHECK_THROWS_AS(parse_prior_string("Gamma(1,1)", 10), ParseError);
  CHECK_THROWS_AS(parse_prior_string("IG(0,1)", 10), ParseError);
  CHECK_THROWS_AS(parse_prior_string("IG(1,0.4*m)", 10), ParseError);
  CHECK_THROWS_AS(parse_prior_string("IG(1)", 10), ParseError);
  CHECK_THROWS_AS(parse_prior_string("HN(2,3)", 10), ParseError);
  CHECK_THROWS_AS(parse_prior_string("IG(-1,1)", 10), ParseError);
}
