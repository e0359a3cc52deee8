#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace locscale {

// Parse failure with a 1-based character offset into the source text.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " (at position " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

enum class BasisCode { rd, tl };

enum class TermKind { intercept, linear, categorical, smooth };

struct Term {
  TermKind kind = TermKind::intercept;
  std::vector<std::string> vars;  // empty, one, or two variable names
  int k = 10;                     // smooth: number of knots
  BasisCode basis = BasisCode::rd;
  std::string knots_path;         // optional CSV of explicit knot locations

  // Display label: variable name for linear terms, "sm(u)"/"sm(u,v)" for smooths.
  std::string label() const;
  std::string render() const;
  bool operator==(const Term&) const = default;
};

struct ModelSpec {
  std::string response;
  std::vector<Term> mean_terms;
  std::vector<Term> var_terms;  // [intercept] when the formula omits "| rhs"

  std::string render() const;
  bool operator==(const ModelSpec&) const = default;
};

struct PriorSpec {
  enum class Family { ig, beta, hn };
  Family family = Family::ig;
  double param1 = 0.0;
  double param2 = 0.0;  // unused for hn
  std::string raw;

  bool operator==(const PriorSpec&) const = default;
};

// Grammar: resp '~' rhs ('|' rhs)?; rhs = term ('+' term)*;
// term = '1' | ident | sm-call. Whitespace-insensitive outside identifiers
// and string literals. Missing "| rhs" yields an intercept-only variance model.
ModelSpec parse_model_formula(const std::string& text);

// Prior mini-language, e.g. "IG(0.5,0.5*n)", "Beta(1,1)", "HN(2)". Parameter
// expressions are positive literals optionally scaled by the sample size n.
PriorSpec parse_prior_string(const std::string& text, long n);

}  // namespace locscale
