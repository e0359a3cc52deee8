#include "locscale/formula.hpp"

#include <cctype>
#include <cstdlib>
#include <set>
#include <sstream>

namespace locscale {

std::string Term::label() const {
  switch (kind) {
    case TermKind::intercept:
      return "1";
    case TermKind::linear:
    case TermKind::categorical:
      return vars[0];
    case TermKind::smooth: {
      std::string s = "sm(" + vars[0];
      if (vars.size() > 1) s += "," + vars[1];
      return s + ")";
    }
  }
  return "";
}

std::string Term::render() const {
  if (kind != TermKind::smooth) return label();
  std::ostringstream os;
  os << "sm(" << vars[0];
  if (vars.size() > 1) os << ", " << vars[1];
  os << ", k = " << k << ", bs = \"" << (basis == BasisCode::rd ? "rd" : "tl") << "\"";
  if (!knots_path.empty()) os << ", knots = \"" << knots_path << "\"";
  os << ")";
  return os.str();
}

std::string ModelSpec::render() const {
  std::ostringstream os;
  os << response << " ~ ";
  for (std::size_t i = 0; i < mean_terms.size(); ++i) {
    if (i) os << " + ";
    os << mean_terms[i].render();
  }
  os << " | ";
  for (std::size_t i = 0; i < var_terms.size(); ++i) {
    if (i) os << " + ";
    os << var_terms[i].render();
  }
  return os.str();
}

namespace {

class Cursor {
 public:
  explicit Cursor(const std::string& text) : text_(text) {}

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool done() {
    skip_ws();
    return pos_ >= text_.size();
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) fail(std::string("expected '") + c + "' " + what);
  }

  // 1-based offset of the next significant character.
  std::size_t offset() {
    skip_ws();
    return pos_ + 1;
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, offset()); }

  std::string ident() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ < text_.size() &&
        (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
         text_[pos_] == '.')) {
      ++pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
              text_[pos_] == '.')) {
        ++pos_;
      }
    }
    if (pos_ == start) fail("expected identifier");
    return text_.substr(start, pos_ - start);
  }

  std::string quoted_string() {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '"') fail("expected string literal");
    const std::size_t start = ++pos_;
    while (pos_ < text_.size() && text_[pos_] != '"') ++pos_;
    if (pos_ >= text_.size()) fail("unterminated string literal");
    std::string s = text_.substr(start, pos_ - start);
    ++pos_;
    return s;
  }

  long integer() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected integer");
    return std::stol(text_.substr(start, pos_ - start));
  }

  double number() {
    skip_ws();
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
};

Term parse_sm_call(Cursor& c) {
  Term t;
  t.kind = TermKind::smooth;
  c.expect('(', "after sm");
  t.vars.push_back(c.ident());
  // Optional second variable: a ',' followed by an identifier that is not a
  // named argument.
  while (c.peek() == ',') {
    c.accept(',');
    const std::size_t at = c.offset();
    std::string name = c.ident();
    if (c.peek() == '=') {
      c.accept('=');
      if (name == "k") {
        t.k = static_cast<int>(c.integer());
        if (t.k < 2) throw ParseError("sm: k must be at least 2", at);
      } else if (name == "bs") {
        const std::string code = c.quoted_string();
        if (code == "rd") {
          t.basis = BasisCode::rd;
        } else if (code == "tl") {
          t.basis = BasisCode::tl;
        } else {
          throw ParseError("unknown basis code \"" + code + "\" (expected rd or tl)", at);
        }
      } else if (name == "knots") {
        t.knots_path = c.quoted_string();
      } else {
        throw ParseError("unknown sm argument '" + name + "'", at);
      }
    } else {
      if (t.vars.size() >= 2) throw ParseError("sm takes at most two variables", at);
      t.vars.push_back(name);
    }
  }
  c.expect(')', "to close sm(...)");
  return t;
}

std::vector<Term> parse_rhs(Cursor& c) {
  std::vector<Term> terms;
  do {
    if (c.peek() == '1') {
      c.accept('1');
      Term t;
      t.kind = TermKind::intercept;
      terms.push_back(t);
      continue;
    }
    const std::size_t at = c.offset();
    std::string name = c.ident();
    if (name == "sm" && c.peek() == '(') {
      terms.push_back(parse_sm_call(c));
    } else if (name == "sm") {
      throw ParseError("expected '(' after sm", at);
    } else {
      Term t;
      t.kind = TermKind::linear;
      t.vars.push_back(name);
      terms.push_back(t);
    }
  } while (c.accept('+'));
  return terms;
}

void check_side(const std::vector<Term>& terms, const char* side) {
  std::set<std::string> seen;
  for (const auto& t : terms) {
    if (t.kind == TermKind::intercept) continue;
    if (!seen.insert(t.label()).second)
      throw ParseError(std::string("duplicate term '") + t.label() + "' in " + side + " model", 1);
  }
}

}  // namespace

ModelSpec parse_model_formula(const std::string& text) {
  Cursor c(text);
  ModelSpec spec;
  spec.response = c.ident();
  c.expect('~', "after response");
  spec.mean_terms = parse_rhs(c);
  if (c.accept('|')) {
    spec.var_terms = parse_rhs(c);
  } else {
    Term t;
    t.kind = TermKind::intercept;
    spec.var_terms.push_back(t);
  }
  if (!c.done()) c.fail("unexpected trailing input");
  check_side(spec.mean_terms, "mean");
  check_side(spec.var_terms, "variance");
  return spec;
}

namespace {

// expr := number ('*' 'n')? | 'n' ('*' number)?
double parse_prior_expr(Cursor& c, long n) {
  const std::size_t at = c.offset();
  double value;
  const char ch = c.peek();
  if (ch == 'n') {
    c.accept('n');
    value = static_cast<double>(n);
    if (c.accept('*')) value *= c.number();
  } else if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' || ch == '+') {
    value = c.number();
    if (c.accept('*')) {
      const std::size_t sym_at = c.offset();
      const std::string sym = c.ident();
      if (sym != "n") throw ParseError("only symbol n is allowed in prior parameters", sym_at);
      value *= static_cast<double>(n);
    }
  } else {
    throw ParseError("expected prior parameter expression", at);
  }
  if (!(value > 0.0)) throw ParseError("prior parameter must be positive", at);
  return value;
}

}  // namespace

PriorSpec parse_prior_string(const std::string& text, long n) {
  Cursor c(text);
  PriorSpec p;
  p.raw = text;
  const std::size_t at = c.offset();
  const std::string fam = c.ident();
  int arity = 2;
  if (fam == "IG") {
    p.family = PriorSpec::Family::ig;
  } else if (fam == "Beta") {
    p.family = PriorSpec::Family::beta;
  } else if (fam == "HN") {
    p.family = PriorSpec::Family::hn;
    arity = 1;
  } else {
    throw ParseError("unknown prior family '" + fam + "' (expected IG, Beta or HN)", at);
  }
  c.expect('(', "after prior family");
  p.param1 = parse_prior_expr(c, n);
  if (arity == 2) {
    c.expect(',', "between prior parameters");
    p.param2 = parse_prior_expr(c, n);
  }
  c.expect(')', "to close prior");
  if (!c.done()) c.fail("unexpected trailing input");
  return p;
}

}  // namespace locscale
