#include "dl/parser.hpp"

#include <cctype>
#include <sstream>

namespace dl {

SyntaxError::SyntaxError(std::string message, int line, int column, std::vector<std::string> expected)
    : Error([&] {
        std::ostringstream os;
        os << line << ':' << column << ": " << message;
        if (!expected.empty()) {
          os << " (expected: ";
          for (size_t i = 0; i < expected.size(); ++i) os << (i ? ", " : "") << expected[i];
          os << ')';
        }
        return os.str();
      }()),
      detail_(std::move(message)),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

std::string describe(Tok kind) {
  switch (kind) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::Assign: return "':='";
    case Tok::Question: return "'?'";
    case Tok::Prime: return "'''";
    case Tok::ChoiceOp: return "'++'";
    case Tok::Semi: return "';'";
    case Tok::Star: return "'*'";
    case Tok::Amp: return "'&'";
    case Tok::Bar: return "'|'";
    case Tok::Bang: return "'!'";
    case Tok::Arrow: return "'->'";
    case Tok::DArrow: return "'<->'";
    case Tok::Eq: return "'='";
    case Tok::Neq: return "'!='";
    case Tok::Geq: return "'>='";
    case Tok::Leq: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Lt: return "'<'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Slash: return "'/'";
    case Tok::Caret: return "'^'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Dot: return "'.'";
    case Tok::Forall: return "'\\forall'";
    case Tok::Exists: return "'\\exists'";
    case Tok::AtInvariant: return "'@invariant'";
    case Tok::AtSolution: return "'@solution'";
    case Tok::True: return "'true'";
    case Tok::False: return "'false'";
    case Tok::End: return "end of input";
  }
  return "?";
}

// ------------------------------------------------------------------ lexer

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto bump = [&](size_t n) {
    for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto starts = [&](std::string_view s) { return src.substr(i, s.size()) == s; };

  static const std::pair<std::string_view, Tok> symbols[] = {
      {"<->", Tok::DArrow}, {":=", Tok::Assign}, {"++", Tok::ChoiceOp}, {"->", Tok::Arrow},
      {"!=", Tok::Neq},     {">=", Tok::Geq},    {"<=", Tok::Leq},      {"?", Tok::Question},
      {"'", Tok::Prime},    {";", Tok::Semi},    {"*", Tok::Star},      {"&", Tok::Amp},
      {"|", Tok::Bar},      {"!", Tok::Bang},    {"=", Tok::Eq},        {">", Tok::Gt},
      {"<", Tok::Lt},       {"+", Tok::Plus},    {"-", Tok::Minus},     {"/", Tok::Slash},
      {"^", Tok::Caret},    {"(", Tok::LParen},  {")", Tok::RParen},    {"{", Tok::LBrace},
      {"}", Tok::RBrace},   {",", Tok::Comma},   {"[", Tok::LBracket},  {"]", Tok::RBracket},
      {".", Tok::Dot},
  };

  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      bump(1);
      continue;
    }
    if (starts("/*")) {
      int l0 = line, c0 = col;
      size_t close = src.find("*/", i + 2);
      if (close == std::string_view::npos) throw SyntaxError("unterminated comment", l0, c0);
      bump(close + 2 - i);
      continue;
    }
    int l0 = line, c0 = col;
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      std::string word(src.substr(i, j - i));
      Tok kind = word == "true" ? Tok::True : word == "false" ? Tok::False : Tok::Ident;
      out.push_back({kind, word, l0, c0});
      bump(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), l0, c0});
      bump(j - i);
      continue;
    }
    if (c == '\\' || c == '@') {
      size_t j = i + 1;
      while (j < src.size() && std::isalpha(static_cast<unsigned char>(src[j]))) ++j;
      std::string word(src.substr(i, j - i));
      Tok kind;
      if (word == "\\forall") kind = Tok::Forall;
      else if (word == "\\exists") kind = Tok::Exists;
      else if (word == "@invariant") kind = Tok::AtInvariant;
      else if (word == "@solution") kind = Tok::AtSolution;
      else throw SyntaxError("unknown keyword '" + word + "'", l0, c0);
      out.push_back({kind, word, l0, c0});
      bump(j - i);
      continue;
    }
    bool matched = false;
    for (const auto& [text, kind] : symbols) {
      if (starts(text)) {
        out.push_back({kind, std::string(text), l0, c0});
        bump(text.size());
        matched = true;
        break;
      }
    }
    if (!matched) throw SyntaxError(std::string("unexpected character '") + c + "'", l0, c0);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

// ----------------------------------------------------------------- parser

Parser::Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {
  if (toks_.empty() || toks_.back().kind != Tok::End) toks_.push_back({Tok::End, "", 1, 1});
}

const Token& Parser::peek(size_t ahead) const {
  return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
}

const Token& Parser::advance() {
  const Token& t = toks_[pos_];
  if (pos_ + 1 < toks_.size()) ++pos_;
  return t;
}

bool Parser::accept(Tok kind) {
  if (!at(kind)) return false;
  advance();
  return true;
}

const Token& Parser::expect(Tok kind) {
  if (!at(kind)) fail("unexpected " + describe(peek().kind), {describe(kind)});
  return advance();
}

void Parser::expect_end() {
  if (!at(Tok::End)) fail("unexpected " + describe(peek().kind) + " after complete input", {"end of input"});
}

void Parser::fail(const std::string& message, std::vector<std::string> expected) const {
  const Token& t = peek();
  throw SyntaxError(message, t.line, t.column, std::move(expected));
}

// terms

Term Parser::term() { return sum(); }

Term Parser::sum() {
  Term t = product();
  while (at(Tok::Plus) || at(Tok::Minus)) {
    bool plus = advance().kind == Tok::Plus;
    Term r = product();
    t = plus ? make_plus(t, r) : make_minus(t, r);
  }
  return t;
}

Term Parser::product() {
  Term t = neg();
  while (at(Tok::Star) || at(Tok::Slash)) {
    if (advance().kind == Tok::Star) {
      t = make_times(t, neg());
      continue;
    }
    if (!at(Tok::Number)) fail("division is only allowed by a numeric literal", {"number"});
    Rational d = *parse_rational(advance().text);
    if (sgn(d) == 0) fail("division by zero");
    if (t->kind == TermKind::Lit) t = make_lit(Rational(t->value / d));
    else t = make_times(t, make_lit(Rational(1 / d)));
  }
  return t;
}

Term Parser::neg() {
  if (accept(Tok::Minus)) return make_neg(neg());
  return power();
}

Term Parser::power() {
  Term base = primary();
  if (accept(Tok::Caret)) {
    if (!at(Tok::Number) || peek().text.find('.') != std::string::npos)
      fail("exponent must be a nonnegative integer literal", {"integer"});
    const std::string& digits = advance().text;
    if (digits.size() > 6) fail("exponent too large");
    base = make_pow(base, static_cast<unsigned>(std::stoul(digits)));
  }
  return base;
}

Term Parser::primary() {
  if (at(Tok::Number)) return make_lit(*parse_rational(advance().text));
  if (at(Tok::Ident)) {
    std::string name = advance().text;
    bool primed = accept(Tok::Prime);
    if (primed && at(Tok::Prime)) fail("at most one prime is allowed");
    return make_var(VarName{name, primed});
  }
  if (accept(Tok::LParen)) {
    Term t = sum();
    expect(Tok::RParen);
    return t;
  }
  fail("expected a term, found " + describe(peek().kind), {"number", "identifier", "'('", "'-'"});
}

// formulas

Formula Parser::formula() { return equiv(); }

Formula Parser::equiv() {
  Formula f = imply();
  if (accept(Tok::DArrow)) return make_equiv(f, equiv());
  return f;
}

Formula Parser::imply() {
  Formula f = disj();
  if (accept(Tok::Arrow)) return make_imply(f, imply());
  return f;
}

Formula Parser::disj() {
  Formula f = conj();
  while (accept(Tok::Bar)) f = make_or(f, conj());
  return f;
}

Formula Parser::conj() {
  Formula f = unary();
  while (accept(Tok::Amp)) f = make_and(f, unary());
  return f;
}

Formula Parser::unary() {
  if (accept(Tok::Bang)) return make_not(unary());
  if (at(Tok::Forall) || at(Tok::Exists)) {
    bool all = advance().kind == Tok::Forall;
    VarName v{expect(Tok::Ident).text};
    if (at(Tok::Prime)) fail("quantified variable must be unprimed");
    Formula body = unary();
    return all ? make_forall(v, body) : make_exists(v, body);
  }
  if (accept(Tok::LBracket)) {
    Program p = program();
    expect(Tok::RBracket);
    return make_box(p, unary());
  }
  if (accept(Tok::Lt)) {
    Program p = program();
    expect(Tok::Gt);
    return make_diamond(p, unary());
  }
  return atom();
}

Formula Parser::atom() {
  if (accept(Tok::True)) return make_true();
  if (accept(Tok::False)) return make_false();
  if (!at(Tok::LParen)) return comparison();

  // '(' opens either a term or a formula; try the comparison reading first.
  size_t start = pos_;
  try {
    return comparison();
  } catch (const SyntaxError& as_term) {
    pos_ = start;
    try {
      expect(Tok::LParen);
      Formula f = formula();
      expect(Tok::RParen);
      return f;
    } catch (const SyntaxError& as_formula) {
      bool term_further = as_term.line() > as_formula.line() ||
                          (as_term.line() == as_formula.line() && as_term.column() > as_formula.column());
      if (term_further) throw as_term;
      throw;
    }
  }
}

Formula Parser::comparison() {
  Term lhs = sum();
  FormulaKind kind;
  switch (peek().kind) {
    case Tok::Eq: kind = FormulaKind::Eq; break;
    case Tok::Neq: kind = FormulaKind::Neq; break;
    case Tok::Geq: kind = FormulaKind::Geq; break;
    case Tok::Gt: kind = FormulaKind::Gt; break;
    case Tok::Leq: kind = FormulaKind::Leq; break;
    case Tok::Lt: kind = FormulaKind::Lt; break;
    default:
      fail("expected a comparison operator, found " + describe(peek().kind),
           {"'='", "'!='", "'>='", "'>'", "'<='", "'<'"});
  }
  advance();
  return make_cmp(kind, lhs, sum());
}

// programs

Program Parser::program() { return choice(); }

Program Parser::choice() {
  Program p = seq();
  if (accept(Tok::ChoiceOp)) return make_choice(p, choice());
  return p;
}

Program Parser::seq() {
  Program p = atomic();
  if (accept(Tok::Semi)) return make_seq(p, seq());
  return p;
}

Program Parser::atomic() {
  if (at(Tok::Ident)) {
    VarName x{advance().text};
    expect(Tok::Assign);
    return make_assign(x, term());
  }
  if (accept(Tok::Question)) return make_test(formula());
  if (at(Tok::LBrace)) {
    if (at(Tok::Ident, 1) && at(Tok::Prime, 2)) return ode_body();
    advance();
    Program body = choice();
    expect(Tok::RBrace);
    if (!accept(Tok::Star)) return body;
    Formula inv;
    while (at(Tok::AtInvariant)) {
      if (inv) throw DuplicateAnnotation("loop at " + std::to_string(peek().line) + ":" +
                                         std::to_string(peek().column) + " has two @invariant annotations");
      advance();
      expect(Tok::LParen);
      inv = formula();
      expect(Tok::RParen);
    }
    return make_loop(body, inv);
  }
  fail("expected a program, found " + describe(peek().kind), {"identifier", "'?'", "'{'"});
}

Program Parser::ode_body() {
  expect(Tok::LBrace);
  std::vector<OdeEquation> eqs;
  VarSet seen;
  do {
    const Token& name = expect(Tok::Ident);
    VarName x{name.text};
    if (!seen.insert(x).second) throw SyntaxError("duplicate ODE variable '" + x.base + "'", name.line, name.column);
    expect(Tok::Prime);
    expect(Tok::Eq);
    eqs.push_back({x, term()});
  } while (accept(Tok::Comma));
  Formula domain = make_true();
  if (accept(Tok::Amp)) domain = formula();
  expect(Tok::RBrace);

  std::optional<SolutionAnnotation> sol;
  while (at(Tok::AtSolution)) {
    if (sol) throw DuplicateAnnotation("ODE at " + std::to_string(peek().line) + ":" +
                                       std::to_string(peek().column) + " has two @solution annotations");
    const Token& start = peek();
    sol = solution();
    for (const auto& [x, y] : sol->solutions)
      if (!seen.count(x)) throw SyntaxError("'" + x.base + "' is not an ODE variable", start.line, start.column);
  }
  return make_ode(std::move(eqs), domain, std::move(sol));
}

SolutionAnnotation Parser::solution() {
  expect(Tok::AtSolution);
  expect(Tok::LParen);
  SolutionAnnotation sol{VarName{expect(Tok::Ident).text}, {}};
  expect(Tok::Semi);
  do {
    const Token& name = expect(Tok::Ident);
    VarName x{name.text};
    if (sol.find(x)) throw SyntaxError("duplicate solution for '" + x.base + "'", name.line, name.column);
    expect(Tok::Eq);
    sol.solutions.emplace_back(x, term());
  } while (accept(Tok::Comma));
  expect(Tok::RParen);
  return sol;
}

Term parse_term(std::string_view src) {
  Parser p(tokenize(src));
  Term t = p.term();
  p.expect_end();
  return t;
}

Formula parse_formula(std::string_view src) {
  Parser p(tokenize(src));
  Formula f = p.formula();
  p.expect_end();
  return f;
}

Program parse_program(std::string_view src) {
  Parser p(tokenize(src));
  Program prog = p.program();
  p.expect_end();
  return prog;
}

}  // namespace dl
