#pragma once

// Concrete syntax. The printer in syntax.hpp emits exactly what these
// functions accept.

#include <string>
#include <string_view>
#include <vector>

#include "dl/syntax.hpp"

namespace dl {

enum class Tok {
  Ident, Number,
  Assign,     // :=
  Question, Prime, ChoiceOp, Semi, Star, Amp, Bar, Bang, Arrow, DArrow,
  Eq, Neq, Geq, Leq, Gt, Lt,
  Plus, Minus, Slash, Caret,
  LParen, RParen, LBrace, RBrace, Comma, LBracket, RBracket, Dot,
  Forall, Exists, AtInvariant, AtSolution, True, False,
  End
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

// Tokenizes `src`, dropping whitespace and /* ... */ comments. The final
// token has kind Tok::End.
std::vector<Token> tokenize(std::string_view src);

std::string describe(Tok kind);

// Recursive-descent parser over a token vector. Exposed so the model file
// reader can drive it section by section.
class Parser {
 public:
  explicit Parser(std::vector<Token> tokens);

  Term term();
  Formula formula();
  Program program();
  // "@solution(t; x=..., v=...)"
  SolutionAnnotation solution();

  const Token& peek(size_t ahead = 0) const;
  bool at(Tok kind, size_t ahead = 0) const { return peek(ahead).kind == kind; }
  const Token& advance();
  const Token& expect(Tok kind);
  bool accept(Tok kind);
  void expect_end();

  [[noreturn]] void fail(const std::string& message, std::vector<std::string> expected = {}) const;

 private:
  Formula equiv();
  Formula imply();
  Formula disj();
  Formula conj();
  Formula unary();
  Formula atom();
  Formula comparison();

  Term sum();
  Term product();
  Term neg();
  Term power();
  Term primary();

  Program choice();
  Program seq();
  Program atomic();
  Program ode_body();

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

Term parse_term(std::string_view src);
Formula parse_formula(std::string_view src);
Program parse_program(std::string_view src);

}  // namespace dl
