#include "dl/syntax.hpp"

#include <sstream>

namespace dl {
namespace {

// Term levels: 0 sum, 1 product, 2 unary minus, 3 power, 4 primary.
int term_level(const Term& t) {
  switch (t->kind) {
    case TermKind::Plus: case TermKind::Minus: return 0;
    case TermKind::Times: return 1;
    case TermKind::Neg: return 2;
    case TermKind::Pow: return 3;
    default: return 4;
  }
}

void print_term(std::ostream& os, const Term& t, int need);

void print_term_body(std::ostream& os, const Term& t) {
  switch (t->kind) {
    case TermKind::Var: os << t->var.key(); break;
    case TermKind::Lit:
      if (t->value.get_den() == 1) os << t->value.get_num().get_str();
      else os << '(' << t->value.get_num().get_str() << '/' << t->value.get_den().get_str() << ')';
      break;
    case TermKind::Neg:
      os << '-';
      print_term(os, t->left, 3);
      break;
    case TermKind::Plus:
    case TermKind::Minus:
      print_term(os, t->left, 0);
      os << (t->kind == TermKind::Plus ? '+' : '-');
      print_term(os, t->right, 1);
      break;
    case TermKind::Times:
      print_term(os, t->left, 1);
      os << '*';
      print_term(os, t->right, 2);
      break;
    case TermKind::Pow:
      print_term(os, t->left, 4);
      os << '^' << t->exponent;
      break;
  }
}

void print_term(std::ostream& os, const Term& t, int need) {
  if (term_level(t) < need) {
    os << '(';
    print_term_body(os, t);
    os << ')';
  } else {
    print_term_body(os, t);
  }
}

const char* cmp_symbol(FormulaKind k) {
  switch (k) {
    case FormulaKind::Eq: return "=";
    case FormulaKind::Neq: return "!=";
    case FormulaKind::Geq: return ">=";
    case FormulaKind::Gt: return ">";
    case FormulaKind::Leq: return "<=";
    case FormulaKind::Lt: return "<";
    default: return "?";
  }
}

// Formula levels: 0 <->, 1 ->, 2 |, 3 &, 4 unary, 5 atom.
int formula_level(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::Equiv: return 0;
    case FormulaKind::Imply: return 1;
    case FormulaKind::Or: return 2;
    case FormulaKind::And: return 3;
    case FormulaKind::Not: case FormulaKind::Forall: case FormulaKind::Exists:
    case FormulaKind::Box: case FormulaKind::Diamond:
      return 4;
    default: return 5;
  }
}

void print_formula(std::ostream& os, const Formula& f, int need);
void print_program(std::ostream& os, const Program& p);

void print_formula_body(std::ostream& os, const Formula& f) {
  switch (f->kind) {
    case FormulaKind::True: os << "true"; break;
    case FormulaKind::False: os << "false"; break;
    case FormulaKind::Eq: case FormulaKind::Neq: case FormulaKind::Geq:
    case FormulaKind::Gt: case FormulaKind::Leq: case FormulaKind::Lt:
      print_term(os, f->lhs, 0);
      os << cmp_symbol(f->kind);
      print_term(os, f->rhs, 0);
      break;
    case FormulaKind::Not:
      os << '!';
      print_formula(os, f->left, 4);
      break;
    case FormulaKind::And:
      print_formula(os, f->left, 3);
      os << " & ";
      print_formula(os, f->right, 4);
      break;
    case FormulaKind::Or:
      print_formula(os, f->left, 2);
      os << " | ";
      print_formula(os, f->right, 3);
      break;
    case FormulaKind::Imply:
      print_formula(os, f->left, 2);
      os << " -> ";
      print_formula(os, f->right, 1);
      break;
    case FormulaKind::Equiv:
      print_formula(os, f->left, 1);
      os << " <-> ";
      print_formula(os, f->right, 0);
      break;
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      os << (f->kind == FormulaKind::Forall ? "\\forall " : "\\exists ") << f->var.key() << ' ';
      print_formula(os, f->left, 4);
      break;
    case FormulaKind::Box:
      os << '[';
      print_program(os, f->program);
      os << ']';
      print_formula(os, f->left, 4);
      break;
    case FormulaKind::Diamond:
      os << '<';
      print_program(os, f->program);
      os << '>';
      print_formula(os, f->left, 4);
      break;
  }
}

void print_formula(std::ostream& os, const Formula& f, int need) {
  if (formula_level(f) < need) {
    os << '(';
    print_formula_body(os, f);
    os << ')';
  } else {
    print_formula_body(os, f);
  }
}

void print_solution(std::ostream& os, const SolutionAnnotation& s) {
  os << "@solution(" << s.time.key() << ';';
  for (size_t i = 0; i < s.solutions.size(); ++i) {
    os << (i ? ", " : " ") << s.solutions[i].first.key() << '=';
    print_term(os, s.solutions[i].second, 0);
  }
  os << ')';
}

// Children of ++ and ; are braced unless they are atomic or continue a
// right-nested chain of the same operator.
void print_child(std::ostream& os, const Program& child, ProgramKind parent, bool right) {
  bool composite = child->kind == ProgramKind::Choice || child->kind == ProgramKind::Seq;
  if (composite && !(right && child->kind == parent)) {
    os << '{';
    print_program(os, child);
    os << '}';
  } else {
    print_program(os, child);
  }
}

void print_program(std::ostream& os, const Program& p) {
  switch (p->kind) {
    case ProgramKind::Assign:
      os << p->var.key() << ":=";
      print_term(os, p->term, 0);
      break;
    case ProgramKind::Test:
      os << '?';
      print_formula(os, p->formula, 5);
      break;
    case ProgramKind::Ode:
      os << '{';
      for (size_t i = 0; i < p->equations.size(); ++i) {
        if (i) os << ", ";
        os << p->equations[i].var.key() << "'=";
        print_term(os, p->equations[i].rhs, 0);
      }
      if (p->formula->kind != FormulaKind::True) {
        os << " & ";
        print_formula(os, p->formula, 0);
      }
      os << '}';
      if (p->solution) print_solution(os, *p->solution);
      break;
    case ProgramKind::Choice:
      print_child(os, p->left, ProgramKind::Choice, false);
      os << " ++ ";
      print_child(os, p->right, ProgramKind::Choice, true);
      break;
    case ProgramKind::Seq:
      print_child(os, p->left, ProgramKind::Seq, false);
      os << "; ";
      print_child(os, p->right, ProgramKind::Seq, true);
      break;
    case ProgramKind::Loop:
      os << '{';
      print_program(os, p->left);
      os << "}*";
      if (p->invariant) {
        os << "@invariant(";
        print_formula(os, p->invariant, 0);
        os << ')';
      }
      break;
  }
}

}  // namespace

std::string to_string(const Term& t) {
  std::ostringstream os;
  print_term(os, t, 0);
  return os.str();
}

std::string to_string(const Formula& f) {
  std::ostringstream os;
  print_formula(os, f, 0);
  return os.str();
}

std::string to_string(const Program& p) {
  std::ostringstream os;
  print_program(os, p);
  return os.str();
}

std::string to_string(const SolutionAnnotation& s) {
  std::ostringstream os;
  print_solution(os, s);
  return os.str();
}

}  // namespace dl
