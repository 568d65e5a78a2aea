#include "dl/model_file.hpp"

#include <fstream>
#include <sstream>

#include "dl/parser.hpp"

namespace dl {

VarSet ModelFile::constant_names() const {
  VarSet out;
  for (const auto& [name, value] : constants) out.insert(VarName{name});
  return out;
}

namespace {

void visit_program(const Program& p, std::vector<Program>& odes, std::vector<Program>& loops);

void visit_formula(const Formula& f, std::vector<Program>& odes, std::vector<Program>& loops) {
  switch (f->kind) {
    case FormulaKind::Not: case FormulaKind::Forall: case FormulaKind::Exists:
      visit_formula(f->left, odes, loops);
      break;
    case FormulaKind::And: case FormulaKind::Or: case FormulaKind::Imply: case FormulaKind::Equiv:
      visit_formula(f->left, odes, loops);
      visit_formula(f->right, odes, loops);
      break;
    case FormulaKind::Box: case FormulaKind::Diamond:
      visit_program(f->program, odes, loops);
      visit_formula(f->left, odes, loops);
      break;
    default: break;
  }
}

void visit_program(const Program& p, std::vector<Program>& odes, std::vector<Program>& loops) {
  switch (p->kind) {
    case ProgramKind::Ode: odes.push_back(p); break;
    case ProgramKind::Test: visit_formula(p->formula, odes, loops); break;
    case ProgramKind::Choice: case ProgramKind::Seq:
      visit_program(p->left, odes, loops);
      visit_program(p->right, odes, loops);
      break;
    case ProgramKind::Loop:
      loops.push_back(p);
      visit_program(p->left, odes, loops);
      break;
    default: break;
  }
}

bool is_keyword(const Parser& p, const char* word) {
  return p.at(Tok::Ident) && p.peek().text == word && p.at(Tok::Dot, 1);
}

}  // namespace

std::vector<Program> ode_occurrences(const Formula& f) {
  std::vector<Program> odes, loops;
  visit_formula(f, odes, loops);
  return odes;
}

std::vector<Program> loop_occurrences(const Formula& f) {
  std::vector<Program> odes, loops;
  visit_formula(f, odes, loops);
  return loops;
}

ModelFile parse_model_text(std::string_view src, std::string name) {
  Parser p(tokenize(src));
  ModelFile m;
  m.name = std::move(name);

  if (is_keyword(p, "Constants")) {
    p.advance();
    p.advance();
    while (!is_keyword(p, "Problem")) {
      if (p.at(Tok::End)) p.fail("missing 'Problem.' section", {"'Problem.'"});
      const Token& id = p.expect(Tok::Ident);
      for (const auto& c : m.constants)
        if (c.first == id.text) throw SyntaxError("constant '" + id.text + "' declared twice", id.line, id.column);
      std::optional<Rational> value;
      if (p.accept(Tok::Eq)) {
        bool negative = p.accept(Tok::Minus);
        Rational r = *parse_rational(p.expect(Tok::Number).text);
        if (p.accept(Tok::Slash)) {
          Rational d = *parse_rational(p.expect(Tok::Number).text);
          if (sgn(d) == 0) p.fail("division by zero");
          r /= d;
        }
        value = negative ? Rational(-r) : r;
      }
      p.expect(Tok::Semi);
      m.constants.emplace_back(id.text, value);
    }
  }
  if (!is_keyword(p, "Problem")) p.fail("missing 'Problem.' section", {"'Constants.'", "'Problem.'"});
  p.advance();
  p.advance();
  m.problem = p.formula();
  if (is_keyword(p, "End")) {
    p.advance();
    p.advance();
  }
  p.expect_end();

  VarSet used = all_vars(m.problem);
  for (const auto& [c, value] : m.constants)
    if (!used.count(VarName{c}))
      throw UnknownConstant("constant '" + c + "' is declared but does not occur in the problem");

  auto odes = ode_occurrences(m.problem);
  for (size_t i = 0; i < odes.size(); ++i)
    if (odes[i]->solution) m.solutions.emplace(i, *odes[i]->solution);
  auto loops = loop_occurrences(m.problem);
  for (size_t i = 0; i < loops.size(); ++i)
    if (loops[i]->invariant) m.invariants.emplace(i, loops[i]->invariant);
  return m;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelFile parse_model_file(const std::filesystem::path& path) {
  return parse_model_text(read_text_file(path), path.stem().string());
}

TermSubst constant_bindings(const ModelFile& m) {
  TermSubst s;
  for (const auto& [c, value] : m.constants)
    if (value) s.emplace(VarName{c}, make_lit(*value));
  return s;
}

Formula specialize(const ModelFile& m) { return simplify(substitute(m.problem, constant_bindings(m))); }

std::string print_model_file(const ModelFile& m) {
  std::ostringstream os;
  if (!m.constants.empty()) {
    os << "Constants.\n";
    for (const auto& [c, value] : m.constants) {
      os << "  " << c;
      if (value) os << " = " << to_string(*value);
      os << ";\n";
    }
  }
  os << "Problem.\n  " << to_string(m.problem) << "\nEnd.\n";
  return os.str();
}

}  // namespace dl
