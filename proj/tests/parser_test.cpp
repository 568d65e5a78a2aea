#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "dl/model_file.hpp"
#include "test_util.hpp"

using namespace dl;
using dltest::F;
using dltest::P;
using dltest::T;

TEST(Parser, BouncingBallProgramShape) {
  Program p = P("{{x'=v, v'=-g & x>=0}; {?x=0; v:=-c*v ++ ?x!=0}}*");
  ASSERT_EQ(p->kind, ProgramKind::Loop);
  const Program& body = p->left;
  ASSERT_EQ(body->kind, ProgramKind::Seq);
  const Program& ode = body->left;
  ASSERT_EQ(ode->kind, ProgramKind::Ode);
  ASSERT_EQ(ode->equations.size(), 2u);
  EXPECT_EQ(ode->equations[0].var, VarName{"x"});
  EXPECT_TRUE(structural_eq(ode->equations[0].rhs, T("v")));
  EXPECT_EQ(ode->equations[1].var, VarName{"v"});
  EXPECT_TRUE(structural_eq(ode->equations[1].rhs, T("-g")));
  EXPECT_TRUE(structural_eq(ode->formula, F("x>=0")));

  const Program& ctrl = body->right;
  ASSERT_EQ(ctrl->kind, ProgramKind::Choice);
  ASSERT_EQ(ctrl->left->kind, ProgramKind::Seq);
  EXPECT_EQ(ctrl->left->left->kind, ProgramKind::Test);
  EXPECT_EQ(ctrl->left->right->kind, ProgramKind::Assign);
  EXPECT_EQ(ctrl->right->kind, ProgramKind::Test);
}

TEST(Parser, SafetyFormulaIsAnImplication) {
  Formula f = F("0<=x & x=H & v=0 & g>0 & 1=c -> [{{x'=v, v'=-g & x>=0}; {?x=0; v:=-c*v ++ ?x!=0}}*](0<=x & x<=H)");
  ASSERT_EQ(f->kind, FormulaKind::Imply);
  EXPECT_EQ(f->left->kind, FormulaKind::And);
  ASSERT_EQ(f->right->kind, FormulaKind::Box);
  EXPECT_EQ(f->right->program->kind, ProgramKind::Loop);
}

TEST(Parser, NegativeExponentIsRejected) {
  EXPECT_THROW(parse_term("x^-1"), SyntaxError);
  EXPECT_THROW(parse_term("x^(1/2)"), SyntaxError);
}

TEST(Parser, Precedence) {
  EXPECT_TRUE(structural_eq(F("a=1 -> b=1 -> c=1"), make_imply(F("a=1"), make_imply(F("b=1"), F("c=1")))));
  EXPECT_TRUE(structural_eq(F("a=1 | b=1 & c=1"), make_or(F("a=1"), make_and(F("b=1"), F("c=1")))));
  EXPECT_TRUE(structural_eq(F("!a=1 & b=1"), make_and(make_not(F("a=1")), F("b=1"))));
  EXPECT_TRUE(structural_eq(F("a=1 <-> b=1 -> c=1"), make_equiv(F("a=1"), make_imply(F("b=1"), F("c=1")))));
  EXPECT_TRUE(structural_eq(P("a:=1 ++ b:=1; c:=1"),
                            make_choice(P("a:=1"), make_seq(P("b:=1"), P("c:=1")))));
  EXPECT_TRUE(structural_eq(T("-x^2"), make_neg(make_pow(T("x"), 2))));
  EXPECT_TRUE(structural_eq(T("a-b-c"), make_minus(make_minus(T("a"), T("b")), T("c"))));
  EXPECT_TRUE(structural_eq(T("1/2*x"), make_times(make_lit(Rational(1, 2)), T("x"))));
}

TEST(Parser, OdeDomainDefaultsToTrue) {
  Program p = P("{x'=1}");
  EXPECT_EQ(p->formula->kind, FormulaKind::True);
}

TEST(Parser, SyntaxErrorCarriesPositionAndExpectations) {
  try {
    parse_formula("x >= 0 &\n  (y = ");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_FALSE(e.expected().empty());
  }
}

TEST(Parser, RepeatedOdeVariableIsRejected) { EXPECT_THROW(parse_program("{x'=1, x'=2}"), SyntaxError); }

TEST(Parser, StarNeedsBraces) { EXPECT_THROW(parse_program("x:=1*"), SyntaxError); }

TEST(ModelFile, InvariantAnnotation) {
  ModelFile m = parse_model_file(dltest::corpus("bouncing_ball_g2.dlm"));
  ASSERT_EQ(m.invariants.size(), 1u);
  EXPECT_TRUE(structural_eq(m.invariants.begin()->second, F("2*g*x=2*g*H-v^2 & x>=0")));
  ASSERT_EQ(m.solutions.size(), 1u);
}

TEST(ModelFile, ConstantsAreSubstituted) {
  ModelFile m = parse_model_text(
      "Constants. g = 2; c = 1; H;\n"
      "Problem. g>0 & c=1 -> [x:=H] x<=g*H*c\nEnd.");
  Formula f = specialize(m);
  EXPECT_TRUE(structural_eq(f, F("2>0 & 1=1 -> [x:=H] x<=2*H*1")) ||
              free_vars(f).count(VarName{"g"}) == 0);
  EXPECT_EQ(free_vars(f).count(VarName{"g"}), 0u);
  EXPECT_EQ(free_vars(f).count(VarName{"c"}), 0u);
  EXPECT_EQ(free_vars(f).count(VarName{"H"}), 1u);
}

TEST(ModelFile, MissingProblemIsASyntaxError) {
  EXPECT_THROW(parse_model_text("Constants. g = 2;\nEnd."), SyntaxError);
}

TEST(ModelFile, DuplicateAnnotation) {
  EXPECT_THROW(parse_model_text("Problem. [{x:=1}*@invariant(x>0)@invariant(x>1)] x>0\nEnd."), DuplicateAnnotation);
}

TEST(ModelFile, UnusedConstantIsUnknown) {
  EXPECT_THROW(parse_model_text("Constants. k = 3;\nProblem. x>0 -> x>=0\nEnd."), UnknownConstant);
}

TEST(ModelFile, CommentsAreStripped) {
  ModelFile m = parse_model_text("/* header */ Problem. /* inside */ x>0 /* tail\n */ -> x>=0\nEnd.");
  EXPECT_TRUE(structural_eq(m.problem, F("x>0 -> x>=0")));
}

namespace {

std::vector<std::filesystem::path> corpus_models() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dltest::source_dir() / "corpus"))
    if (e.path().extension() == ".dlm") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(ModelFile, CorpusRoundtrip) {
  auto files = corpus_models();
  ASSERT_GE(files.size(), 2u);
  for (const auto& path : files) {
    ModelFile m = parse_model_file(path);
    std::string printed = print_model_file(m);
    ModelFile again = parse_model_text(printed, m.name);
    EXPECT_TRUE(structural_eq(again.problem, m.problem)) << path;
    EXPECT_EQ(print_model_file(again), printed) << path;
    EXPECT_EQ(again.constants, m.constants) << path;
  }
}

TEST(ModelFile, InjectedDeletionIsReportedOnItsLine) {
  for (const auto& path : corpus_models()) {
    std::string text = read_text_file(path);
    std::vector<std::string> lines;
    std::stringstream in(text);
    for (std::string l; std::getline(in, l);) lines.push_back(l);

    // Delete the first operator on each line that has another token after
    // it on the same line; the error must land on that line.
    int checked = 0;
    for (size_t li = 0; li < lines.size(); ++li) {
      const std::string& l = lines[li];
      size_t at = l.find_first_of(";&=])");
      while (at != std::string::npos && l[at] == '=' && at > 0 && std::string_view("<>!:=").find(l[at - 1]) != std::string_view::npos)
        at = l.find_first_of(";&=])", at + 1);
      if (at == std::string::npos || l.find("/*") != std::string::npos || l.find("*/") != std::string::npos) continue;
      if (l.find_first_not_of(' ', at + 1) == std::string::npos) continue;
      std::string broken;
      for (size_t k = 0; k < lines.size(); ++k) {
        std::string l = lines[k];
        if (k == li) l.erase(at, 1);
        broken += l + "\n";
      }
      try {
        parse_model_text(broken);
        ADD_FAILURE() << path << ": deletion on line " << li + 1 << " parsed";
      } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line(), static_cast<int>(li + 1)) << path << ": " << e.what();
      }
      ++checked;
    }
    EXPECT_GT(checked, 0) << path;
  }
}
