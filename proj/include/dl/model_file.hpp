#pragma once

// Model files (.dlm):
//
//   Constants. g = 2; c = 1; H;
//   Problem. <formula>
//   End.
//
// Annotations (@invariant, @solution) ride inline on the problem's loops
// and ODEs.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dl/syntax.hpp"

namespace dl {

struct ModelFile {
  std::string name;
  std::vector<std::pair<std::string, std::optional<Rational>>> constants;
  // Keyed by occurrence index in left-to-right preorder over the problem.
  std::map<size_t, SolutionAnnotation> solutions;
  std::map<size_t, Formula> invariants;
  Formula problem;

  // Names of all declared constants, bound or not.
  VarSet constant_names() const;
};

ModelFile parse_model_text(std::string_view src, std::string name = "model");
ModelFile parse_model_file(const std::filesystem::path& path);

// Literal values of the bound constants.
TermSubst constant_bindings(const ModelFile& m);

// The problem with every literal-bound constant substituted and ground
// subterms folded. Annotations are specialized along with it.
Formula specialize(const ModelFile& m);

// ODE and loop nodes of `f` in left-to-right preorder.
std::vector<Program> ode_occurrences(const Formula& f);
std::vector<Program> loop_occurrences(const Formula& f);

std::string print_model_file(const ModelFile& m);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace dl
