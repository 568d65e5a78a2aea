#pragma once

// Randomized soundness checks of the axiom schemata against the budgeted
// exact semantics. Both sides of an instance are evaluated under one
// shared budget, so agreement is exact for the discretized relation.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dl/semantics.hpp"

namespace dl {

struct FuzzInstance {
  std::string axiom;
  Formula lhs;
  Formula rhs;
  bool implication = false;  // lhs -> rhs instead of lhs <-> rhs
  ExactState state;
  EnumBudget budget;

  Formula formula() const { return implication ? make_imply(lhs, rhs) : make_equiv(lhs, rhs); }
};

struct Counterexample {
  size_t case_index = 0;
  ExactState state;
  std::string instance;
};

struct FuzzReport {
  std::string axiom;
  size_t cases = 0;
  size_t skipped = 0;  // budget exceeded
  std::optional<Counterexample> counterexample;
};

// The sound schemata: [:=] [?] [++] [;] [*] K I V G M <>.
const std::vector<std::string>& axiom_names();
// Deliberately broken variants: swapped [;], [++] with |, V without its
// side condition.
const std::vector<std::string>& mutant_names();

// Random generators over variables x, y, z with rational values whose
// numerators and denominators are bounded by 10.
class FuzzGen {
 public:
  explicit FuzzGen(uint64_t seed) : rng_(seed) {}

  Rational rational();
  Term term(int depth, const std::vector<VarName>& pool);
  Formula formula(int depth, const std::vector<VarName>& pool);
  Program program(int depth);
  Program ode();
  ExactState state();

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

 private:
  std::mt19937_64 rng_;
};

const std::vector<VarName>& fuzz_vars();

FuzzInstance make_instance(const std::string& axiom, uint64_t case_seed);

// Evaluates one instance; nullopt when both sides agree.
std::optional<Counterexample> check_instance(const FuzzInstance& inst, size_t index);

// Case i uses seed + i. The parallel runner returns the same
// (lowest-index) counterexample as the serial one.
FuzzReport axiom_fuzz(const std::string& axiom, size_t n_cases, uint64_t seed);
FuzzReport axiom_fuzz_serial(const std::string& axiom, size_t n_cases, uint64_t seed);

}  // namespace dl
