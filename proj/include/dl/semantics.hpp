#pragma once

// Executable transition semantics under finite budgets. Num is Rational
// (exact) or double.

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dl/syntax.hpp"

namespace dl {

template <class Num>
using State = std::map<VarName, Num>;
using ExactState = State<Rational>;
using FloatState = State<double>;

template <class Num>
Num from_rational(const Rational& r);

enum class OdeMode { ClosedForm, Rk4 };

struct EnumBudget {
  unsigned loop_bound = 2;
  std::vector<Rational> time_grid{Rational(0), Rational(1, 2), Rational(1)};
  OdeMode ode_mode = OdeMode::ClosedForm;
  Rational rk4_step{1, 1000};
  size_t state_cap = 200000;
  // Per-loop overrides of loop_bound, keyed by node identity.
  std::map<const ProgramNode*, unsigned> loop_bound_override;

  unsigned bound_for(const ProgramNode* loop) const {
    auto it = loop_bound_override.find(loop);
    return it == loop_bound_override.end() ? loop_bound : it->second;
  }
};

template <class Num>
struct Trace {
  std::vector<std::pair<Num, State<Num>>> samples;
  std::vector<std::pair<Num, std::string>> events;
};

template <class Num>
struct OdeRun {
  Trace<Num> trace;
  std::optional<Num> violation;  // first sample time at which the domain failed
  State<Num> final_state() const { return trace.samples.back().second; }
};

template <class Num>
Num eval_term(const State<Num>& s, const Term& t);

// Quantifier- and program-free formulas only.
template <class Num>
bool holds_qf(const State<Num>& s, const Formula& f);

// Modal formulas are decided over reachable_states; quantifiers throw.
template <class Num>
bool holds(const State<Num>& s, const Formula& f, const EnumBudget& b);

// Runs the ODE for `duration`, emitting a sample every `step` (and at the
// end). Closed-form mode evaluates the node's @solution annotation; rk4
// mode integrates with fixed step `step`. Primed variables carry the
// right-hand side at each sample. Evolution stops at the first sample
// violating the domain, which is then not emitted.
template <class Num>
OdeRun<Num> integrate_ode(const State<Num>& s, const Program& ode, const Num& duration, OdeMode mode,
                          const Num& step);

template <class Num>
std::set<State<Num>> reachable_states(const Program& p, const State<Num>& s, const EnumBudget& b);

template <class Num>
bool check_box(const Program& p, const State<Num>& s, const Formula& post, const EnumBudget& b);

template <class Num>
bool check_diamond(const Program& p, const State<Num>& s, const Formula& post, const EnumBudget& b);

// One deterministic run for inspection: loops execute `iterations` times,
// ODEs evolve for `duration` (truncated at a domain violation), and the
// first choice branch that completes is taken.
struct SimOptions {
  unsigned iterations = 10;
  Rational duration{1, 5};
  Rational step{1, 100};
  OdeMode mode = OdeMode::Rk4;
};

template <class Num>
Trace<Num> simulate(const Program& p, const State<Num>& s, const SimOptions& opt);

template <class Num>
void write_trace_csv(std::ostream& os, const Trace<Num>& trace);

std::string format_number(const Rational& r);
std::string format_number(double d);

// Drops primed variables.
template <class Num>
State<Num> unprimed(const State<Num>& s);

}  // namespace dl
