#pragma once

// Line records shared by the controller wire protocol and the sandbox run
// log. Numbers are base-10 decimals with at most 12 fractional digits and
// are read back exactly.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dl/semantics.hpp"

namespace dl {

inline constexpr unsigned kWireDigits = 12;

// -?digits(.digits)? with 1..12 fractional digits.
std::optional<Rational> parse_decimal(std::string_view text);
std::string format_decimal(const Rational& r);  // rounds to 12 digits

// {"x":0.5,"v":-2}
std::string state_json(const ExactState& s);

// Sandbox to controller: {"cycle":<n>,"state":{...}}
std::string state_message(size_t cycle, const ExactState& s);

// Controller to sandbox: {"set":{"v":<decimal>,...}}. Whitespace between
// tokens is allowed; anything else is a ProtocolError, as is a key outside
// `writable` or a repeated key.
ExactState parse_set_message(std::string_view line, const VarSet& writable);

struct CycleRecord {
  size_t cycle = 0;
  ExactState prior;
  std::optional<ExactState> proposal;  // merged posterior; absent on timeout or protocol error
  bool controller_ok = false;          // controller-monitor verdict on the proposal
  std::string action;                  // "proposal" or "fallback"
  std::string reason;                  // why the fallback ran
  ExactState actuated;                 // after the action and the plant response
  ExactState posterior;                // after the plant step
  std::optional<bool> model_ok;        // absent on the first cycle

  std::string to_json() const;
};

struct RunSummary {
  size_t cycles = 0;
  size_t vetoes = 0;
  size_t violations = 0;
  std::optional<size_t> first_violation;
  bool safe = true;         // every recorded state satisfied the postcondition
  bool precondition = true; // initial state satisfied the model's assumptions
  bool halted = false;
  std::string halt_reason;

  std::string to_json() const;
};

struct RunLog {
  std::vector<CycleRecord> cycles;
  std::optional<RunSummary> summary;
};

// Reads a log written by the sandbox. Numbers keep their exact decimal
// value. Throws ProtocolError on malformed lines.
RunLog read_run_log(std::istream& in);

}  // namespace dl
