#pragma once

// Runtime sandbox: an untrusted controller process proposes actions, the
// controller monitor admits or vetoes them, a verified fallback replaces
// vetoed actions, and the model monitor checks each observed transition of
// the simulated plant.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dl/modelplex.hpp"
#include "dl/records.hpp"

namespace dl {

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NondeterministicFallback : public Error {
 public:
  using Error::Error;
};

struct SandboxConfig {
  std::filesystem::path model;
  std::optional<std::filesystem::path> controller_monitor;  // compiled .ops; synthesized when absent
  std::optional<std::filesystem::path> model_monitor;
  std::string fallback;                 // program text over model constants
  std::vector<std::string> controller;  // argv
  VarSet controller_writes;
  std::string plant_ode;                // e.g. {x'=v, v'=-g & x>=0}
  std::string plant_response;           // optional discrete program run after actuation
  std::map<std::string, Rational> plant_params;
  Rational period{1, 5};
  Rational rk4_step{1, 200};
  size_t max_cycles = 50;
  int timeout_ms = 1000;
  ExactState initial;
  bool halt_on_violation = false;
  std::optional<std::filesystem::path> log;
};

// key = value lines; relative paths resolve against the file's directory.
// `overrides` use the same keys and win over the file.
SandboxConfig load_sandbox_config(const std::filesystem::path& path,
                                  const std::map<std::string, std::string>& overrides = {});

// Requires the symbolic paths of `p` to be mutually exclusive and
// exhaustive under `assumptions`. Throws NondeterministicFallback.
void check_deterministic(const Program& p, const std::vector<Formula>& assumptions);

// The unique successor of `s`. Throws NondeterministicFallback when there
// is none or more than one.
ExactState fallback_execute(const Program& fallback, const ExactState& s);

struct SandboxRun {
  std::vector<CycleRecord> cycles;
  RunSummary summary;
};

// Runs the loop, writing one record per cycle and the summary to `log`
// when given.
SandboxRun run_sandbox(const SandboxConfig& cfg, std::ostream* log = nullptr);

}  // namespace dl
