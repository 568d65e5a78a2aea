#include "dl/sandbox.hpp"

#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "dl/parser.hpp"
#include "dl/process.hpp"

namespace dl {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::vector<std::string> split(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string::npos) {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

Rational rational_value(const std::string& key, const std::string& text) {
  auto r = parse_rational(trim(text));
  if (!r) {
    // allow negative and fractional literals such as -2 or 4/5
    try {
      Term t = simplify(parse_term(text));
      if (t->kind == TermKind::Lit) return t->value;
      if (t->kind == TermKind::Neg && t->left->kind == TermKind::Lit) return -t->left->value;
    } catch (const SyntaxError&) {
    }
    throw ConfigError(key + ": '" + text + "' is not a rational number");
  }
  return *r;
}

// "x=1, v=0"
std::map<std::string, Rational> bindings(const std::string& key, const std::string& text) {
  std::map<std::string, Rational> out;
  for (const auto& item : split(text, ",")) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError(key + ": expected name = value in '" + item + "'");
    std::string name = trim(item.substr(0, eq));
    try {
      check_identifier(name);
    } catch (const std::invalid_argument&) {
      throw ConfigError(key + ": bad name '" + name + "'");
    }
    out[name] = rational_value(key, item.substr(eq + 1));
  }
  return out;
}

bool truth(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

// Bare program names are looked up next to the running executable first.
std::string resolve_program(const std::string& name, const std::filesystem::path& base) {
  if (name.find('/') != std::string::npos) {
    std::filesystem::path p(name);
    return (p.is_absolute() ? p : base / p).lexically_normal().string();
  }
  std::error_code ec;
  auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    auto sibling = self.parent_path() / name;
    if (std::filesystem::exists(sibling)) return sibling.string();
    auto tools = self.parent_path().parent_path() / "tools" / name;
    if (std::filesystem::exists(tools)) return tools.string();
  }
  return name;
}

void apply_key(SandboxConfig& cfg, const std::string& key, const std::string& value, const std::filesystem::path& base) {
  auto path = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() ? p : (base / p).lexically_normal();
  };
  try {
    if (key == "model") cfg.model = path(value);
    else if (key == "controller_monitor") cfg.controller_monitor = path(value);
    else if (key == "model_monitor") cfg.model_monitor = path(value);
    else if (key == "fallback") cfg.fallback = value;
    else if (key == "controller") {
      cfg.controller = split(value, " \t");
      if (cfg.controller.empty()) throw ConfigError("controller: empty command");
      cfg.controller[0] = resolve_program(cfg.controller[0], base);
    } else if (key == "controller_writes") {
      cfg.controller_writes.clear();
      for (const auto& v : split(value, ", \t")) cfg.controller_writes.insert(VarName{v});
    } else if (key == "plant_ode") cfg.plant_ode = value;
    else if (key == "plant_response") cfg.plant_response = value;
    else if (key == "plant_params") cfg.plant_params = bindings(key, value);
    else if (key == "period") cfg.period = rational_value(key, value);
    else if (key == "rk4_step") cfg.rk4_step = rational_value(key, value);
    else if (key == "max_cycles") cfg.max_cycles = std::stoul(value);
    else if (key == "timeout_ms") cfg.timeout_ms = std::stoi(value);
    else if (key == "initial") {
      cfg.initial.clear();
      for (const auto& [k, v] : bindings(key, value)) cfg.initial[VarName{k}] = v;
    } else if (key == "halt_on_violation") cfg.halt_on_violation = truth(key, value);
    else if (key == "log") cfg.log = path(value);
    else throw ConfigError("unknown key '" + key + "'");
  } catch (const std::logic_error&) {
    throw ConfigError(key + ": bad value '" + value + "'");
  }
}

ExactState quantize(const ExactState& s) {
  ExactState out;
  for (const auto& [k, v] : s) out[k] = round_decimal(v, kWireDigits);
  return out;
}

ExactState restrict_to(const ExactState& s, const ExactState& keys) {
  ExactState out;
  for (const auto& [k, v] : keys) {
    auto it = s.find(k);
    out[k] = it == s.end() ? v : it->second;
  }
  return out;
}

// Constants, the prior state, and the posterior under _post names.
ExactState monitor_frame(const ExactState& consts, const ExactState& prior, const ExactState& post) {
  ExactState f = consts;
  for (const auto& [k, v] : prior) f[k] = v;
  for (const auto& [k, v] : post) f[post_var(k)] = v;
  return f;
}

std::vector<Op> load_or_compile(const std::optional<std::filesystem::path>& path, const Formula& synthesized) {
  if (path) return parse_ops(read_text_file(*path));
  return compile_monitor(synthesized);
}

}  // namespace

SandboxConfig load_sandbox_config(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides) {
  std::string text = read_text_file(path);
  std::filesystem::path base = path.parent_path();
  SandboxConfig cfg;
  std::istringstream in(text);
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), base);
  }
  for (const auto& [k, v] : overrides) apply_key(cfg, k, v, std::filesystem::current_path());
  if (cfg.model.empty()) throw ConfigError("missing key 'model'");
  if (cfg.controller.empty()) throw ConfigError("missing key 'controller'");
  if (cfg.fallback.empty()) throw ConfigError("missing key 'fallback'");
  if (cfg.plant_ode.empty()) throw ConfigError("missing key 'plant_ode'");
  if (sgn(cfg.period) <= 0 || sgn(cfg.rk4_step) <= 0) throw ConfigError("period and rk4_step must be positive");
  return cfg;
}

void check_deterministic(const Program& p, const std::vector<Formula>& assumptions) {
  if (!is_loop_free(p)) throw NondeterministicFallback("fallback contains a loop");
  SymContext ctx;
  ctx.assumptions = assumptions;
  std::vector<SymState> paths;
  try {
    paths = symexec(p, ctx);
  } catch (const Error& e) {
    throw NondeterministicFallback(std::string("fallback cannot be executed symbolically: ") + e.what());
  }
  std::vector<Formula> pcs;
  for (const auto& s : paths) {
    if (!s.times.empty()) throw NondeterministicFallback("fallback contains an ODE");
    pcs.push_back(conjunction(s.path));
  }
  auto valid = [&](const Formula& f) {
    return decide(ArithGoal{assumptions, {f}}, ArithPolicy{}).kind == VerdictKind::Valid;
  };
  for (size_t i = 0; i < pcs.size(); ++i)
    for (size_t j = i + 1; j < pcs.size(); ++j)
      if (!valid(make_not(make_and(pcs[i], pcs[j]))))
        throw NondeterministicFallback("paths " + std::to_string(i) + " and " + std::to_string(j) +
                                       " can both run: '" + to_string(pcs[i]) + "' and '" + to_string(pcs[j]) + "'");
  if (!valid(disjunction(pcs))) throw NondeterministicFallback("some states have no fallback action");
}

ExactState fallback_execute(const Program& fallback, const ExactState& s) {
  EnumBudget trivial;
  auto next = reachable_states(fallback, s, trivial);
  if (next.size() != 1)
    throw NondeterministicFallback("fallback has " + std::to_string(next.size()) + " successors");
  return *next.begin();
}

SandboxRun run_sandbox(const SandboxConfig& cfg, std::ostream* log) {
  ModelFile m = parse_model_file(cfg.model);
  LoopModel lm = extract_loop_model(m);

  // Model constants; plant parameters fill in constants the model leaves open.
  ExactState consts;
  for (const auto& [name, value] : m.constants)
    if (value) consts[VarName{name}] = *value;
  for (const auto& [name, value] : cfg.plant_params) {
    VarName v{name};
    if (m.constant_names().count(v) && !consts.count(v)) consts[v] = value;
  }
  TermSubst model_subst = constant_bindings(m);
  TermSubst plant_subst;
  for (const auto& [name, value] : cfg.plant_params) plant_subst[VarName{name}] = make_lit(value);
  for (const auto& [v, t] : model_subst) plant_subst.emplace(v, t);

  std::vector<Op> ctrl_ops = load_or_compile(
      cfg.controller_monitor, cfg.controller_monitor ? nullptr : synth_controller_monitor(lm.ctrl, lm.state_vars).formula);
  std::vector<Op> model_ops = load_or_compile(
      cfg.model_monitor,
      cfg.model_monitor ? nullptr : synth_model_monitor(lm.body, lm.state_vars, lm.assumptions).formula);

  Program fallback = parse_program(cfg.fallback);
  check_deterministic(substitute(fallback, model_subst), lm.assumptions);
  Program plant = substitute(parse_program(cfg.plant_ode), plant_subst);
  if (plant->kind != ProgramKind::Ode) throw ConfigError("plant_ode is not an ODE");
  Program response = cfg.plant_response.empty() ? nullptr : substitute(parse_program(cfg.plant_response), plant_subst);

  SandboxRun run;
  RunSummary& sum = run.summary;
  ExactState state = quantize(cfg.initial);
  auto with_consts = [&](const ExactState& s) {
    ExactState f = consts;
    for (const auto& [k, v] : s) f[k] = v;
    return f;
  };
  auto check_safe = [&](const ExactState& s) {
    if (!holds_qf(with_consts(s), lm.safety)) sum.safe = false;
  };
  sum.precondition = holds_qf(with_consts(state), lm.init);
  check_safe(state);

  Subprocess controller(cfg.controller);
  std::optional<ExactState> prev_actuated;
  for (size_t k = 0; k < cfg.max_cycles; ++k) {
    CycleRecord rec;
    rec.cycle = k;
    rec.prior = state;

    // (1)-(2) query the controller
    if (!controller.write(state_message(k, state) + "\n")) rec.reason = "controller is not accepting input";
    else if (auto line = controller.read_line(std::chrono::milliseconds(cfg.timeout_ms))) {
      try {
        ExactState proposal = state;
        for (const auto& [v, x] : parse_set_message(*line, cfg.controller_writes)) proposal[v] = x;
        rec.proposal = proposal;
      } catch (const ProtocolError& e) {
        rec.reason = std::string("protocol error: ") + e.what();
      }
    } else {
      rec.reason = controller.eof() ? "controller exited" : "controller timed out";
    }

    // (3)-(4) admit or veto
    if (rec.proposal) {
      rec.controller_ok = run_ops(ctrl_ops, monitor_frame(consts, state, *rec.proposal));
      if (!rec.controller_ok) rec.reason = "controller monitor veto";
    }
    ExactState actuated;
    if (rec.controller_ok) {
      rec.action = "proposal";
      actuated = *rec.proposal;
    } else {
      rec.action = "fallback";
      ++sum.vetoes;
      actuated = restrict_to(fallback_execute(fallback, with_consts(state)), state);
      if (!run_ops(ctrl_ops, monitor_frame(consts, state, actuated))) {
        sum.halted = true;
        sum.halt_reason = "fallback action violates the controller monitor";
      }
    }
    if (response) actuated = restrict_to(fallback_execute(response, with_consts(actuated)), state);
    rec.actuated = quantize(actuated);
    check_safe(rec.actuated);

    // model monitor over one loop iteration: plant then controller
    if (prev_actuated) {
      rec.model_ok = run_ops(model_ops, monitor_frame(consts, *prev_actuated, rec.actuated));
      if (!*rec.model_ok) {
        ++sum.violations;
        if (!sum.first_violation) sum.first_violation = k;
      }
    }
    prev_actuated = rec.actuated;

    // (5) plant step
    OdeRun<Rational> flow = integrate_ode(rec.actuated, plant, cfg.period, OdeMode::Rk4, cfg.rk4_step);
    for (const auto& [t, s] : flow.trace.samples) check_safe(restrict_to(s, state));
    rec.posterior = quantize(restrict_to(flow.final_state(), state));
    if (flow.violation && !sum.halted) {
      sum.halted = true;
      sum.halt_reason = "PlantDomainViolation at t=" + format_decimal(*flow.violation) + " in cycle " + std::to_string(k);
    }
    if (cfg.halt_on_violation && rec.model_ok == false && !sum.halted) {
      sum.halted = true;
      sum.halt_reason = "model monitor violation in cycle " + std::to_string(k);
    }
    state = rec.posterior;
    if (log) *log << rec.to_json() << "\n";
    run.cycles.push_back(std::move(rec));
    ++sum.cycles;
    if (sum.halted) break;
  }
  controller.close_stdin();
  controller.kill();
  controller.wait();
  if (log) *log << sum.to_json() << "\n" << std::flush;
  return run;
}

}  // namespace dl
