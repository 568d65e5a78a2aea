// dlcheck: parse, simulate, prove, synthesize monitors, run the sandbox and
// fuzz the axioms from the command line.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <iostream>

#include "dl/fuzz.hpp"
#include "dl/kernel.hpp"
#include "dl/model_file.hpp"
#include "dl/modelplex.hpp"
#include "dl/parser.hpp"
#include "dl/proof_script.hpp"
#include "dl/sandbox.hpp"

namespace {

constexpr int kExitSyntax = 1;
constexpr int kExitUsage = 64;
constexpr int kExitIo = 66;

using namespace dl;

bool is_model_path(const std::string& path) {
  return std::filesystem::path(path).extension() == ".dlm";
}

int cmd_parse(const std::string& file) {
  if (is_model_path(file)) {
    std::cout << print_model_file(parse_model_file(file));
    return 0;
  }
  std::string text = read_text_file(file);
  try {
    std::cout << to_string(parse_formula(text)) << "\n";
  } catch (const SyntaxError&) {
    std::cout << to_string(parse_program(text)) << "\n";
  }
  return 0;
}

ExactState parse_bindings(const std::string& text) {
  ExactState s;
  if (text.empty()) return s;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--init", "expected name=value, got '" + item + "'");
    Term v = simplify(parse_term(item.substr(eq + 1)));
    Rational r;
    if (v->kind == TermKind::Lit) r = v->value;
    else if (v->kind == TermKind::Neg && v->left->kind == TermKind::Lit) r = -v->left->value;
    else throw CLI::ValidationError("--init", "'" + item + "' is not a numeric binding");
    std::string name = item.substr(0, eq);
    name.erase(0, name.find_first_not_of(' '));
    name.erase(name.find_last_not_of(' ') + 1);
    s[var_from_key(name)] = r;
  }
  return s;
}

struct SimArgs {
  std::string file, init, mode = "rk4", out;
  unsigned iterations = 10;
  std::string duration = "1/5", step = "1/100";
  bool floating = false;
};

int cmd_simulate(const SimArgs& a) {
  Program p;
  ExactState s;
  if (is_model_path(a.file)) {
    ModelFile m = parse_model_file(a.file);
    Formula f = specialize(m);
    while (f->kind == FormulaKind::Imply) f = f->right;
    if (!is_modal(f->kind)) throw Error("model has no modal formula to simulate");
    p = f->program;
  } else {
    p = parse_program(read_text_file(a.file));
  }
  for (const auto& [k, v] : parse_bindings(a.init)) s[k] = v;
  SimOptions opt;
  opt.iterations = a.iterations;
  opt.duration = *parse_rational(a.duration);
  opt.step = *parse_rational(a.step);
  opt.mode = a.mode == "closed" ? OdeMode::ClosedForm : OdeMode::Rk4;

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw IoError("cannot write '" + a.out + "'");
  }
  std::ostream& os = a.out.empty() ? std::cout : file;
  if (a.floating) {
    FloatState fs;
    for (const auto& [k, v] : s) fs[k] = to_double(v);
    write_trace_csv(os, simulate(p, fs, opt));
  } else {
    write_trace_csv(os, simulate(p, s, opt));
  }
  return 0;
}

struct ProveArgs {
  std::string model, script, smt, config;
  bool permissive = false, tree = false;
};

int cmd_prove(const ProveArgs& a) {
  ModelFile m = parse_model_file(a.model);
  std::vector<ProofStep> steps = load_proof_script(a.script);
  ClosePolicy policy;
  policy.permissive = a.permissive;
  policy.arith.smt = load_smt_config(a.config.empty() ? std::nullopt : std::optional(a.config),
                                     a.smt.empty() ? std::nullopt : std::optional(a.smt));
  std::vector<GoalNode> tree;
  ProofResult r;
  try {
    r = check_proof(m, steps, policy, &tree);
  } catch (const RuleError& e) {
    std::cerr << a.script << ": " << e.what() << "\n";
    return kExitSyntax;
  }
  if (a.tree)
    for (const auto& n : tree)
      std::cerr << n.id << " <- " << n.parent << " [" << n.rule << "] " << n.status << ": " << n.sequent.to_string()
                << "\n";
  std::cout << r.to_json() << "\n";
  switch (r.kind) {
    case ResultKind::Closed: return 0;
    case ResultKind::Refuted: return 3;
    default: return 2;
  }
}

int cmd_monitor(const std::string& model, const std::string& kind, std::string out) {
  ModelFile m = parse_model_file(model);
  LoopModel lm = extract_loop_model(m);
  Monitor mon = kind == "controller" ? synth_controller_monitor(lm.ctrl, lm.state_vars)
                                     : synth_model_monitor(lm.body, lm.state_vars, lm.assumptions);
  for (const auto& w : mon.warnings) std::cerr << "warning: " << w << "\n";
  if (out.empty()) out = std::filesystem::path(model).stem().string() + "." + kind + ".monitor";
  std::ofstream text(out);
  std::ofstream ops(out + ".ops");
  if (!text || !ops) throw IoError("cannot write '" + out + "'");
  text << to_string(mon.formula) << "\n";
  ops << serialize_ops(compile_monitor(mon.formula));
  std::cout << to_string(mon.formula) << "\n";
  return 0;
}

int cmd_sandbox(const std::string& config, const std::vector<std::string>& sets, const std::string& log_path) {
  std::map<std::string, std::string> overrides;
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got '" + s + "'");
    overrides[s.substr(0, eq)] = s.substr(eq + 1);
  }
  SandboxConfig cfg = load_sandbox_config(config, overrides);
  if (!log_path.empty()) cfg.log = log_path;
  std::ofstream file;
  if (cfg.log) {
    file.open(*cfg.log);
    if (!file) throw IoError("cannot write '" + cfg.log->string() + "'");
  }
  SandboxRun run = run_sandbox(cfg, cfg.log ? static_cast<std::ostream*>(&file) : &std::cout);
  if (cfg.log) std::cout << run.summary.to_json() << "\n";
  if (run.summary.halted) return 3;
  return run.summary.violations > 0 || !run.summary.safe ? 2 : 0;
}

int cmd_fuzz(size_t n, uint64_t seed, bool mutants, bool serial) {
  bool ok = true;
  auto run = [&](const std::string& name) {
    return serial ? axiom_fuzz_serial(name, n, seed) : axiom_fuzz(name, n, seed);
  };
  auto report = [](const FuzzReport& r, const char* kind) {
    std::cout << kind << " " << r.axiom << ": cases=" << r.cases << " skipped=" << r.skipped;
    if (r.counterexample) {
      std::cout << " counterexample at case " << r.counterexample->case_index << ": "
                << r.counterexample->instance << " in {";
      bool first = true;
      for (const auto& [k, v] : r.counterexample->state) {
        std::cout << (first ? "" : ", ") << k.key() << "=" << to_string(v);
        first = false;
      }
      std::cout << "}";
    }
    std::cout << "\n";
  };
  for (const auto& a : axiom_names()) {
    FuzzReport r = run(a);
    report(r, "axiom");
    ok &= !r.counterexample;
  }
  if (mutants)
    for (const auto& a : mutant_names()) {
      FuzzReport r = run(a);
      report(r, "mutant");
      ok &= r.counterexample.has_value();
    }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dlcheck: differential dynamic logic toolchain"};
  app.require_subcommand(1);

  std::string parse_file;
  auto* parse = app.add_subcommand("parse", "Parse a model (.dlm) or formula file and print it normalized");
  parse->add_option("file", parse_file)->required();

  SimArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Print one deterministic trace as CSV");
  simulate->add_option("file", sim.file)->required();
  simulate->add_option("--init", sim.init, "Initial state, e.g. x=1,v=0");
  simulate->add_option("--iterations", sim.iterations, "Loop iterations");
  simulate->add_option("--duration", sim.duration, "ODE duration per run");
  simulate->add_option("--step", sim.step, "Sample and integration step");
  simulate->add_option("--mode", sim.mode, "closed or rk4")->check(CLI::IsMember({"closed", "rk4"}));
  simulate->add_flag("--float", sim.floating, "Use double instead of exact arithmetic");
  simulate->add_option("-o,--output", sim.out, "CSV file (default stdout)");

  ProveArgs prove_args;
  auto* prove = app.add_subcommand("prove", "Check a proof script against a model");
  prove->add_option("model", prove_args.model)->required();
  prove->add_option("script", prove_args.script)->required();
  prove->add_option("--smt", prove_args.smt, "SMT-LIB 2 solver path, or off");
  prove->add_option("--config", prove_args.config, "Solver configuration file");
  prove->add_flag("--permissive", prove_args.permissive, "Accept Unknown arithmetic leaves as oracle-assumed");
  prove->add_flag("--tree", prove_args.tree, "Print the goal tree to stderr");

  std::string mon_model, mon_kind = "model", mon_out;
  auto* monitor = app.add_subcommand("monitor", "Synthesize a runtime monitor");
  monitor->add_option("model", mon_model)->required();
  monitor->add_option("--kind", mon_kind)->check(CLI::IsMember({"controller", "model"}));
  monitor->add_option("-o,--output", mon_out, "Monitor text file; compiled code goes to <file>.ops");

  std::string sb_config, sb_log;
  std::vector<std::string> sb_sets;
  auto* sandbox = app.add_subcommand("sandbox", "Run a controller inside the monitored sandbox");
  sandbox->add_option("config", sb_config)->required();
  sandbox->add_option("--set", sb_sets, "Override a config key (key=value)");
  sandbox->add_option("--log", sb_log, "Run log file");

  size_t fz_n = 1000;
  uint64_t fz_seed = 1;
  bool fz_mutants = false, fz_serial = false;
  auto* fuzz = app.add_subcommand("fuzz-axioms", "Check axiom instances against the semantics");
  fuzz->add_option("--n", fz_n, "Cases per axiom");
  fuzz->add_option("--seed", fz_seed, "Base seed; case i uses seed+i");
  fuzz->add_flag("--mutants", fz_mutants, "Also run the broken variants, which must be refuted");
  fuzz->add_flag("--serial", fz_serial, "Use the serial reference runner");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*parse) return cmd_parse(parse_file);
    if (*simulate) return cmd_simulate(sim);
    if (*prove) return cmd_prove(prove_args);
    if (*monitor) return cmd_monitor(mon_model, mon_kind, mon_out);
    if (*sandbox) return cmd_sandbox(sb_config, sb_sets, sb_log);
    if (*fuzz) return cmd_fuzz(fz_n, fz_seed, fz_mutants, fz_serial);
  } catch (const SyntaxError& e) {
    std::cerr << "syntax error: " << e.what() << "\n";
    return kExitSyntax;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
