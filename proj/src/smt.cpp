#include "dl/smt.hpp"

#include <atomic>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>

#include "dl/process.hpp"

namespace dl {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

void apply_setting(SmtConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "smt") cfg.path = value == "off" ? "" : value;
  else if (key == "smt_args") cfg.args = split_ws(value);
  else if (key == "smt_timeout_ms") cfg.timeout_ms = std::stoi(value);
  else if (key == "smt_log_dir") cfg.log_dir = value;
}

std::string decimal_literal(const mpz_class& z) { return z.get_str() + ".0"; }

std::string smt_rational(const Rational& r) {
  std::string num = decimal_literal(abs(r.get_num()));
  std::string body = r.get_den() == 1 ? num : "(/ " + num + " " + decimal_literal(r.get_den()) + ")";
  return sgn(r) < 0 ? "(- " + body + ")" : body;
}

}  // namespace

SmtConfig load_smt_config(const std::optional<std::string>& config_file, const std::optional<std::string>& flag) {
  SmtConfig cfg;
  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) throw IoError("cannot read '" + *config_file + "'");
    for (std::string line; std::getline(in, line);) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }
  if (const char* v = std::getenv("DLCHECK_SMT")) apply_setting(cfg, "smt", v);
  if (const char* v = std::getenv("DLCHECK_SMT_ARGS")) apply_setting(cfg, "smt_args", v);
  if (const char* v = std::getenv("DLCHECK_SMT_TIMEOUT_MS")) apply_setting(cfg, "smt_timeout_ms", v);
  if (const char* v = std::getenv("DLCHECK_SMT_LOG_DIR")) apply_setting(cfg, "smt_log_dir", v);
  if (flag) apply_setting(cfg, "smt", *flag);
  return cfg;
}

std::string smt_symbol(const std::string& key) { return "|" + key + "|"; }

std::string smt_term(const Term& t) {
  switch (t->kind) {
    case TermKind::Var: return smt_symbol(t->var.key());
    case TermKind::Lit: return smt_rational(t->value);
    case TermKind::Neg: return "(- " + smt_term(t->left) + ")";
    case TermKind::Plus: return "(+ " + smt_term(t->left) + " " + smt_term(t->right) + ")";
    case TermKind::Minus: return "(- " + smt_term(t->left) + " " + smt_term(t->right) + ")";
    case TermKind::Times: return "(* " + smt_term(t->left) + " " + smt_term(t->right) + ")";
    case TermKind::Pow: {
      if (t->exponent == 0) return "1.0";
      std::string base = smt_term(t->left);
      if (t->exponent == 1) return base;
      std::string out = "(*";
      for (unsigned i = 0; i < t->exponent; ++i) out += " " + base;
      return out + ")";
    }
  }
  return "";
}

std::string smt_formula(const Formula& f) {
  auto bin = [&](const char* op) { return std::string("(") + op + " " + smt_formula(f->left) + " " + smt_formula(f->right) + ")"; };
  auto cmp = [&](const char* op) { return std::string("(") + op + " " + smt_term(f->lhs) + " " + smt_term(f->rhs) + ")"; };
  switch (f->kind) {
    case FormulaKind::True: return "true";
    case FormulaKind::False: return "false";
    case FormulaKind::Eq: return cmp("=");
    case FormulaKind::Neq: return "(not " + cmp("=") + ")";
    case FormulaKind::Geq: return cmp(">=");
    case FormulaKind::Gt: return cmp(">");
    case FormulaKind::Leq: return cmp("<=");
    case FormulaKind::Lt: return cmp("<");
    case FormulaKind::Not: return "(not " + smt_formula(f->left) + ")";
    case FormulaKind::And: return bin("and");
    case FormulaKind::Or: return bin("or");
    case FormulaKind::Imply: return bin("=>");
    case FormulaKind::Equiv: return bin("=");
    case FormulaKind::Forall:
      return "(forall ((" + smt_symbol(f->var.key()) + " Real)) " + smt_formula(f->left) + ")";
    case FormulaKind::Exists:
      return "(exists ((" + smt_symbol(f->var.key()) + " Real)) " + smt_formula(f->left) + ")";
    case FormulaKind::Box:
    case FormulaKind::Diamond:
      throw Error("modal formula cannot be sent to an arithmetic solver");
  }
  return "";
}

std::string smt_script(const Formula& negated_goal, const VarSet& vars) {
  std::ostringstream os;
  os << "(set-logic " << (is_quantifier_free(negated_goal) ? "QF_NRA" : "NRA") << ")\n";
  for (const auto& v : vars) os << "(declare-fun " << smt_symbol(v.key()) << " () Real)\n";
  os << "(assert " << smt_formula(negated_goal) << ")\n";
  os << "(check-sat)\n(get-model)\n(exit)\n";
  return os.str();
}

// ------------------------------------------------------------ s-expressions

namespace {

struct Sexp {
  std::string atom;
  std::vector<Sexp> list;
  bool is_list = false;
};

class SexpReader {
 public:
  explicit SexpReader(const std::string& s) : s_(s) {}

  bool done() {
    skip();
    return i_ >= s_.size();
  }

  Sexp read() {
    skip();
    if (i_ >= s_.size()) throw ProtocolError("unexpected end of solver output");
    Sexp out;
    if (s_[i_] == '(') {
      ++i_;
      out.is_list = true;
      for (;;) {
        skip();
        if (i_ >= s_.size()) throw ProtocolError("unbalanced parenthesis in solver output");
        if (s_[i_] == ')') {
          ++i_;
          return out;
        }
        out.list.push_back(read());
      }
    }
    if (s_[i_] == ')') throw ProtocolError("unexpected ')' in solver output");
    if (s_[i_] == '|') {
      size_t e = s_.find('|', i_ + 1);
      if (e == std::string::npos) throw ProtocolError("unterminated quoted symbol");
      out.atom = s_.substr(i_, e - i_ + 1);
      i_ = e + 1;
      return out;
    }
    if (s_[i_] == '"') {
      size_t e = i_ + 1;
      while (e < s_.size() && !(s_[e] == '"' && (e + 1 >= s_.size() || s_[e + 1] != '"'))) e += s_[e] == '"' ? 2 : 1;
      if (e >= s_.size()) throw ProtocolError("unterminated string in solver output");
      out.atom = s_.substr(i_, e - i_ + 1);
      i_ = e + 1;
      return out;
    }
    size_t b = i_;
    while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) && s_[i_] != '(' && s_[i_] != ')') ++i_;
    out.atom = s_.substr(b, i_ - b);
    return out;
  }

 private:
  void skip() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
      else if (s_[i_] == ';') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }
  const std::string& s_;
  size_t i_ = 0;
};

std::optional<Rational> sexp_value(const Sexp& e) {
  if (!e.is_list) return parse_rational(e.atom);
  if (e.list.empty() || e.list[0].is_list) return std::nullopt;
  const std::string& op = e.list[0].atom;
  if (op == "-" && e.list.size() == 2) {
    auto v = sexp_value(e.list[1]);
    if (v) return Rational(-*v);
    return std::nullopt;
  }
  if (op == "/" && e.list.size() == 3) {
    auto a = sexp_value(e.list[1]), b = sexp_value(e.list[2]);
    if (!a || !b || sgn(*b) == 0) return std::nullopt;
    return Rational(*a / *b);
  }
  return std::nullopt;
}

}  // namespace

SmtAnswer parse_smt_output(const std::string& output, const VarSet& vars) {
  SexpReader r(output);
  if (r.done()) throw ProtocolError("empty solver output");
  Sexp head = r.read();
  SmtAnswer ans;
  if (head.is_list) {
    std::string msg = head.list.size() > 1 ? head.list[1].atom : "";
    throw ProtocolError("solver reported " + (head.list.empty() ? std::string("()") : head.list[0].atom) + " " + msg);
  }
  if (head.atom == "unsat") {
    ans.status = SmtStatus::Unsat;
    return ans;
  }
  if (head.atom == "unknown" || head.atom == "timeout") {
    ans.status = SmtStatus::Unknown;
    ans.reason = "solver answered " + head.atom;
    return ans;
  }
  if (head.atom != "sat") throw ProtocolError("unexpected solver answer '" + head.atom + "'");
  ans.status = SmtStatus::Sat;
  if (r.done()) {
    ans.reason = "no model";
    return ans;
  }
  Sexp model = r.read();
  if (!model.is_list) throw ProtocolError("malformed model");
  size_t start = !model.list.empty() && !model.list[0].is_list && model.list[0].atom == "model" ? 1 : 0;
  ExactState s;
  for (const auto& v : vars) s[v] = Rational(0);
  for (size_t i = start; i < model.list.size(); ++i) {
    const Sexp& def = model.list[i];
    if (!def.is_list || def.list.size() != 5 || def.list[0].atom != "define-fun")
      throw ProtocolError("malformed model entry");
    std::string name = def.list[1].atom;
    if (name.size() >= 2 && name.front() == '|' && name.back() == '|') name = name.substr(1, name.size() - 2);
    auto value = sexp_value(def.list[4]);
    if (!value) {
      ans.reason = "model value for '" + name + "' is not rational";
      return ans;
    }
    s[var_from_key(name)] = *value;
  }
  ans.model = std::move(s);
  return ans;
}

SmtAnswer run_smt(const SmtConfig& cfg, const Formula& negated_goal, const VarSet& vars) {
  if (!cfg.enabled()) throw SolverUnavailable("no SMT solver configured");
  static std::mutex serial;
  std::lock_guard<std::mutex> lock(serial);

  std::string script = smt_script(negated_goal, vars);
  if (!cfg.log_dir.empty()) {
    static std::atomic<unsigned> counter{0};
    std::filesystem::create_directories(cfg.log_dir);
    std::ofstream(std::filesystem::path(cfg.log_dir) / ("query-" + std::to_string(counter++) + ".smt2")) << script;
  }

  std::vector<std::string> argv{cfg.path};
  argv.insert(argv.end(), cfg.args.begin(), cfg.args.end());
  std::unique_ptr<Subprocess> proc;
  try {
    proc = std::make_unique<Subprocess>(argv);
  } catch (const Error& e) {
    throw SolverUnavailable(e.what());
  }
  proc->write(script);
  proc->close_stdin();
  auto out = proc->read_all(std::chrono::milliseconds(cfg.timeout_ms));
  if (!out) {
    proc->kill();
    proc->wait();
    SmtAnswer a;
    a.reason = "solver timed out after " + std::to_string(cfg.timeout_ms) + " ms";
    return a;
  }
  int status = proc->wait();
  if (status == 127) throw SolverUnavailable("solver '" + cfg.path + "' could not be executed");
  return parse_smt_output(*out, vars);
}

}  // namespace dl
