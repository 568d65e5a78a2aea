#include "dl/records.hpp"

#include <cctype>
#include <istream>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

namespace dl {

std::optional<Rational> parse_decimal(std::string_view text) {
  size_t i = 0;
  if (i < text.size() && text[i] == '-') ++i;
  size_t int_start = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (i == int_start) return std::nullopt;
  if (i < text.size() && text[i] == '.') {
    size_t frac_start = ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    size_t frac = i - frac_start;
    if (frac == 0 || frac > kWireDigits) return std::nullopt;
  }
  if (i != text.size()) return std::nullopt;
  return parse_rational(text);
}

std::string format_decimal(const Rational& r) { return to_decimal(r, kWireDigits); }

std::string state_json(const ExactState& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : s) {
    if (!first) out += ",";
    first = false;
    out += "\"" + k.key() + "\":" + format_decimal(v);
  }
  return out + "}";
}

std::string state_message(size_t cycle, const ExactState& s) {
  return "{\"cycle\":" + std::to_string(cycle) + ",\"state\":" + state_json(s) + "}";
}

namespace {

class WireReader {
 public:
  explicit WireReader(std::string_view s) : s_(s) {}

  void expect(char c) {
    skip();
    if (i_ >= s_.size() || s_[i_] != c)
      throw ProtocolError(std::string("expected '") + c + "' at offset " + std::to_string(i_));
    ++i_;
  }
  bool peek(char c) {
    skip();
    return i_ < s_.size() && s_[i_] == c;
  }
  std::string key() {
    expect('"');
    size_t e = s_.find('"', i_);
    if (e == std::string_view::npos) throw ProtocolError("unterminated key");
    std::string k(s_.substr(i_, e - i_));
    i_ = e + 1;
    return k;
  }
  Rational number() {
    skip();
    size_t b = i_;
    while (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '-' || s_[i_] == '.')) ++i_;
    auto r = parse_decimal(s_.substr(b, i_ - b));
    if (!r) throw ProtocolError("malformed decimal '" + std::string(s_.substr(b, i_ - b)) + "'");
    return *r;
  }
  void end() {
    skip();
    if (i_ != s_.size()) throw ProtocolError("trailing text after record");
  }

 private:
  void skip() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\r')) ++i_;
  }
  std::string_view s_;
  size_t i_ = 0;
};

}  // namespace

ExactState parse_set_message(std::string_view line, const VarSet& writable) {
  WireReader r(line);
  r.expect('{');
  if (r.key() != "set") throw ProtocolError("expected key \"set\"");
  r.expect(':');
  r.expect('{');
  ExactState out;
  if (!r.peek('}')) {
    do {
      std::string k = r.key();
      VarName v{k};
      if (!writable.count(v)) throw ProtocolError("controller may not write '" + k + "'");
      r.expect(':');
      if (!out.emplace(v, r.number()).second) throw ProtocolError("'" + k + "' set twice");
    } while (r.peek(',') && (r.expect(','), true));
  }
  r.expect('}');
  r.expect('}');
  r.end();
  return out;
}

// ------------------------------------------------------------------- log

namespace {

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace

std::string CycleRecord::to_json() const {
  std::ostringstream os;
  os << "{\"cycle\":" << cycle << ",\"prior\":" << state_json(prior)
     << ",\"proposal\":" << (proposal ? state_json(*proposal) : "null")
     << ",\"controller_monitor\":" << (controller_ok ? "true" : "false") << ",\"action\":" << quoted(action);
  if (!reason.empty()) os << ",\"reason\":" << quoted(reason);
  os << ",\"actuated\":" << state_json(actuated) << ",\"posterior\":" << state_json(posterior)
     << ",\"model_monitor\":" << (model_ok ? (*model_ok ? "true" : "false") : "null") << "}";
  return os.str();
}

std::string RunSummary::to_json() const {
  std::ostringstream os;
  os << "{\"summary\":{\"cycles\":" << cycles << ",\"vetoes\":" << vetoes << ",\"violations\":" << violations
     << ",\"first_violation\":" << (first_violation ? std::to_string(*first_violation) : "null")
     << ",\"safe\":" << (safe ? "true" : "false") << ",\"precondition\":" << (precondition ? "true" : "false")
     << ",\"halted\":" << (halted ? "true" : "false");
  if (halted) os << ",\"halt_reason\":" << quoted(halt_reason);
  os << "}}";
  return os.str();
}

namespace {

// Minimal value tree that keeps numbers as their source text.
struct Value {
  enum class Kind { Null, Bool, Number, String, Object, Array } kind = Kind::Null;
  bool boolean = false;
  std::string text;
  std::map<std::string, Value> object;
  std::vector<Value> array;

  static Value of(Kind k) {
    Value v;
    v.kind = k;
    return v;
  }
};

class Builder : public nlohmann::json_sax<nlohmann::json> {
 public:
  Value root;

  bool null() override { return put(Value{}); }
  bool boolean(bool b) override {
    Value v = Value::of(Value::Kind::Bool);
    v.boolean = b;
    return put(std::move(v));
  }
  bool number_integer(number_integer_t n) override { return number(std::to_string(n)); }
  bool number_unsigned(number_unsigned_t n) override { return number(std::to_string(n)); }
  bool number_float(number_float_t, const string_t& s) override { return number(s); }
  bool string(string_t& s) override {
    Value v = Value::of(Value::Kind::String);
    v.text = s;
    return put(std::move(v));
  }
  bool binary(binary_t&) override { return false; }
  bool start_object(std::size_t) override {
    stack_.push_back({Value::of(Value::Kind::Object), pending_key_});
    return true;
  }
  bool key(string_t& k) override {
    pending_key_ = k;
    return true;
  }
  bool end_object() override { return close(); }
  bool start_array(std::size_t) override {
    stack_.push_back({Value::of(Value::Kind::Array), pending_key_});
    return true;
  }
  bool end_array() override { return close(); }
  bool parse_error(std::size_t pos, const std::string&, const nlohmann::detail::exception& e) override {
    error = "offset " + std::to_string(pos) + ": " + e.what();
    return false;
  }
  std::string error;

 private:
  bool number(const std::string& s) {
    Value v = Value::of(Value::Kind::Number);
    v.text = s;
    return put(std::move(v));
  }
  bool put(Value v) {
    if (stack_.empty()) {
      root = std::move(v);
      return true;
    }
    Value& top = stack_.back().first;
    if (top.kind == Value::Kind::Object) top.object[pending_key_] = std::move(v);
    else top.array.push_back(std::move(v));
    return true;
  }
  bool close() {
    auto [v, key] = std::move(stack_.back());
    stack_.pop_back();
    pending_key_ = key;
    return put(std::move(v));
  }
  std::vector<std::pair<Value, std::string>> stack_;
  std::string pending_key_;
};

const Value& field(const Value& obj, const std::string& k) {
  auto it = obj.object.find(k);
  if (it == obj.object.end()) throw ProtocolError("log record lacks \"" + k + "\"");
  return it->second;
}

ExactState to_state(const Value& v) {
  if (v.kind != Value::Kind::Object) throw ProtocolError("expected a state object");
  ExactState s;
  for (const auto& [k, x] : v.object) {
    if (x.kind != Value::Kind::Number) throw ProtocolError("state value for '" + k + "' is not a number");
    auto r = parse_decimal(x.text);
    if (!r) throw ProtocolError("state value '" + x.text + "' is not a 12-digit decimal");
    s[var_from_key(k)] = *r;
  }
  return s;
}

size_t to_count(const Value& v) {
  if (v.kind != Value::Kind::Number) throw ProtocolError("expected a count");
  return std::stoul(v.text);
}

bool to_bool(const Value& v) {
  if (v.kind != Value::Kind::Bool) throw ProtocolError("expected a boolean");
  return v.boolean;
}

}  // namespace

RunLog read_run_log(std::istream& in) {
  RunLog log;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Builder b;
    if (!nlohmann::json::sax_parse(line, &b))
      throw ProtocolError("log line " + std::to_string(lineno) + ": " + b.error);
    const Value& v = b.root;
    if (v.kind != Value::Kind::Object) throw ProtocolError("log line " + std::to_string(lineno) + " is not an object");
    if (v.object.count("summary")) {
      const Value& s = v.object.at("summary");
      RunSummary sum;
      sum.cycles = to_count(field(s, "cycles"));
      sum.vetoes = to_count(field(s, "vetoes"));
      sum.violations = to_count(field(s, "violations"));
      const Value& fv = field(s, "first_violation");
      if (fv.kind != Value::Kind::Null) sum.first_violation = to_count(fv);
      sum.safe = to_bool(field(s, "safe"));
      sum.precondition = to_bool(field(s, "precondition"));
      sum.halted = to_bool(field(s, "halted"));
      if (s.object.count("halt_reason")) sum.halt_reason = s.object.at("halt_reason").text;
      log.summary = sum;
      continue;
    }
    CycleRecord r;
    r.cycle = to_count(field(v, "cycle"));
    r.prior = to_state(field(v, "prior"));
    const Value& p = field(v, "proposal");
    if (p.kind != Value::Kind::Null) r.proposal = to_state(p);
    r.controller_ok = to_bool(field(v, "controller_monitor"));
    r.action = field(v, "action").text;
    if (v.object.count("reason")) r.reason = v.object.at("reason").text;
    r.actuated = to_state(field(v, "actuated"));
    r.posterior = to_state(field(v, "posterior"));
    const Value& m = field(v, "model_monitor");
    if (m.kind != Value::Kind::Null) r.model_ok = to_bool(m);
    log.cycles.push_back(std::move(r));
  }
  return log;
}

}  // namespace dl
