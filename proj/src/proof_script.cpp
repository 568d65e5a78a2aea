#include "dl/proof_script.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "dl/model_file.hpp"
#include "dl/parser.hpp"

namespace dl {

namespace {

std::string strip_comment(const std::string& line) {
  auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

int brace_balance(const std::string& s) {
  int depth = 0;
  for (char c : s) depth += c == '{' ? 1 : c == '}' ? -1 : 0;
  return depth;
}

// Splits on ';' outside parentheses and braces.
std::vector<std::pair<std::string, size_t>> split_args(const std::string& body) {
  std::vector<std::pair<std::string, size_t>> out;
  int depth = 0;
  size_t start = 0;
  for (size_t i = 0; i <= body.size(); ++i) {
    char c = i < body.size() ? body[i] : ';';
    if (c == '(' || c == '{' || c == '[') ++depth;
    else if (c == ')' || c == '}' || c == ']') --depth;
    else if (c == ';' && depth == 0) {
      out.emplace_back(body.substr(start, i - start), start);
      start = i + 1;
    }
  }
  return out;
}

class StepReader {
 public:
  StepReader(std::string text, int line) : text_(std::move(text)), line_(line) {}

  ProofStep read() {
    ProofStep step;
    step.line = line_;
    word("goal");
    step.goal = number();
    skip();
    if (!eat(':')) fail("expected ':' after goal id");
    step.rule = ident();
    skip();
    if (peek_word() == "at") {
      word("at");
      std::string side = ident();
      if (side != "ante" && side != "succ") fail("target side must be 'ante' or 'succ'");
      step.target = Target{side == "ante" ? Side::Antecedent : Side::Succedent, static_cast<size_t>(number())};
      skip();
    }
    if (peek_word() == "with") {
      word("with");
      skip();
      if (!eat('{')) fail("expected '{' after 'with'");
      size_t close = text_.rfind('}');
      if (close == std::string::npos || close < pos_) fail("unterminated 'with' block");
      parse_args(text_.substr(pos_, close - pos_), pos_, step.args);
      pos_ = close + 1;
      skip();
    }
    if (pos_ < text_.size()) fail("unexpected text after step");
    return step;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, size_t at = std::string::npos) const {
    throw SyntaxError(msg, line_, static_cast<int>((at == std::string::npos ? pos_ : at) + 1));
  }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::string peek_word() {
    skip();
    size_t e = pos_;
    while (e < text_.size() && std::isalnum(static_cast<unsigned char>(text_[e]))) ++e;
    return text_.substr(pos_, e - pos_);
  }
  std::string ident() {
    std::string w = peek_word();
    if (w.empty()) fail("expected a name");
    pos_ += w.size();
    return w;
  }
  void word(const std::string& w) {
    if (peek_word() != w) fail("expected '" + w + "'");
    pos_ += w.size();
  }
  int number() {
    std::string w = peek_word();
    if (w.empty() || !std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      fail("expected a number");
    pos_ += w.size();
    return std::stoi(w);
  }

  void parse_args(const std::string& body, size_t offset, RuleArgs& args) {
    for (const auto& [item, at] : split_args(body)) {
      size_t eq = item.find('=');
      std::string key = item.substr(0, eq);
      key.erase(0, key.find_first_not_of(" \t\n"));
      key.erase(key.find_last_not_of(" \t\n") + 1);
      if (key.empty() && eq == std::string::npos) continue;
      if (eq == std::string::npos) fail("expected 'key = value'", offset + at);
      size_t vstart = offset + at + eq + 1;
      std::string value = item.substr(eq + 1);
      try {
        Parser p(tokenize(value));
        if (key == "inv") args.invariant = p.formula();
        else if (key == "B" || key == "post" || key == "P") args.intermediate = p.formula();
        else if (key == "witness") args.witness = p.term();
        else if (key == "sol") args.solution = p.solution();
        else fail("unknown argument '" + key + "'", offset + at);
        p.expect_end();
      } catch (const SyntaxError& e) {
        throw SyntaxError(key + ": " + e.detail(), line_, static_cast<int>(vstart) + e.column(), e.expected());
      }
    }
  }

  std::string text_;
  int line_;
  size_t pos_ = 0;
};

}  // namespace

std::vector<ProofStep> parse_proof_script(std::string_view src) {
  std::istringstream in{std::string(src)};
  std::vector<ProofStep> steps;
  std::string pending;
  int pending_line = 0, lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    std::string code = strip_comment(line);
    if (pending.empty()) {
      if (code.find_first_not_of(" \t\r") == std::string::npos) continue;
      pending_line = lineno;
      pending = code;
    } else {
      pending += "\n" + code;
    }
    if (brace_balance(pending) > 0) continue;
    for (char& c : pending)
      if (c == '\n' || c == '\r') c = ' ';
    steps.push_back(StepReader(pending, pending_line).read());
    pending.clear();
  }
  if (!pending.empty()) throw SyntaxError("unterminated 'with' block", pending_line, 1);
  return steps;
}

std::vector<ProofStep> load_proof_script(const std::filesystem::path& path) {
  return parse_proof_script(read_text_file(path));
}

}  // namespace dl
