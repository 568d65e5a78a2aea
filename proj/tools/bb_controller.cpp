// Bouncing-ball controller speaking the sandbox line protocol.
//
//   compliant    reverses v when x = 0, otherwise leaves it
//   adversarial  never reverses
//   garbage      answers with malformed records
//   silent       reads but never answers

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <thread>

#include "dl/records.hpp"

namespace {

// Text of the number following "<key>": inside the state object.
std::string number_text(const std::string& line, const std::string& key) {
  auto state = line.find("\"state\"");
  auto at = line.find("\"" + key + "\"", state == std::string::npos ? 0 : state);
  if (at == std::string::npos) return {};
  auto colon = line.find(':', at);
  auto begin = line.find_first_not_of(' ', colon + 1);
  auto end = line.find_first_of(",} ", begin);
  return line.substr(begin, end - begin);
}

std::string negate(const std::string& num) {
  if (num.empty()) return num;
  if (num[0] == '-') return num.substr(1);
  if (dl::parse_decimal(num) == dl::Rational(0)) return num;
  return "-" + num;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bb_controller: bouncing-ball controller for the sandbox"};
  std::string mode = "compliant";
  app.add_option("--mode", mode)->check(CLI::IsMember({"compliant", "adversarial", "garbage", "silent"}));
  CLI11_PARSE(app, argc, argv);

  for (std::string line; std::getline(std::cin, line);) {
    if (mode == "silent") continue;
    if (mode == "garbage") {
      std::cout << "{\"set\":{\"v\":\"fast\"}}" << std::endl;
      continue;
    }
    std::string x = number_text(line, "x");
    std::string v = number_text(line, "v");
    auto xv = dl::parse_decimal(x);
    if (!xv || !dl::parse_decimal(v)) {
      std::cerr << "bb_controller: cannot read state: " << line << "\n";
      return 1;
    }
    bool bounce = mode == "compliant" && *xv == 0;
    std::cout << "{\"set\":{\"v\":" << (bounce ? negate(v) : v) << "}}" << std::endl;
  }
  return 0;
}
