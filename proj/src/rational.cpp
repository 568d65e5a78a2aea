#include "dl/rational.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace dl {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view text) {
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  Rational result;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = text.substr(0, slash);
    auto den = text.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) return std::nullopt;
    mpz_class d(std::string(den), 10);
    if (d == 0) return std::nullopt;
    result = Rational(mpz_class(std::string(num), 10), d);
    result.canonicalize();
  } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
    auto whole = text.substr(0, dot);
    auto frac = text.substr(dot + 1);
    if (whole.empty()) whole = "0";
    if (!all_digits(whole) || !all_digits(frac)) return std::nullopt;
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    result = Rational(mpz_class(std::string(whole) + std::string(frac), 10), scale);
    result.canonicalize();
  } else {
    if (!all_digits(text)) return std::nullopt;
    result = Rational(mpz_class(std::string(text), 10));
  }
  if (negative) result = -result;
  return result;
}

std::string to_string(const Rational& r) { return r.get_str(); }

Rational round_decimal(const Rational& r, unsigned digits) {
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
  Rational scaled = abs(r) * scale;
  // floor(|r| * 10^d + 1/2)
  Rational shifted = scaled + Rational(1, 2);
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
  Rational out(q, scale);
  out.canonicalize();
  return sgn(r) < 0 ? Rational(-out) : out;
}

std::string to_decimal(const Rational& r, unsigned digits) {
  Rational rounded = round_decimal(r, digits);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
  Rational scaled = abs(rounded) * scale;
  mpz_class n = scaled.get_num() / scaled.get_den();
  std::string digits_str = n.get_str();
  if (digits_str.size() <= digits) digits_str.insert(0, digits + 1 - digits_str.size(), '0');
  std::string whole = digits_str.substr(0, digits_str.size() - digits);
  std::string frac = digits_str.substr(digits_str.size() - digits);
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  std::string out = sgn(rounded) < 0 ? "-" : "";
  out += whole;
  if (!frac.empty()) out += "." + frac;
  return out;
}

Rational from_double(double d) {
  if (!std::isfinite(d)) throw std::domain_error("non-finite value has no rational form");
  return Rational(d);
}

Rational pow(const Rational& base, unsigned exponent) {
  Rational out(1);
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
  out.canonicalize();
  return out;
}

}  // namespace dl
