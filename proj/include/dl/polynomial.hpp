#pragma once

// Canonical sparse multivariate polynomials over exact rationals. Two
// polynomials are mathematically equal iff their term maps are equal.

#include <map>
#include <set>
#include <string>

#include "dl/syntax.hpp"

namespace dl {

// Variable key ("x", "x'") to positive exponent.
using Monomial = std::map<std::string, unsigned>;

class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(const Rational& c);  // NOLINT: constants convert implicitly
  static Polynomial var(const std::string& key);

  const std::map<Monomial, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational constant_term() const;
  unsigned total_degree() const;
  unsigned degree_in(const std::string& key) const;
  std::set<std::string> variables() const;

  // Coefficients of powers of `key`: p = sum_k coeff[k] * key^k.
  std::map<unsigned, Polynomial> coefficients_in(const std::string& key) const;

  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  Polynomial pow(unsigned n) const;
  Polynomial scaled(const Rational& c) const;

  Polynomial substitute(const std::string& key, const Polynomial& by) const;
  Polynomial derivative(const std::string& key) const;

  template <class Num, class Lookup>
  Num evaluate(Lookup&& value_of) const;

  bool operator==(const Polynomial& o) const { return terms_ == o.terms_; }

  // Highest-degree-first rendering as a term; zero gives Lit(0).
  Term to_term() const;
  std::string to_string() const;

 private:
  void add_term(const Monomial& m, const Rational& c);
  std::map<Monomial, Rational> terms_;
};

Polynomial poly_normalize(const Term& t);
bool poly_zero(const Term& a, const Term& b);

Rational monomial_value(const Monomial& m, const std::map<std::string, Rational>& values);

template <class Num, class Lookup>
Num Polynomial::evaluate(Lookup&& value_of) const {
  Num total(0);
  for (const auto& [m, c] : terms_) {
    Num prod(c);
    for (const auto& [v, e] : m)
      for (unsigned i = 0; i < e; ++i) prod *= value_of(v);
    total += prod;
  }
  return total;
}

}  // namespace dl
