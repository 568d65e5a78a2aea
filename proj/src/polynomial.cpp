#include "dl/polynomial.hpp"

#include <algorithm>
#include <stdexcept>

namespace dl {

Polynomial::Polynomial(const Rational& c) {
  if (sgn(c) != 0) terms_.emplace(Monomial{}, c);
}

Polynomial Polynomial::var(const std::string& key) {
  Polynomial p;
  p.terms_.emplace(Monomial{{key, 1}}, Rational(1));
  return p;
}

bool Polynomial::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

Rational Polynomial::constant_term() const {
  auto it = terms_.find(Monomial{});
  return it == terms_.end() ? Rational(0) : it->second;
}

unsigned Polynomial::total_degree() const {
  unsigned best = 0;
  for (const auto& [m, c] : terms_) {
    unsigned d = 0;
    for (const auto& [v, e] : m) d += e;
    best = std::max(best, d);
  }
  return best;
}

unsigned Polynomial::degree_in(const std::string& key) const {
  unsigned best = 0;
  for (const auto& [m, c] : terms_) {
    auto it = m.find(key);
    if (it != m.end()) best = std::max(best, it->second);
  }
  return best;
}

std::set<std::string> Polynomial::variables() const {
  std::set<std::string> out;
  for (const auto& [m, c] : terms_)
    for (const auto& [v, e] : m) out.insert(v);
  return out;
}

std::map<unsigned, Polynomial> Polynomial::coefficients_in(const std::string& key) const {
  std::map<unsigned, Polynomial> out;
  for (const auto& [m, c] : terms_) {
    Monomial rest = m;
    unsigned k = 0;
    if (auto it = rest.find(key); it != rest.end()) {
      k = it->second;
      rest.erase(it);
    }
    out[k].add_term(rest, c);
  }
  for (auto it = out.begin(); it != out.end();) it = it->second.is_zero() ? out.erase(it) : std::next(it);
  return out;
}

void Polynomial::add_term(const Monomial& m, const Rational& c) {
  if (sgn(c) == 0) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (inserted) return;
  it->second += c;
  if (sgn(it->second) == 0) terms_.erase(it);
}

Polynomial Polynomial::operator-() const {
  Polynomial out;
  for (const auto& [m, c] : terms_) out.terms_.emplace(m, -c);
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial out;
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) {
      Monomial m = ma;
      for (const auto& [v, e] : mb) m[v] += e;
      out.add_term(m, ca * cb);
    }
  return out;
}

Polynomial Polynomial::pow(unsigned n) const {
  Polynomial out(Rational(1)), base = *this;
  while (n) {
    if (n & 1u) out = out * base;
    n >>= 1u;
    if (n) base = base * base;
  }
  return out;
}

Polynomial Polynomial::scaled(const Rational& c) const {
  Polynomial out;
  if (sgn(c) == 0) return out;
  for (const auto& [m, k] : terms_) out.terms_.emplace(m, k * c);
  return out;
}

Polynomial Polynomial::substitute(const std::string& key, const Polynomial& by) const {
  Polynomial out;
  for (const auto& [k, coeff] : coefficients_in(key)) out += coeff * by.pow(k);
  return out;
}

Polynomial Polynomial::derivative(const std::string& key) const {
  Polynomial out;
  for (const auto& [m, c] : terms_) {
    auto it = m.find(key);
    if (it == m.end()) continue;
    Monomial rest = m;
    unsigned e = it->second;
    if (e == 1) rest.erase(key);
    else rest[key] = e - 1;
    out.add_term(rest, c * e);
  }
  return out;
}

Term Polynomial::to_term() const {
  if (terms_.empty()) return make_lit(0);
  std::vector<std::pair<Monomial, Rational>> ordered(terms_.begin(), terms_.end());
  auto degree = [](const Monomial& m) {
    unsigned d = 0;
    for (const auto& [v, e] : m) d += e;
    return d;
  };
  std::stable_sort(ordered.begin(), ordered.end(),
                   [&](const auto& a, const auto& b) { return degree(a.first) > degree(b.first); });
  Term out;
  for (const auto& [m, c] : ordered) {
    Term mono;
    for (const auto& [v, e] : m) {
      Term factor = make_var(var_from_key(v));
      if (e > 1) factor = make_pow(factor, e);
      mono = mono ? make_times(mono, factor) : factor;
    }
    Rational mag = abs(c);
    if (!mono) mono = make_lit(mag);
    else if (mag != 1) mono = make_times(make_lit(mag), mono);
    if (!out) out = sgn(c) < 0 ? make_neg(mono) : mono;
    else out = sgn(c) < 0 ? make_minus(out, mono) : make_plus(out, mono);
  }
  return out;
}

std::string Polynomial::to_string() const { return dl::to_string(to_term()); }

Polynomial poly_normalize(const Term& t) {
  switch (t->kind) {
    case TermKind::Var: return Polynomial::var(t->var.key());
    case TermKind::Lit: return Polynomial(t->value);
    case TermKind::Neg: return -poly_normalize(t->left);
    case TermKind::Plus: return poly_normalize(t->left) + poly_normalize(t->right);
    case TermKind::Minus: return poly_normalize(t->left) - poly_normalize(t->right);
    case TermKind::Times: return poly_normalize(t->left) * poly_normalize(t->right);
    case TermKind::Pow: return poly_normalize(t->left).pow(t->exponent);
  }
  throw std::logic_error("unreachable");
}

bool poly_zero(const Term& a, const Term& b) { return (poly_normalize(a) - poly_normalize(b)).is_zero(); }

Rational monomial_value(const Monomial& m, const std::map<std::string, Rational>& values) {
  Rational out(1);
  for (const auto& [v, e] : m) out *= pow(values.at(v), e);
  return out;
}

}  // namespace dl
