#include "logsymp/scalar.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace logsymp {

Chart::Chart(std::vector<std::string> coordinate_names, std::vector<int> divisor_indices)
    : names(std::move(coordinate_names)), divisor(std::move(divisor_indices)) {
  if (dim() > kMaxVars) throw std::invalid_argument("chart has too many coordinates");
  std::set<std::string> seen(names.begin(), names.end());
  if (seen.size() != names.size()) throw std::invalid_argument("coordinate names must be unique");
  std::sort(divisor.begin(), divisor.end());
  divisor.erase(std::unique(divisor.begin(), divisor.end()), divisor.end());
  for (int i : divisor)
    if (i < 0 || i >= dim()) throw std::invalid_argument("divisor index outside the chart");
}

int Chart::index_of(const std::string& name) const {
  for (int i = 0; i < dim(); ++i)
    if (names[i] == name) return i;
  return -1;
}

bool Chart::in_divisor(int i) const { return std::binary_search(divisor.begin(), divisor.end(), i); }

Scalar::Scalar(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw std::domain_error("division by zero");
  canonicalize();
}

void Scalar::canonicalize() {
  if (num_.is_zero()) {
    den_ = Polynomial(1);
    return;
  }
  if (!den_.is_constant()) {
    Polynomial g = gcd(num_, den_);
    if (!g.is_constant()) {
      num_ = divide_exact(num_, g);
      den_ = divide_exact(den_, g);
    }
  }
  const mpq_class lc = den_.leading().c;
  if (lc != 1) {
    mpq_class inv = 1 / lc;
    num_ = num_.scaled(inv);
    den_ = den_.scaled(inv);
  }
}

mpq_class Scalar::constant_value() const {
  if (!is_constant()) throw std::logic_error("scalar is not constant");
  return num_.constant_term();
}

Scalar Scalar::operator-() const {
  Scalar r = *this;
  r.num_ = -r.num_;
  return r;
}

Scalar Scalar::operator+(const Scalar& o) const {
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  if (den_.is_one() && o.den_.is_one()) return Scalar(num_ + o.num_);
  if (den_ == o.den_) return Scalar(num_ + o.num_, den_);
  if (o.den_.is_one()) return Scalar(num_ + o.num_ * den_, den_);
  if (den_.is_one()) return Scalar(num_ * o.den_ + o.num_, o.den_);
  Polynomial g = gcd(den_, o.den_);
  if (g.is_constant()) return Scalar(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
  Polynomial a = divide_exact(den_, g), b = divide_exact(o.den_, g);
  return Scalar(num_ * b + o.num_ * a, den_ * b);
}

Scalar Scalar::operator-(const Scalar& o) const { return *this + (-o); }

Scalar Scalar::operator*(const Scalar& o) const {
  if (is_zero() || o.is_zero()) return Scalar();
  if (den_.is_one() && o.den_.is_one()) return Scalar(num_ * o.num_);
  // Cross-cancel so the product is already reduced.
  Polynomial n1 = num_, d1 = den_, n2 = o.num_, d2 = o.den_;
  if (!d2.is_one()) {
    Polynomial g = gcd(n1, d2);
    if (!g.is_constant()) {
      n1 = divide_exact(n1, g);
      d2 = divide_exact(d2, g);
    }
  }
  if (!d1.is_one()) {
    Polynomial g = gcd(n2, d1);
    if (!g.is_constant()) {
      n2 = divide_exact(n2, g);
      d1 = divide_exact(d1, g);
    }
  }
  Scalar r;
  r.num_ = n1 * n2;
  r.den_ = d1 * d2;
  const mpq_class lc = r.den_.leading().c;
  if (lc != 1) {
    mpq_class inv = 1 / lc;
    r.num_ = r.num_.scaled(inv);
    r.den_ = r.den_.scaled(inv);
  }
  return r;
}

Scalar Scalar::operator/(const Scalar& o) const {
  if (o.is_zero()) throw std::domain_error("division by zero");
  Scalar inv;
  inv.num_ = o.den_;
  inv.den_ = o.num_;
  const mpq_class lc = inv.den_.leading().c;
  if (lc != 1) {
    mpq_class s = 1 / lc;
    inv.num_ = inv.num_.scaled(s);
    inv.den_ = inv.den_.scaled(s);
  }
  return *this * inv;
}

Scalar Scalar::pow(int e) const {
  if (e < 0) return Scalar(1) / pow(-e);
  Scalar r;
  r.num_ = num_.pow(static_cast<unsigned>(e));
  r.den_ = den_.pow(static_cast<unsigned>(e));
  if (r.num_.is_zero()) r.den_ = Polynomial(1);
  return r;
}

Scalar Scalar::derivative(int var) const {
  if (den_.is_one()) return Scalar(num_.derivative(var));
  Polynomial dn = num_.derivative(var), dd = den_.derivative(var);
  if (dd.is_zero()) return Scalar(dn, den_);
  return Scalar(dn * den_ - num_ * dd, den_ * den_);
}

mpq_class Scalar::evaluate(const std::vector<mpq_class>& point) const {
  mpq_class d = den_.evaluate(point);
  if (d == 0) throw PoleError("pole: denominator vanishes at the evaluation point");
  return num_.evaluate(point) / d;
}

double Scalar::evaluate(const std::vector<double>& point) const { return evaluate(point.data()); }

double Scalar::evaluate(const double* point) const {
  double d = den_.evaluate(point);
  if (d == 0.0 || !std::isfinite(d)) throw PoleError("pole: denominator vanishes at the evaluation point");
  return num_.evaluate(point) / d;
}

namespace {

Scalar substitute_poly(const Polynomial& p, const std::vector<Scalar>& images, std::vector<std::vector<Scalar>>& powers) {
  Scalar sum;
  for (const auto& t : p.terms()) {
    Scalar term(t.c);
    Monomial rest;
    for (int i = 0; i < kMaxVars; ++i) {
      unsigned e = t.m.exp[i];
      if (!e) continue;
      if (i < static_cast<int>(images.size())) {
        auto& cache = powers[i];
        if (cache.empty()) cache.push_back(Scalar(1));
        while (cache.size() <= e) cache.push_back(cache.back() * images[i]);
        term *= cache[e];
      } else {
        rest.exp[i] = static_cast<std::uint16_t>(e);
        rest.degree += e;
      }
    }
    if (rest.degree) term *= Scalar(Polynomial::monomial(rest, 1));
    sum += term;
  }
  return sum;
}

}  // namespace

Scalar Scalar::substitute(const std::vector<Scalar>& images) const {
  std::vector<std::vector<Scalar>> powers(images.size());
  Scalar n = substitute_poly(num_, images, powers);
  if (den_.is_one()) return n;
  return n / substitute_poly(den_, images, powers);
}

Scalar Scalar::reindex(const std::vector<int>& map) const {
  auto remap = [&](const Polynomial& p) {
    std::vector<Polynomial::Term> terms;
    terms.reserve(p.size());
    for (const auto& t : p.terms()) {
      Polynomial::Term s{Monomial{}, t.c};
      for (int i = 0; i < kMaxVars; ++i) {
        if (!t.m.exp[i]) continue;
        if (i >= static_cast<int>(map.size()) || map[i] < 0 || map[i] >= kMaxVars)
          throw std::out_of_range("reindex map does not cover a used variable");
        s.m.exp[map[i]] = static_cast<std::uint16_t>(s.m.exp[map[i]] + t.m.exp[i]);
      }
      s.m.degree = t.m.degree;
      terms.push_back(std::move(s));
    }
    return Polynomial::from_terms(std::move(terms));
  };
  if (den_.is_one()) return Scalar(remap(num_));
  return Scalar(remap(num_), remap(den_));
}

std::string Scalar::to_string(const Chart& chart) const { return to_string(chart.names); }

std::string Scalar::to_string(const std::vector<std::string>& names) const {
  if (den_.is_one()) return num_.to_string(names);
  return "(" + num_.to_string(names) + ")/(" + den_.to_string(names) + ")";
}

namespace {

class Parser {
 public:
  Parser(const std::string& text, const Chart& chart) : s_(text), chart_(chart) {}

  Scalar parse() {
    Scalar r = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
    return r;
  }

 private:
  const std::string& s_;
  const Chart& chart_;
  std::size_t pos_ = 0;

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Scalar expr() {
    Scalar r = term();
    while (true) {
      if (accept('+')) {
        r += term();
      } else if (accept('-')) {
        r -= term();
      } else {
        return r;
      }
    }
  }

  Scalar term() {
    Scalar r = unary();
    while (true) {
      skip();
      std::size_t at = pos_;
      if (accept('*')) {
        r *= unary();
      } else if (accept('/')) {
        Scalar d = unary();
        if (d.is_zero()) throw ParseError("division by zero", at);
        r /= d;
      } else {
        return r;
      }
    }
  }

  Scalar unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Scalar power() {
    Scalar base = primary();
    if (accept('^')) {
      skip();
      std::size_t at = pos_;
      bool negative = accept('-');
      skip();
      if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
        throw ParseError("expected integer exponent", pos_);
      long e = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        e = e * 10 + (s_[pos_++] - '0');
        if (e > 4096) throw ParseError("exponent too large", at);
      }
      if (negative && base.is_zero()) throw ParseError("division by zero", at);
      return base.pow(negative ? -static_cast<int>(e) : static_cast<int>(e));
    }
    return base;
  }

  Scalar primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of expression", pos_);
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Scalar r = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return r;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      return Scalar(mpq_class(mpz_class(s_.substr(start, pos_ - start))));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string name = s_.substr(start, pos_ - start);
      int idx = chart_.index_of(name);
      if (idx < 0) throw ParseError("unknown identifier '" + name + "'", start);
      return Scalar::variable(idx);
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }
};

}  // namespace

Scalar parse_scalar(const std::string& text, const Chart& chart) { return Parser(text, chart).parse(); }

mpq_class parse_rational(const std::string& raw) {
  std::string text;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) text += c;
  if (text.empty()) throw ParseError("empty number", 0);
  auto dot = text.find('.');
  try {
    if (dot != std::string::npos) {
      std::string digits = text.substr(0, dot) + text.substr(dot + 1);
      std::size_t decimals = text.size() - dot - 1;
      if (digits.empty() || digits == "-" || digits == "+") throw ParseError("malformed number '" + raw + "'", 0);
      if (digits[0] == '+') digits.erase(0, 1);
      mpz_class den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, decimals);
      mpq_class q(mpz_class(digits, 10), den);
      q.canonicalize();
      return q;
    }
    if (text[0] == '+') text.erase(0, 1);
    mpq_class q(text, 10);
    if (q.get_den() == 0) throw ParseError("zero denominator in '" + raw + "'", 0);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw ParseError("malformed number '" + raw + "'", 0);
  }
}

NumericScalar::NumericScalar(const Scalar& s) {
  auto compile = [](const Polynomial& p) {
    std::vector<Term> out;
    for (const auto& t : p.terms()) {
      Term term{t.c.get_d(), {}};
      for (int i = 0; i < kMaxVars; ++i)
        if (t.m.exp[i]) term.powers.emplace_back(i, t.m.exp[i]);
      out.push_back(std::move(term));
    }
    return out;
  };
  num_ = compile(s.num());
  den_one_ = s.den().is_one();
  if (!den_one_) den_ = compile(s.den());
}

double NumericScalar::eval(const std::vector<Term>& terms, const double* point) {
  double sum = 0;
  for (const auto& t : terms) {
    double v = t.c;
    for (const auto& [i, e] : t.powers) {
      double x = point[i];
      switch (e) {
        case 1: v *= x; break;
        case 2: v *= x * x; break;
        case 3: v *= x * x * x; break;
        default: v *= std::pow(x, e);
      }
    }
    sum += v;
  }
  return sum;
}

double NumericScalar::operator()(const double* point) const {
  double n = eval(num_, point);
  if (den_one_) return n;
  double d = eval(den_, point);
  if (d == 0.0 || !std::isfinite(d)) throw PoleError("pole: denominator vanishes at the evaluation point");
  return n / d;
}

}  // namespace logsymp
