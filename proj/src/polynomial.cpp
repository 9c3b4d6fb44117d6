#include "logsymp/polynomial.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace logsymp {

Monomial Monomial::variable(int i, unsigned power) {
  if (i < 0 || i >= kMaxVars) throw std::out_of_range("variable index out of range");
  if (power > 0xffffu) throw std::overflow_error("exponent overflow");
  Monomial m;
  m.exp[i] = static_cast<std::uint16_t>(power);
  m.degree = power;
  return m;
}

bool Monomial::divides(const Monomial& o) const {
  if (degree > o.degree) return false;
  for (int i = 0; i < kMaxVars; ++i)
    if (exp[i] > o.exp[i]) return false;
  return true;
}

Monomial Monomial::operator*(const Monomial& o) const {
  Monomial r;
  for (int i = 0; i < kMaxVars; ++i) {
    unsigned e = unsigned(exp[i]) + o.exp[i];
    if (e > 0xffffu) throw std::overflow_error("exponent overflow");
    r.exp[i] = static_cast<std::uint16_t>(e);
  }
  r.degree = degree + o.degree;
  return r;
}

Monomial Monomial::quotient_of(const Monomial& o) const {
  Monomial r;
  for (int i = 0; i < kMaxVars; ++i) r.exp[i] = static_cast<std::uint16_t>(o.exp[i] - exp[i]);
  r.degree = o.degree - degree;
  return r;
}

std::uint32_t Monomial::variable_mask() const {
  std::uint32_t mask = 0;
  for (int i = 0; i < kMaxVars; ++i)
    if (exp[i]) mask |= 1u << i;
  return mask;
}

int grlex_compare(const Monomial& a, const Monomial& b) {
  if (a.degree != b.degree) return a.degree < b.degree ? -1 : 1;
  for (int i = 0; i < kMaxVars; ++i)
    if (a.exp[i] != b.exp[i]) return a.exp[i] < b.exp[i] ? -1 : 1;
  return 0;
}

namespace {
bool term_greater(const Polynomial::Term& a, const Polynomial::Term& b) {
  return grlex_compare(a.m, b.m) > 0;
}
}  // namespace

Polynomial::Polynomial(const mpq_class& c) {
  if (c != 0) {
    terms_.push_back({Monomial{}, c});
    terms_.back().c.canonicalize();
  }
}

Polynomial Polynomial::variable(int i) {
  Polynomial p;
  p.terms_.push_back({Monomial::variable(i), mpq_class(1)});
  return p;
}

Polynomial Polynomial::monomial(const Monomial& m, const mpq_class& c) {
  Polynomial p;
  if (c != 0) {
    p.terms_.push_back({m, c});
    p.terms_.back().c.canonicalize();
  }
  return p;
}

Polynomial Polynomial::from_terms(std::vector<Term> terms) {
  Polynomial p;
  p.terms_ = std::move(terms);
  for (auto& t : p.terms_) t.c.canonicalize();
  p.normalize();
  return p;
}

bool Polynomial::is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].m.degree == 0); }

bool Polynomial::is_one() const { return terms_.size() == 1 && terms_[0].m.degree == 0 && terms_[0].c == 1; }

mpq_class Polynomial::constant_term() const {
  if (!terms_.empty() && terms_.back().m.degree == 0) return terms_.back().c;
  return 0;
}

std::uint32_t Polynomial::variable_mask() const {
  std::uint32_t mask = 0;
  for (const auto& t : terms_) mask |= t.m.variable_mask();
  return mask;
}

std::uint32_t Polynomial::total_degree() const { return terms_.empty() ? 0 : terms_.front().m.degree; }

void Polynomial::normalize() {
  std::sort(terms_.begin(), terms_.end(), term_greater);
  std::size_t out = 0;
  for (std::size_t i = 0; i < terms_.size();) {
    Term acc = std::move(terms_[i]);
    std::size_t j = i + 1;
    while (j < terms_.size() && terms_[j].m == acc.m) {
      acc.c += terms_[j].c;
      ++j;
    }
    if (acc.c != 0) terms_[out++] = std::move(acc);
    i = j;
  }
  terms_.resize(out);
}

Polynomial Polynomial::operator-() const {
  Polynomial r = *this;
  for (auto& t : r.terms_) t.c = -t.c;
  return r;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r;
  r.terms_.reserve(terms_.size() + o.terms_.size());
  std::size_t i = 0, j = 0;
  while (i < terms_.size() && j < o.terms_.size()) {
    int cmp = grlex_compare(terms_[i].m, o.terms_[j].m);
    if (cmp > 0) {
      r.terms_.push_back(terms_[i++]);
    } else if (cmp < 0) {
      r.terms_.push_back(o.terms_[j++]);
    } else {
      mpq_class c = terms_[i].c + o.terms_[j].c;
      if (c != 0) r.terms_.push_back({terms_[i].m, c});
      ++i;
      ++j;
    }
  }
  for (; i < terms_.size(); ++i) r.terms_.push_back(terms_[i]);
  for (; j < o.terms_.size(); ++j) r.terms_.push_back(o.terms_[j]);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (is_zero() || o.is_zero()) return {};
  if (o.terms_.size() == 1) return times_monomial(o.terms_[0].m, o.terms_[0].c);
  if (terms_.size() == 1) return o.times_monomial(terms_[0].m, terms_[0].c);
  Polynomial r;
  r.terms_.reserve(terms_.size() * o.terms_.size());
  for (const auto& a : terms_)
    for (const auto& b : o.terms_) r.terms_.push_back({a.m * b.m, a.c * b.c});
  r.normalize();
  return r;
}

Polynomial Polynomial::scaled(const mpq_class& c) const {
  if (c == 0) return {};
  Polynomial r = *this;
  for (auto& t : r.terms_) t.c *= c;
  return r;
}

Polynomial Polynomial::times_monomial(const Monomial& m, const mpq_class& c) const {
  if (c == 0) return {};
  Polynomial r;
  r.terms_.reserve(terms_.size());
  for (const auto& t : terms_) r.terms_.push_back({t.m * m, t.c * c});
  return r;  // multiplication by a monomial preserves grlex order
}

Polynomial Polynomial::pow(unsigned e) const {
  Polynomial result(1), base = *this;
  while (e) {
    if (e & 1u) result *= base;
    e >>= 1;
    if (e) base *= base;
  }
  return result;
}

bool Polynomial::operator==(const Polynomial& o) const {
  if (terms_.size() != o.terms_.size()) return false;
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (terms_[i].m != o.terms_[i].m || terms_[i].c != o.terms_[i].c) return false;
  return true;
}

Polynomial Polynomial::derivative(int var) const {
  Polynomial r;
  for (const auto& t : terms_) {
    unsigned e = t.m.exp[var];
    if (e == 0) continue;
    Term d{t.m, t.c * e};
    d.m.exp[var] = static_cast<std::uint16_t>(e - 1);
    d.m.degree -= 1;
    r.terms_.push_back(std::move(d));
  }
  r.normalize();
  return r;
}

int Polynomial::degree_in(int var) const {
  int d = 0;
  for (const auto& t : terms_) d = std::max<int>(d, t.m.exp[var]);
  return is_zero() ? -1 : d;
}

std::vector<Polynomial> Polynomial::coefficients_in(int var) const {
  std::vector<Polynomial> out(std::max(degree_in(var), 0) + 1);
  for (const auto& t : terms_) {
    Term s = t;
    unsigned e = s.m.exp[var];
    s.m.exp[var] = 0;
    s.m.degree -= e;
    out[e].terms_.push_back(std::move(s));
  }
  for (auto& p : out) p.normalize();
  return out;
}

Polynomial Polynomial::from_coefficients_in(int var, const std::vector<Polynomial>& coeffs) {
  Polynomial r;
  for (std::size_t e = 0; e < coeffs.size(); ++e)
    for (const auto& t : coeffs[e].terms_) {
      Term s = t;
      s.m = s.m * Monomial::variable(var, static_cast<unsigned>(e));
      r.terms_.push_back(std::move(s));
    }
  r.normalize();
  return r;
}

mpq_class Polynomial::evaluate(const std::vector<mpq_class>& point) const {
  mpq_class sum = 0;
  for (const auto& t : terms_) {
    mpq_class v = t.c;
    for (int i = 0; i < kMaxVars && v != 0; ++i) {
      unsigned e = t.m.exp[i];
      if (!e) continue;
      if (i >= static_cast<int>(point.size())) throw std::out_of_range("point has too few coordinates");
      mpz_class num, den;
      mpz_pow_ui(num.get_mpz_t(), point[i].get_num_mpz_t(), e);
      mpz_pow_ui(den.get_mpz_t(), point[i].get_den_mpz_t(), e);
      mpq_class pw(num, den);
      v *= pw;
    }
    sum += v;
  }
  return sum;
}

double Polynomial::evaluate(const double* point) const {
  double sum = 0;
  for (const auto& t : terms_) {
    double v = t.c.get_d();
    for (int i = 0; i < kMaxVars; ++i) {
      unsigned e = t.m.exp[i];
      if (e) v *= std::pow(point[i], static_cast<int>(e));
    }
    sum += v;
  }
  return sum;
}

Polynomial Polynomial::primitive() const {
  if (is_zero()) return {};
  mpz_class den = 1, num = 0;
  for (const auto& t : terms_) {
    mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), t.c.get_den_mpz_t());
    mpz_gcd(num.get_mpz_t(), num.get_mpz_t(), t.c.get_num_mpz_t());
  }
  mpq_class scale(den, num);
  scale.canonicalize();
  if (terms_.front().c < 0) scale = -scale;
  if (scale == 1) return *this;
  return scaled(scale);
}

Polynomial Polynomial::monic() const {
  if (is_zero() || terms_.front().c == 1) return *this;
  mpq_class inv = 1 / terms_.front().c;
  return scaled(inv);
}

std::string Polynomial::to_string(const std::vector<std::string>& names) const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms_) {
    mpq_class c = t.c;
    if (first) {
      if (c < 0) {
        os << "-";
        c = -c;
      }
    } else {
      os << (c < 0 ? " - " : " + ");
      if (c < 0) c = -c;
    }
    first = false;
    bool unit = (c == 1);
    if (!unit || t.m.degree == 0) {
      os << c.get_str();
      if (t.m.degree != 0) os << "*";
    }
    bool need_star = false;
    for (int i = 0; i < kMaxVars; ++i) {
      unsigned e = t.m.exp[i];
      if (!e) continue;
      if (need_star) os << "*";
      os << (i < static_cast<int>(names.size()) ? names[i] : "v" + std::to_string(i));
      if (e > 1) os << "^" << e;
      need_star = true;
    }
  }
  return os.str();
}

Polynomial divide_exact(const Polynomial& a, const Polynomial& b) {
  if (b.is_zero()) throw std::domain_error("division by zero polynomial");
  if (b.is_constant()) return a.scaled(1 / b.leading().c);
  if (b.size() == 1) {
    Polynomial q;
    const auto& lb = b.leading();
    mpq_class inv = 1 / lb.c;
    for (const auto& t : a.terms()) {
      if (!lb.m.divides(t.m)) throw std::logic_error("inexact polynomial division");
      q.terms_.push_back({lb.m.quotient_of(t.m), t.c * inv});
    }
    return q;
  }
  Polynomial q, r = a;
  const auto& lb = b.leading();
  mpq_class inv = 1 / lb.c;
  while (!r.is_zero()) {
    const auto& lr = r.leading();
    if (!lb.m.divides(lr.m)) throw std::logic_error("inexact polynomial division");
    Monomial m = lb.m.quotient_of(lr.m);
    mpq_class c = lr.c * inv;
    q.terms_.push_back({m, c});
    r -= b.times_monomial(m, c);
  }
  return q;  // quotient terms were produced in decreasing order
}

namespace {

Polynomial gcd_rec(const Polynomial& a, const Polynomial& b);

Polynomial monomial_content(const Polynomial& p) {
  Monomial m = p.terms().front().m;
  for (const auto& t : p.terms())
    for (int i = 0; i < kMaxVars; ++i) m.exp[i] = std::min(m.exp[i], t.m.exp[i]);
  m.degree = 0;
  for (int i = 0; i < kMaxVars; ++i) m.degree += m.exp[i];
  return Polynomial::monomial(m, 1);
}

Polynomial monomial_gcd(const Polynomial& mono, const Polynomial& p) {
  Monomial m = mono.terms().front().m;
  Monomial c = monomial_content(p).terms().front().m;
  Monomial g;
  for (int i = 0; i < kMaxVars; ++i) {
    g.exp[i] = std::min(m.exp[i], c.exp[i]);
    g.degree += g.exp[i];
  }
  return Polynomial::monomial(g, 1);
}

Polynomial content_in(const Polynomial& p, int var) {
  Polynomial g;
  for (const auto& c : p.coefficients_in(var)) {
    if (c.is_zero()) continue;
    g = gcd_rec(g, c);
    if (g.is_constant()) return Polynomial(1);
  }
  return g;
}

// Pseudo-remainder of a by b with respect to var.
Polynomial pseudo_remainder(Polynomial a, const Polynomial& b, int var) {
  const int db = b.degree_in(var);
  const auto bc = b.coefficients_in(var);
  const Polynomial& lcb = bc.back();
  int da = a.degree_in(var);
  while (!a.is_zero() && da >= db) {
    Polynomial lca = a.coefficients_in(var).back();
    Polynomial shifted = (lca * b).times_monomial(Monomial::variable(var, da - db), 1);
    a = lcb * a - shifted;
    a = a.primitive();
    da = a.degree_in(var);
  }
  return a;
}

Polynomial primitive_prs_gcd(Polynomial a, Polynomial b, int var) {
  if (a.degree_in(var) < b.degree_in(var)) std::swap(a, b);
  while (true) {
    Polynomial r = pseudo_remainder(a, b, var);
    if (r.is_zero()) return b;
    if (r.degree_in(var) == 0) return Polynomial(1);
    a = std::move(b);
    b = divide_exact(r, content_in(r, var)).primitive();
  }
}

Polynomial gcd_rec(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero()) return b.primitive();
  if (b.is_zero()) return a.primitive();
  if (a.is_constant() || b.is_constant()) return Polynomial(1);
  if (a.size() == 1) return monomial_gcd(a, b);
  if (b.size() == 1) return monomial_gcd(b, a);
  if (a == b) return a.primitive();
  const std::uint32_t ma = a.variable_mask(), mb = b.variable_mask();
  const std::uint32_t only_a = ma & ~mb, only_b = mb & ~ma;
  if (only_a) return gcd_rec(content_in(a, std::countr_zero(only_a)), b);
  if (only_b) return gcd_rec(a, content_in(b, std::countr_zero(only_b)));
  // Both use the same variables; recurse on the one of smallest degree.
  int var = -1, best = 1 << 30;
  for (std::uint32_t m = ma; m; m &= m - 1) {
    int v = std::countr_zero(m);
    int d = std::min(a.degree_in(v), b.degree_in(v));
    if (d < best) {
      best = d;
      var = v;
    }
  }
  Polynomial ca = content_in(a, var), cb = content_in(b, var);
  Polynomial pa = divide_exact(a, ca).primitive(), pb = divide_exact(b, cb).primitive();
  Polynomial c = gcd_rec(ca, cb);
  Polynomial g = primitive_prs_gcd(pa, pb, var);
  return (c * g).primitive();
}

}  // namespace

Polynomial gcd(const Polynomial& a, const Polynomial& b) { return gcd_rec(a, b); }

}  // namespace logsymp
