// Sparse multivariate polynomials with exact rational coefficients.
#pragma once

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace logsymp {

/// Upper bound on the number of variables a polynomial may use.
inline constexpr int kMaxVars = 16;

/// Exponent vector; ordering is graded lexicographic with variable 0 largest.
struct Monomial {
  std::array<std::uint16_t, kMaxVars> exp{};
  std::uint32_t degree = 0;

  static Monomial variable(int i, unsigned power = 1);

  bool operator==(const Monomial& o) const { return degree == o.degree && exp == o.exp; }
  bool operator!=(const Monomial& o) const { return !(*this == o); }

  bool divides(const Monomial& o) const;
  Monomial operator*(const Monomial& o) const;
  /// Requires divides(o).
  Monomial quotient_of(const Monomial& o) const;
  std::uint32_t variable_mask() const;
};

/// Negative, zero or positive as a is below, equal to or above b in grlex.
int grlex_compare(const Monomial& a, const Monomial& b);

class Polynomial {
 public:
  struct Term {
    Monomial m;
    mpq_class c;
  };

  Polynomial() = default;
  explicit Polynomial(const mpq_class& c);
  explicit Polynomial(long c) : Polynomial(mpq_class(c)) {}
  static Polynomial variable(int i);
  static Polynomial monomial(const Monomial& m, const mpq_class& c);
  /// Terms in any order; like monomials are combined.
  static Polynomial from_terms(std::vector<Term> terms);

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  bool is_one() const;
  std::size_t size() const { return terms_.size(); }
  const std::vector<Term>& terms() const { return terms_; }
  const Term& leading() const { return terms_.front(); }
  mpq_class constant_term() const;
  std::uint32_t variable_mask() const;
  std::uint32_t total_degree() const;

  Polynomial operator-() const;
  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial& operator+=(const Polynomial& o) { return *this = *this + o; }
  Polynomial& operator-=(const Polynomial& o) { return *this = *this - o; }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }
  Polynomial scaled(const mpq_class& c) const;
  Polynomial times_monomial(const Monomial& m, const mpq_class& c) const;
  Polynomial pow(unsigned e) const;

  bool operator==(const Polynomial& o) const;
  bool operator!=(const Polynomial& o) const { return !(*this == o); }

  Polynomial derivative(int var) const;
  int degree_in(int var) const;
  /// Coefficients with respect to var, indexed by the power of var.
  std::vector<Polynomial> coefficients_in(int var) const;
  static Polynomial from_coefficients_in(int var, const std::vector<Polynomial>& coeffs);

  mpq_class evaluate(const std::vector<mpq_class>& point) const;
  double evaluate(const double* point) const;

  /// Positive leading coefficient, integer coefficients with content one.
  Polynomial primitive() const;
  /// Leading coefficient one.
  Polynomial monic() const;

  std::string to_string(const std::vector<std::string>& names) const;

 private:
  friend Polynomial divide_exact(const Polynomial& a, const Polynomial& b);
  std::vector<Term> terms_;  // strictly decreasing in grlex, no zero coefficients
  void normalize();
};

/// Exact quotient; throws std::logic_error if b does not divide a.
Polynomial divide_exact(const Polynomial& a, const Polynomial& b);
/// Greatest common divisor over Q, returned in primitive form (zero iff both are zero).
Polynomial gcd(const Polynomial& a, const Polynomial& b);

}  // namespace logsymp
