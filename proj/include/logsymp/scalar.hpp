// Exact rational functions over Q in the coordinates of a chart.
#pragma once

#include "logsymp/polynomial.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace logsymp {

/// A coordinate chart: named coordinates and an optional normal crossing divisor
/// given by the coordinate hyperplanes {x_i = 0}, i in divisor (0-based).
struct Chart {
  std::vector<std::string> names;
  std::vector<int> divisor;

  Chart() = default;
  Chart(std::vector<std::string> coordinate_names, std::vector<int> divisor_indices = {});

  int dim() const { return static_cast<int>(names.size()); }
  /// -1 when absent.
  int index_of(const std::string& name) const;
  bool in_divisor(int i) const;
  bool operator==(const Chart& o) const { return names == o.names && divisor == o.divisor; }
};

class PoleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Canonical form: gcd(num, den) = 1 and den monic in grlex order, so equal
/// rational functions have identical representations.
class Scalar {
 public:
  Scalar() : den_(1) {}
  Scalar(long c) : num_(c), den_(1) {}  // NOLINT(google-explicit-constructor)
  Scalar(const mpq_class& c) : num_(c), den_(1) {}  // NOLINT(google-explicit-constructor)
  explicit Scalar(Polynomial p) : num_(std::move(p)), den_(1) {}
  Scalar(Polynomial num, Polynomial den);
  static Scalar variable(int i) { return Scalar(Polynomial::variable(i)); }

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.is_one(); }
  bool is_constant() const { return num_.is_constant() && den_.is_one(); }
  /// Requires is_constant().
  mpq_class constant_value() const;
  std::uint32_t variable_mask() const { return num_.variable_mask() | den_.variable_mask(); }

  Scalar operator-() const;
  Scalar operator+(const Scalar& o) const;
  Scalar operator-(const Scalar& o) const;
  Scalar operator*(const Scalar& o) const;
  Scalar operator/(const Scalar& o) const;
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  Scalar& operator/=(const Scalar& o) { return *this = *this / o; }
  Scalar pow(int e) const;

  bool operator==(const Scalar& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Scalar& o) const { return !(*this == o); }

  Scalar derivative(int var) const;
  /// Exact value; throws PoleError where the denominator vanishes.
  mpq_class evaluate(const std::vector<mpq_class>& point) const;
  /// Floating value without intermediate canonicalization; throws PoleError on a zero denominator.
  double evaluate(const std::vector<double>& point) const;
  double evaluate(const double* point) const;
  /// Replace variable i by images[i]; variables beyond images.size() are kept.
  Scalar substitute(const std::vector<Scalar>& images) const;
  /// Shift variable i to index map[i].
  Scalar reindex(const std::vector<int>& map) const;

  std::string to_string(const Chart& chart) const;
  std::string to_string(const std::vector<std::string>& names) const;
  /// Rough size measure used to pick simple pivots.
  std::size_t complexity() const { return num_.size() + den_.size(); }

 private:
  Polynomial num_, den_;
  void canonicalize();
};

inline Scalar operator+(long a, const Scalar& b) { return Scalar(a) + b; }
inline Scalar operator-(long a, const Scalar& b) { return Scalar(a) - b; }
inline Scalar operator*(long a, const Scalar& b) { return Scalar(a) * b; }

/// Parse an expression with integers, coordinate names, + - * / ^ and parentheses.
Scalar parse_scalar(const std::string& text, const Chart& chart);
/// Parse a rational literal such as "-3/4" or a decimal such as "0.25".
mpq_class parse_rational(const std::string& text);

/// Compiled evaluator for repeated floating-point evaluation.
class NumericScalar {
 public:
  NumericScalar() = default;
  explicit NumericScalar(const Scalar& s);
  double operator()(const double* point) const;
  bool is_zero() const { return num_.empty(); }

 private:
  struct Term {
    double c;
    std::vector<std::pair<int, int>> powers;
  };
  std::vector<Term> num_, den_;
  bool den_one_ = true;
  static double eval(const std::vector<Term>& terms, const double* point);
};

}  // namespace logsymp
