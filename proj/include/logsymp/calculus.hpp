// Exterior calculus on a Lie algebroid frame: forms, multisections, d, contraction,
// Lie derivative, the Schouten bracket and the homotopy operator of a retraction.
#pragma once

#include "logsymp/algebroid.hpp"

#include <cstdint>
#include <functional>
#include <map>

namespace logsymp {

/// Increasing index tuple encoded as a bitmask over the frame.
using Blade = std::uint32_t;

inline int blade_degree(Blade b) { return __builtin_popcount(b); }
std::vector<int> blade_indices(Blade b);
Blade blade_of(const std::vector<int>& increasing);
/// Sign of e_a ^ e_b relative to e_(a|b); zero when they overlap.
int wedge_sign(Blade a, Blade b);
/// All blades of the given degree among `rank` frame elements, in increasing lexicographic order.
std::vector<Blade> blades(int rank, int degree);

/// Homogeneous element of the exterior algebra over the frame (Kind 0: forms on the dual
/// frame, Kind 1: multisections). Zero coefficients are never stored.
template <int Kind>
struct Graded {
  int rank = 0;
  int degree = 0;
  std::map<Blade, Scalar> coeffs;

  Graded() = default;
  Graded(int r, int k) : rank(r), degree(k) {}

  Scalar get(Blade b) const {
    auto it = coeffs.find(b);
    return it == coeffs.end() ? Scalar() : it->second;
  }
  void add(Blade b, const Scalar& s) {
    if (s.is_zero()) return;
    auto [it, inserted] = coeffs.emplace(b, s);
    if (!inserted) {
      it->second += s;
      if (it->second.is_zero()) coeffs.erase(it);
    }
  }
  void set(Blade b, const Scalar& s) {
    if (s.is_zero())
      coeffs.erase(b);
    else
      coeffs[b] = s;
  }
  bool is_zero() const { return coeffs.empty(); }

  Graded operator+(const Graded& o) const {
    Graded r = *this;
    for (const auto& [b, s] : o.coeffs) r.add(b, s);
    return r;
  }
  Graded operator-() const {
    Graded r = *this;
    for (auto& [b, s] : r.coeffs) s = -s;
    return r;
  }
  Graded operator-(const Graded& o) const { return *this + (-o); }
  Graded scaled(const Scalar& f) const {
    Graded r(rank, degree);
    if (f.is_zero()) return r;
    for (const auto& [b, s] : coeffs) r.add(b, s * f);
    return r;
  }
  Graded map(const std::function<Scalar(const Scalar&)>& f) const {
    Graded r(rank, degree);
    for (const auto& [b, s] : coeffs) r.add(b, f(s));
    return r;
  }
  bool operator==(const Graded& o) const { return rank == o.rank && degree == o.degree && coeffs == o.coeffs; }
  bool operator!=(const Graded& o) const { return !(*this == o); }
};

using Form = Graded<0>;
using MultiSection = Graded<1>;

template <int Kind>
Graded<Kind> wedge(const Graded<Kind>& a, const Graded<Kind>& b) {
  Graded<Kind> r(a.rank, a.degree + b.degree);
  for (const auto& [ba, sa] : a.coeffs)
    for (const auto& [bb, sb] : b.coeffs) {
      int sign = wedge_sign(ba, bb);
      if (sign) r.add(ba | bb, sign > 0 ? sa * sb : -(sa * sb));
    }
  return r;
}

Form function_form(int rank, const Scalar& f);
Form one_form(const std::vector<Scalar>& components);
/// Antisymmetric matrix M -> sum_{a<b} M(a,b) eps^a ^ eps^b.
Form two_form(const Matrix<Scalar>& m);
Matrix<Scalar> form_matrix(const Form& two_form);
MultiSection function_multisection(int rank, const Scalar& f);
MultiSection multisection(const Section& s);
MultiSection bivector(const Matrix<Scalar>& m);
Matrix<Scalar> bivector_matrix(const MultiSection& two_section);
Section as_section(const MultiSection& u);
std::vector<Scalar> as_one_form(const Form& a);

/// Exterior derivative d_A.
Form d(const Algebroid& a, const Form& alpha);
Form d(const Algebroid& a, const Scalar& f);
/// iota(sigma) alpha = alpha(sigma, ...).
Form contract(const Section& sigma, const Form& alpha);
/// alpha(sigma_1, ..., sigma_k).
Scalar evaluate_on(const Form& alpha, const std::vector<Section>& sections);
Form lie_derivative(const Algebroid& a, const Section& sigma, const Form& alpha);
/// Determinant pairing of a k-section with a k-form.
Scalar pair(const MultiSection& u, const Form& alpha);

/// Schouten bracket, normalized so that [sigma, f] = sigma . f, [sigma, tau] is the algebroid
/// bracket and [lambda, f] = lambda^sharp(d f) for a 2-section lambda.
MultiSection schouten(const Algebroid& a, const MultiSection& u, const MultiSection& v);

/// phi^* alpha along a morphism, using minors of the fibre matrix.
Form pullback_form(const AlgebroidMorphism& phi, const Form& alpha);

/// Deformation retraction onto N = {x_i = 0, i in normal}. The base homotopy scales the
/// normal coordinates by s; frame section e_j is transported with the factor s^{k_j}.
struct RetractionSpec {
  std::vector<int> normal;
  Section euler;
  /// Frame transport is diagonal with constant exponents.
  bool closed_form = true;
  std::vector<int> transport_exponents;
  /// Used by the numeric path when closed_form is false.
  AlgebroidPtr algebroid;
};

class NonPolynomialIntegrand : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Pullback along the retraction at time s (s given as a Scalar, e.g. a constant or a variable).
Form retraction_pullback(const RetractionSpec& r, const Form& alpha, const Scalar& s, int dim);
/// rho_0^* alpha.
Form retraction_pullback_at_zero(const RetractionSpec& r, const Form& alpha, int dim);
/// Symbolic kappa; throws NonPolynomialIntegrand when the s-integrand is not polynomial in s.
Form homotopy_kappa(const RetractionSpec& r, const Form& alpha, int dim);
/// The s-integrand of kappa over the chart extended by s (s is variable `dim`).
Form kappa_integrand(const RetractionSpec& r, const Form& alpha, int dim);

std::string to_string(const Form& f, const Chart& chart, const std::vector<std::string>& labels);
std::string to_string(const MultiSection& f, const Chart& chart, const std::vector<std::string>& labels);

}  // namespace logsymp
