// Poisson 2-sections and symplectic forms on a Lie algebroid.
#pragma once

#include "logsymp/calculus.hpp"

namespace logsymp {

class DegenerateFormError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UncertifiedPoissonError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct PoissonStructure {
  AlgebroidPtr algebroid;
  MultiSection lambda;
  /// Set by certify(); [lambda, lambda] = 0.
  bool involutive = false;

  static PoissonStructure certify(AlgebroidPtr a, MultiSection lambda);
  void require_involutive() const;
};

struct SymplecticStructure {
  AlgebroidPtr algebroid;
  Form omega;
  /// G(a,b) = omega(e_a, e_b)
  Matrix<Scalar> matrix;
  MultiSection inverse;
  bool closed = false;

  /// Throws DegenerateFormError when det G = 0.
  static SymplecticStructure make(AlgebroidPtr a, Form omega);
  PoissonStructure poisson() const;
};

/// (lambda^sharp alpha)_b = sum_a lambda(e_a, e_b) alpha_a, so beta(lambda^sharp alpha) = lambda(alpha, beta).
Section sharp(const MultiSection& lambda, const std::vector<Scalar>& alpha);
/// omega^flat(sigma) = omega(., sigma).
std::vector<Scalar> flat(const Form& omega, const Section& sigma);
/// The inverse 2-section, with sharp(invert(omega), flat(omega, s)) = s.
MultiSection invert(const Form& omega);

/// {f, g} = lambda(d f, d g).
Scalar poisson_bracket(const Algebroid& a, const MultiSection& lambda, const Scalar& f, const Scalar& g);
/// {alpha, beta} = i(lambda^sharp alpha) d beta - i(lambda^sharp beta) d alpha + d lambda(alpha, beta).
std::vector<Scalar> bracket_one_forms(const Algebroid& a, const MultiSection& lambda, const std::vector<Scalar>& alpha,
                                      const std::vector<Scalar>& beta);
/// A* with anchor an o lambda^sharp and the bracket of 1-forms, in the dual frame.
AlgebroidPtr dual_algebroid(const PoissonStructure& p);
/// lambda^sharp as a morphism from the dual algebroid.
AlgebroidMorphism sharp_morphism(const PoissonStructure& p, const AlgebroidPtr& dual);
/// The base bivector an(lambda) as an antisymmetric n x n matrix.
Matrix<Scalar> base_bivector(const Algebroid& a, const MultiSection& lambda);

struct SymplecticReport {
  bool pass = false;
  bool closed = false;
  bool nondegenerate = false;
  /// [omega^-1, omega^-1] = 0; agrees with closedness for nondegenerate omega.
  bool inverse_involutive = false;
  std::vector<std::string> witnesses;
};

SymplecticReport check_symplectic(const AlgebroidPtr& a, const Form& omega);

/// sigma_f = lambda^sharp(d f).
Section hamiltonian_section(const Algebroid& a, const MultiSection& lambda, const Scalar& f);

/// Fibre data of a subbundle at one point.
struct SubspaceAtPoint {
  RationalPoint point;
  std::vector<std::vector<mpq_class>> spanning;
};

struct CoisotropicReport {
  bool pass = true;
  std::vector<bool> per_point;
};

/// lambda^sharp(W annihilator) contained in W at every sample point.
CoisotropicReport coisotropic_test(const MultiSection& lambda, const std::vector<SubspaceAtPoint>& w);
/// W = an^-1(T_x N) for the coordinate subspace N.
std::vector<std::vector<mpq_class>> anchor_preimage(const Algebroid& a, const CoordinateSubspace& n,
                                                     const RationalPoint& x);
CoisotropicReport coisotropic_submanifold_test(const Algebroid& a, const MultiSection& lambda,
                                               const CoordinateSubspace& n, const std::vector<RationalPoint>& samples);
/// Coisotropy of N for the base bivector an(lambda), in the usual sense.
CoisotropicReport base_coisotropic_test(const Algebroid& a, const MultiSection& lambda, const CoordinateSubspace& n,
                                        const std::vector<RationalPoint>& samples);

}  // namespace logsymp
