// Phase space pi^!B over the dual bundle B* with its canonical forms.
#pragma once

#include "logsymp/poisson.hpp"

namespace logsymp {

/// Chart (x_1..x_n, p_1..p_r); frame e_1..e_r (horizontal lifts of b_i), f_1..f_r (d/dp_i).
struct PhaseSpace {
  AlgebroidPtr base;
  AlgebroidPtr algebroid;
  /// C_ij = [b_i, b_j]^dagger = sum_k c_ij^k p_k.
  Matrix<Scalar> c_matrix;
  Form alpha_can;
  Form omega_can;
  /// Projection pi_! onto B: fibre [I | 0].
  AlgebroidMorphism projection;

  int base_rank() const { return base->rank(); }
  /// Index of p_i in the total chart.
  int p_index(int i) const { return base->dim() + i; }
  /// entry(a, b) = omega_can(x_b, x_a) in the (e, f) frame; equals ((-C, -I), (I, 0)).
  Matrix<Scalar> frame_matrix() const;
};

/// Throws std::invalid_argument when B fails its axioms.
PhaseSpace phase_space(const AlgebroidPtr& b);

struct LinearPoissonReport {
  bool pass = true;
  /// Coordinate pairs (a, b) where an(omega^-1) differs from the linear structure.
  std::vector<std::array<int, 2>> mismatches;
  Matrix<Scalar> computed, expected;
};

/// Compares an(omega_can^-1) with {x^a, p_j} = an(b_j)^a, {p_i, p_j} = -C_ij, {x^a, x^b} = 0.
LinearPoissonReport verify_linear_poisson(const PhaseSpace& ps);

struct ZeroSectionReport {
  bool pass = false;
  bool form_vanishes = false;
  bool rank_matches = false;
  /// The composite zeta^!A -> A -> B is a morphism with invertible fibre matrix.
  bool isomorphic_to_base = false;
  bool lagrangian = false;
};

ZeroSectionReport zero_section_check(const PhaseSpace& ps, const std::vector<RationalPoint>& samples_on_base);

}  // namespace logsymp
