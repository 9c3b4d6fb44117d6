// Presymplectic kernels, symplectization, slice quotients, Hamiltonian reduction and log examples.
#pragma once

#include "logsymp/phase.hpp"

namespace logsymp {

class NotClosedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ConstantRankError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class SplittingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class TransversalityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class RegularValueError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class LocalFreenessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class CharacterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PresymplecticData {
  AlgebroidPtr algebroid;
  Form omega;
  /// Frame of K = ker(omega) over the Scalar field.
  std::vector<Section> kernel;
  bool bracket_closed = false;
  /// i(k) omega = 0 and L(k) omega = 0 for the kernel frame.
  bool basic = false;
};

/// Throws NotClosedError, or ConstantRankError when the rank at a sample differs from the generic rank.
PresymplecticData presymplectic_kernel(const AlgebroidPtr& b, const Form& omega,
                                       const std::vector<RationalPoint>& samples);

/// Model (A over K*, omega^s) for a splitting s : K* -> B*.
/// Chart (x, q_1..q_l); frame e_1..e_r (horizontal lifts of b_i), f_1..f_l (d/dq_a).
struct SymplectizationModel {
  PresymplecticData data;
  /// r x l; column a is s(kappa_a^*) in the dual frame of B.
  Matrix<Scalar> splitting;
  PhaseSpace phase;
  AlgebroidPtr algebroid;
  Form omega;
  AlgebroidMorphism projection;    // p_! to B
  AlgebroidMorphism lift;          // s_! to the phase space
  AlgebroidMorphism zero_section;  // j_! from B
  /// r x r; columns kappa_1..kappa_l, then a frame of L = ann(s(K*)).
  Matrix<Scalar> adapted;

  int kernel_rank() const { return static_cast<int>(data.kernel.size()); }
};

/// Throws SplittingError unless kappa^T s = I exactly.
SymplectizationModel symplectize(const PresymplecticData& pd, const Matrix<Scalar>& splitting);

/// Matrix of omega^s along q = 0 in the adapted frame (e'_1..e'_r, f_1..f_l), entry (a, b) = omega^s(x_a, x_b).
Matrix<Scalar> adapted_matrix_on_zero_section(const SymplectizationModel& m);

struct ModelReport {
  bool pass = false;
  bool closed = false;
  /// Block table along N: (f,f) = 0, (e_K, e) = 0, omega(e_j, f_a) = delta_aj, (e_L, e_L) = omega_B.
  bool table = false;
  bool pullback = false;
  bool coisotropic = false;
  std::vector<std::string> failures;
};

ModelReport check_model(const SymplectizationModel& m, const std::vector<RationalPoint>& samples_on_n);

/// beta with omega^{s0} - omega^{s1} = d beta; beta = s1_!^* alpha_can - s0_!^* alpha_can vanishes on N.
Form splitting_primitive(const SymplectizationModel& m0, const SymplectizationModel& m1);

struct SliceReduction {
  AlgebroidPtr algebroid;
  Form omega;
  PullbackResult embedding;
  SymplecticReport report;
};

/// T_xN = an(K_x) + T_xS as a direct sum at every sample; samples are points of the slice chart.
SliceReduction reduce_along_slice(const PresymplecticData& pd, const CoordinateSubspace& slice,
                                  const std::vector<RationalPoint>& slice_samples);

struct MomentIdentities {
  bool gamma_is_sharp_of_pullback = true;  // gamma = lambda_A^sharp o mu^*
  bool transpose = true;                   // gamma^* = -mu o lambda_A^sharp
  bool equivariance = true;                // lambda_E^sharp = mu o gamma
  bool transpose_equivariance = true;      // lambda_E^sharp = -gamma^* o mu^*
  bool all() const { return gamma_is_sharp_of_pullback && transpose && equivariance && transpose_equivariance; }
};

struct ReductionRequest {
  AlgebroidPtr algebroid;
  Form omega;
  AlgebroidMorphism moment;
  /// Poisson structure on the target of the moment.
  MultiSection target_lambda;
  RationalPoint level;
  /// Basis of f, a subalgebra of stab(E, level).
  std::vector<std::vector<mpq_class>> f;
  /// Slice inside N, in the coordinates of N's chart.
  CoordinateSubspace slice;
  /// Points of N in N's chart.
  std::vector<RationalPoint> samples;
};

struct ReductionResult {
  CoordinateSubspace level_set;
  PullbackResult b_embedding;
  PresymplecticData presymplectic;
  std::vector<std::vector<mpq_class>> h;
  std::vector<MomentIdentities> identities;
  bool kernel_matches = true;
  bool h_transitive = true;
  SliceReduction reduced;
  std::vector<std::string> transcript;
  bool pass = false;
};

/// Throws invalid_argument for a non-Poisson moment or a level set that is not a coordinate subspace,
/// RegularValueError, LocalFreenessError.
ReductionResult hamiltonian_reduce(const ReductionRequest& req);

struct AlgebraicQuotient {
  int rank = 0;
  /// Form on a complement of a cap a^omega inside a.
  Matrix<mpq_class> form;
  bool symplectic = false;
};

/// Reduction of (A, omega) by the identity moment at (x, a), a a subalgebra of stab(A, x).
AlgebraicQuotient identity_moment_reduction(const Algebroid& a, const Form& omega, const RationalPoint& x,
                                            const std::vector<std::vector<mpq_class>>& subalgebra);

struct InducedDivisor {
  /// Divisor components of N, indexed in N's chart.
  std::vector<int> divisor;
  /// Ambient components containing N.
  std::vector<int> containing;
  int v_rank() const { return static_cast<int>(containing.size()); }
};

/// Components fixed at a nonzero value miss N and are dropped.
InducedDivisor induced_divisor(const Chart& ambient, const CoordinateSubspace& n);

/// Cubic log Poisson structure on (x_1..x_n) with divisor {x_1 .. x_l = 0}, as a 2-section of the log tangent bundle.
/// The first l dual basis vectors must be characters; throws CharacterError otherwise.
PoissonStructure log_linear_poisson(const Algebroid& lie_algebra, int l);

struct GroupoidForm {
  /// g (left-invariant frame) times the log tangent bundle of (x_1..x_n).
  AlgebroidPtr algebroid;
  Form omega;
};

/// omega = sum_k theta_k ^ eps_k + cross * sum_{i<j} c_ij(x) theta_i ^ theta_j; cross = 1 is -d of sum y_k theta_k.
GroupoidForm log_groupoid_form(const Algebroid& lie_algebra, int l, const mpq_class& cross = 1);

}  // namespace logsymp
