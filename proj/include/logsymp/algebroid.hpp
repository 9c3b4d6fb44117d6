// Lie algebroid presentations over a single chart.
#pragma once

#include "logsymp/linalg.hpp"
#include "logsymp/scalar.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace logsymp {

/// Coefficients of a section in the frame e_1..e_r.
using Section = std::vector<Scalar>;
/// Components of a vector field in the coordinate frame.
using VectorField = std::vector<Scalar>;
using RationalPoint = std::vector<mpq_class>;

/// Rank-r bundle over a chart with anchor an(e_i) = sum_a anchor(i,a) d/dx_a and
/// brackets [e_i, e_j] = sum_k c_ij^k e_k.
class Algebroid {
 public:
  Algebroid(Chart chart, Matrix<Scalar> anchor, std::vector<std::string> labels = {});

  /// Sets c_ij^k for all k, and c_ji^k = -c_ij^k.
  void set_bracket(int i, int j, const std::vector<Scalar>& coefficients);

  const Chart& chart() const { return chart_; }
  int dim() const { return chart_.dim(); }
  int rank() const { return rank_; }
  const Matrix<Scalar>& anchor() const { return anchor_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Scalar& c(int i, int j, int k) const { return structure_[(static_cast<std::size_t>(i) * rank_ + j) * rank_ + k]; }
  Section frame_bracket(int i, int j) const;
  Section frame(int i) const;
  Section zero_section() const { return Section(rank_, Scalar()); }

  /// e_i . f
  Scalar derive(int i, const Scalar& f) const;
  /// sigma . f
  Scalar derive(const Section& sigma, const Scalar& f) const;
  VectorField anchor_of(const Section& sigma) const;
  Section bracket(const Section& sigma, const Section& tau) const;

  bool operator==(const Algebroid& o) const;

 private:
  Chart chart_;
  int rank_;
  Matrix<Scalar> anchor_;
  std::vector<std::string> labels_;
  std::vector<Scalar> structure_;
};

using AlgebroidPtr = std::shared_ptr<const Algebroid>;

/// v . f for a vector field v.
Scalar apply_vector_field(const VectorField& v, const Scalar& f);
VectorField vector_field_bracket(const VectorField& v, const VectorField& w);

struct AxiomReport {
  bool pass = true;
  std::vector<std::array<int, 2>> anchor_failures;
  std::vector<std::array<int, 3>> jacobi_failures;
};

AxiomReport check_axioms(const Algebroid& a);

AlgebroidPtr make_tangent(const Chart& chart);
/// Frame x_i d/dx_i for divisor coordinates and d/dx_i otherwise.
AlgebroidPtr make_log_tangent(const Chart& chart);
/// Lie algebra as an algebroid over a point; constants[(i*n + j)*n + k] = c_ij^k.
AlgebroidPtr make_lie_algebra(int n, const std::vector<mpq_class>& constants, std::vector<std::string> labels = {});

class HomomorphismError : public std::runtime_error {
 public:
  HomomorphismError(int i, int j)
      : std::runtime_error("generator map is not a homomorphism at pair (" + std::to_string(i + 1) + "," +
                           std::to_string(j + 1) + ")"),
        pair{i, j} {}
  std::array<int, 2> pair;
};

/// Action algebroid g x M; generators[i] is the vector field of the i-th basis element.
AlgebroidPtr make_action_algebroid(const Algebroid& lie_algebra, const Chart& chart,
                                   const std::vector<VectorField>& generators);
/// Chart (t, x...) with anchor t*an and bracket t*[.,.].
AlgebroidPtr make_adiabatic(const Algebroid& a, const std::string& time_name = "t");
/// Direct product over the product chart; frame of a followed by frame of b.
AlgebroidPtr make_product(const Algebroid& a, const Algebroid& b);

/// Basis of ker(an_p).
std::vector<std::vector<mpq_class>> stabilizer(const Algebroid& a, const RationalPoint& p);

/// Section with the given anchor image; throws when the solution is not regular on the divisor.
Section section_from_vector_field(const Algebroid& a, const VectorField& v);

struct AlgebroidMorphism {
  AlgebroidPtr source, target;
  /// Target coordinates as functions on the source chart.
  std::vector<Scalar> base_map;
  /// (target rank) x (source rank), over the source chart.
  Matrix<Scalar> fibre;
};

struct MorphismReport {
  bool pass = true;
  std::vector<std::string> failures;
};

/// Compatibility of the pullback with d on target coordinates and target frame 1-forms.
MorphismReport morphism_check(const AlgebroidMorphism& phi);
AlgebroidMorphism identity_morphism(const AlgebroidPtr& a);
/// The anchor as a morphism to the tangent bundle.
AlgebroidMorphism anchor_morphism(const AlgebroidPtr& a);

class NotCleanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PullbackResult {
  AlgebroidPtr algebroid;
  /// F_! : F^!A -> A.
  AlgebroidMorphism morphism;
  /// Frame element k is the pair (tangent[k], fibre[k]).
  std::vector<VectorField> tangent;
  std::vector<Section> fibre;
  int generic_rank = 0;
};

/// F^!A = TP x_TM A for F: P -> M given by target coordinates over the chart of P.
/// extra_constraints rows act on A-fibre coefficients and cut out a subbundle.
/// Cleanness is certified by comparing generic and pointwise fibre dimension at samples.
PullbackResult pullback(const AlgebroidPtr& a, const Chart& p_chart, const std::vector<Scalar>& base_map,
                        const std::vector<RationalPoint>& samples,
                        const std::vector<std::vector<Scalar>>& extra_constraints = {});

/// Coordinate subspace: coordinates in `fixed` are set to the given values.
struct CoordinateSubspace {
  std::vector<int> fixed;
  std::vector<mpq_class> values;

  Chart chart(const Chart& ambient) const;
  /// Inclusion as ambient coordinates over the subspace chart.
  std::vector<Scalar> inclusion(const Chart& ambient) const;
  /// Ambient point of a subspace point.
  RationalPoint embed(const Chart& ambient, const RationalPoint& sub) const;
  std::vector<int> free_coordinates(const Chart& ambient) const;
  bool contains(const RationalPoint& ambient_point) const;
};

PullbackResult restrict_to_subspace(const AlgebroidPtr& a, const CoordinateSubspace& n,
                                    const std::vector<RationalPoint>& samples_in_subspace,
                                    const std::vector<std::vector<Scalar>>& extra_constraints = {});

class LogMorphismError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Log tangent map of phi between charts with divisors.
AlgebroidMorphism log_tangent_map(const std::vector<Scalar>& phi, const Chart& source, const Chart& target);

}  // namespace logsymp
