// Numeric flows of time-dependent sections, Euler-like sections, numeric homotopy operators and
// Moser-type equivalence checks.
#pragma once

#include "logsymp/reduction.hpp"

namespace logsymp {

class FlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class EulerLikeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// sigma_t at x: writes rank components to `sigma` and d sigma^k / dx_c to jacobian[k * dim + c].
using SectionFunction = std::function<void(double t, const double* x, double* sigma, double* jacobian)>;

/// Symbolic section over the chart extended by t (variable index dim).
SectionFunction section_function(const Algebroid& a, const Section& sigma);
/// Moser section sigma_t = -G_t^{-1} alpha_t with G_t the matrix of (1 - t) omega0 + t omega1.
SectionFunction moser_section_function(const Algebroid& a, const Form& omega0, const Form& omega1,
                                       const Form& alpha_t);

struct FlowOptions {
  double tol = 1e-8;
  /// 0 means |t1 - t0| / 8.
  double h_max = 0;
  double chart_bound = 1e6;
  int max_steps = 200000;
  /// Extra output times strictly between t0 and t1; the integrator lands on them exactly.
  std::vector<double> checkpoints;
};

struct FlowSample {
  double t = 0;
  std::vector<double> x;
  /// rank x rank, row-major; column j is the image of e_j in the frame at x(t).
  std::vector<double> transport;
  /// dim x dim, row-major; derivative of the base flow.
  std::vector<double> jacobian;
};

struct FlowResult {
  int dim = 0, rank = 0;
  /// Checkpoints in integration order, then t1.
  std::vector<FlowSample> samples;
  int accepted = 0, rejected = 0;
  /// max |an(x(t))^T M(t) - J(t) an(x0)^T| over the samples.
  double isotopy_defect = 0;
  const FlowSample& end() const { return samples.back(); }
};

/// Dormand-Prince 5(4) for x' = an(sigma), M' = -B M, J' = DV J. Throws FlowError on a pole,
/// a non-finite value, leaving |x| <= chart_bound, or step-size underflow. Steps that move a divisor
/// coordinate across zero are rejected and halved.
FlowResult flow_section(const Algebroid& a, const SectionFunction& sigma, const std::vector<double>& x0, double t0,
                        double t1, const FlowOptions& options = {});

/// Largest transport difference against a rerun at tol / 100, over the samples.
double transport_consistency(const Algebroid& a, const SectionFunction& sigma, const std::vector<double>& x0,
                             double t0, double t1, const FlowOptions& options = {});

struct EulerLikeReport {
  bool pass = false;
  bool section_vanishes_on_n = false;
  bool anchor_vanishes_on_n = false;
  /// Richardson-extrapolated |an(eps)(x + h nu) / h - nu| over normal components.
  double max_ratio_error = 0;
  /// Largest deviation of the Richardson-extrapolated log-log slope from 1.
  double max_slope_error = 0;
  std::vector<std::string> failures;
};

/// Only the anchor is required to vanish on N = {x_i = 0, i in normal}; samples are ambient points on N.
/// The h grid must halve from one entry to the next.
EulerLikeReport euler_like_check(const Algebroid& a, const Section& eps, const std::vector<int>& normal,
                                 const std::vector<RationalPoint>& samples_on_n,
                                 const std::vector<double>& h_grid = {1e-2, 5e-3, 2.5e-3});

/// Retraction whose base homotopy is the scaling of the normal coordinates. Requires an(eps) to be exactly
/// sum_{i in normal} x_i d/dx_i. The transport has closed form when [eps, e_j] = -k_j e_j with integer k_j.
RetractionSpec scaling_retraction(const AlgebroidPtr& a, const Section& eps, const std::vector<int>& normal,
                                  const std::vector<RationalPoint>& samples_on_n);

struct QuadratureOptions {
  double tol = 1e-8;
  double initial_step = 1e-2;
  int max_intervals = 1 << 14;
  /// s = 0 is replaced by the extrapolation 2 f(delta) - f(2 delta).
  double endpoint_delta = 1e-6;
  /// Transport frames with the flow of eps even when a closed form exists.
  bool force_flow = false;
};

/// Coefficients of kappa(alpha) at a point, keyed by blade.
using NumericForm = std::map<Blade, double>;

/// Composite Simpson from the initial step with doubling until the Richardson estimate is below tol.
std::vector<NumericForm> kappa_numeric(const RetractionSpec& r, const Form& alpha, int dim,
                                       const std::vector<std::vector<double>>& points,
                                       const QuadratureOptions& options = {});

/// max |d kappa(alpha) + kappa(d alpha) - alpha + rho_0^* alpha| over the points, d taken under the
/// integral sign. Needs a closed-form transport.
double homotopy_defect_numeric(const Algebroid& a, const RetractionSpec& r, const Form& alpha,
                               const std::vector<std::vector<double>>& points, const QuadratureOptions& options = {});

struct MoserOptions {
  double integrator_tol = 1e-8;
  double threshold = 1e-6;
  std::vector<double> t_samples = {0, 0.25, 0.5, 0.75, 1};
};

struct MoserReport {
  bool pass = false;
  /// max |M^T W1(x(1)) M - W0(x0)| over the grid points whose flow reaches t = 1.
  double defect = 0;
  /// Infinite where the flow does not reach t = 1.
  std::vector<double> point_defects;
  /// Grid points whose flow stops before t = 1, with the reason.
  std::vector<std::string> failures;
  double isotopy_defect = 0;
  /// Transport at the first completed grid point against a rerun at tol / 100.
  double transport_defect = 0;
  /// Fixed-point residuals along N; zero when not computed.
  double base_residual = 0;
  double fibre_residual = 0;
  bool alpha_vanishes_on_n = true;
  int steps = 0;
};

/// Flows the Moser section of omega_t = (1 - t) omega0 + t omega1 with d alpha_t = omega0 - omega1.
/// Throws PreconditionError when the primitive is wrong and DegenerateFormError when omega_t degenerates
/// at a grid point and sample time.
MoserReport moser_verify(const AlgebroidPtr& a, const Form& omega0, const Form& omega1, const Form& alpha_t,
                         const std::vector<std::vector<double>>& grid, const MoserOptions& options = {});

/// Moser along the retraction with alpha_t = -kappa(omega1 - omega0). Throws PreconditionError when a form is
/// not symplectic or the forms differ at a point of N (with the witness point in the message).
MoserReport dmw_verify(const AlgebroidPtr& a, const RetractionSpec& rho, const Form& omega0, const Form& omega1,
                       const std::vector<std::vector<double>>& grid, const std::vector<RationalPoint>& n_samples,
                       const MoserOptions& options = {});

/// Two splittings of the same presymplectic data: Moser along omega^{s_t} with the primitive of
/// splitting_primitive, which vanishes on N. The fibre residual is measured on the image of B.
/// Points of N are given in B's chart.
MoserReport coisotropic_embedding_verify(const SymplectizationModel& m0, const SymplectizationModel& m1,
                                         const std::vector<std::vector<double>>& grid,
                                         const std::vector<RationalPoint>& n_samples,
                                         const MoserOptions& options = {});

}  // namespace logsymp
