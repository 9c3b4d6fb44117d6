#include "logsymp/moser.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace logsymp {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string point_string(const std::vector<double>& x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

std::string point_string(const RationalPoint& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + x[i].get_str();
  return s + ")";
}

std::vector<double> to_double(const RationalPoint& p) {
  std::vector<double> out;
  for (const auto& v : p) out.push_back(v.get_d());
  return out;
}

// Anchor, its x-derivatives and the structure functions, compiled for floating evaluation.
struct NumericFrame {
  int n, r;
  std::vector<NumericScalar> anchor, anchor_grad, structure;

  explicit NumericFrame(const Algebroid& a) : n(a.dim()), r(a.rank()) {
    for (int i = 0; i < r; ++i)
      for (int c = 0; c < n; ++c) {
        anchor.emplace_back(a.anchor()(i, c));
        for (int b = 0; b < n; ++b) anchor_grad.emplace_back(a.anchor()(i, c).derivative(b));
      }
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        for (int k = 0; k < r; ++k) structure.emplace_back(a.c(i, j, k));
  }

  RowMatrix anchor_at(const double* x) const {
    RowMatrix m(r, n);
    for (int i = 0; i < r; ++i)
      for (int c = 0; c < n; ++c) m(i, c) = anchor[i * n + c](x);
    return m;
  }
};

class Rhs {
 public:
  Rhs(const Algebroid& a, const SectionFunction& sigma)
      : frame_(a), sigma_(sigma), n_(a.dim()), r_(a.rank()), s_(r_), js_(static_cast<std::size_t>(r_) * n_) {}

  int size() const { return n_ + r_ * r_ + n_ * n_; }

  void operator()(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const double* x = y.data();
    sigma_(t, x, s_.data(), js_.data());
    RowMatrix an = frame_.anchor_at(x);
    dy.resize(size());
    for (int c = 0; c < n_; ++c) {
      double v = 0;
      for (int i = 0; i < r_; ++i) v += s_[i] * an(i, c);
      dy[c] = v;
    }
    RowMatrix b(r_, r_);
    for (int k = 0; k < r_; ++k)
      for (int j = 0; j < r_; ++j) {
        double v = 0;
        for (int i = 0; i < r_; ++i)
          if (s_[i] != 0.0) v += s_[i] * frame_.structure[(i * r_ + j) * r_ + k](x);
        for (int c = 0; c < n_; ++c) v -= an(j, c) * js_[k * n_ + c];
        b(k, j) = v;
      }
    Eigen::Map<const RowMatrix> m(y.data() + n_, r_, r_);
    Eigen::Map<RowMatrix>(dy.data() + n_, r_, r_) = -b * m;
    RowMatrix dv(n_, n_);
    for (int c = 0; c < n_; ++c)
      for (int e = 0; e < n_; ++e) {
        double v = 0;
        for (int i = 0; i < r_; ++i) {
          v += js_[i * n_ + e] * an(i, c);
          if (s_[i] != 0.0) v += s_[i] * frame_.anchor_grad[(i * n_ + c) * n_ + e](x);
        }
        dv(c, e) = v;
      }
    Eigen::Map<const RowMatrix> jac(y.data() + n_ + r_ * r_, n_, n_);
    Eigen::Map<RowMatrix>(dy.data() + n_ + r_ * r_, n_, n_) = dv * jac;
  }

  const NumericFrame& frame() const { return frame_; }

 private:
  NumericFrame frame_;
  const SectionFunction& sigma_;
  int n_, r_;
  std::vector<double> s_, js_;
};

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1, 1};
constexpr double kA[7][6] = {
    {0, 0, 0, 0, 0, 0},
    {1.0 / 5, 0, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kB[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
constexpr double kBStar[7] = {5179.0 / 57600,    0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200,
                              187.0 / 2100, 1.0 / 40};

FlowSample sample_of(double t, const Eigen::VectorXd& y, int n, int r) {
  FlowSample s;
  s.t = t;
  s.x.assign(y.data(), y.data() + n);
  s.transport.assign(y.data() + n, y.data() + n + r * r);
  s.jacobian.assign(y.data() + n + r * r, y.data() + n + r * r + n * n);
  return s;
}

bool crosses_zero(double before, double after) {
  if (before == 0.0) return false;
  return after == 0.0 || (before > 0) != (after > 0);
}

}  // namespace

SectionFunction section_function(const Algebroid& a, const Section& sigma) {
  const int n = a.dim(), r = a.rank();
  if (static_cast<int>(sigma.size()) != r) throw std::invalid_argument("section has the wrong rank");
  std::vector<NumericScalar> values, grads;
  for (int k = 0; k < r; ++k) {
    values.emplace_back(sigma[k]);
    for (int c = 0; c < n; ++c) grads.emplace_back(sigma[k].derivative(c));
  }
  return [n, r, values, grads](double t, const double* x, double* s, double* jac) {
    std::vector<double> buf(x, x + n);
    buf.push_back(t);
    for (int k = 0; k < r; ++k) {
      s[k] = values[k](buf.data());
      for (int c = 0; c < n; ++c) jac[k * n + c] = grads[k * n + c](buf.data());
    }
  };
}

SectionFunction moser_section_function(const Algebroid& a, const Form& omega0, const Form& omega1,
                                       const Form& alpha_t) {
  const int n = a.dim(), r = a.rank();
  if (omega0.degree != 2 || omega1.degree != 2 || alpha_t.degree != 1)
    throw std::invalid_argument("Moser data needs two 2-forms and a 1-form");
  Matrix<Scalar> g0 = form_matrix(omega0), g1 = form_matrix(omega1);
  std::vector<Scalar> alpha = as_one_form(alpha_t);
  std::vector<NumericScalar> w0, w1, dw0, dw1, al, dal;
  for (int i = 0; i < r; ++i) {
    al.emplace_back(alpha[i]);
    for (int c = 0; c < n; ++c) dal.emplace_back(alpha[i].derivative(c));
    for (int j = 0; j < r; ++j) {
      w0.emplace_back(g0(i, j));
      w1.emplace_back(g1(i, j));
      for (int c = 0; c < n; ++c) {
        dw0.emplace_back(g0(i, j).derivative(c));
        dw1.emplace_back(g1(i, j).derivative(c));
      }
    }
  }
  return [=](double t, const double* x, double* s, double* jac) {
    std::vector<double> buf(x, x + n);
    buf.push_back(t);
    const double* p = buf.data();
    Eigen::MatrixXd g(r, r);
    Eigen::VectorXd rhs(r);
    for (int i = 0; i < r; ++i) {
      rhs[i] = al[i](p);
      for (int j = 0; j < r; ++j) g(i, j) = (1 - t) * w0[i * r + j](p) + t * w1[i * r + j](p);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
    if (!lu.isInvertible())
      throw FlowError("omega_t is degenerate at " + point_string(std::vector<double>(x, x + n)) +
                      ", t = " + std::to_string(t));
    Eigen::VectorXd sig = -lu.solve(rhs);
    for (int k = 0; k < r; ++k) s[k] = sig[k];
    for (int c = 0; c < n; ++c) {
      Eigen::VectorXd v(r);
      for (int i = 0; i < r; ++i) {
        double acc = dal[i * n + c](p);
        for (int j = 0; j < r; ++j)
          acc += ((1 - t) * dw0[(i * r + j) * n + c](p) + t * dw1[(i * r + j) * n + c](p)) * sig[j];
        v[i] = acc;
      }
      Eigen::VectorXd col = -lu.solve(v);
      for (int k = 0; k < r; ++k) jac[k * n + c] = col[k];
    }
  };
}

FlowResult flow_section(const Algebroid& a, const SectionFunction& sigma, const std::vector<double>& x0, double t0,
                        double t1, const FlowOptions& options) {
  const int n = a.dim(), r = a.rank();
  if (static_cast<int>(x0.size()) != n) throw std::invalid_argument("initial point has the wrong dimension");
  Rhs rhs(a, sigma);
  const int size = rhs.size();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(size);
  for (int c = 0; c < n; ++c) y[c] = x0[c];
  for (int k = 0; k < r; ++k) y[n + k * r + k] = 1;
  for (int c = 0; c < n; ++c) y[n + r * r + c * n + c] = 1;

  FlowResult res;
  res.dim = n;
  res.rank = r;
  const RowMatrix an0 = rhs.frame().anchor_at(x0.data());
  auto record = [&](double t) {
    res.samples.push_back(sample_of(t, y, n, r));
    const FlowSample& s = res.samples.back();
    RowMatrix an = rhs.frame().anchor_at(s.x.data());
    Eigen::Map<const RowMatrix> m(s.transport.data(), r, r);
    Eigen::Map<const RowMatrix> jac(s.jacobian.data(), n, n);
    RowMatrix diff = an.transpose() * m - jac * an0.transpose();
    if (diff.size()) res.isotopy_defect = std::max(res.isotopy_defect, diff.cwiseAbs().maxCoeff());
  };

  const double dir = t1 >= t0 ? 1.0 : -1.0;
  std::vector<double> targets;
  for (double c : options.checkpoints)
    if (dir * (c - t0) > 0 && dir * (t1 - c) > 0) targets.push_back(c);
  std::sort(targets.begin(), targets.end(), [dir](double u, double v) { return dir * u < dir * v; });
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  targets.push_back(t1);
  if (t1 == t0) {
    record(t0);
    return res;
  }

  const double span = std::abs(t1 - t0);
  const double h_max = options.h_max > 0 ? options.h_max : span / 8;
  double h = std::min(h_max, span / 64);
  double t = t0;
  std::vector<Eigen::VectorXd> k(7, Eigen::VectorXd(size));
  const auto& divisor = a.chart().divisor;
  int steps = 0;

  auto eval = [&](double tt, const Eigen::VectorXd& yy, Eigen::VectorXd& out) {
    try {
      rhs(tt, yy, out);
    } catch (const PoleError& e) {
      throw FlowError(std::string("flow hit a pole: ") + e.what());
    }
  };

  for (double target : targets) {
    while (dir * (target - t) > 0) {
      if (++steps > options.max_steps) throw FlowError("flow exceeded the step limit");
      const double remaining = std::abs(target - t);
      const bool last = h >= remaining;
      const double step = last ? remaining : h;
      if (step < 1e-14 * std::max(1.0, std::abs(t))) throw FlowError("step size underflow at t = " + std::to_string(t));
      const double dt = dir * step;
      for (int s = 0; s < 7; ++s) {
        Eigen::VectorXd ys = y;
        for (int q = 0; q < s; ++q) ys += dt * kA[s][q] * k[q];
        eval(t + kC[s] * dt, ys, k[s]);
      }
      Eigen::VectorXd ynew = y, err = Eigen::VectorXd::Zero(size);
      for (int s = 0; s < 7; ++s) {
        ynew += dt * kB[s] * k[s];
        err += dt * (kB[s] - kBStar[s]) * k[s];
      }
      if (!ynew.allFinite()) throw FlowError("flow produced a non-finite value near t = " + std::to_string(t));
      // Error per unit step: the local bound shrinks with the step, so the global error scales with tol.
      const double budget = options.tol * step / span;
      double norm = 0;
      for (int i = 0; i < size; ++i)
        norm = std::max(norm, std::abs(err[i]) / (budget * (1 + std::max(std::abs(y[i]), std::abs(ynew[i])))));
      if (norm > 1) {
        ++res.rejected;
        h = step * std::max(0.2, 0.9 * std::pow(norm, -0.25));
        continue;
      }
      bool crossed = false;
      for (int c : divisor) crossed = crossed || crosses_zero(y[c], ynew[c]);
      if (crossed) {
        ++res.rejected;
        h = step / 2;
        continue;
      }
      for (int c = 0; c < n; ++c)
        if (std::abs(ynew[c]) > options.chart_bound)
          throw FlowError("flow left the chart at t = " + std::to_string(t + dt));
      y = ynew;
      t = last ? target : t + dt;
      ++res.accepted;
      double grow = norm > 0 ? std::min(5.0, 0.9 * std::pow(norm, -0.25)) : 5.0;
      h = std::min(h_max, std::max(h, step) * grow);
    }
    record(target);
  }
  return res;
}

double transport_consistency(const Algebroid& a, const SectionFunction& sigma, const std::vector<double>& x0,
                             double t0, double t1, const FlowOptions& options) {
  FlowResult coarse = flow_section(a, sigma, x0, t0, t1, options);
  FlowOptions fine_opt = options;
  fine_opt.tol = options.tol / 100;
  FlowResult fine = flow_section(a, sigma, x0, t0, t1, fine_opt);
  double worst = 0;
  for (std::size_t s = 0; s < coarse.samples.size(); ++s)
    for (std::size_t i = 0; i < coarse.samples[s].transport.size(); ++i)
      worst = std::max(worst, std::abs(coarse.samples[s].transport[i] - fine.samples[s].transport[i]));
  return worst;
}

EulerLikeReport euler_like_check(const Algebroid& a, const Section& eps, const std::vector<int>& normal,
                                 const std::vector<RationalPoint>& samples_on_n, const std::vector<double>& h_grid) {
  const int n = a.dim();
  for (std::size_t i = 1; i < h_grid.size(); ++i)
    if (std::abs(h_grid[i] * 2 - h_grid[i - 1]) > 1e-12 * h_grid[i - 1])
      throw std::invalid_argument("h grid must halve between entries");
  if (h_grid.size() < 2) throw std::invalid_argument("h grid needs at least two entries");
  std::vector<Scalar> images;
  for (int c = 0; c < n; ++c) images.push_back(Scalar::variable(c));
  for (int c : normal) images[c] = Scalar(0);

  EulerLikeReport rep;
  VectorField v = a.anchor_of(eps);
  rep.section_vanishes_on_n = std::all_of(eps.begin(), eps.end(), [&](const Scalar& s) { return s.substitute(images).is_zero(); });
  rep.anchor_vanishes_on_n = std::all_of(v.begin(), v.end(), [&](const Scalar& s) { return s.substitute(images).is_zero(); });
  if (!rep.anchor_vanishes_on_n) rep.failures.push_back("anchor of the section does not vanish on N");

  std::vector<NumericScalar> vn;
  for (int c : normal) vn.emplace_back(v[c]);
  const std::size_t m = normal.size();
  for (const auto& p : samples_on_n) {
    std::vector<double> base = to_double(p);
    for (std::size_t dir = 0; dir < m; ++dir) {
      std::vector<Eigen::VectorXd> ratio;
      std::vector<double> norms;
      for (double h : h_grid) {
        std::vector<double> q = base;
        q[normal[dir]] += h;
        Eigen::VectorXd val(m);
        for (std::size_t j = 0; j < m; ++j) val[j] = vn[j](q.data());
        ratio.push_back(val / h);
        norms.push_back(val.norm());
      }
      Eigen::VectorXd unit = Eigen::VectorXd::Unit(m, dir);
      std::vector<double> slopes;
      for (std::size_t i = 0; i + 1 < h_grid.size(); ++i) {
        Eigen::VectorXd extrapolated = 2 * ratio[i + 1] - ratio[i];
        rep.max_ratio_error = std::max(rep.max_ratio_error, (extrapolated - unit).cwiseAbs().maxCoeff());
        slopes.push_back(norms[i + 1] > 0 && norms[i] > 0 ? std::log2(norms[i] / norms[i + 1])
                                                          : std::numeric_limits<double>::infinity());
      }
      if (slopes.size() == 1) {
        rep.max_slope_error = std::max(rep.max_slope_error, std::abs(slopes[0] - 1));
      } else {
        for (std::size_t i = 0; i + 1 < slopes.size(); ++i)
          rep.max_slope_error = std::max(rep.max_slope_error, std::abs(2 * slopes[i + 1] - slopes[i] - 1));
      }
    }
  }
  if (!(rep.max_ratio_error <= 1e-3)) rep.failures.push_back("normal linearization differs from the Euler field");
  if (!(rep.max_slope_error <= 1e-3)) rep.failures.push_back("anchor does not vanish to first order along N");
  rep.pass = rep.failures.empty();
  return rep;
}

RetractionSpec scaling_retraction(const AlgebroidPtr& a, const Section& eps, const std::vector<int>& normal,
                                  const std::vector<RationalPoint>& samples_on_n) {
  EulerLikeReport check = euler_like_check(*a, eps, normal, samples_on_n);
  if (!check.pass) throw EulerLikeError("section is not Euler-like: " + check.failures.front());
  VectorField v = a->anchor_of(eps);
  for (int c = 0; c < a->dim(); ++c) {
    bool is_normal = std::find(normal.begin(), normal.end(), c) != normal.end();
    if (v[c] != (is_normal ? Scalar::variable(c) : Scalar(0)))
      throw EulerLikeError("anchor of the section is not the coordinate Euler field");
  }
  RetractionSpec spec;
  spec.normal = normal;
  spec.euler = eps;
  spec.algebroid = a;
  for (int j = 0; j < a->rank() && spec.closed_form; ++j) {
    Section b = a->bracket(eps, a->frame(j));
    for (int k = 0; k < a->rank(); ++k)
      if (k != j && !b[k].is_zero()) spec.closed_form = false;
    if (!b[j].is_constant() || b[j].constant_value().get_den() != 1) spec.closed_form = false;
    if (spec.closed_form) spec.transport_exponents.push_back(-static_cast<int>(b[j].constant_value().get_num().get_si()));
  }
  if (!spec.closed_form) spec.transport_exponents.clear();
  return spec;
}

namespace {

// Simpson from the initial step with doubling; `values` returns one row of components per node.
std::vector<double> simpson(const std::function<std::vector<std::vector<double>>(const std::vector<double>&)>& values,
                            std::size_t components, const QuadratureOptions& opt) {
  int intervals = std::max(2, static_cast<int>(std::lround(1.0 / opt.initial_step)));
  if (intervals % 2) ++intervals;
  std::vector<double> prev;
  for (;;) {
    std::vector<double> nodes;
    for (int i = 1; i <= intervals; ++i) nodes.push_back(static_cast<double>(i) / intervals);
    nodes.push_back(opt.endpoint_delta);
    nodes.push_back(2 * opt.endpoint_delta);
    auto vals = values(nodes);
    std::vector<double> sum(components, 0.0);
    const double h = 1.0 / intervals;
    for (std::size_t c = 0; c < components; ++c) {
      double f0 = 2 * vals[intervals][c] - vals[intervals + 1][c];
      double acc = f0 + vals[intervals - 1][c];
      for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4 : 2) * vals[i - 1][c];
      sum[c] = acc * h / 3;
    }
    if (!prev.empty()) {
      double err = 0;
      for (std::size_t c = 0; c < components; ++c) err = std::max(err, std::abs(sum[c] - prev[c]) / 15);
      if (err <= opt.tol) {
        for (std::size_t c = 0; c < components; ++c) sum[c] += (sum[c] - prev[c]) / 15;
        return sum;
      }
    }
    if (intervals * 2 > opt.max_intervals) throw QuadratureError("quadrature did not reach the tolerance");
    prev = sum;
    intervals *= 2;
  }
}

// Closed-form integrand of a degree-k form compiled over (x, s).
struct CompiledForm {
  std::vector<Blade> keys;
  std::vector<NumericScalar> coeffs;

  CompiledForm(const Form& f, int rank, int degree) : keys(blades(rank, degree)) {
    for (Blade b : keys) coeffs.emplace_back(f.get(b));
  }
  std::vector<double> at(const std::vector<double>& p) const {
    std::vector<double> out;
    for (const auto& c : coeffs) out.push_back(c(p.data()));
    return out;
  }
};

std::vector<double> integrate_closed_form(const CompiledForm& integrand, const std::vector<double>& x,
                                          const QuadratureOptions& opt) {
  return simpson(
      [&](const std::vector<double>& nodes) {
        std::vector<std::vector<double>> out;
        std::vector<double> p = x;
        p.push_back(0);
        for (double s : nodes) {
          p.back() = s;
          out.push_back(integrand.at(p));
        }
        return out;
      },
      integrand.keys.size(), opt);
}

}  // namespace

std::vector<NumericForm> kappa_numeric(const RetractionSpec& r, const Form& alpha, int dim,
                                       const std::vector<std::vector<double>>& points,
                                       const QuadratureOptions& options) {
  std::vector<NumericForm> out(points.size());
  if (alpha.degree == 0) return out;
  const int rank = alpha.rank, deg = alpha.degree - 1;
  const bool use_flow = options.force_flow || !r.closed_form;

  if (!use_flow) {
    CompiledForm integrand(kappa_integrand(r, alpha, dim), rank, deg);
    for (std::size_t p = 0; p < points.size(); ++p) {
      auto v = integrate_closed_form(integrand, points[p], options);
      for (std::size_t i = 0; i < v.size(); ++i) out[p][integrand.keys[i]] = v[i];
    }
    return out;
  }

  if (!r.algebroid) throw std::invalid_argument("numeric transport needs the retraction's algebroid");
  const Algebroid& a = *r.algebroid;
  SectionFunction eps_fn = section_function(a, r.euler);
  std::vector<NumericScalar> eps;
  for (const auto& s : r.euler) eps.emplace_back(s);
  CompiledForm alpha_c(alpha, rank, alpha.degree);
  const std::vector<Blade> keys = blades(rank, deg);
  FlowOptions flow_opt;
  flow_opt.tol = std::min(1e-10, options.tol * 1e-2);

  for (std::size_t p = 0; p < points.size(); ++p) {
    const std::vector<double>& x = points[p];
    auto values = [&](const std::vector<double>& nodes) {
      double u_min = 0;
      flow_opt.checkpoints.clear();
      for (double s : nodes) {
        u_min = std::min(u_min, std::log(s));
        flow_opt.checkpoints.push_back(std::log(s));
      }
      FlowResult flow = flow_section(a, eps_fn, x, 0, u_min, flow_opt);
      std::vector<std::vector<double>> rows;
      for (double s : nodes) {
        const double u = std::log(s);
        std::vector<double> m(static_cast<std::size_t>(rank) * rank, 0.0);
        if (u == 0) {
          for (int k = 0; k < rank; ++k) m[k * rank + k] = 1;
        } else {
          auto it = std::find_if(flow.samples.begin(), flow.samples.end(),
                                 [u](const FlowSample& fs) { return fs.t == u; });
          m = it->transport;
        }
        std::vector<double> xs = x;
        for (int c : r.normal) xs[c] *= s;
        std::vector<double> a_vals = alpha_c.at(xs);
        std::map<Blade, double> beta;
        for (std::size_t i = 0; i < alpha_c.keys.size(); ++i) {
          if (a_vals[i] == 0.0) continue;
          auto idx = blade_indices(alpha_c.keys[i]);
          for (std::size_t q = 0; q < idx.size(); ++q) {
            double v = eps[idx[q]](xs.data()) / s * a_vals[i];
            beta[alpha_c.keys[i] & ~(1u << idx[q])] += q % 2 ? -v : v;
          }
        }
        std::vector<double> row;
        Eigen::Map<const RowMatrix> t(m.data(), rank, rank);
        for (Blade target : keys) {
          auto cols = blade_indices(target);
          double acc = 0;
          for (const auto& [src, v] : beta) {
            auto rows_idx = blade_indices(src);
            Eigen::MatrixXd minor(deg, deg);
            for (int i = 0; i < deg; ++i)
              for (int j = 0; j < deg; ++j) minor(i, j) = t(rows_idx[i], cols[j]);
            acc += v * (deg == 0 ? 1.0 : minor.determinant());
          }
          row.push_back(acc);
        }
        rows.push_back(row);
      }
      return rows;
    };
    auto v = simpson(values, keys.size(), options);
    for (std::size_t i = 0; i < v.size(); ++i) out[p][keys[i]] = v[i];
  }
  return out;
}

double homotopy_defect_numeric(const Algebroid& a, const RetractionSpec& r, const Form& alpha,
                               const std::vector<std::vector<double>>& points, const QuadratureOptions& options) {
  const int n = a.dim(), rank = alpha.rank, k = alpha.degree;
  Form integrand(rank, k);
  if (k > 0) integrand = integrand + d(a, kappa_integrand(r, alpha, n));
  if (k < rank) integrand = integrand + kappa_integrand(r, d(a, alpha), n);
  CompiledForm total(integrand, rank, k);
  CompiledForm lhs(alpha - retraction_pullback_at_zero(r, alpha, n), rank, k);
  double worst = 0;
  for (const auto& x : points) {
    auto v = integrate_closed_form(total, x, options);
    auto w = lhs.at(x);
    for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(v[i] - w[i]));
  }
  return worst;
}

namespace {

std::vector<NumericScalar> compile_matrix(const Matrix<Scalar>& m) {
  std::vector<NumericScalar> out;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out.emplace_back(m(i, j));
  return out;
}

RowMatrix evaluate_matrix(const std::vector<NumericScalar>& m, int r, const double* x) {
  RowMatrix out(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) out(i, j) = m[i * r + j](x);
  return out;
}

// Largest |x(1) - x| and |M(1) - I| restricted to the first `columns` columns.
void fixed_point_residuals(const Algebroid& a, const SectionFunction& sigma,
                           const std::vector<std::vector<double>>& points, int columns, double tol,
                           MoserReport& rep) {
  const int r = a.rank();
  FlowOptions opt;
  opt.tol = tol;
  for (const auto& x : points) {
    FlowResult flow = flow_section(a, sigma, x, 0, 1, opt);
    rep.steps += flow.accepted;
    const FlowSample& end = flow.end();
    for (std::size_t c = 0; c < x.size(); ++c) rep.base_residual = std::max(rep.base_residual, std::abs(end.x[c] - x[c]));
    for (int k = 0; k < r; ++k)
      for (int j = 0; j < columns; ++j)
        rep.fibre_residual = std::max(rep.fibre_residual, std::abs(end.transport[k * r + j] - (k == j ? 1.0 : 0.0)));
  }
}

}  // namespace

MoserReport moser_verify(const AlgebroidPtr& a, const Form& omega0, const Form& omega1, const Form& alpha_t,
                         const std::vector<std::vector<double>>& grid, const MoserOptions& options) {
  const int n = a->dim(), r = a->rank();
  if (d(*a, alpha_t) != omega0 - omega1) throw PreconditionError("d alpha_t differs from omega0 - omega1");

  Matrix<Scalar> g0 = form_matrix(omega0), g1 = form_matrix(omega1), gt(r, r);
  const Scalar t = Scalar::variable(n);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) gt(i, j) = g0(i, j) + t * (g1(i, j) - g0(i, j));
  const Scalar det = determinant(gt);
  for (const auto& x : grid) {
    std::vector<double> p = x;
    p.push_back(0);
    double det0 = 0;
    for (double ts : options.t_samples) {
      p.back() = ts;
      double v = 0;
      try {
        v = det.evaluate(p);
      } catch (const PoleError&) {
        throw DegenerateFormError("omega_t has a pole at " + point_string(x) + ", t = " + std::to_string(ts));
      }
      if (ts == options.t_samples.front()) det0 = v;
      if (std::abs(v) < 1e-12 || v * det0 <= 0)
        throw DegenerateFormError("omega_t degenerates at " + point_string(x) + ", t = " + std::to_string(ts));
    }
  }

  SectionFunction sigma = moser_section_function(*a, omega0, omega1, alpha_t);
  auto w0 = compile_matrix(g0), w1 = compile_matrix(g1);
  FlowOptions opt;
  opt.tol = options.integrator_tol;
  MoserReport rep;
  for (const auto& x : grid) {
    FlowResult flow;
    try {
      flow = flow_section(*a, sigma, x, 0, 1, opt);
    } catch (const FlowError& e) {
      rep.failures.push_back("no time-1 flow from " + point_string(x) + ": " + e.what());
      rep.point_defects.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    rep.steps += flow.accepted;
    rep.isotopy_defect = std::max(rep.isotopy_defect, flow.isotopy_defect);
    const FlowSample& end = flow.end();
    Eigen::Map<const RowMatrix> m(end.transport.data(), r, r);
    RowMatrix diff = m.transpose() * evaluate_matrix(w1, r, end.x.data()) * m - evaluate_matrix(w0, r, x.data());
    double defect = diff.size() ? diff.cwiseAbs().maxCoeff() : 0.0;
    rep.point_defects.push_back(defect);
    rep.defect = std::max(rep.defect, defect);
  }
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::isfinite(rep.point_defects[i])) {
      rep.transport_defect = transport_consistency(*a, sigma, grid[i], 0, 1, opt);
      break;
    }
  rep.pass = rep.failures.empty() && rep.defect <= options.threshold;
  return rep;
}

MoserReport dmw_verify(const AlgebroidPtr& a, const RetractionSpec& rho, const Form& omega0, const Form& omega1,
                       const std::vector<std::vector<double>>& grid, const std::vector<RationalPoint>& n_samples,
                       const MoserOptions& options) {
  const int n = a->dim();
  if (!check_symplectic(a, omega0).pass) throw PreconditionError("omega0 is not symplectic");
  if (!check_symplectic(a, omega1).pass) throw PreconditionError("omega1 is not symplectic");
  const Form delta = omega1 - omega0;
  std::vector<Scalar> on_n;
  for (int c = 0; c < n; ++c) on_n.push_back(Scalar::variable(c));
  for (int c : rho.normal) on_n[c] = Scalar(0);
  for (const auto& [b, f] : delta.coeffs) {
    if (f.substitute(on_n).is_zero()) continue;
    for (const auto& p : n_samples)
      if (f.evaluate(p) != 0)
        throw PreconditionError("omega0 and omega1 differ on N at " + point_string(p));
    throw PreconditionError("omega0 and omega1 differ on N");
  }
  const Form kappa = homotopy_kappa(rho, delta, n);
  MoserReport rep = moser_verify(a, omega0, omega1, -kappa, grid, options);
  rep.alpha_vanishes_on_n = kappa.map([&](const Scalar& s) { return s.substitute(on_n); }).is_zero();
  std::vector<std::vector<double>> fixed;
  for (const auto& p : n_samples) fixed.push_back(to_double(p));
  fixed_point_residuals(*a, moser_section_function(*a, omega0, omega1, -kappa), fixed, a->rank(),
                        options.integrator_tol, rep);
  rep.pass = rep.pass && rep.alpha_vanishes_on_n && rep.base_residual <= options.threshold &&
             rep.fibre_residual <= options.threshold;
  return rep;
}

MoserReport coisotropic_embedding_verify(const SymplectizationModel& m0, const SymplectizationModel& m1,
                                         const std::vector<std::vector<double>>& grid,
                                         const std::vector<RationalPoint>& n_samples, const MoserOptions& options) {
  if (!(*m0.algebroid == *m1.algebroid)) throw std::invalid_argument("models live on different algebroids");
  const AlgebroidPtr& a = m0.algebroid;
  const int n = a->dim(), l = m0.kernel_rank(), base_dim = n - l;
  const Form beta = splitting_primitive(m0, m1);
  MoserReport rep = moser_verify(a, m0.omega, m1.omega, beta, grid, options);
  std::vector<Scalar> on_n;
  for (int c = 0; c < n; ++c) on_n.push_back(c < base_dim ? Scalar::variable(c) : Scalar(0));
  rep.alpha_vanishes_on_n = beta.map([&](const Scalar& s) { return s.substitute(on_n); }).is_zero();
  std::vector<std::vector<double>> fixed;
  for (const auto& p : n_samples) {
    auto x = to_double(p);
    x.resize(n, 0.0);
    fixed.push_back(x);
  }
  fixed_point_residuals(*a, moser_section_function(*a, m0.omega, m1.omega, beta), fixed, a->rank() - l,
                        options.integrator_tol, rep);
  rep.pass = rep.pass && rep.alpha_vanishes_on_n && rep.base_residual <= options.threshold &&
             rep.fibre_residual <= options.threshold;
  return rep;
}

}  // namespace logsymp
