#include "logsymp/algebroid.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace logsymp {

Algebroid::Algebroid(Chart chart, Matrix<Scalar> anchor, std::vector<std::string> labels)
    : chart_(std::move(chart)), rank_(anchor.rows()), anchor_(std::move(anchor)), labels_(std::move(labels)) {
  if (anchor_.cols() != chart_.dim()) throw std::invalid_argument("anchor matrix must have one column per coordinate");
  if (labels_.empty())
    for (int i = 0; i < rank_; ++i) labels_.push_back("e" + std::to_string(i + 1));
  if (static_cast<int>(labels_.size()) != rank_) throw std::invalid_argument("one label per frame section required");
  structure_.assign(static_cast<std::size_t>(rank_) * rank_ * rank_, Scalar());
}

void Algebroid::set_bracket(int i, int j, const std::vector<Scalar>& coefficients) {
  if (i == j) throw std::invalid_argument("bracket of a frame section with itself is zero");
  if (static_cast<int>(coefficients.size()) != rank_) throw std::invalid_argument("bracket needs one coefficient per frame section");
  for (int k = 0; k < rank_; ++k) {
    structure_[(static_cast<std::size_t>(i) * rank_ + j) * rank_ + k] = coefficients[k];
    structure_[(static_cast<std::size_t>(j) * rank_ + i) * rank_ + k] = -coefficients[k];
  }
}

Section Algebroid::frame_bracket(int i, int j) const {
  Section s(rank_);
  for (int k = 0; k < rank_; ++k) s[k] = c(i, j, k);
  return s;
}

Section Algebroid::frame(int i) const {
  Section s(rank_);
  s[i] = Scalar(1);
  return s;
}

Scalar Algebroid::derive(int i, const Scalar& f) const {
  Scalar r;
  if (f.is_constant()) return r;
  const std::uint32_t mask = f.variable_mask();
  for (int a = 0; a < dim(); ++a) {
    if (!(mask & (1u << a)) || anchor_(i, a).is_zero()) continue;
    r += anchor_(i, a) * f.derivative(a);
  }
  return r;
}

Scalar Algebroid::derive(const Section& sigma, const Scalar& f) const {
  if (f.is_constant()) return Scalar();
  return apply_vector_field(anchor_of(sigma), f);
}

VectorField Algebroid::anchor_of(const Section& sigma) const {
  VectorField v(dim());
  for (int i = 0; i < rank_; ++i) {
    if (sigma[i].is_zero()) continue;
    for (int a = 0; a < dim(); ++a)
      if (!anchor_(i, a).is_zero()) v[a] += sigma[i] * anchor_(i, a);
  }
  return v;
}

Section Algebroid::bracket(const Section& sigma, const Section& tau) const {
  Section r(rank_);
  for (int i = 0; i < rank_; ++i) {
    if (sigma[i].is_zero()) continue;
    for (int j = 0; j < rank_; ++j) {
      if (i == j || tau[j].is_zero()) continue;
      Scalar st = sigma[i] * tau[j];
      for (int k = 0; k < rank_; ++k)
        if (!c(i, j, k).is_zero()) r[k] += st * c(i, j, k);
    }
  }
  VectorField vs = anchor_of(sigma), vt = anchor_of(tau);
  for (int k = 0; k < rank_; ++k) {
    r[k] += apply_vector_field(vs, tau[k]);
    r[k] -= apply_vector_field(vt, sigma[k]);
  }
  return r;
}

bool Algebroid::operator==(const Algebroid& o) const {
  return chart_ == o.chart_ && anchor_ == o.anchor_ && labels_ == o.labels_ && structure_ == o.structure_;
}

Scalar apply_vector_field(const VectorField& v, const Scalar& f) {
  Scalar r;
  if (f.is_constant()) return r;
  const std::uint32_t mask = f.variable_mask();
  for (std::size_t a = 0; a < v.size(); ++a) {
    if (!(mask & (1u << a)) || v[a].is_zero()) continue;
    r += v[a] * f.derivative(static_cast<int>(a));
  }
  return r;
}

VectorField vector_field_bracket(const VectorField& v, const VectorField& w) {
  VectorField r(v.size());
  for (std::size_t a = 0; a < v.size(); ++a) r[a] = apply_vector_field(v, w[a]) - apply_vector_field(w, v[a]);
  return r;
}

AxiomReport check_axioms(const Algebroid& a) {
  AxiomReport report;
  const int r = a.rank();
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      VectorField lhs = a.anchor_of(a.frame_bracket(i, j));
      VectorField rhs = vector_field_bracket(a.anchor().row(i), a.anchor().row(j));
      if (lhs != rhs) report.anchor_failures.push_back({i, j});
    }
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j)
      for (int k = j + 1; k < r; ++k) {
        Section ei = a.frame(i), ej = a.frame(j), ek = a.frame(k);
        Section s1 = a.bracket(a.bracket(ei, ej), ek);
        Section s2 = a.bracket(a.bracket(ej, ek), ei);
        Section s3 = a.bracket(a.bracket(ek, ei), ej);
        for (int m = 0; m < r; ++m)
          if (!(s1[m] + s2[m] + s3[m]).is_zero()) {
            report.jacobi_failures.push_back({i, j, k});
            break;
          }
      }
  report.pass = report.anchor_failures.empty() && report.jacobi_failures.empty();
  return report;
}

AlgebroidPtr make_tangent(const Chart& chart) {
  Chart plain(chart.names);
  Matrix<Scalar> anchor = Matrix<Scalar>::identity(chart.dim());
  std::vector<std::string> labels;
  for (const auto& n : chart.names) labels.push_back("d" + n);
  return std::make_shared<Algebroid>(plain, anchor, labels);
}

AlgebroidPtr make_log_tangent(const Chart& chart) {
  Matrix<Scalar> anchor(chart.dim(), chart.dim());
  std::vector<std::string> labels;
  for (int i = 0; i < chart.dim(); ++i) {
    bool log = chart.in_divisor(i);
    anchor(i, i) = log ? Scalar::variable(i) : Scalar(1);
    labels.push_back(log ? chart.names[i] + "d" + chart.names[i] : "d" + chart.names[i]);
  }
  return std::make_shared<Algebroid>(chart, anchor, labels);
}

AlgebroidPtr make_lie_algebra(int n, const std::vector<mpq_class>& constants, std::vector<std::string> labels) {
  if (static_cast<int>(constants.size()) != n * n * n) throw std::invalid_argument("need n^3 structure constants");
  auto g = std::make_shared<Algebroid>(Chart{}, Matrix<Scalar>(n, 0), std::move(labels));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (constants[(i * n + j) * n] != -constants[(j * n + i) * n]) {
        for (int k = 0; k < n; ++k)
          if (constants[(i * n + j) * n + k] != -constants[(j * n + i) * n + k])
            throw std::invalid_argument("structure constants must be antisymmetric");
      }
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      std::vector<Scalar> cs(n);
      for (int k = 0; k < n; ++k) cs[k] = Scalar(constants[(i * n + j) * n + k]);
      g->set_bracket(i, j, cs);
    }
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (constants[(i * n + i) * n + k] != 0) throw std::invalid_argument("structure constants must be antisymmetric");
  return g;
}

AlgebroidPtr make_action_algebroid(const Algebroid& g, const Chart& chart, const std::vector<VectorField>& generators) {
  const int n = g.rank();
  if (g.dim() != 0) throw std::invalid_argument("action algebroid needs a Lie algebra over a point");
  if (static_cast<int>(generators.size()) != n) throw std::invalid_argument("one generator per basis element required");
  for (const auto& x : generators)
    if (static_cast<int>(x.size()) != chart.dim()) throw std::invalid_argument("generator dimension mismatch");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      VectorField lhs = vector_field_bracket(generators[i], generators[j]);
      VectorField rhs(chart.dim());
      for (int k = 0; k < n; ++k)
        for (int a = 0; a < chart.dim(); ++a) rhs[a] += g.c(i, j, k) * generators[k][a];
      if (lhs != rhs) throw HomomorphismError(i, j);
    }
  Matrix<Scalar> anchor = Matrix<Scalar>::from_rows(chart.dim(), generators);
  auto a = std::make_shared<Algebroid>(chart, anchor, g.labels());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) a->set_bracket(i, j, g.frame_bracket(i, j));
  return a;
}

AlgebroidPtr make_adiabatic(const Algebroid& a, const std::string& time_name) {
  std::vector<std::string> names{time_name};
  names.insert(names.end(), a.chart().names.begin(), a.chart().names.end());
  std::vector<int> divisor;
  for (int d : a.chart().divisor) divisor.push_back(d + 1);
  Chart chart(names, divisor);
  std::vector<int> shift(a.dim());
  std::iota(shift.begin(), shift.end(), 1);
  const Scalar t = Scalar::variable(0);
  Matrix<Scalar> anchor(a.rank(), chart.dim());
  for (int i = 0; i < a.rank(); ++i)
    for (int k = 0; k < a.dim(); ++k) anchor(i, k + 1) = t * a.anchor()(i, k).reindex(shift);
  auto out = std::make_shared<Algebroid>(chart, anchor, a.labels());
  for (int i = 0; i < a.rank(); ++i)
    for (int j = i + 1; j < a.rank(); ++j) {
      Section s = a.frame_bracket(i, j);
      for (auto& x : s) x = t * x.reindex(shift);
      out->set_bracket(i, j, s);
    }
  return out;
}

AlgebroidPtr make_product(const Algebroid& a, const Algebroid& b) {
  std::vector<std::string> names = a.chart().names;
  names.insert(names.end(), b.chart().names.begin(), b.chart().names.end());
  std::vector<int> divisor = a.chart().divisor;
  for (int d : b.chart().divisor) divisor.push_back(d + a.dim());
  Chart chart(names, divisor);
  std::vector<int> shift(b.dim());
  std::iota(shift.begin(), shift.end(), a.dim());
  const int r = a.rank() + b.rank();
  Matrix<Scalar> anchor(r, chart.dim());
  for (int i = 0; i < a.rank(); ++i)
    for (int k = 0; k < a.dim(); ++k) anchor(i, k) = a.anchor()(i, k);
  for (int i = 0; i < b.rank(); ++i)
    for (int k = 0; k < b.dim(); ++k) anchor(a.rank() + i, a.dim() + k) = b.anchor()(i, k).reindex(shift);
  std::vector<std::string> labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  std::set<std::string> unique(labels.begin(), labels.end());
  if (unique.size() != labels.size()) {
    labels.clear();
    for (int i = 0; i < r; ++i) labels.push_back("e" + std::to_string(i + 1));
  }
  auto out = std::make_shared<Algebroid>(chart, anchor, labels);
  for (int i = 0; i < a.rank(); ++i)
    for (int j = i + 1; j < a.rank(); ++j) {
      Section s(r);
      for (int k = 0; k < a.rank(); ++k) s[k] = a.c(i, j, k);
      out->set_bracket(i, j, s);
    }
  for (int i = 0; i < b.rank(); ++i)
    for (int j = i + 1; j < b.rank(); ++j) {
      Section s(r);
      for (int k = 0; k < b.rank(); ++k) s[a.rank() + k] = b.c(i, j, k).reindex(shift);
      out->set_bracket(a.rank() + i, a.rank() + j, s);
    }
  return out;
}

std::vector<std::vector<mpq_class>> stabilizer(const Algebroid& a, const RationalPoint& p) {
  Matrix<mpq_class> an = evaluate(a.anchor(), p);
  return nullspace(an.transpose());
}

Section section_from_vector_field(const Algebroid& a, const VectorField& v) {
  std::vector<std::vector<Scalar>> columns;
  for (int i = 0; i < a.rank(); ++i) columns.push_back(a.anchor().row(i));
  Section coords;
  if (!solve_in_span(columns, v, coords)) throw std::invalid_argument("vector field is not in the image of the anchor");
  for (const auto& c : coords) {
    if (c.is_polynomial()) continue;
    for (int d : a.chart().divisor) {
      std::vector<Scalar> images;
      for (int k = 0; k < a.dim(); ++k) images.push_back(k == d ? Scalar() : Scalar::variable(k));
      if (Scalar(c.den()).substitute(images).is_zero())
        throw std::invalid_argument("vector field is not a section: coefficient has a pole along {" +
                                    a.chart().names[d] + " = 0}");
    }
  }
  return coords;
}

MorphismReport morphism_check(const AlgebroidMorphism& phi) {
  MorphismReport report;
  const Algebroid& A = *phi.source;
  const Algebroid& B = *phi.target;
  const auto& F = phi.base_map;
  const auto& P = phi.fibre;
  if (static_cast<int>(F.size()) != B.dim() || P.rows() != B.rank() || P.cols() != A.rank()) {
    report.pass = false;
    report.failures.push_back("dimension mismatch");
    return report;
  }
  Matrix<Scalar> anB = B.anchor().map([&](const Scalar& s) { return s.substitute(F); });
  for (int b = 0; b < B.dim(); ++b)
    for (int i = 0; i < A.rank(); ++i) {
      Scalar lhs = A.derive(i, F[b]);
      for (int k = 0; k < B.rank(); ++k) lhs -= anB(k, b) * P(k, i);
      if (!lhs.is_zero())
        report.failures.push_back("coordinate " + B.chart().names[b] + " on " + A.labels()[i]);
    }
  std::vector<Scalar> cB(static_cast<std::size_t>(B.rank()) * B.rank() * B.rank());
  for (int a = 0; a < B.rank(); ++a)
    for (int b = 0; b < B.rank(); ++b)
      for (int k = 0; k < B.rank(); ++k) cB[(a * B.rank() + b) * B.rank() + k] = B.c(a, b, k).substitute(F);
  for (int k = 0; k < B.rank(); ++k)
    for (int i = 0; i < A.rank(); ++i)
      for (int j = i + 1; j < A.rank(); ++j) {
        Scalar v = A.derive(i, P(k, j)) - A.derive(j, P(k, i));
        for (int m = 0; m < A.rank(); ++m) v -= A.c(i, j, m) * P(k, m);
        for (int a = 0; a < B.rank(); ++a)
          for (int b = 0; b < B.rank(); ++b) {
            const Scalar& c = cB[(a * B.rank() + b) * B.rank() + k];
            if (!c.is_zero()) v += P(a, i) * P(b, j) * c;
          }
        if (!v.is_zero())
          report.failures.push_back("frame form " + B.labels()[k] + " on (" + A.labels()[i] + "," + A.labels()[j] + ")");
      }
  report.pass = report.failures.empty();
  return report;
}

AlgebroidMorphism identity_morphism(const AlgebroidPtr& a) {
  std::vector<Scalar> base;
  for (int i = 0; i < a->dim(); ++i) base.push_back(Scalar::variable(i));
  return {a, a, base, Matrix<Scalar>::identity(a->rank())};
}

AlgebroidMorphism anchor_morphism(const AlgebroidPtr& a) {
  std::vector<Scalar> base;
  for (int i = 0; i < a->dim(); ++i) base.push_back(Scalar::variable(i));
  return {a, make_tangent(a->chart()), base, a->anchor().transpose()};
}

PullbackResult pullback(const AlgebroidPtr& a, const Chart& p_chart, const std::vector<Scalar>& F,
                        const std::vector<RationalPoint>& samples,
                        const std::vector<std::vector<Scalar>>& extra_constraints) {
  const int m = p_chart.dim(), n = a->dim(), r = a->rank();
  if (static_cast<int>(F.size()) != n) throw std::invalid_argument("base map needs one component per target coordinate");
  const int rows = n + static_cast<int>(extra_constraints.size());
  Matrix<Scalar> L(rows, m + r);
  Matrix<Scalar> anF = a->anchor().map([&](const Scalar& s) { return s.substitute(F); });
  for (int row = 0; row < n; ++row) {
    for (int b = 0; b < m; ++b) L(row, b) = F[row].derivative(b);
    for (int i = 0; i < r; ++i) L(row, m + i) = -anF(i, row);
  }
  for (std::size_t e = 0; e < extra_constraints.size(); ++e) {
    if (static_cast<int>(extra_constraints[e].size()) != r) throw std::invalid_argument("constraint row has wrong length");
    for (int i = 0; i < r; ++i) L(n + static_cast<int>(e), m + i) = extra_constraints[e][i];
  }
  std::vector<int> free_cols;
  auto basis = nullspace(L, &free_cols);
  // Frame order: fibre directions of A first, then the remaining tangent directions of P.
  std::vector<int> order(basis.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_partition(order.begin(), order.end(), [&](int k) { return free_cols[k] >= m; });
  const int k_rank = static_cast<int>(basis.size());
  for (const auto& p : samples) {
    Matrix<mpq_class> Lp = evaluate(L, p);
    int dim_p = m + r - rank(Lp);
    if (dim_p != k_rank) {
      std::string where;
      for (std::size_t i = 0; i < p.size(); ++i) where += (i ? ", " : "") + p[i].get_str();
      throw NotCleanError("not clean at (" + where + "): fibre dimension " + std::to_string(dim_p) +
                          " differs from generic " + std::to_string(k_rank));
    }
  }
  PullbackResult out;
  out.generic_rank = k_rank;
  std::vector<int> frame_free;  // free column of each frame element
  for (int k : order) {
    const auto& v = basis[k];
    out.tangent.emplace_back(v.begin(), v.begin() + m);
    out.fibre.emplace_back(v.begin() + m, v.end());
    frame_free.push_back(free_cols[k]);
  }
  Matrix<Scalar> anchor(k_rank, m);
  for (int k = 0; k < k_rank; ++k)
    for (int b = 0; b < m; ++b) anchor(k, b) = out.tangent[k][b];
  std::vector<std::string> labels;
  for (int k = 0; k < k_rank; ++k) {
    int fc = frame_free[k];
    labels.push_back(fc >= m ? a->labels()[fc - m] : "d" + p_chart.names[fc]);
  }
  std::set<std::string> unique(labels.begin(), labels.end());
  if (unique.size() != labels.size()) labels.clear();
  auto result = std::make_shared<Algebroid>(p_chart, anchor, labels);

  std::vector<Scalar> cF(static_cast<std::size_t>(r) * r * r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int c = 0; c < r; ++c) cF[(i * r + j) * r + c] = a->c(i, j, c).substitute(F);
  for (int k = 0; k < k_rank; ++k)
    for (int l = k + 1; l < k_rank; ++l) {
      std::vector<Scalar> w(m + r);
      VectorField vb = vector_field_bracket(out.tangent[k], out.tangent[l]);
      for (int b = 0; b < m; ++b) w[b] = vb[b];
      for (int c = 0; c < r; ++c) {
        Scalar s = apply_vector_field(out.tangent[k], out.fibre[l][c]) - apply_vector_field(out.tangent[l], out.fibre[k][c]);
        for (int i = 0; i < r; ++i) {
          if (out.fibre[k][i].is_zero()) continue;
          for (int j = 0; j < r; ++j) {
            const Scalar& cc = cF[(i * r + j) * r + c];
            if (!cc.is_zero() && !out.fibre[l][j].is_zero()) s += out.fibre[k][i] * out.fibre[l][j] * cc;
          }
        }
        w[m + c] = s;
      }
      std::vector<Scalar> coeffs(k_rank);
      for (int q = 0; q < k_rank; ++q) coeffs[q] = w[frame_free[q]];
      for (int idx = 0; idx < m + r; ++idx) {
        Scalar rebuilt;
        for (int q = 0; q < k_rank; ++q) {
          const Scalar& comp = idx < m ? out.tangent[q][idx] : out.fibre[q][idx - m];
          if (!comp.is_zero() && !coeffs[q].is_zero()) rebuilt += coeffs[q] * comp;
        }
        if (rebuilt != w[idx]) throw std::logic_error("pullback bracket does not close on the frame");
      }
      result->set_bracket(k, l, coeffs);
    }
  Matrix<Scalar> fibre(r, k_rank);
  for (int k = 0; k < k_rank; ++k)
    for (int i = 0; i < r; ++i) fibre(i, k) = out.fibre[k][i];
  out.algebroid = result;
  out.morphism = {result, a, F, fibre};
  return out;
}

Chart CoordinateSubspace::chart(const Chart& ambient) const {
  std::vector<std::string> names;
  std::vector<int> divisor;
  for (int i : free_coordinates(ambient)) {
    if (ambient.in_divisor(i)) divisor.push_back(static_cast<int>(names.size()));
    names.push_back(ambient.names[i]);
  }
  return Chart(names, divisor);
}

std::vector<int> CoordinateSubspace::free_coordinates(const Chart& ambient) const {
  std::vector<int> out;
  for (int i = 0; i < ambient.dim(); ++i)
    if (std::find(fixed.begin(), fixed.end(), i) == fixed.end()) out.push_back(i);
  return out;
}

std::vector<Scalar> CoordinateSubspace::inclusion(const Chart& ambient) const {
  std::vector<Scalar> out(ambient.dim());
  for (std::size_t k = 0; k < fixed.size(); ++k) out[fixed[k]] = Scalar(values[k]);
  auto free = free_coordinates(ambient);
  for (std::size_t k = 0; k < free.size(); ++k) out[free[k]] = Scalar::variable(static_cast<int>(k));
  return out;
}

RationalPoint CoordinateSubspace::embed(const Chart& ambient, const RationalPoint& sub) const {
  RationalPoint out(ambient.dim());
  for (std::size_t k = 0; k < fixed.size(); ++k) out[fixed[k]] = values[k];
  auto free = free_coordinates(ambient);
  if (sub.size() != free.size()) throw std::invalid_argument("subspace point has wrong dimension");
  for (std::size_t k = 0; k < free.size(); ++k) out[free[k]] = sub[k];
  return out;
}

bool CoordinateSubspace::contains(const RationalPoint& p) const {
  for (std::size_t k = 0; k < fixed.size(); ++k)
    if (p.at(fixed[k]) != values[k]) return false;
  return true;
}

PullbackResult restrict_to_subspace(const AlgebroidPtr& a, const CoordinateSubspace& n,
                                    const std::vector<RationalPoint>& samples,
                                    const std::vector<std::vector<Scalar>>& extra_constraints) {
  return pullback(a, n.chart(a->chart()), n.inclusion(a->chart()), samples, extra_constraints);
}

AlgebroidMorphism log_tangent_map(const std::vector<Scalar>& phi, const Chart& source, const Chart& target) {
  if (static_cast<int>(phi.size()) != target.dim()) throw std::invalid_argument("base map needs one component per target coordinate");
  const int ns = source.dim(), nt = target.dim();
  Matrix<Scalar> psi(nt, ns);
  for (int i = 0; i < nt; ++i) {
    if (target.in_divisor(i)) {
      if (phi[i].is_zero()) continue;  // the whole source maps into the hyperplane
      // phi_i must be a monomial in source divisor coordinates times a unit at the origin.
      const auto& terms = phi[i].num().terms();
      Monomial content = terms.front().m;
      for (const auto& t : terms)
        for (int v = 0; v < kMaxVars; ++v) content.exp[v] = std::min(content.exp[v], t.m.exp[v]);
      for (int v = 0; v < ns; ++v)
        if (content.exp[v] && !source.in_divisor(v))
          throw LogMorphismError("not a log morphism: component " + target.names[i] + " vanishes along {" +
                                 source.names[v] + " = 0}, which is not in the divisor");
      content.degree = 0;
      for (int v = 0; v < kMaxVars; ++v) content.degree += content.exp[v];
      Scalar unit = phi[i] / Scalar(Polynomial::monomial(content, 1));
      if (unit.num().constant_term() == 0 || unit.den().constant_term() == 0)
        throw LogMorphismError("not a log morphism: " + target.names[i] + " is not a divisor monomial times a unit");
    }
    for (int j = 0; j < ns; ++j) {
      Scalar d = phi[i].derivative(j);
      if (d.is_zero()) continue;
      if (source.in_divisor(j)) d *= Scalar::variable(j);
      if (target.in_divisor(i)) d /= phi[i];
      psi(i, j) = d;
    }
  }
  return {make_log_tangent(source), make_log_tangent(target), phi, psi};
}

}  // namespace logsymp
