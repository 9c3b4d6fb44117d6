#include "logsymp/poisson.hpp"

namespace logsymp {

PoissonStructure PoissonStructure::certify(AlgebroidPtr a, MultiSection lambda) {
  if (lambda.degree != 2 || lambda.rank != a->rank()) throw std::invalid_argument("a Poisson structure is a 2-section");
  PoissonStructure p{std::move(a), std::move(lambda), false};
  p.involutive = schouten(*p.algebroid, p.lambda, p.lambda).is_zero();
  return p;
}

void PoissonStructure::require_involutive() const {
  if (!involutive) throw UncertifiedPoissonError("2-section is not certified involutive");
}

SymplecticStructure SymplecticStructure::make(AlgebroidPtr a, Form omega) {
  if (omega.degree != 2 || omega.rank != a->rank()) throw std::invalid_argument("a symplectic form is a 2-form");
  SymplecticStructure s;
  s.matrix = form_matrix(omega);
  s.inverse = invert(omega);
  s.closed = d(*a, omega).is_zero();
  s.algebroid = std::move(a);
  s.omega = std::move(omega);
  return s;
}

PoissonStructure SymplecticStructure::poisson() const { return PoissonStructure::certify(algebroid, inverse); }

Section sharp(const MultiSection& lambda, const std::vector<Scalar>& alpha) {
  Section out(lambda.rank);
  for (const auto& [b, c] : lambda.coeffs) {
    auto idx = blade_indices(b);
    // lambda(e_i, e_j) = c for i < j
    out[idx[1]] += c * alpha[idx[0]];
    out[idx[0]] -= c * alpha[idx[1]];
  }
  return out;
}

std::vector<Scalar> flat(const Form& omega, const Section& sigma) {
  Matrix<Scalar> g = form_matrix(omega);
  std::vector<Scalar> out(omega.rank);
  for (int a = 0; a < omega.rank; ++a)
    for (int b = 0; b < omega.rank; ++b)
      if (!g(a, b).is_zero() && !sigma[b].is_zero()) out[a] += g(a, b) * sigma[b];
  return out;
}

MultiSection invert(const Form& omega) {
  Matrix<Scalar> g = form_matrix(omega);
  Matrix<Scalar> gi;
  try {
    gi = inverse(g);
  } catch (const SingularMatrixError&) {
    throw DegenerateFormError("2-form is degenerate");
  }
  return bivector(-gi);
}

Scalar poisson_bracket(const Algebroid& a, const MultiSection& lambda, const Scalar& f, const Scalar& g) {
  return pair(lambda, wedge(d(a, f), d(a, g)));
}

std::vector<Scalar> bracket_one_forms(const Algebroid& a, const MultiSection& lambda, const std::vector<Scalar>& alpha,
                                      const std::vector<Scalar>& beta) {
  Form fa = one_form(alpha), fb = one_form(beta);
  Form r = contract(sharp(lambda, alpha), d(a, fb)) - contract(sharp(lambda, beta), d(a, fa)) +
           d(a, pair(lambda, wedge(fa, fb)));
  return as_one_form(r);
}

AlgebroidPtr dual_algebroid(const PoissonStructure& p) {
  p.require_involutive();
  const Algebroid& a = *p.algebroid;
  const int r = a.rank();
  Matrix<Scalar> anchor(r, a.dim());
  std::vector<std::vector<Scalar>> eps(r, std::vector<Scalar>(r));
  for (int i = 0; i < r; ++i) eps[i][i] = Scalar(1);
  for (int i = 0; i < r; ++i) {
    VectorField v = a.anchor_of(sharp(p.lambda, eps[i]));
    for (int c = 0; c < a.dim(); ++c) anchor(i, c) = v[c];
  }
  std::vector<std::string> labels;
  for (const auto& l : a.labels()) labels.push_back(l + "*");
  auto dual = std::make_shared<Algebroid>(a.chart(), anchor, labels);
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) dual->set_bracket(i, j, bracket_one_forms(a, p.lambda, eps[i], eps[j]));
  return dual;
}

AlgebroidMorphism sharp_morphism(const PoissonStructure& p, const AlgebroidPtr& dual) {
  std::vector<Scalar> base;
  for (int i = 0; i < p.algebroid->dim(); ++i) base.push_back(Scalar::variable(i));
  return {dual, p.algebroid, base, bivector_matrix(p.lambda).transpose()};
}

Matrix<Scalar> base_bivector(const Algebroid& a, const MultiSection& lambda) {
  const Matrix<Scalar>& an = a.anchor();
  return an.transpose() * bivector_matrix(lambda) * an;
}

SymplecticReport check_symplectic(const AlgebroidPtr& a, const Form& omega) {
  SymplecticReport rep;
  Form dw = d(*a, omega);
  rep.closed = dw.is_zero();
  if (!rep.closed) {
    const auto& [b, c] = *dw.coeffs.begin();
    std::string idx;
    for (int i : blade_indices(b)) idx += (idx.empty() ? "" : ",") + std::to_string(i + 1);
    rep.witnesses.push_back("d omega has coefficient " + c.to_string(a->chart()) + " on (" + idx + ")");
  }
  rep.nondegenerate = !determinant(form_matrix(omega)).is_zero();
  if (!rep.nondegenerate) {
    rep.witnesses.push_back("omega is degenerate");
  } else {
    MultiSection lambda = invert(omega);
    rep.inverse_involutive = schouten(*a, lambda, lambda).is_zero();
    if (rep.inverse_involutive != rep.closed)
      rep.witnesses.push_back("closedness and involutivity of the inverse disagree");
  }
  rep.pass = rep.closed && rep.nondegenerate && rep.inverse_involutive;
  return rep;
}

Section hamiltonian_section(const Algebroid& a, const MultiSection& lambda, const Scalar& f) {
  return sharp(lambda, as_one_form(d(a, f)));
}

namespace {

Matrix<mpq_class> bivector_at(const MultiSection& lambda, const RationalPoint& p) {
  return evaluate(bivector_matrix(lambda), p);
}

bool lambda_maps_annihilator_into(const Matrix<mpq_class>& lam, const std::vector<std::vector<mpq_class>>& w, int r) {
  Matrix<mpq_class> wm = Matrix<mpq_class>::from_columns(r, w);
  auto ann = nullspace(wm.transpose());
  std::vector<std::vector<mpq_class>> cols = w;
  for (const auto& alpha : ann) {
    std::vector<mpq_class> image(r, 0);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) image[b] += lam(a, b) * alpha[a];
    cols.push_back(image);
  }
  return rank(Matrix<mpq_class>::from_columns(r, cols)) == rank(wm);
}

}  // namespace

CoisotropicReport coisotropic_test(const MultiSection& lambda, const std::vector<SubspaceAtPoint>& w) {
  CoisotropicReport rep;
  for (const auto& s : w) {
    bool ok = lambda_maps_annihilator_into(bivector_at(lambda, s.point), s.spanning, lambda.rank);
    rep.per_point.push_back(ok);
    rep.pass = rep.pass && ok;
  }
  return rep;
}

std::vector<std::vector<mpq_class>> anchor_preimage(const Algebroid& a, const CoordinateSubspace& n,
                                                     const RationalPoint& x) {
  Matrix<mpq_class> an = evaluate(a.anchor(), x);
  Matrix<mpq_class> m(static_cast<int>(n.fixed.size()), a.rank());
  for (std::size_t c = 0; c < n.fixed.size(); ++c)
    for (int i = 0; i < a.rank(); ++i) m(static_cast<int>(c), i) = an(i, n.fixed[c]);
  return nullspace(m);
}

CoisotropicReport coisotropic_submanifold_test(const Algebroid& a, const MultiSection& lambda,
                                               const CoordinateSubspace& n, const std::vector<RationalPoint>& samples) {
  std::vector<SubspaceAtPoint> w;
  for (const auto& x : samples) w.push_back({x, anchor_preimage(a, n, x)});
  return coisotropic_test(lambda, w);
}

CoisotropicReport base_coisotropic_test(const Algebroid& a, const MultiSection& lambda, const CoordinateSubspace& n,
                                        const std::vector<RationalPoint>& samples) {
  CoisotropicReport rep;
  Matrix<Scalar> pi = base_bivector(a, lambda);
  for (const auto& x : samples) {
    bool ok = true;
    for (int c : n.fixed)
      for (int c2 : n.fixed)
        if (pi(c, c2).evaluate(x) != 0) ok = false;
    rep.per_point.push_back(ok);
    rep.pass = rep.pass && ok;
  }
  return rep;
}

}  // namespace logsymp
