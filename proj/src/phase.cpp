#include "logsymp/phase.hpp"

namespace logsymp {

Matrix<Scalar> PhaseSpace::frame_matrix() const { return form_matrix(omega_can).transpose(); }

PhaseSpace phase_space(const AlgebroidPtr& b) {
  if (!check_axioms(*b).pass) throw std::invalid_argument("phase space needs a Lie algebroid");
  const int n = b->dim(), r = b->rank();
  std::vector<std::string> names = b->chart().names;
  for (int i = 0; i < r; ++i) {
    std::string p = "p" + std::to_string(i + 1);
    while (Chart(names).index_of(p) >= 0) p += "'";
    names.push_back(p);
  }
  Chart total(names, b->chart().divisor);

  Matrix<Scalar> anchor(2 * r, n + r);
  for (int i = 0; i < r; ++i) {
    for (int a = 0; a < n; ++a) anchor(i, a) = b->anchor()(i, a);
    anchor(r + i, n + i) = Scalar(1);
  }
  std::vector<std::string> labels;
  for (int i = 0; i < r; ++i) labels.push_back(b->labels()[i]);
  for (int i = 0; i < r; ++i) labels.push_back("f" + std::to_string(i + 1));
  auto a = std::make_shared<Algebroid>(total, anchor, labels);
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      Section s(2 * r);
      for (int k = 0; k < r; ++k) s[k] = b->c(i, j, k);
      a->set_bracket(i, j, s);
    }

  PhaseSpace ps;
  ps.base = b;
  ps.algebroid = a;
  ps.c_matrix = Matrix<Scalar>(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) ps.c_matrix(i, j) += b->c(i, j, k) * Scalar::variable(n + k);
  std::vector<Scalar> alpha(2 * r);
  for (int i = 0; i < r; ++i) alpha[i] = Scalar::variable(n + i);
  ps.alpha_can = one_form(alpha);
  ps.omega_can = -d(*a, ps.alpha_can);
  std::vector<Scalar> base_map;
  for (int i = 0; i < n; ++i) base_map.push_back(Scalar::variable(i));
  Matrix<Scalar> fibre(r, 2 * r);
  for (int i = 0; i < r; ++i) fibre(i, i) = Scalar(1);
  ps.projection = {a, b, base_map, fibre};
  return ps;
}

LinearPoissonReport verify_linear_poisson(const PhaseSpace& ps) {
  LinearPoissonReport rep;
  const int n = ps.base->dim(), r = ps.base_rank();
  rep.computed = base_bivector(*ps.algebroid, invert(ps.omega_can));
  rep.expected = Matrix<Scalar>(n + r, n + r);
  for (int j = 0; j < r; ++j)
    for (int a = 0; a < n; ++a) {
      rep.expected(a, n + j) = ps.base->anchor()(j, a);
      rep.expected(n + j, a) = -ps.base->anchor()(j, a);
    }
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) rep.expected(n + i, n + j) = -ps.c_matrix(i, j);
  for (int a = 0; a < n + r; ++a)
    for (int b = a + 1; b < n + r; ++b)
      if (rep.computed(a, b) != rep.expected(a, b)) rep.mismatches.push_back({a, b});
  rep.pass = rep.mismatches.empty();
  return rep;
}

ZeroSectionReport zero_section_check(const PhaseSpace& ps, const std::vector<RationalPoint>& samples_on_base) {
  ZeroSectionReport rep;
  const int n = ps.base->dim(), r = ps.base_rank();
  CoordinateSubspace zero;
  for (int i = 0; i < r; ++i) {
    zero.fixed.push_back(n + i);
    zero.values.push_back(0);
  }
  auto pb = restrict_to_subspace(ps.algebroid, zero, samples_on_base);
  rep.form_vanishes = pullback_form(pb.morphism, ps.omega_can).is_zero();
  rep.rank_matches = pb.algebroid->rank() == r;
  // zeta^!A -> A -> B; base map of the composite is the identity on N.
  Matrix<Scalar> fibre = ps.projection.fibre * pb.morphism.fibre;
  std::vector<Scalar> base_map;
  for (int i = 0; i < n; ++i) base_map.push_back(Scalar::variable(i));
  AlgebroidMorphism composite{pb.algebroid, ps.base, base_map, fibre};
  rep.isomorphic_to_base = rep.rank_matches && morphism_check(composite).pass && !determinant(fibre).is_zero();
  std::vector<RationalPoint> total_samples;
  for (const auto& x : samples_on_base) total_samples.push_back(zero.embed(ps.algebroid->chart(), x));
  rep.lagrangian =
      coisotropic_submanifold_test(*ps.algebroid, invert(ps.omega_can), zero, total_samples).pass && rep.form_vanishes;
  rep.pass = rep.form_vanishes && rep.rank_matches && rep.isomorphic_to_base && rep.lagrangian;
  return rep;
}

}  // namespace logsymp
