#include "cartan_checks.hpp"
#include "doctest.h"
#include "logsymp/poisson.hpp"

using namespace logsymp;
using namespace testing_support;

namespace {
const Chart log_plane({"x", "y"}, {0});
Scalar X() { return Scalar::variable(0); }
Scalar Y() { return Scalar::variable(1); }
Form eps12(int rank = 2) {
  Form f(rank, 2);
  f.add(0b11, Scalar(1));
  return f;
}
MultiSection e12(const Scalar& c = Scalar(1)) {
  MultiSection f(2, 2);
  f.add(0b11, c);
  return f;
}
}  // namespace

TEST_CASE("oracle: inversion and sharp on the log symplectic plane") {
  CHECK(invert(eps12()) == e12());
  Section s = sharp(e12(), {Scalar(0), Scalar(1)});
  CHECK(s == Section{Scalar(-1), Scalar(0)});
  auto a = make_log_tangent(log_plane);
  CHECK(a->anchor_of(s) == VectorField{-X(), Scalar(0)});
  CHECK_THROWS_AS(invert(eps12(3)), DegenerateFormError);
}

TEST_CASE("oracle: flat inverts sharp") {
  Form w = eps12();
  MultiSection lambda = invert(w);
  Section s{X() + Y(), Y() * Y()};
  CHECK(sharp(lambda, flat(w, s)) == s);
}

TEST_CASE("oracle: Poisson bracket of coordinates") {
  auto a = make_log_tangent(log_plane);
  CHECK(poisson_bracket(*a, e12(), X(), Y()) == X());
  Scalar f = random_polynomial(2);
  CHECK(poisson_bracket(*a, e12(), f, f).is_zero());
}

TEST_CASE("oracle: Hamiltonian sections") {
  auto a = make_log_tangent(log_plane);
  Section sy = hamiltonian_section(*a, e12(), Y());
  CHECK(a->anchor_of(sy) == VectorField{-X(), Scalar(0)});
  CHECK(hamiltonian_section(*a, e12(), Scalar(7)) == a->zero_section());
}

TEST_CASE("oracle: check_symplectic") {
  auto a = make_log_tangent(log_plane);
  CHECK(check_symplectic(a, eps12()).pass);
  // Every 2-form of a rank-2 algebroid is closed, so the witness lives in rank 4.
  auto t4 = make_tangent(Chart({"x", "y", "z", "w"}));
  Form w(4, 2);
  w.add(0b0011, Scalar::variable(2));
  w.add(0b1100, Scalar(1));
  SymplecticReport rep = check_symplectic(t4, w);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.closed);
  CHECK(rep.nondegenerate);
  CHECK_FALSE(rep.inverse_involutive);
  CHECK_FALSE(rep.witnesses.empty());
  CHECK_FALSE(check_symplectic(make_log_tangent(Chart({"x", "y", "z"}, {0})), eps12(3)).nondegenerate);
}

TEST_CASE("oracle: dual algebroid") {
  auto a = make_log_tangent(log_plane);
  auto zero = PoissonStructure::certify(a, MultiSection(2, 2));
  auto dual0 = dual_algebroid(zero);
  CHECK(dual0->anchor().is_zero());
  CHECK(dual0->c(0, 1, 0).is_zero());
  CHECK(dual0->c(0, 1, 1).is_zero());

  auto sym = SymplecticStructure::make(a, eps12());
  auto p = sym.poisson();
  auto dual = dual_algebroid(p);
  CHECK(check_axioms(*dual).pass);
  CHECK(morphism_check(sharp_morphism(p, dual)).pass);
  // omega^flat : A -> A* conjugates the structures.
  std::vector<Scalar> base{X(), Y()};
  AlgebroidMorphism flat_m{a, dual, base, sym.matrix};
  CHECK(morphism_check(flat_m).pass);
}

TEST_CASE("oracle: uncertified Poisson structures are refused") {
  auto t3 = make_tangent(Chart({"x", "y", "z"}));
  MultiSection lambda(3, 2);
  lambda.add(0b011, Scalar(1));
  lambda.add(0b101, Scalar::variable(0));
  auto p = PoissonStructure::certify(t3, lambda);
  CHECK_FALSE(p.involutive);
  CHECK_THROWS_AS(dual_algebroid(p), UncertifiedPoissonError);
}

TEST_CASE("oracle: coisotropic subspaces") {
  MultiSection lambda = e12();
  CHECK(coisotropic_test(lambda, {{{0, 0}, {{1, 0}}}}).pass);
  CHECK(coisotropic_test(lambda, {{{1, 1}, {{1, 0}, {0, 1}}}}).pass);
  CHECK_FALSE(coisotropic_test(lambda, {{{1, 1}, {}}}).pass);
}

TEST_CASE("property: Hamiltonian sections agree with Schouten, brackets and preserve lambda") {
  auto a = make_log_tangent(log_plane);
  auto sym = SymplecticStructure::make(a, eps12());
  for (int trial = 0; trial < 20; ++trial) {
    Scalar f = random_polynomial(2), g = random_polynomial(2);
    Section sf = hamiltonian_section(*a, sym.inverse, f), sg = hamiltonian_section(*a, sym.inverse, g);
    CHECK(multisection(sf) == schouten(*a, sym.inverse, function_multisection(2, f)));
    CHECK(poisson_bracket(*a, sym.inverse, f, g) == evaluate_on(sym.omega, {sf, sg}));
    CHECK(schouten(*a, multisection(sf), sym.inverse).is_zero());
  }
}

TEST_CASE("property: sharp intertwines the bracket of 1-forms") {
  auto a = make_log_tangent(log_plane);
  MultiSection lambda = e12(X() + Y() * Y());
  for (int trial = 0; trial < 20; ++trial) {
    auto al = as_one_form(random_form(2, 1, 2)), be = as_one_form(random_form(2, 1, 2));
    CHECK(sharp(lambda, bracket_one_forms(*a, lambda, al, be)) == a->bracket(sharp(lambda, al), sharp(lambda, be)));
  }
}

TEST_CASE("property: Jacobi holds exactly for Poisson and fails otherwise") {
  auto t3 = make_tangent(Chart({"x", "y", "z"}));
  MultiSection good(3, 2), bad(3, 2);
  Scalar x = Scalar::variable(0), y = Scalar::variable(1), z = Scalar::variable(2);
  // Linear so(3)* structure: {x,y} = z, {y,z} = x, {z,x} = y.
  good.add(0b011, z);
  good.add(0b110, x);
  good.add(0b101, -y);
  bad.add(0b011, Scalar(1));
  bad.add(0b101, x);
  CHECK(PoissonStructure::certify(t3, good).involutive);
  CHECK_FALSE(PoissonStructure::certify(t3, bad).involutive);
  auto jac = [&](const MultiSection& l, const Scalar& f, const Scalar& g, const Scalar& h) {
    return poisson_bracket(*t3, l, f, poisson_bracket(*t3, l, g, h)) +
           poisson_bracket(*t3, l, g, poisson_bracket(*t3, l, h, f)) +
           poisson_bracket(*t3, l, h, poisson_bracket(*t3, l, f, g));
  };
  for (int trial = 0; trial < 20; ++trial)
    CHECK(jac(good, random_polynomial(3), random_polynomial(3), random_polynomial(3)).is_zero());
  bool found = false;
  for (int trial = 0; trial < 50 && !found; ++trial)
    found = !jac(bad, random_polynomial(3, 1), random_polynomial(3, 1), random_polynomial(3, 1)).is_zero();
  CHECK(found);
}

TEST_CASE("property: d_lambda squares to zero iff lambda is Poisson") {
  auto t3 = make_tangent(Chart({"x", "y", "z"}));
  Scalar x = Scalar::variable(0), y = Scalar::variable(1), z = Scalar::variable(2);
  MultiSection good(3, 2), bad(3, 2);
  good.add(0b011, z);
  good.add(0b110, x);
  good.add(0b101, -y);
  bad.add(0b011, Scalar(1));
  bad.add(0b101, x);
  bool bad_nonzero = false;
  for (int trial = 0; trial < 10; ++trial) {
    MultiSection u = random_multisection(3, trial % 2, 3);
    CHECK(schouten(*t3, good, schouten(*t3, good, u)).is_zero());
    if (!schouten(*t3, bad, schouten(*t3, bad, u)).is_zero()) bad_nonzero = true;
  }
  CHECK(bad_nonzero);
}

TEST_CASE("property: the base bivector is Poisson") {
  auto a = make_log_tangent(log_plane);
  auto t2 = make_tangent(Chart({"x", "y"}));
  MultiSection pi = bivector(base_bivector(*a, e12(X() + Y())));
  CHECK(schouten(*t2, pi, pi).is_zero());
}

TEST_CASE("property: coisotropic for lambda iff coisotropic for the base bivector") {
  auto a = make_log_tangent(log_plane);
  MultiSection lambda = e12();
  std::vector<CoordinateSubspace> subs{{{0}, {0}}, {{1}, {0}}, {{0, 1}, {1, 1}}, {{0, 1}, {0, 1}}};
  for (const auto& n : subs) {
    std::vector<RationalPoint> samples;
    for (int k = 1; k <= 3; ++k) {
      RationalPoint sub;
      for (std::size_t i = 0; i < 2 - n.fixed.size(); ++i) sub.push_back(mpq_class(k, 2));
      samples.push_back(n.embed(a->chart(), sub));
    }
    auto r1 = coisotropic_submanifold_test(*a, lambda, n, samples);
    auto r2 = base_coisotropic_test(*a, lambda, n, samples);
    CHECK(r1.per_point == r2.per_point);
  }
  CHECK_FALSE(coisotropic_submanifold_test(*a, lambda, {{0, 1}, {1, 1}}, {{1, 1}}).pass);
  CHECK(coisotropic_submanifold_test(*a, lambda, {{0, 1}, {0, 1}}, {{0, 1}}).pass);
}
