#include "doctest.h"
#include "logsymp/algebroid.hpp"
#include "random_objects.hpp"

using namespace logsymp;
using testing_support::random_polynomial;

namespace {
const Chart plane({"x", "y"});
const Chart log_plane({"x", "y"}, {0});
const Chart log_cross({"x", "y"}, {0, 1});
Scalar X() { return Scalar::variable(0); }
Scalar Y() { return Scalar::variable(1); }

AlgebroidPtr aff1() { return make_lie_algebra(2, {0, 0, 0, 1, 0, -1, 0, 0}, {"a", "b"}); }

AlgebroidPtr aff1_action() {
  Chart line({"x"});
  return make_action_algebroid(*aff1(), line, {{-Scalar::variable(0)}, {Scalar(1)}});
}

Section random_section(int rank, int vars) {
  Section s(rank);
  for (auto& c : s) c = random_polynomial(vars);
  return s;
}
}  // namespace

TEST_CASE("oracle: check_axioms") {
  CHECK(check_axioms(*make_tangent(plane)).pass);
  auto log = make_log_tangent(log_plane);
  CHECK(log->anchor()(0, 0) == X());
  CHECK(log->anchor()(1, 1) == Scalar(1));
  CHECK(check_axioms(*log).pass);

  auto broken = std::make_shared<Algebroid>(log_plane, log->anchor());
  broken->set_bracket(0, 1, {Scalar(1), Scalar(0)});
  AxiomReport r = check_axioms(*broken);
  CHECK_FALSE(r.pass);
  REQUIRE(r.anchor_failures.size() == 1);
  CHECK(r.anchor_failures[0] == std::array<int, 2>{0, 1});
}

TEST_CASE("oracle: Jacobi witness") {
  auto g = make_lie_algebra(3, std::vector<mpq_class>(27, 0));
  auto bad = std::make_shared<Algebroid>(*g);
  bad->set_bracket(0, 1, {Scalar(0), Scalar(0), Scalar(1)});
  bad->set_bracket(0, 2, {Scalar(1), Scalar(0), Scalar(0)});
  AxiomReport r = check_axioms(*bad);
  CHECK_FALSE(r.pass);
  REQUIRE(r.jacobi_failures.size() == 1);
  CHECK(r.jacobi_failures[0] == std::array<int, 3>{0, 1, 2});
}

TEST_CASE("oracle: log tangent constructors") {
  auto both = make_log_tangent(log_cross);
  CHECK(both->anchor()(0, 0) == X());
  CHECK(both->anchor()(1, 1) == Y());
  CHECK(*make_log_tangent(plane) == *make_tangent(plane));
}

TEST_CASE("oracle: brackets") {
  auto log = make_log_tangent(log_plane);
  CHECK(log->bracket(log->frame(0), log->frame(1)) == log->zero_section());
  auto act = aff1_action();
  CHECK(act->bracket(act->frame(0), act->frame(1)) == act->frame(1));
  Scalar f = random_polynomial(2);
  Section fe2{Scalar(0), f};
  Section lhs = log->bracket(log->frame(0), fe2);
  CHECK(lhs == Section{Scalar(0), log->derive(0, f)});
}

TEST_CASE("oracle: action algebroid homomorphism check") {
  Chart line({"x"});
  CHECK_NOTHROW(aff1_action());
  CHECK(check_axioms(*aff1_action()).pass);
  CHECK_THROWS_AS(make_action_algebroid(*aff1(), line, {{Scalar::variable(0)}, {Scalar(1)}}), HomomorphismError);
  auto r1 = make_lie_algebra(1, {0});
  CHECK(check_axioms(*make_action_algebroid(*r1, plane, {{Scalar(0), Scalar(1)}})).pass);
  try {
    make_action_algebroid(*aff1(), plane, {{Scalar(1), Scalar(0)}, {Scalar(0), Scalar(1)}});
    FAIL("expected a homomorphism failure");
  } catch (const HomomorphismError& e) {
    CHECK(e.pair == std::array<int, 2>{0, 1});
  }
}

TEST_CASE("oracle: adiabatic algebroid") {
  auto ad = make_adiabatic(*make_tangent(Chart({"x"})));
  CHECK(ad->dim() == 2);
  CHECK(ad->anchor()(0, 0) == Scalar(0));
  CHECK(ad->anchor()(0, 1) == Scalar::variable(0));
  auto ad_aff = make_adiabatic(*aff1_action());
  CHECK(ad_aff->c(0, 1, 1) == Scalar::variable(0));
  CHECK(check_axioms(*ad_aff).pass);
  auto act = aff1_action();
  std::vector<mpq_class> x{mpq_class(3, 2)}, tx{1, mpq_class(3, 2)};
  for (int i = 0; i < 2; ++i) CHECK(ad_aff->anchor()(i, 1).evaluate(tx) == act->anchor()(i, 0).evaluate(x));
}

TEST_CASE("oracle: stabilizers") {
  auto log = make_log_tangent(log_plane);
  auto s = stabilizer(*log, {0, 5});
  REQUIRE(s.size() == 1);
  CHECK(s[0] == std::vector<mpq_class>{1, 0});
  CHECK(stabilizer(*log, {1, 1}).empty());
  CHECK(stabilizer(*make_log_tangent(log_cross), {0, 0}).size() == 2);
}

TEST_CASE("oracle: pullback to the divisor") {
  auto log = make_log_tangent(log_plane);
  CoordinateSubspace n{{0}, {0}};
  auto pb = restrict_to_subspace(log, n, {{1}, {-2}, {0}});
  CHECK(pb.algebroid->rank() == 2);
  CHECK(pb.algebroid->dim() == 1);
  CHECK(check_axioms(*pb.algebroid).pass);
  CHECK(morphism_check(pb.morphism).pass);
  // One frame element is the kernel line spanned by e_1, the other lifts d/dy.
  int kernel = 0;
  for (int k = 0; k < 2; ++k)
    if (pb.tangent[k][0].is_zero()) ++kernel;
  CHECK(kernel == 1);
}

TEST_CASE("oracle: pullback to a point") {
  auto tangent = make_tangent(plane);
  CoordinateSubspace pt{{0, 1}, {1, 2}};
  auto pb = restrict_to_subspace(tangent, pt, {{}});
  CHECK(pb.algebroid->rank() == 0);
  auto log = make_log_tangent(log_plane);
  auto on_divisor = restrict_to_subspace(log, CoordinateSubspace{{0, 1}, {0, 3}}, {{}});
  CHECK(on_divisor.algebroid->rank() == 1);
}

TEST_CASE("oracle: pullback along a bundle projection doubles the rank") {
  auto log = make_log_tangent(Chart({"x"}, {0}));
  Chart total({"x", "p"}, {0});
  auto pb = pullback(log, total, {Scalar::variable(0)}, {{0, 1}, {1, 0}, {2, 3}});
  CHECK(pb.algebroid->rank() == 2);
  CHECK(check_axioms(*pb.algebroid).pass);
  CHECK(morphism_check(pb.morphism).pass);
}

TEST_CASE("oracle: non-clean pullback is detected") {
  // Rank one with zero anchor; F(t) = (t^2, 0) has a critical point at t = 0.
  auto trivial = make_action_algebroid(*make_lie_algebra(1, {0}), plane, {{Scalar(0), Scalar(0)}});
  Chart line({"t"});
  Scalar t = Scalar::variable(0);
  auto pb = pullback(trivial, line, {t * t, Scalar(0)}, {{1}});
  CHECK(pb.algebroid->rank() == 1);
  CHECK_THROWS_AS(pullback(trivial, line, {t * t, Scalar(0)}, {{1}, {0}}), NotCleanError);
}

TEST_CASE("oracle: morphism_check") {
  auto log = make_log_tangent(log_plane);
  CHECK(morphism_check(identity_morphism(log)).pass);
  CHECK(morphism_check(anchor_morphism(log)).pass);
  CHECK(morphism_check(anchor_morphism(aff1_action())).pass);
  auto bad = identity_morphism(log);
  bad.fibre(0, 1) += Scalar(1);
  CHECK_FALSE(morphism_check(bad).pass);
}

TEST_CASE("oracle: log tangent map") {
  Chart line({"x"}, {0});
  Scalar x = Scalar::variable(0);
  for (int nu = 1; nu <= 3; ++nu) {
    auto m = log_tangent_map({x.pow(nu)}, line, line);
    CHECK(m.fibre(0, 0) == Scalar(nu));
    CHECK(morphism_check(m).pass);
  }
  CHECK_THROWS_AS(log_tangent_map({x}, Chart({"x"}), line), LogMorphismError);
  Chart log_xy({"x", "y"}, {0});
  CHECK_THROWS_AS(log_tangent_map({x * x + Scalar::variable(1)}, log_xy, line), LogMorphismError);
  auto unit = log_tangent_map({x * (x + 1)}, line, line);
  CHECK(unit.fibre(0, 0) == (2 * x + 1) / (x + 1));
}

TEST_CASE("oracle: section from a vector field") {
  auto log = make_log_tangent(log_plane);
  CHECK(section_from_vector_field(*log, {X(), Scalar(0)}) == log->frame(0));
  CHECK_THROWS(section_from_vector_field(*log, {Scalar(1), Scalar(0)}));
}

TEST_CASE("property: bracket antisymmetry, Jacobi and Leibniz on random sections") {
  std::vector<AlgebroidPtr> cases{make_tangent(plane), make_log_tangent(log_plane), make_log_tangent(log_cross),
                                  aff1_action()};
  for (const auto& a : cases) {
    for (int trial = 0; trial < 15; ++trial) {
      Section s = random_section(a->rank(), a->dim()), t = random_section(a->rank(), a->dim()),
              u = random_section(a->rank(), a->dim());
      Section st = a->bracket(s, t), ts = a->bracket(t, s);
      for (int k = 0; k < a->rank(); ++k) CHECK((st[k] + ts[k]).is_zero());
      Section j1 = a->bracket(a->bracket(s, t), u), j2 = a->bracket(a->bracket(t, u), s),
              j3 = a->bracket(a->bracket(u, s), t);
      for (int k = 0; k < a->rank(); ++k) CHECK((j1[k] + j2[k] + j3[k]).is_zero());
      Scalar f = random_polynomial(a->dim());
      Section ft = t;
      for (auto& c : ft) c *= f;
      Section lhs = a->bracket(s, ft);
      Scalar sf = a->derive(s, f);
      for (int k = 0; k < a->rank(); ++k) CHECK(lhs[k] == f * st[k] + sf * t[k]);
    }
  }
}

TEST_CASE("property: constructors satisfy the axioms") {
  CHECK(check_axioms(*make_product(*aff1_action(), *make_log_tangent(Chart({"u", "v"}, {0})))).pass);
  CHECK(check_axioms(*make_adiabatic(*make_log_tangent(log_cross))).pass);
}

TEST_CASE("property: pullback frames project correctly") {
  auto act = aff1_action();
  Chart p({"u", "v"});
  Scalar u = Scalar::variable(0), v = Scalar::variable(1);
  auto pb = pullback(act, p, {u + v}, {{0, 0}, {1, 2}, {-3, 1}});
  CHECK(check_axioms(*pb.algebroid).pass);
  for (int k = 0; k < pb.algebroid->rank(); ++k) {
    Scalar tf = pb.tangent[k][0] + pb.tangent[k][1];
    Scalar an = act->anchor_of(pb.fibre[k])[0].substitute({u + v});
    CHECK(tf == an);
  }
  CHECK(morphism_check(pb.morphism).pass);
}

TEST_CASE("property: log tangent map agrees with the tangent map off the divisor") {
  Chart src({"x", "y"}, {0}), dst({"u", "w"}, {0});
  Scalar x = X(), y = Y();
  std::vector<Scalar> phi{x * x * (1 + y), x + y * y};
  auto m = log_tangent_map(phi, src, dst);
  CHECK(morphism_check(m).pass);
  // A_P Psi = Phi A_M with A = diag of the divisor coordinates.
  Matrix<Scalar> am(2, 2), ap(2, 2), jac(2, 2);
  am(0, 0) = x;
  am(1, 1) = Scalar(1);
  ap(0, 0) = phi[0];
  ap(1, 1) = Scalar(1);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) jac(i, j) = phi[i].derivative(j);
  CHECK(ap * m.fibre == jac * am);
}
