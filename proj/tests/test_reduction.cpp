#include "doctest.h"
#include "example_algebroids.hpp"
#include "random_objects.hpp"

using namespace logsymp;
using namespace testing_support;

namespace {
Form constant_form(int rank, std::initializer_list<std::pair<Blade, long>> terms) {
  Form f(rank, 2);
  for (const auto& [b, c] : terms) f.add(b, Scalar(c));
  return f;
}

Scalar on_zero_section(const Scalar& s, int n, int l) {
  std::vector<Scalar> images;
  for (int i = 0; i < n; ++i) images.push_back(Scalar::variable(i));
  for (int a = 0; a < l; ++a) images.emplace_back();
  return s.substitute(images);
}

const std::vector<RationalPoint> rank3_samples{{1, 0}, {mpq_class(1, 2), 1}, {2, mpq_class(-1, 3)}};
const std::vector<RationalPoint> rank3_n_samples{{1, 0, 0}, {mpq_class(1, 2), 1, -1}, {2, mpq_class(-1, 3), 1}};
}  // namespace

TEST_CASE("oracle: presymplectic kernels") {
  PresymplecticData pd = rank3_model();
  REQUIRE(pd.kernel.size() == 1);
  CHECK(pd.kernel[0] == Section{Scalar(0), Scalar(0), Scalar(1)});
  CHECK(pd.bracket_closed);
  CHECK(pd.basic);

  auto plane = make_log_tangent(Chart({"x", "y"}, {0}));
  CHECK(presymplectic_kernel(plane, constant_form(2, {{0b11, 1}}), {{1, 1}}).kernel.empty());

  auto t3 = make_tangent(Chart({"x", "y", "z"}));
  Form open(3, 2);
  open.add(0b011, Scalar::variable(2));
  CHECK_THROWS_AS(presymplectic_kernel(t3, open, {}), NotClosedError);

  auto t2 = make_tangent(Chart({"x", "y"}));
  Form jump(2, 2);
  jump.add(0b11, Scalar::variable(0));
  CHECK_NOTHROW(presymplectic_kernel(t2, jump, {{1, 0}}));
  CHECK_THROWS_AS(presymplectic_kernel(t2, jump, {{1, 0}, {0, 1}}), ConstantRankError);
}

TEST_CASE("oracle: pulling back to a point of the divisor leaves the distinguished section in the kernel") {
  auto a = make_log_tangent(Chart({"x", "y", "z", "w"}, {0}));
  Form w = constant_form(4, {{0b0011, 1}, {0b1100, 1}});
  auto pb = restrict_to_subspace(a, {{0, 1}, {0, 0}}, {{0, 0}, {1, 2}});
  Form wn = pullback_form(pb.morphism, w);
  auto pd = presymplectic_kernel(pb.algebroid, wn, {{0, 0}, {1, 2}});
  REQUIRE(pd.kernel.size() == 1);
  std::vector<Scalar> image(4);
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < pb.algebroid->rank(); ++k) image[i] += pb.morphism.fibre(i, k) * pd.kernel[0][k];
  CHECK(image[0] != Scalar(0));
  CHECK(image[1].is_zero());
  CHECK(image[2].is_zero());
  CHECK(image[3].is_zero());
}

TEST_CASE("oracle: symplectization of the rank-3 model reproduces the block table") {
  PresymplecticData pd = rank3_model();
  for (const auto& s : {rank3_splitting(Scalar(0), Scalar(0)),
                        rank3_splitting(Scalar::variable(1), Scalar::variable(0) + Scalar(mpq_class(1, 2)))}) {
    SymplectizationModel m = symplectize(pd, s);
    CHECK(m.algebroid->rank() == 4);
    CHECK(m.algebroid->chart().names == std::vector<std::string>{"x", "y", "z", "q1"});
    ModelReport rep = check_model(m, rank3_n_samples);
    CHECK(rep.closed);
    CHECK(rep.table);
    CHECK(rep.pullback);
    CHECK(rep.coisotropic);
    CHECK(rep.pass);
    Matrix<Scalar> g = adapted_matrix_on_zero_section(m);
    CHECK(g(0, 3) == Scalar(1));
    CHECK(g(3, 0) == Scalar(-1));
    CHECK_FALSE(g(1, 2).is_zero());
    CHECK(check_symplectic(m.algebroid, m.omega).nondegenerate);
  }
  CHECK_THROWS_AS(symplectize(pd, rank3_splitting(Scalar(0), Scalar(0)) + rank3_splitting(Scalar(0), Scalar(0))),
                  SplittingError);
}

TEST_CASE("oracle: Lagrangian and symplectic extremes") {
  auto b = aff1_action();
  Form zero(2, 2);
  auto pd = presymplectic_kernel(b, zero, {{0}, {1}});
  CHECK(pd.kernel.size() == 2);
  Matrix<Scalar> kappa = Matrix<Scalar>::from_columns(2, pd.kernel);
  SymplectizationModel m = symplectize(pd, inverse(kappa.transpose()));
  PhaseSpace ps = phase_space(b);
  if (kappa == Matrix<Scalar>::identity(2)) {
    CHECK(m.omega == ps.omega_can);
    CHECK(m.algebroid->anchor() == ps.algebroid->anchor());
  }
  CHECK(check_model(m, {{0}, {1}}).pass);

  auto plane = make_log_tangent(Chart({"x", "y"}, {0}));
  Form w = constant_form(2, {{0b11, 1}});
  auto pd2 = presymplectic_kernel(plane, w, {{1, 1}});
  SymplectizationModel m2 = symplectize(pd2, Matrix<Scalar>(2, 0));
  CHECK(m2.omega == w);
  CHECK(m2.algebroid->chart() == plane->chart());
  CHECK(check_model(m2, {{1, 1}}).pass);
}

TEST_CASE("oracle: slice reduction") {
  PresymplecticData pd = rank3_model();
  SliceReduction red = reduce_along_slice(pd, {{2}, {0}}, rank3_samples);
  CHECK(red.algebroid->rank() == 2);
  CHECK(red.omega == constant_form(2, {{0b11, 1}}));
  CHECK(red.report.pass);
  CHECK_THROWS_AS(reduce_along_slice(pd, {{0}, {1}}, {{0, 0}, {1, 1}}), TransversalityError);

  auto plane = make_log_tangent(Chart({"x", "y"}, {0}));
  auto pd2 = presymplectic_kernel(plane, constant_form(2, {{0b11, 1}}), {{1, 1}});
  SliceReduction same = reduce_along_slice(pd2, {}, {{1, 1}, {2, 3}});
  CHECK(same.algebroid->rank() == 2);
  CHECK(same.omega == pd2.omega);
  CHECK(same.report.pass);
}

TEST_CASE("oracle: log plane reduction away from the divisor gives a point") {
  ReductionResult res = hamiltonian_reduce(log_plane_reduction(1, false));
  CHECK(res.level_set.fixed == std::vector<int>{0});
  CHECK(res.level_set.values == std::vector<mpq_class>{1});
  CHECK(res.identities.size() == 5);
  for (const auto& id : res.identities) CHECK(id.all());
  CHECK(res.h.size() == 1);
  CHECK(res.presymplectic.kernel.size() == 1);
  CHECK(res.kernel_matches);
  CHECK(res.h_transitive);
  CHECK(res.reduced.algebroid->dim() == 0);
  CHECK(res.reduced.algebroid->rank() == 0);
  CHECK(res.pass);
}

TEST_CASE("oracle: log plane reduction on the divisor gives (Z, A|_Z)") {
  ReductionResult res = hamiltonian_reduce(log_plane_reduction(0, true));
  CHECK(res.level_set.values == std::vector<mpq_class>{0});
  for (const auto& id : res.identities) CHECK(id.all());
  CHECK(res.h.empty());
  CHECK(res.presymplectic.kernel.empty());
  CHECK(res.reduced.algebroid->dim() == 1);
  CHECK(res.reduced.algebroid->rank() == 2);
  CHECK(res.reduced.algebroid->chart().names == std::vector<std::string>{"y"});
  CHECK(res.reduced.omega == constant_form(2, {{0b11, 1}}));
  CHECK(res.pass);
}

TEST_CASE("oracle: Hamiltonian reduction errors") {
  ReductionRequest bad_f = log_plane_reduction(1, true);
  CHECK_THROWS_AS(hamiltonian_reduce(bad_f), std::invalid_argument);

  ReductionRequest not_poisson = log_plane_reduction(1, false);
  not_poisson.target_lambda = MultiSection(1, 2);
  not_poisson.moment.fibre(0, 1) = Scalar(1);
  CHECK_THROWS(hamiltonian_reduce(not_poisson));

  ReductionRequest constant = log_plane_reduction(1, false);
  constant.moment.base_map = {Scalar(1)};
  constant.moment.fibre = Matrix<Scalar>(1, 2);
  CHECK_THROWS_AS(hamiltonian_reduce(constant), RegularValueError);

  ReductionRequest curved = log_plane_reduction(1, false);
  curved.moment.base_map = {Scalar::variable(0) * Scalar::variable(0)};
  CHECK_THROWS(hamiltonian_reduce(curved));

  // Abelian R^2 over a point with moment onto the first coordinate: the action of R is trivial.
  ReductionRequest not_free;
  not_free.algebroid = make_lie_algebra(2, std::vector<mpq_class>(8, 0));
  not_free.omega = constant_form(2, {{0b11, 1}});
  Matrix<Scalar> f(1, 2);
  f(0, 0) = Scalar(1);
  not_free.moment = {not_free.algebroid, make_lie_algebra(1, {0}), {}, f};
  not_free.target_lambda = MultiSection(1, 2);
  not_free.samples = {{}};
  CHECK_THROWS_AS(hamiltonian_reduce(not_free), LocalFreenessError);
}

TEST_CASE("oracle: reduction with respect to the identity moment") {
  auto a = make_log_tangent(Chart({"x1", "x2", "x3", "x4"}, {0, 2}));
  Form w = constant_form(4, {{0b0101, 1}, {0b1010, 1}});
  RationalPoint x{0, 1, 0, 1};
  AlgebraicQuotient q = identity_moment_reduction(*a, w, x, {{1, 0, 0, 0}, {0, 0, 1, 0}});
  CHECK(q.rank == 2);
  CHECK(q.symplectic);
  CHECK(q.form(0, 1) == 1);
  CHECK(identity_moment_reduction(*a, w, x, {{1, 0, 0, 0}}).rank == 0);
  CHECK_THROWS_AS(identity_moment_reduction(*a, w, x, {{0, 1, 0, 0}}), std::invalid_argument);
}

TEST_CASE("oracle: induced divisor") {
  Chart plane({"x", "y"}, {0});
  InducedDivisor on_z = induced_divisor(plane, {{0}, {0}});
  CHECK(on_z.v_rank() == 1);
  CHECK(on_z.divisor.empty());
  InducedDivisor across = induced_divisor(plane, {{1}, {0}});
  CHECK(across.v_rank() == 0);
  CHECK(across.divisor == std::vector<int>{0});
  InducedDivisor whole = induced_divisor(plane, {});
  CHECK(whole.divisor == plane.divisor);
  CHECK(induced_divisor(plane, {{0}, {1}}).divisor.empty());
}

TEST_CASE("oracle: log linear Poisson structures") {
  auto abelian = make_lie_algebra(2, std::vector<mpq_class>(8, 0));
  CHECK(log_linear_poisson(*abelian, 1).lambda.is_zero());

  PoissonStructure p = log_linear_poisson(*aff1(), 1);
  CHECK(p.involutive);
  Matrix<Scalar> coord = base_bivector(*p.algebroid, p.lambda);
  CHECK(coord(0, 1) == Scalar::variable(0) * Scalar::variable(1));
  CHECK(p.lambda.get(0b11) == Scalar::variable(1));

  // Heisenberg in the basis (X, Y, Z), [X, Y] = Z; X^* is a character, Z^* is not.
  std::vector<mpq_class> heis(27, 0);
  heis[(0 * 3 + 1) * 3 + 2] = 1;
  heis[(1 * 3 + 0) * 3 + 2] = -1;
  CHECK(log_linear_poisson(*make_lie_algebra(3, heis), 1).involutive);
  std::vector<mpq_class> heis_z_first(27, 0);
  heis_z_first[(1 * 3 + 2) * 3 + 0] = 1;
  heis_z_first[(2 * 3 + 1) * 3 + 0] = -1;
  CHECK_THROWS_AS(log_linear_poisson(*make_lie_algebra(3, heis_z_first), 1), CharacterError);
  CHECK(log_linear_poisson(*so3(), 0).involutive);
}

TEST_CASE("oracle: log groupoid forms") {
  auto r1 = make_lie_algebra(1, {0});
  GroupoidForm g1 = log_groupoid_form(*r1, 1);
  CHECK(g1.omega == constant_form(2, {{0b11, 1}}));
  CHECK(check_symplectic(g1.algebroid, g1.omega).pass);

  GroupoidForm ga = log_groupoid_form(*aff1(), 1);
  CHECK(d(*ga.algebroid, ga.omega).is_zero());
  CHECK(check_symplectic(ga.algebroid, ga.omega).pass);
  GroupoidForm half = log_groupoid_form(*aff1(), 1, mpq_class(-1, 2));
  CHECK_FALSE(d(*half.algebroid, half.omega).is_zero());

  Form cross_only(4, 2);
  cross_only.add(0b0011, Scalar::variable(1));
  CHECK_FALSE(check_symplectic(ga.algebroid, cross_only).nondegenerate);
}

TEST_CASE("property: symplectization under random splittings") {
  PresymplecticData pd = rank3_model();
  for (int trial = 0; trial < 8; ++trial) {
    SymplectizationModel m = symplectize(pd, rank3_splitting(random_polynomial(2, 1), random_polynomial(3, 1)));
    CHECK(check_model(m, rank3_n_samples).pass);
  }
  auto g = so3();
  Form w(3, 2);
  w.add(0b011, Scalar(1));
  auto pd3 = presymplectic_kernel(g, w, {{}});
  REQUIRE(pd3.kernel.size() == 1);
  CHECK(pd3.bracket_closed);
  CHECK(pd3.basic);
  for (int trial = 0; trial < 4; ++trial) {
    Matrix<Scalar> s(3, 1);
    s(0, 0) = Scalar(random_rational());
    s(1, 0) = Scalar(random_rational());
    s(2, 0) = Scalar(1);
    CHECK(check_model(symplectize(pd3, s), {{}}).pass);
  }
}

TEST_CASE("property: two splittings differ by an exact form vanishing on N") {
  PresymplecticData pd = rank3_model();
  for (int trial = 0; trial < 5; ++trial) {
    auto m0 = symplectize(pd, rank3_splitting(random_polynomial(2, 1), random_polynomial(2, 1)));
    auto m1 = symplectize(pd, rank3_splitting(random_polynomial(2, 1), random_polynomial(2, 1)));
    Form beta = splitting_primitive(m0, m1);
    CHECK(d(*m0.algebroid, beta) == m0.omega - m1.omega);
    for (const auto& [b, c] : beta.coeffs) CHECK(on_zero_section(c, 3, 1).is_zero());
  }
}

TEST_CASE("property: moment identities hold at random samples of the log example") {
  for (int trial = 0; trial < 3; ++trial) {
    ReductionRequest req = log_plane_reduction(random_rational() + 7, false);
    for (auto& s : req.samples) s[0] = random_rational();
    ReductionResult res = hamiltonian_reduce(req);
    for (const auto& id : res.identities) CHECK(id.all());
    CHECK(res.pass);
  }
}
