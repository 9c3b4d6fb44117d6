#include "doctest.h"
#include "example_algebroids.hpp"

#include "logsymp/moser.hpp"

#include <cmath>

using namespace logsymp;
using namespace testing_support;

namespace {

AlgebroidPtr log_plane() { return make_log_tangent(Chart({"x", "y"}, {0})); }

Form area(int rank, const Scalar& f) {
  Form w(rank, 2);
  w.add(0b11, f);
  return w;
}

// Tangent bundle of R^2 in the frame e1 = d/dx, e2 = d/dy + x^2 d/dx, so [e1, e2] = 2x e1.
AlgebroidPtr sheared_plane() {
  Chart chart({"x", "y"});
  const Scalar x = Scalar::variable(0);
  Matrix<Scalar> anchor(2, 2);
  anchor(0, 0) = Scalar(1);
  anchor(1, 0) = x * x;
  anchor(1, 1) = Scalar(1);
  auto a = std::make_shared<Algebroid>(chart, anchor);
  a->set_bracket(0, 1, {Scalar(2) * x, Scalar(0)});
  return a;
}

std::vector<std::vector<double>> log_plane_grid() {
  std::vector<std::vector<double>> grid;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) grid.push_back({0.25 + 0.1875 * i, -0.5 + 0.25 * j});
  return grid;
}

const std::vector<RationalPoint> log_plane_n{{0, -1}, {0, 0}, {0, mpq_class(1, 3)}, {0, 1}};

const std::vector<RationalPoint> rank3_n{{1, 0, 0}, {mpq_class(1, 2), 1, -1}, {2, mpq_class(-1, 3), 1}};

std::vector<std::vector<double>> rank3_grid() {
  std::vector<std::vector<double>> grid;
  for (double x : {0.5, 1.0})
    for (double y : {-0.5, 0.5})
      for (double z : {0.0, 0.5})
        for (double q : {-0.25, 0.0, 0.25}) grid.push_back({x, y, z, q});
  return grid;
}

}  // namespace

TEST_CASE("oracle: flow of the distinguished log section") {
  auto line = make_log_tangent(Chart({"x"}, {0}));
  FlowResult f = flow_section(*line, section_function(*line, {Scalar(1)}), {1.0}, 0, 1);
  CHECK(f.end().x[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-8));
  CHECK(f.end().transport[0] == doctest::Approx(1.0));
  CHECK(f.end().jacobian[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-8));
  CHECK(f.isotopy_defect < 1e-7);

  FlowResult still = flow_section(*line, section_function(*line, {Scalar(0)}), {0.3}, 0, 1);
  CHECK(still.end().x[0] == 0.3);
  CHECK(still.end().transport[0] == 1.0);
}

TEST_CASE("oracle: non-diagonal frame transport") {
  auto a = sheared_plane();
  REQUIRE(check_axioms(*a).pass);
  const Scalar x = Scalar::variable(0);
  Section eps{x, Scalar(0)};
  FlowOptions opt;
  opt.tol = 1e-11;
  opt.checkpoints = {std::log(0.75)};
  FlowResult f = flow_section(*a, section_function(*a, eps), {0.8, 0.3}, 0, std::log(0.5), opt);
  REQUIRE(f.samples.size() == 2);
  for (const auto& [sample, s] : {std::pair{f.samples[0], 0.75}, std::pair{f.samples[1], 0.5}}) {
    CHECK(sample.x[0] == doctest::Approx(0.8 * s).epsilon(1e-9));
    CHECK(sample.transport[0] == doctest::Approx(s).epsilon(1e-9));
    CHECK(sample.transport[1] == doctest::Approx(s * 0.64 * (1 - s)).epsilon(1e-9));
    CHECK(std::abs(sample.transport[2]) < 1e-12);
    CHECK(sample.transport[3] == doctest::Approx(1.0));
  }
  CHECK(f.isotopy_defect < 1e-8);
  CHECK(transport_consistency(*a, section_function(*a, eps), {0.8, 0.3}, 0, std::log(0.5)) < 1e-7);

  RetractionSpec r = scaling_retraction(a, eps, {0}, {{0, 0}, {0, 1}});
  CHECK_FALSE(r.closed_form);
  // kappa(eps1 ^ eps2) = (int_0^1 x ds) eps2 once the transport is applied.
  auto k = kappa_numeric(r, area(2, Scalar(1)), 2, {{0.8, 0.3}, {-0.4, 1.0}});
  CHECK(k[0][0b10] == doctest::Approx(0.8).epsilon(1e-8));
  CHECK(std::abs(k[0][0b01]) < 1e-8);
  CHECK(k[1][0b10] == doctest::Approx(-0.4).epsilon(1e-8));
}

TEST_CASE("oracle: Euler-like sections") {
  auto plane = log_plane();
  EulerLikeReport log_rep = euler_like_check(*plane, {Scalar(1), Scalar(0)}, {0}, {{0, 0}, {0, 2}});
  CHECK(log_rep.pass);
  CHECK(log_rep.anchor_vanishes_on_n);
  CHECK_FALSE(log_rep.section_vanishes_on_n);

  auto t2 = make_tangent(Chart({"x", "y"}));
  const Scalar x = Scalar::variable(0), y = Scalar::variable(1);
  EulerLikeReport radial = euler_like_check(*t2, {x, y}, {0, 1}, {{0, 0}});
  CHECK(radial.pass);
  CHECK(radial.section_vanishes_on_n);
  RetractionSpec r = scaling_retraction(t2, {x, y}, {0, 1}, {{0, 0}});
  CHECK(r.closed_form);
  CHECK(r.transport_exponents == std::vector<int>{1, 1});

  auto line = make_tangent(Chart({"x"}));
  EulerLikeReport square = euler_like_check(*line, {x * x}, {0}, {{0}});
  CHECK_FALSE(square.pass);
  CHECK(square.max_slope_error > 0.5);
  EulerLikeReport doubled = euler_like_check(*line, {Scalar(2) * x}, {0}, {{0}});
  CHECK_FALSE(doubled.pass);
  CHECK(doubled.max_ratio_error > 0.5);
  CHECK_THROWS_AS(scaling_retraction(line, {Scalar(2) * x}, {0}, {{0}}), EulerLikeError);
  CHECK_THROWS_AS(euler_like_check(*line, {x}, {0}, {{0}}, {1e-2, 3e-3}), std::invalid_argument);

  // d/dx is not a section of the log plane.
  CHECK_THROWS(section_from_vector_field(*plane, {Scalar(1), Scalar(0)}));
}

TEST_CASE("oracle: numeric kappa against the symbolic operator") {
  auto plane = log_plane();
  RetractionSpec r = scaling_retraction(plane, {Scalar(1), Scalar(0)}, {0}, {{0, 0}});
  REQUIRE(r.closed_form);
  const Scalar x = Scalar::variable(0), y = Scalar::variable(1);
  Form alpha = area(2, x * y + x * x);
  Form exact = homotopy_kappa(r, alpha, 2);
  std::vector<std::vector<double>> pts{{0.5, 0.5}, {1.0, -0.25}, {-0.75, 2.0}};
  auto closed = kappa_numeric(r, alpha, 2, pts);
  QuadratureOptions flow_opt;
  flow_opt.force_flow = true;
  auto flowed = kappa_numeric(r, alpha, 2, pts, flow_opt);
  for (std::size_t p = 0; p < pts.size(); ++p) {
    double want = exact.get(0b10).evaluate(pts[p]);
    CHECK(std::abs(closed[p][0b10] - want) <= 1e-8);
    CHECK(std::abs(flowed[p][0b10] - want) <= 1e-8);
    CHECK(std::abs(closed[p][0b01]) <= 1e-8);
  }
  CHECK(homotopy_defect_numeric(*plane, r, alpha, pts) <= 1e-7);

  // The integrand x / (1 + s x) is not polynomial in s; only the numeric path applies.
  auto line = make_tangent(Chart({"x"}));
  RetractionSpec radial = scaling_retraction(line, {x}, {0}, {{0}});
  Form dx_over = one_form({Scalar(1) / (Scalar(1) + x)});
  CHECK_THROWS_AS(homotopy_kappa(radial, dx_over, 1), NonPolynomialIntegrand);
  auto k = kappa_numeric(radial, dx_over, 1, {{0.5}, {2.0}});
  CHECK(std::abs(k[0][0] - std::log(1.5)) <= 1e-8);
  CHECK(std::abs(k[1][0] - std::log(3.0)) <= 1e-8);
  CHECK(homotopy_defect_numeric(*line, radial, dx_over, {{0.5}, {2.0}}) <= 1e-7);
}

TEST_CASE("oracle: DMW on the log plane") {
  auto plane = log_plane();
  const Scalar x = Scalar::variable(0), y = Scalar::variable(1);
  RetractionSpec r = scaling_retraction(plane, {Scalar(1), Scalar(0)}, {0}, {{0, 0}});
  Form w0 = area(2, Scalar(1)), w1 = area(2, Scalar(1) + x * y);
  CHECK(homotopy_kappa(r, w1 - w0, 2) == one_form({Scalar(0), x * y}));
  MoserReport rep = dmw_verify(plane, r, w0, w1, log_plane_grid(), log_plane_n);
  MESSAGE("log plane DMW defect " << rep.defect << ", transport " << rep.transport_defect << ", steps " << rep.steps);
  // From (13/16, -1/2) and (1, -1/2) the flow reaches 1 + t x y = 0 before t = 1.
  REQUIRE(rep.failures.size() == 2);
  CHECK(std::isinf(rep.point_defects[15]));
  CHECK(std::isinf(rep.point_defects[20]));
  CHECK_FALSE(rep.pass);
  CHECK(rep.defect <= 1e-6);
  CHECK(rep.alpha_vanishes_on_n);
  CHECK(rep.base_residual <= 1e-12);
  CHECK(rep.fibre_residual <= 1e-12);
  CHECK(rep.isotopy_defect <= 1e-6);
  CHECK(rep.transport_defect <= 1e-7);
  CHECK(rep.point_defects.size() == 25);

  // On [1/4, 1] x [0, 1/2] every flow stays where omega_t is nondegenerate.
  std::vector<std::vector<double>> upper;
  for (const auto& p : log_plane_grid())
    if (p[1] >= 0) upper.push_back(p);
  MoserReport half = dmw_verify(plane, r, w0, w1, upper, log_plane_n);
  CHECK(half.pass);
  CHECK(half.failures.empty());
}

TEST_CASE("oracle: Moser input errors") {
  auto plane = log_plane();
  const Scalar x = Scalar::variable(0), y = Scalar::variable(1);
  RetractionSpec r = scaling_retraction(plane, {Scalar(1), Scalar(0)}, {0}, {{0, 0}});
  try {
    dmw_verify(plane, r, area(2, Scalar(1)), area(2, Scalar(2)), log_plane_grid(), log_plane_n);
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("(0, -1)") != std::string::npos);
  }
  CHECK_THROWS_AS(moser_verify(plane, area(2, Scalar(1)), area(2, Scalar(1) + x * y), one_form({Scalar(0), y}),
                               log_plane_grid()),
                  PreconditionError);

  auto t2 = make_tangent(Chart({"x", "y"}));
  CHECK_THROWS_AS(moser_verify(t2, area(2, Scalar(1)), area(2, Scalar(-1)), one_form({Scalar(0), Scalar(2) * x}),
                               {{0.5, 0.5}}),
                  DegenerateFormError);

  auto line = make_tangent(Chart({"x"}));
  CHECK_THROWS_AS(flow_section(*line, section_function(*line, {Scalar(1) / (Scalar(1) - x)}), {0.0}, 0, 1),
                  FlowError);
  CHECK_THROWS_AS(flow_section(*line, section_function(*line, {x * x}), {1.0}, 0, 2), FlowError);
}

TEST_CASE("property: the Moser defect follows the integrator tolerance") {
  auto plane = log_plane();
  const Scalar x = Scalar::variable(0), y = Scalar::variable(1);
  RetractionSpec r = scaling_retraction(plane, {Scalar(1), Scalar(0)}, {0}, {{0, 0}});
  Form w0 = area(2, Scalar(1)), w1 = area(2, Scalar(1) + x * y * y + x * x);
  for (double tol : {1e-7, 1e-8}) {
    MoserOptions coarse, fine;
    coarse.integrator_tol = tol;
    fine.integrator_tol = tol / 10;
    MoserReport c = dmw_verify(plane, r, w0, w1, log_plane_grid(), log_plane_n, coarse);
    MoserReport f = dmw_verify(plane, r, w0, w1, log_plane_grid(), log_plane_n, fine);
    REQUIRE(c.failures.empty());
    MESSAGE("tol " << tol << ": defects " << c.defect << " -> " << f.defect);
    CHECK(f.defect * 5 <= c.defect);
  }
}

TEST_CASE("oracle: two splittings of the rank-3 model are Moser equivalent") {
  PresymplecticData pd = rank3_model();
  const Scalar x = Scalar::variable(0), y = Scalar::variable(1);
  SymplectizationModel m0 = symplectize(pd, rank3_splitting(Scalar(0), Scalar(0)));
  SymplectizationModel m1 = symplectize(pd, rank3_splitting(y, x + Scalar(mpq_class(1, 2))));
  MoserReport rep = coisotropic_embedding_verify(m0, m1, rank3_grid(), rank3_n);
  MESSAGE("rank-3 defect " << rep.defect << ", base " << rep.base_residual << ", fibre " << rep.fibre_residual);
  CHECK(rep.pass);
  CHECK(rep.alpha_vanishes_on_n);
  CHECK(rep.defect <= 1e-6);
  CHECK(rep.base_residual <= 1e-12);
  CHECK(rep.fibre_residual <= 1e-12);

  MoserReport same = coisotropic_embedding_verify(m0, m0, rank3_grid(), rank3_n);
  CHECK(same.defect == 0.0);
  CHECK(same.pass);
}
