#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "mixopt/basis_flows.hpp"
#include "mixopt/quadrature.hpp"

using namespace mixopt;

namespace {

constexpr double pi = std::numbers::pi;

/// Checks u = (-psi_y, psi_x) and div u = 0 by central differences.
void check_stream_consistency(const BasisFlow& flow, const std::vector<Point>& points,
                              double tol) {
  const double e = 1e-6;
  for (const Point p : points) {
    const double psi_x = (flow.stream({p.x + e, p.y}) - flow.stream({p.x - e, p.y})) / (2 * e);
    const double psi_y = (flow.stream({p.x, p.y + e}) - flow.stream({p.x, p.y - e})) / (2 * e);
    const Velocity u = flow.velocity(p);
    CHECK(std::abs(u.u + psi_y) < tol);
    CHECK(std::abs(u.v - psi_x) < tol);
    const double div = (flow.velocity({p.x + e, p.y}).u - flow.velocity({p.x - e, p.y}).u +
                        flow.velocity({p.x, p.y + e}).v - flow.velocity({p.x, p.y - e}).v) /
                       (2 * e);
    CHECK(std::abs(div) < 100 * tol);
  }
}

std::vector<Point> random_points_in_disc(Point c, double R, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts;
  while (static_cast<int>(pts.size()) < n) {
    const double x = c.x + R * (2 * u(rng) - 1);
    const double y = c.y + R * (2 * u(rng) - 1);
    if (std::hypot(x - c.x, y - c.y) < 0.98 * R) pts.push_back({x, y});
  }
  return pts;
}

/// Flux through a straight face by 10-point Gauss quadrature of u.n.
double quadrature_flux(const BasisFlow& flow, const Face& f) {
  const GaussRule rule = gauss_legendre(10);
  const Point n = f.unit_normal;
  double s = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double t = 0.5 * (rule.nodes[k] + 1.0);
    const Point p{f.p0.x + t * (f.p1.x - f.p0.x), f.p0.y + t * (f.p1.y - f.p0.y)};
    const Velocity u = flow.velocity(p);
    s += 0.5 * rule.weights[k] * (u.u * n.x + u.v * n.y);
  }
  return s * f.area;
}

}  // namespace

TEST_CASE("cellular modes are stream-function flows with no-penetration walls") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  std::vector<Point> pts;
  for (int k = 0; k < 50; ++k) pts.push_back({u(rng), u(rng)});
  for (int i : {1, 2, 3}) {
    const BasisFlow flow = cellular_basis(i);
    CHECK(flow.name == "cellular" + std::to_string(i));
    CHECK(flow.domain == DomainTag::square);
    check_stream_consistency(flow, pts, 1e-7);
    for (double s : {0.0, 0.3, 0.77, 1.0}) {
      CHECK(std::abs(flow.velocity({0.0, s}).u) < 1e-14);
      CHECK(std::abs(flow.velocity({1.0, s}).u) < 1e-13);
      CHECK(std::abs(flow.velocity({s, 0.0}).v) < 1e-14);
      CHECK(std::abs(flow.velocity({s, 1.0}).v) < 1e-13);
    }
  }
  CHECK_THROWS_AS(cellular_basis(0), FlowError);
}

TEST_CASE("Doswell profile and stream function") {
  CHECK(doswell_profile(0.0, 1.7) == doctest::Approx(1.7));
  // The series branch near r = 0 and the closed form agree across the switch.
  for (double r : {0.5e-6, 0.999e-6, 1.001e-6, 2e-6}) {
    const double c = std::cosh(r);
    CHECK(doswell_profile(r, 1.0) == doctest::Approx(std::tanh(r) / (r * c * c)).epsilon(1e-14));
  }
  for (double r : {0.1, 0.5, 2.0}) {
    const double c = std::cosh(r);
    CHECK(doswell_profile(r, 2.0) == doctest::Approx(2.0 * std::tanh(r) / (r * c * c)));
  }
  const Point c{0.5, 0.5};
  const BasisFlow flow = doswell_basis(c, 1.3);
  std::mt19937_64 rng(5);
  check_stream_consistency(flow, random_points_in_disc(c, 0.5, 40, rng), 1e-7);
  // Purely azimuthal: u.(x - c) = 0.
  for (const Point p : random_points_in_disc(c, 0.5, 20, rng)) {
    const Velocity u = flow.velocity(p);
    CHECK(std::abs(u.u * (p.x - c.x) + u.v * (p.y - c.y)) < 1e-15);
  }
}

TEST_CASE("radial cutoff is C1 at the cutoff radius") {
  const double Rc = 0.3;
  CHECK(radial_cutoff(0.0, Rc) == 1.0);
  CHECK(radial_cutoff(Rc, Rc) == 0.0);
  CHECK(radial_cutoff(2 * Rc, Rc) == 0.0);
  const double e = 1e-6;
  CHECK(std::abs((radial_cutoff(Rc, Rc) - radial_cutoff(Rc - e, Rc)) / e) < 1e-9);
}

TEST_CASE("cut-off vortex stream table matches an independent quadrature") {
  const double Rc = 1.0 / 6.0;
  const CutoffVortexStream psi(Rc, 1.0);
  // Composite Simpson with 20000 panels as the oracle.
  auto simpson = [&](double r) {
    const int n = 20000;
    const double h = r / n;
    double s = psi.integrand(0.0) + psi.integrand(r);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * psi.integrand(k * h);
    return s * h / 3.0;
  };
  for (double r : {0.01, 0.05, 0.1, 0.1234567, Rc}) CHECK(psi(r) == doctest::Approx(simpson(r)).epsilon(1e-11));
  CHECK(psi(0.0) == 0.0);
  CHECK(psi(Rc) == psi(2 * Rc));
  // Derivative of the interpolant is the integrand.
  const double e = 1e-7;
  for (double r : {0.02, 0.08, 0.15}) {
    CHECK((psi(r + e) - psi(r - e)) / (2 * e) == doctest::Approx(psi.integrand(r)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(CutoffVortexStream(0.0, 1.0), FlowError);
  CHECK_THROWS_AS(CutoffVortexStream(1.0, 1.0, 1), FlowError);
}

TEST_CASE("five-vortex layout is tangent and contained") {
  const Point c{0.5, 0.5};
  const double R = 0.5;
  const auto discs = five_vortex_layout(c, R);
  REQUIRE(discs.size() == 5);
  for (std::size_t a = 0; a < discs.size(); ++a) {
    CHECK(discs[a].radius == doctest::Approx(R / 3));
    CHECK(std::hypot(discs[a].center.x - c.x, discs[a].center.y - c.y) + discs[a].radius <=
          R + 1e-12);
    for (std::size_t b = a + 1; b < discs.size(); ++b) {
      const double d =
          std::hypot(discs[a].center.x - discs[b].center.x, discs[a].center.y - discs[b].center.y);
      CHECK(d >= discs[a].radius + discs[b].radius - 1e-12);
    }
  }
  const BasisFlow flow = five_cell_doswell_basis(c, R, 1.0);
  std::mt19937_64 rng(9);
  check_stream_consistency(flow, random_points_in_disc(c, R, 60, rng), 1e-6);
  // Outside every sub-disc the field vanishes.
  const Velocity gap = flow.velocity({c.x + 0.3, c.y + 0.3});
  CHECK(gap.u == 0.0);
  CHECK(gap.v == 0.0);
}

TEST_CASE("multi-vortex field rejects overlapping or escaping discs") {
  const Point c{0.0, 0.0};
  CHECK_THROWS_AS(multi_vortex_doswell_basis(c, 1.0, 1.0, {{{0, 0}, 0.5}, {{0.6, 0}, 0.5}}),
                  FlowError);
  CHECK_THROWS_AS(multi_vortex_doswell_basis(c, 1.0, 1.0, {{{0.8, 0}, 0.3}}), FlowError);
  CHECK_THROWS_AS(multi_vortex_doswell_basis(c, 1.0, 1.0, {}), FlowError);
  CHECK_NOTHROW(multi_vortex_doswell_basis(c, 1.0, 1.0, {{{0, 0}, 0.5}, {{0.5, 0.5}, 0.2}}));
}

TEST_CASE("rigid rotation velocity and stream function") {
  const BasisFlow flow = rigid_rotation_flow({0.5, 0.5}, 2.0);
  const Velocity u = flow.velocity({0.75, 0.5});
  CHECK(u.u == doctest::Approx(0.0));
  CHECK(u.v == doctest::Approx(0.5));
  std::mt19937_64 rng(3);
  check_stream_consistency(flow, random_points_in_disc({0.5, 0.5}, 0.5, 20, rng), 1e-8);
}

TEST_CASE("L2 norm of cellular1 is pi / sqrt(2)") {
  const Mesh mesh = build_cartesian(32, 32);
  const double n = l2_norm(cellular_basis(1), mesh);
  CHECK(n == doctest::Approx(pi / std::sqrt(2.0)).epsilon(1e-12));
  const BasisFlow unit = normalized(cellular_basis(1), n);
  CHECK(l2_norm(unit, mesh) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(normalized(cellular_basis(1), 0.0), FlowError);
}

TEST_CASE("face fluxes equal the quadrature of u.n on straight faces") {
  const Mesh mesh = build_cartesian(12, 12);
  for (int i : {1, 2}) {
    const BasisFlow flow = cellular_basis(i);
    const FluxTable table = assemble_flux_table(mesh, flow);
    CHECK(table.basis_name == flow.name);
    REQUIRE(table.fluxes.size() == mesh.num_interior_faces());
    for (const auto& f : mesh.interior_faces())
      CHECK(std::abs(table.fluxes[f.id] - quadrature_flux(flow, f)) < 1e-13);
  }
  // Radial polar faces are straight too.
  const Mesh polar = build_polar(6, 12, {0.5, 0.5}, 0.5);
  const BasisFlow flow = doswell_basis({0.5, 0.5}, 1.0);
  const FluxTable table = assemble_flux_table(polar, flow);
  for (const auto& f : polar.interior_faces()) {
    const double dr = std::abs(std::hypot(f.p1.x - 0.5, f.p1.y - 0.5) -
                               std::hypot(f.p0.x - 0.5, f.p0.y - 0.5));
    if (dr > 1e-12) {
      CHECK(std::abs(table.fluxes[f.id] - quadrature_flux(flow, f)) < 1e-12);
    } else {
      CHECK(std::abs(table.fluxes[f.id]) < 1e-15);  // azimuthal flow, no flux across arcs
    }
  }
}

TEST_CASE("assembled fluxes are discretely incompressible") {
  const Mesh cart = build_cartesian(32, 32);
  for (int i : {1, 2, 3}) {
    const FluxTable t = assemble_flux_table(cart, cellular_basis(i));
    CHECK(check_discrete_incompressibility(t, cart) <= 1e-13 * t.max_abs());
  }
  const Mesh polar = build_polar(32, 32, {0.5, 0.5}, 0.5);
  const FluxTable d = assemble_flux_table(polar, doswell_basis({0.5, 0.5}, 1.0));
  CHECK(check_discrete_incompressibility(d, polar) <= 1e-13 * d.max_abs());
  const FluxTable r = assemble_flux_table(polar, rigid_rotation_flow({0.5, 0.5}, 3.0));
  CHECK(check_discrete_incompressibility(r, polar) <= 1e-13 * r.max_abs());
  const FluxTable five = assemble_flux_table(polar, five_cell_doswell_basis({0.5, 0.5}, 0.5, 1.0));
  CHECK(five.max_abs() > 0.0);
  CHECK(check_discrete_incompressibility(five, polar) <= 1e-11 * five.max_abs());
}

TEST_CASE("flux assembly checks the domain") {
  const Mesh cart = build_cartesian(4, 4);
  const Mesh polar = build_polar(4, 8, {0.5, 0.5}, 0.5);
  CHECK_THROWS_AS(assemble_flux_table(cart, doswell_basis({0.5, 0.5}, 1.0)), FlowError);
  CHECK_THROWS_AS(assemble_flux_table(polar, cellular_basis(1)), FlowError);
  const FluxTable t = assemble_flux_table(cart, cellular_basis(1));
  CHECK_THROWS_AS(check_discrete_incompressibility(t, polar), FlowError);
}
