#include "mixopt/basis_flows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mixopt {

namespace {

double sech2(double r) {
  const double c = std::cosh(r);
  return 1.0 / (c * c);
}

}  // namespace

BasisFlow cellular_basis(int i) {
  if (i < 1) throw FlowError("cellular_basis: index must be >= 1");
  const double k = i * std::numbers::pi;
  BasisFlow flow;
  flow.name = "cellular" + std::to_string(i);
  flow.domain = DomainTag::square;
  flow.velocity = [k](Point p) {
    return Velocity{-k * std::sin(k * p.x) * std::cos(k * p.y),
                    k * std::cos(k * p.x) * std::sin(k * p.y)};
  };
  flow.stream = [k](Point p) { return std::sin(k * p.x) * std::sin(k * p.y); };
  return flow;
}

double doswell_profile(double r, double vbar) {
  // tanh(r)/r = 1 - r^2/3 + O(r^4)
  const double tanh_over_r = r < 1e-6 ? 1.0 - r * r / 3.0 : std::tanh(r) / r;
  return vbar * sech2(r) * tanh_over_r;
}

double radial_cutoff(double r, double cutoff_radius) {
  if (r >= cutoff_radius) return 0.0;
  const double q = 1.0 - (r / cutoff_radius) * (r / cutoff_radius);
  return q * q * q;
}

BasisFlow doswell_basis(Point center, double vbar) {
  BasisFlow flow;
  flow.name = "doswell";
  flow.domain = DomainTag::disc;
  flow.velocity = [center, vbar](Point p) {
    const double dx = p.x - center.x;
    const double dy = p.y - center.y;
    const double g = doswell_profile(std::hypot(dx, dy), vbar);
    return Velocity{-dy * g, dx * g};
  };
  flow.stream = [center, vbar](Point p) {
    const double t = std::tanh(std::hypot(p.x - center.x, p.y - center.y));
    return 0.5 * vbar * t * t;
  };
  return flow;
}

CutoffVortexStream::CutoffVortexStream(double cutoff_radius, double vbar,
                                       std::size_t table_points)
    : cutoff_radius_(cutoff_radius), vbar_(vbar) {
  if (!(cutoff_radius > 0.0)) throw FlowError("cutoff radius must be positive");
  if (table_points < 2) throw FlowError("vortex stream table needs at least 2 points");
  spacing_ = cutoff_radius / static_cast<double>(table_points);
  table_.assign(table_points + 1, 0.0);
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto f = [this](double s) { return integrand(s); };
  double acc = 0.0;
  for (std::size_t k = 0; k < table_points; ++k) {
    const double a = spacing_ * static_cast<double>(k);
    const double b = k + 1 == table_points ? cutoff_radius : spacing_ * static_cast<double>(k + 1);
    double err = 0.0;
    acc += Rule::integrate(f, a, b, 5, 1e-13, &err);
    table_[k + 1] = acc;
  }
}

double CutoffVortexStream::integrand(double s) const {
  return s * doswell_profile(s, vbar_) * radial_cutoff(s, cutoff_radius_);
}

double CutoffVortexStream::operator()(double r) const {
  if (r >= cutoff_radius_) return table_.back();
  if (r <= 0.0) return 0.0;
  const std::size_t n = table_.size() - 1;
  const std::size_t k = std::min(static_cast<std::size_t>(r / spacing_), n - 1);
  const double a = spacing_ * static_cast<double>(k);
  const double b = k + 1 == n ? cutoff_radius_ : spacing_ * static_cast<double>(k + 1);
  const double h = b - a;
  const double t = (r - a) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * table_[k] + h10 * h * integrand(a) + h01 * table_[k + 1] + h11 * h * integrand(b);
}

std::vector<VortexDisc> five_vortex_layout(Point domain_center, double radius) {
  const double rc = radius / 3.0;
  const double off = 2.0 * radius / 3.0;
  const Point c = domain_center;
  return {{c, rc},
          {{c.x + off, c.y}, rc},
          {{c.x - off, c.y}, rc},
          {{c.x, c.y + off}, rc},
          {{c.x, c.y - off}, rc}};
}

BasisFlow multi_vortex_doswell_basis(Point domain_center, double radius, double vbar,
                                     std::vector<VortexDisc> discs) {
  if (discs.empty()) throw FlowError("multi-vortex field needs at least one disc");
  for (std::size_t a = 0; a < discs.size(); ++a) {
    const auto& da = discs[a];
    if (!(da.radius > 0.0)) throw FlowError("vortex disc radius must be positive");
    const double from_center =
        std::hypot(da.center.x - domain_center.x, da.center.y - domain_center.y);
    if (from_center + da.radius > radius + 1e-12)
      throw FlowError("vortex disc " + std::to_string(a) + " extends outside the domain");
    for (std::size_t b = a + 1; b < discs.size(); ++b) {
      const auto& db = discs[b];
      const double d = std::hypot(da.center.x - db.center.x, da.center.y - db.center.y);
      if (d < da.radius + db.radius - 1e-12)
        throw FlowError("vortex discs " + std::to_string(a) + " and " + std::to_string(b) +
                        " overlap");
    }
  }

  struct Vortex {
    VortexDisc disc;
    std::shared_ptr<const CutoffVortexStream> stream;
  };
  auto vortices = std::make_shared<std::vector<Vortex>>();
  for (const auto& d : discs) {
    // Discs of equal radius share one table.
    std::shared_ptr<const CutoffVortexStream> table;
    for (const auto& v : *vortices)
      if (v.disc.radius == d.radius) table = v.stream;
    if (!table) table = std::make_shared<const CutoffVortexStream>(d.radius, vbar);
    vortices->push_back({d, table});
  }

  BasisFlow flow;
  flow.name = "five_doswell";
  flow.domain = DomainTag::disc;
  flow.velocity = [vortices, vbar](Point p) {
    Velocity out;
    for (const auto& v : *vortices) {
      const double dx = p.x - v.disc.center.x;
      const double dy = p.y - v.disc.center.y;
      const double r = std::hypot(dx, dy);
      if (r >= v.disc.radius) continue;
      const double w = doswell_profile(r, vbar) * radial_cutoff(r, v.disc.radius);
      out.u -= dy * w;
      out.v += dx * w;
    }
    return out;
  };
  flow.stream = [vortices](Point p) {
    double psi = 0.0;
    for (const auto& v : *vortices)
      psi += (*v.stream)(std::hypot(p.x - v.disc.center.x, p.y - v.disc.center.y));
    return psi;
  };
  return flow;
}

BasisFlow five_cell_doswell_basis(Point domain_center, double radius, double vbar) {
  return multi_vortex_doswell_basis(domain_center, radius, vbar,
                                    five_vortex_layout(domain_center, radius));
}

BasisFlow rigid_rotation_flow(Point center, double omega) {
  BasisFlow flow;
  flow.name = "rotation";
  flow.domain = DomainTag::disc;
  flow.velocity = [center, omega](Point p) {
    return Velocity{-omega * (p.y - center.y), omega * (p.x - center.x)};
  };
  flow.stream = [center, omega](Point p) {
    const double dx = p.x - center.x;
    const double dy = p.y - center.y;
    return 0.5 * omega * (dx * dx + dy * dy);
  };
  return flow;
}

double l2_norm(const BasisFlow& flow, const Mesh& mesh, int order) {
  const auto integrals = integrate_cells(
      mesh,
      [&](Point p) {
        const Velocity u = flow.velocity(p);
        return u.u * u.u + u.v * u.v;
      },
      order);
  double sum = 0.0;
  for (double v : integrals) sum += v;
  return std::sqrt(sum);
}

BasisFlow normalized(const BasisFlow& flow, double norm) {
  if (!(norm > 0.0)) throw FlowError("normalized: norm must be positive");
  BasisFlow out = flow;
  const double s = 1.0 / norm;
  out.velocity = [f = flow.velocity, s](Point p) {
    const Velocity u = f(p);
    return Velocity{s * u.u, s * u.v};
  };
  out.stream = [f = flow.stream, s](Point p) { return s * f(p); };
  return out;
}

double FluxTable::max_abs() const {
  double m = 0.0;
  for (double f : fluxes) m = std::max(m, std::abs(f));
  return m;
}

FluxTable assemble_flux_table(const Mesh& mesh, const BasisFlow& flow) {
  const bool square = flow.domain == DomainTag::square;
  if (square != mesh.is_cartesian())
    throw FlowError("assemble_flux_table: flow '" + flow.name + "' is defined on the " +
                    (square ? "square" : "disc") + " but the mesh is " + mesh.kind_name());
  const auto vertices = mesh.vertices();
  std::vector<double> psi(vertices.size());
  for (std::size_t v = 0; v < vertices.size(); ++v) psi[v] = flow.stream(vertices[v]);

  FluxTable table;
  table.basis_name = flow.name;
  table.fluxes.resize(mesh.num_interior_faces());
  for (const auto& f : mesh.interior_faces()) table.fluxes[f.id] = psi[f.v1] - psi[f.v0];
  return table;
}

double check_discrete_incompressibility(const FluxTable& table, const Mesh& mesh) {
  if (table.fluxes.size() != mesh.num_interior_faces())
    throw FlowError("check_discrete_incompressibility: table does not match mesh");
  double worst = 0.0;
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    double net = 0.0;
    for (const auto& ref : mesh.cell_faces(k))
      if (ref.face < mesh.num_interior_faces()) net += ref.sign * table.fluxes[ref.face];
    worst = std::max(worst, std::abs(net));
  }
  return worst;
}

}  // namespace mixopt
