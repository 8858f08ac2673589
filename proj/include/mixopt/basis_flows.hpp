#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixopt/mesh.hpp"

namespace mixopt {

enum class DomainTag { square, disc };

struct Velocity {
  double u = 0.0;
  double v = 0.0;
};

class FlowError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A divergence-free stirring mode given together with its stream function,
/// u = (-d_y psi, d_x psi).
struct BasisFlow {
  std::string name;
  DomainTag domain = DomainTag::square;
  std::function<Velocity(Point)> velocity;
  std::function<double(Point)> stream;
};

/// Cellular mode i on the unit square; psi = sin(i pi x) sin(i pi y).
BasisFlow cellular_basis(int i);

/// Doswell frontogenesis vortex g(r) = vbar sech^2(r) tanh(r) / r about
/// `center`; psi = (vbar / 2) tanh^2(r).
BasisFlow doswell_basis(Point center, double vbar);

/// Profile g(r) of the Doswell vortex, continuous at r = 0 with g(0) = vbar.
double doswell_profile(double r, double vbar);

/// Radial cutoff C(r) = (1 - (r/Rc)^2)^3 on [0, Rc), zero beyond.
double radial_cutoff(double r, double cutoff_radius);

/// Stream function of one cut-off Doswell vortex,
/// psi(r) = int_0^min(r,Rc) s g(s) C(s) ds.
///
/// The integral is tabulated once by adaptive Gauss-Kronrod quadrature on a
/// uniform radial grid and evaluated by cubic Hermite interpolation using the
/// exact derivative r g(r) C(r).
class CutoffVortexStream {
 public:
  CutoffVortexStream(double cutoff_radius, double vbar, std::size_t table_points = 10000);

  double operator()(double r) const;
  double integrand(double s) const;
  double cutoff_radius() const { return cutoff_radius_; }
  double vbar() const { return vbar_; }

 private:
  double cutoff_radius_;
  double vbar_;
  double spacing_;
  std::vector<double> table_;
};

/// Sub-disc layout of the five-vortex field.
struct VortexDisc {
  Point center;
  double radius = 0.0;
};

/// Default layout: one central disc of radius R/3 and four peripheral discs
/// of radius R/3 at +-(2R/3, 0) and +-(0, 2R/3); mutually tangent and
/// internally tangent to the domain boundary.
std::vector<VortexDisc> five_vortex_layout(Point domain_center, double radius);

/// Superposition of cut-off Doswell vortices on non-overlapping sub-discs.
/// Throws FlowError when two discs overlap or a disc leaves the domain.
BasisFlow five_cell_doswell_basis(Point domain_center, double radius, double vbar);
BasisFlow multi_vortex_doswell_basis(Point domain_center, double radius, double vbar,
                                     std::vector<VortexDisc> discs);

/// Rigid rotation about `center` with angular rate omega; psi = omega r^2 / 2.
BasisFlow rigid_rotation_flow(Point center, double omega);

/// L2(Omega) norm of the flow's velocity by cell quadrature on `mesh`.
double l2_norm(const BasisFlow& flow, const Mesh& mesh, int order = 6);

/// Copy of `flow` scaled to unit L2 norm (norm supplied by the caller).
BasisFlow normalized(const BasisFlow& flow, double norm);

/// Exact signed fluxes int_face b.n d sigma over interior faces, oriented
/// left -> right. One value per interior face; each value is used with +
/// by the left cell and - by the right cell.
struct FluxTable {
  std::string basis_name;
  std::vector<double> fluxes;

  double max_abs() const;
};

/// Fluxes as stream-function differences psi(p1) - psi(p0). The stream
/// function is evaluated once per mesh vertex so faces sharing a vertex see
/// bitwise identical values.
FluxTable assemble_flux_table(const Mesh& mesh, const BasisFlow& flow);

/// Max over cells of |sum of signed interior fluxes|.
double check_discrete_incompressibility(const FluxTable& table, const Mesh& mesh);

}  // namespace mixopt
