#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mixopt/state.hpp"

namespace mixopt {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline constexpr std::size_t kBoundary = std::numeric_limits<std::size_t>::max();

class MeshError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Cell {
  std::size_t id = 0;
  double volume = 0.0;
  Point centroid;
};

/// A cell face. Interior faces are oriented left -> right; boundary faces have
/// right == kBoundary and an outward normal.
///
/// Endpoints are ordered so that the normal is the chord p1 - p0 rotated by
/// +90 degrees. With u = (-d_y psi, d_x psi) this makes the exact face flux
/// int_face u.n = psi(p1) - psi(p0) for any face shape.
struct Face {
  std::size_t id = 0;
  std::size_t v0 = 0;  // vertex index of p0
  std::size_t v1 = 0;  // vertex index of p1
  Point p0;
  Point p1;
  double area = 0.0;  // length; exact arc length for circumferential faces
  std::size_t left = 0;
  std::size_t right = kBoundary;
  Point unit_normal;             // at the face midpoint
  double center_distance = 0.0;  // |x_K - x_L|, interior faces only

  bool is_boundary() const { return right == kBoundary; }
};

struct CartesianKind {
  int nx = 0;
  int ny = 0;
  friend bool operator==(const CartesianKind&, const CartesianKind&) = default;
};

struct PolarKind {
  int n_r = 0;
  int n_phi = 0;
  Point center;
  double radius = 0.0;
  friend bool operator==(const PolarKind&, const PolarKind&) = default;
};

using MeshKind = std::variant<CartesianKind, PolarKind>;

/// Admissible control-volume partition. Immutable once built.
///
/// Faces are stored interior-first: ids [0, num_interior_faces()) are
/// interior, the rest lie on the domain boundary.
class Mesh {
 public:
  struct FaceRef {
    std::size_t face;
    double sign;  // +1 when the cell is the face's left cell, -1 otherwise
  };

  std::span<const Cell> cells() const { return cells_; }
  std::span<const Face> faces() const { return faces_; }
  std::span<const Face> interior_faces() const {
    return std::span<const Face>(faces_).first(num_interior_);
  }
  std::span<const Point> vertices() const { return vertices_; }

  std::size_t num_cells() const { return cells_.size(); }
  std::size_t num_faces() const { return faces_.size(); }
  std::size_t num_interior_faces() const { return num_interior_; }

  /// Faces on the boundary of cell `k`, with the sign of the left->right
  /// orientation as seen from `k`.
  std::span<const FaceRef> cell_faces(std::size_t k) const {
    return std::span<const FaceRef>(cell_face_refs_)
        .subspan(cell_face_offsets_[k], cell_face_offsets_[k + 1] - cell_face_offsets_[k]);
  }

  const MeshKind& kind() const { return kind_; }
  bool is_cartesian() const { return std::holds_alternative<CartesianKind>(kind_); }
  bool is_polar() const { return std::holds_alternative<PolarKind>(kind_); }
  std::string kind_name() const { return is_cartesian() ? "cartesian" : "polar"; }

  double h() const { return h_; }
  /// Exact |Omega| of the continuous domain.
  double domain_area() const { return domain_area_; }
  double total_volume() const;

  /// Smallest c1 with c1 h^2 <= |K| and largest c2 with |dK| <= c2 h.
  struct Regularity {
    double c1;
    double c2;
  };
  Regularity regularity() const;

 private:
  friend Mesh build_cartesian(int nx, int ny);
  friend Mesh build_polar(int n_r, int n_phi, Point center, double radius);
  void finalize_adjacency();

  std::vector<Point> vertices_;
  std::vector<Cell> cells_;
  std::vector<Face> faces_;
  std::size_t num_interior_ = 0;
  std::vector<std::size_t> cell_face_offsets_;
  std::vector<FaceRef> cell_face_refs_;
  MeshKind kind_;
  double h_ = 0.0;
  double domain_area_ = 0.0;
};

/// Uniform nx x ny grid of the unit square.
Mesh build_cartesian(int nx, int ny);

/// Polar grid of the disc: annular sectors r_i = iR/n_r, phi_j = 2 pi j/n_phi.
/// Innermost cells are full sectors meeting at the centre.
Mesh build_polar(int n_r, int n_phi, Point center, double radius);

using ScalarField = std::function<double(Point)>;

/// Cell averages by tensor Gauss-Legendre quadrature of the given order
/// (in (r, phi) with Jacobian r for polar cells).
StateVector project_initial_data(const Mesh& mesh, const ScalarField& f, int order = 4);

/// Integrates f over every cell (not divided by volume) with the same rule as
/// project_initial_data.
std::vector<double> integrate_cells(const Mesh& mesh, const ScalarField& f, int order = 4);

}  // namespace mixopt
