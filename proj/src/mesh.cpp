#include "mixopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mixopt/quadrature.hpp"

namespace mixopt {

namespace {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Point unit(Point v) {
  const double n = std::hypot(v.x, v.y);
  return {v.x / n, v.y / n};
}

// Chord p1 - p0 rotated by +90 degrees.
Point rotated_chord(Point p0, Point p1) { return {-(p1.y - p0.y), p1.x - p0.x}; }

}  // namespace

double Mesh::total_volume() const {
  double sum = 0.0;
  for (const auto& c : cells_) sum += c.volume;
  return sum;
}

Mesh::Regularity Mesh::regularity() const {
  Regularity reg{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    double perimeter = 0.0;
    for (const auto& ref : cell_faces(k)) perimeter += faces_[ref.face].area;
    reg.c1 = std::min(reg.c1, cells_[k].volume / (h_ * h_));
    reg.c2 = std::max(reg.c2, perimeter / h_);
  }
  return reg;
}

void Mesh::finalize_adjacency() {
  // Interior faces first, stable in construction order.
  std::stable_partition(faces_.begin(), faces_.end(),
                        [](const Face& f) { return !f.is_boundary(); });
  num_interior_ = 0;
  for (std::size_t i = 0; i < faces_.size(); ++i) {
    faces_[i].id = i;
    if (!faces_[i].is_boundary()) ++num_interior_;
  }

  std::vector<std::size_t> counts(cells_.size() + 1, 0);
  for (const auto& f : faces_) {
    ++counts[f.left + 1];
    if (!f.is_boundary()) ++counts[f.right + 1];
  }
  for (std::size_t k = 0; k < cells_.size(); ++k) counts[k + 1] += counts[k];
  cell_face_offsets_ = counts;
  cell_face_refs_.assign(counts.back(), FaceRef{0, 0.0});
  std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
  for (const auto& f : faces_) {
    cell_face_refs_[fill[f.left]++] = {f.id, 1.0};
    if (!f.is_boundary()) cell_face_refs_[fill[f.right]++] = {f.id, -1.0};
  }
}

Mesh build_cartesian(int nx, int ny) {
  if (nx < 2 || ny < 2) throw MeshError("build_cartesian: nx and ny must be >= 2");

  Mesh mesh;
  mesh.kind_ = CartesianKind{nx, ny};
  mesh.h_ = std::max(1.0 / nx, 1.0 / ny);
  mesh.domain_area_ = 1.0;
  const double hx = 1.0 / nx;
  const double hy = 1.0 / ny;

  auto vid = [&](int i, int j) { return static_cast<std::size_t>(j) * (nx + 1) + i; };
  auto cid = [&](int i, int j) { return static_cast<std::size_t>(j) * nx + i; };

  mesh.vertices_.resize(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices_[vid(i, j)] = {static_cast<double>(i) / nx, static_cast<double>(j) / ny};

  mesh.cells_.resize(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      mesh.cells_[cid(i, j)] = {cid(i, j), hx * hy, {(i + 0.5) * hx, (j + 0.5) * hy}};

  auto add_face = [&](std::size_t v0, std::size_t v1, std::size_t left, std::size_t right) {
    Face f;
    f.v0 = v0;
    f.v1 = v1;
    f.p0 = mesh.vertices_[v0];
    f.p1 = mesh.vertices_[v1];
    f.area = distance(f.p0, f.p1);
    f.left = left;
    f.right = right;
    f.unit_normal = unit(rotated_chord(f.p0, f.p1));
    if (right != kBoundary)
      f.center_distance = distance(mesh.cells_[left].centroid, mesh.cells_[right].centroid);
    mesh.faces_.push_back(f);
  };

  // Vertical faces, normal +x (chord points down).
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      if (i == 0)
        add_face(vid(0, j), vid(0, j + 1), cid(0, j), kBoundary);
      else if (i == nx)
        add_face(vid(nx, j + 1), vid(nx, j), cid(nx - 1, j), kBoundary);
      else
        add_face(vid(i, j + 1), vid(i, j), cid(i - 1, j), cid(i, j));
    }
  }
  // Horizontal faces, normal +y (chord points right).
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (j == 0)
        add_face(vid(i + 1, 0), vid(i, 0), cid(i, 0), kBoundary);
      else if (j == ny)
        add_face(vid(i, ny), vid(i + 1, ny), cid(i, ny - 1), kBoundary);
      else
        add_face(vid(i, j), vid(i + 1, j), cid(i, j - 1), cid(i, j));
    }
  }
  mesh.finalize_adjacency();
  return mesh;
}

Mesh build_polar(int n_r, int n_phi, Point center, double radius) {
  if (n_r < 2) throw MeshError("build_polar: n_r must be >= 2");
  if (n_phi < 3) throw MeshError("build_polar: n_phi must be >= 3");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw MeshError("build_polar: radius must be positive and finite");

  Mesh mesh;
  mesh.kind_ = PolarKind{n_r, n_phi, center, radius};
  const double dr = radius / n_r;
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  mesh.h_ = std::max(dr, radius * dphi);
  mesh.domain_area_ = std::numbers::pi * radius * radius;

  auto r_at = [&](int i) { return radius * i / n_r; };
  auto phi_at = [&](int j) { return 2.0 * std::numbers::pi * j / n_phi; };

  // Vertex 0 is the centre; ring i >= 1 holds n_phi vertices.
  mesh.vertices_.reserve(1 + static_cast<std::size_t>(n_r) * n_phi);
  mesh.vertices_.push_back(center);
  for (int i = 1; i <= n_r; ++i) {
    for (int j = 0; j < n_phi; ++j) {
      const double r = r_at(i);
      const double phi = phi_at(j);
      mesh.vertices_.push_back({center.x + r * std::cos(phi), center.y + r * std::sin(phi)});
    }
  }
  auto vid = [&](int i, int j) -> std::size_t {
    if (i == 0) return 0;
    return 1 + static_cast<std::size_t>(i - 1) * n_phi + static_cast<std::size_t>((j % n_phi + n_phi) % n_phi);
  };
  auto cid = [&](int i, int j) -> std::size_t {
    return static_cast<std::size_t>(i) * n_phi + static_cast<std::size_t>((j % n_phi + n_phi) % n_phi);
  };

  const double sinc = std::sin(0.5 * dphi) / (0.5 * dphi);
  mesh.cells_.resize(static_cast<std::size_t>(n_r) * n_phi);
  for (int i = 0; i < n_r; ++i) {
    const double r0 = r_at(i);
    const double r1 = r_at(i + 1);
    const double volume = 0.5 * (r1 * r1 - r0 * r0) * dphi;
    const double rbar =
        (2.0 / 3.0) * (r1 * r1 * r1 - r0 * r0 * r0) / (r1 * r1 - r0 * r0) * sinc;
    for (int j = 0; j < n_phi; ++j) {
      const double mid = phi_at(j) + 0.5 * dphi;
      mesh.cells_[cid(i, j)] = {
          cid(i, j), volume, {center.x + rbar * std::cos(mid), center.y + rbar * std::sin(mid)}};
    }
  }

  auto finish = [&](Face f, double area, Point normal) {
    f.p0 = mesh.vertices_[f.v0];
    f.p1 = mesh.vertices_[f.v1];
    f.area = area;
    f.unit_normal = normal;
    if (f.right != kBoundary)
      f.center_distance = distance(mesh.cells_[f.left].centroid, mesh.cells_[f.right].centroid);
    mesh.faces_.push_back(f);
  };

  // Radial faces along phi_j: normal e_phi, left = (i, j-1), right = (i, j).
  for (int i = 0; i < n_r; ++i) {
    for (int j = 0; j < n_phi; ++j) {
      Face f;
      f.v0 = vid(i, j);
      f.v1 = vid(i + 1, j);
      f.left = cid(i, j - 1);
      f.right = cid(i, j);
      const double phi = phi_at(j);
      finish(f, dr, {-std::sin(phi), std::cos(phi)});
    }
  }
  // Circumferential arcs at r_{i+1}: normal e_r, left = inner cell.
  for (int i = 0; i < n_r; ++i) {
    const double r = r_at(i + 1);
    for (int j = 0; j < n_phi; ++j) {
      Face f;
      f.v0 = vid(i + 1, j + 1);
      f.v1 = vid(i + 1, j);
      f.left = cid(i, j);
      f.right = i + 1 < n_r ? cid(i + 1, j) : kBoundary;
      const double mid = phi_at(j) + 0.5 * dphi;
      finish(f, r * dphi, {std::cos(mid), std::sin(mid)});
    }
  }
  mesh.finalize_adjacency();
  return mesh;
}

std::vector<double> integrate_cells(const Mesh& mesh, const ScalarField& f, int order) {
  const GaussRule rule = gauss_legendre(order);
  std::vector<double> out(mesh.num_cells(), 0.0);

  if (const auto* cart = std::get_if<CartesianKind>(&mesh.kind())) {
    const double hx = 1.0 / cart->nx;
    const double hy = 1.0 / cart->ny;
    for (int j = 0; j < cart->ny; ++j) {
      for (int i = 0; i < cart->nx; ++i) {
        const double xc = (i + 0.5) * hx;
        const double yc = (j + 0.5) * hy;
        double sum = 0.0;
        for (int b = 0; b < order; ++b) {
          const double y = yc + 0.5 * hy * rule.nodes[b];
          for (int a = 0; a < order; ++a) {
            const double x = xc + 0.5 * hx * rule.nodes[a];
            sum += rule.weights[a] * rule.weights[b] * f({x, y});
          }
        }
        out[static_cast<std::size_t>(j) * cart->nx + i] = sum * 0.25 * hx * hy;
      }
    }
    return out;
  }

  const auto& polar = std::get<PolarKind>(mesh.kind());
  const double dr = polar.radius / polar.n_r;
  const double dphi = 2.0 * std::numbers::pi / polar.n_phi;
  for (int i = 0; i < polar.n_r; ++i) {
    const double r0 = polar.radius * i / polar.n_r;
    for (int j = 0; j < polar.n_phi; ++j) {
      const double phi0 = 2.0 * std::numbers::pi * j / polar.n_phi;
      double sum = 0.0;
      for (int b = 0; b < order; ++b) {
        const double phi = phi0 + 0.5 * dphi * (1.0 + rule.nodes[b]);
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        for (int a = 0; a < order; ++a) {
          const double r = r0 + 0.5 * dr * (1.0 + rule.nodes[a]);
          sum += rule.weights[a] * rule.weights[b] * r *
                 f({polar.center.x + r * c, polar.center.y + r * s});
        }
      }
      out[static_cast<std::size_t>(i) * polar.n_phi + j] = sum * 0.25 * dr * dphi;
    }
  }
  return out;
}

StateVector project_initial_data(const Mesh& mesh, const ScalarField& f, int order) {
  const std::vector<double> integrals = integrate_cells(mesh, f, order);
  // Dividing by the same rule's volume keeps constants exact.
  const std::vector<double> volumes = integrate_cells(mesh, [](Point) { return 1.0; }, order);
  StateVector out(mesh.num_cells());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = integrals[k] / volumes[k];
  return out;
}

}  // namespace mixopt
