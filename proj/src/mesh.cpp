#include "stdd/mesh.hpp"

#include <string>

namespace stdd {

const QuadratureRule& interval_rule() {
  static const QuadratureRule rule = [] {
    const double g = 0.5 - std::sqrt(3.0) / 6.0;
    QuadratureRule r;
    r.points = {{1.0 - g, g, 0.0}, {g, 1.0 - g, 0.0}};
    r.weights = {0.5, 0.5};
    r.reference_measure = 1.0;
    r.degree = 3;
    return r;
  }();
  return rule;
}

const QuadratureRule& triangle_rule() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    r.points = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
    r.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    r.reference_measure = 0.5;
    r.degree = 2;
    return r;
  }();
  return rule;
}

int Mesh::axis_index(std::size_t node, int axis) const {
  if (dim_ == 1) return static_cast<int>(node);
  const int stride = cells_[0] + 1;
  return axis == 0 ? static_cast<int>(node) % stride : static_cast<int>(node) / stride;
}

double Mesh::domain_measure() const {
  return dim_ == 1 ? extent_[0] : extent_[0] * extent_[1];
}

namespace {

void validate(const MeshSpec& spec) {
  if (spec.dim != 1 && spec.dim != 2) {
    throw ConfigError("mesh dim must be 1 or 2, got " + std::to_string(spec.dim));
  }
  const auto d = static_cast<std::size_t>(spec.dim);
  if (spec.extent.size() != d || spec.cells.size() != d) {
    throw ConfigError("mesh extent and cells need one entry per axis");
  }
  for (std::size_t a = 0; a < d; ++a) {
    if (!(spec.extent[a] > 0.0) || !std::isfinite(spec.extent[a])) {
      throw ConfigError("mesh extent must be positive on axis " + std::to_string(a));
    }
    if (spec.cells[a] < 2) {
      throw ConfigError("mesh needs at least 2 cells on axis " + std::to_string(a));
    }
  }
}

}  // namespace

Mesh build_mesh(const MeshSpec& spec) {
  validate(spec);
  Mesh m;
  m.dim_ = spec.dim;
  m.extent_[0] = spec.extent[0];
  m.cells_[0] = spec.cells[0];
  const int nx = spec.cells[0];

  if (spec.dim == 1) {
    const double L = spec.extent[0];
    for (int i = 0; i <= nx; ++i) m.nodes_.push_back({L * i / nx, 0.0});
    for (int i = 0; i < nx; ++i) m.elements_.push_back({i, i + 1, -1});
    m.boundary_nodes_ = {0, nx};
  } else {
    m.extent_[1] = spec.extent[1];
    m.cells_[1] = spec.cells[1];
    const int ny = spec.cells[1];
    const double Lx = spec.extent[0];
    const double Ly = spec.extent[1];
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        m.nodes_.push_back({Lx * i / nx, Ly * j / ny});
        if (i == 0 || i == nx || j == 0 || j == ny) m.boundary_nodes_.push_back(j * (nx + 1) + i);
      }
    }
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int ll = j * (nx + 1) + i;
        const int lr = ll + 1;
        const int ul = ll + nx + 1;
        const int ur = ul + 1;
        m.elements_.push_back({ll, lr, ur});
        m.elements_.push_back({ll, ur, ul});
      }
    }
  }

  m.on_boundary_.assign(m.nodes_.size(), 0);
  for (int b : m.boundary_nodes_) m.on_boundary_[b] = 1;

  const QuadratureRule& rule = spec.dim == 1 ? interval_rule() : triangle_rule();
  m.quad_per_element_ = rule.weights.size();
  const int npe = m.nodes_per_element();

  for (const auto& el : m.elements_) {
    std::array<Vec2, 3> grads{};
    double measure = 0.0;
    if (spec.dim == 1) {
      const double h = m.nodes_[el[1]].x - m.nodes_[el[0]].x;
      measure = h;
      grads[0] = {-1.0 / h, 0.0};
      grads[1] = {1.0 / h, 0.0};
    } else {
      const Vec2& p0 = m.nodes_[el[0]];
      const Vec2& p1 = m.nodes_[el[1]];
      const Vec2& p2 = m.nodes_[el[2]];
      const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
      measure = 0.5 * det;
      // grad(phi_i) = rot90(opposite edge) / det
      grads[0] = {(p1.y - p2.y) / det, (p2.x - p1.x) / det};
      grads[1] = {(p2.y - p0.y) / det, (p0.x - p2.x) / det};
      grads[2] = {(p0.y - p1.y) / det, (p1.x - p0.x) / det};
    }
    m.measures_.push_back(measure);
    m.gradients_.push_back(grads);

    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      QuadraturePoint qp;
      qp.weight = rule.weights[q] * measure / rule.reference_measure;
      for (int a = 0; a < npe; ++a) {
        qp.phi[a] = rule.points[q][a];
        qp.x += rule.points[q][a] * m.nodes_[el[a]];
      }
      m.quad_.push_back(qp);
    }
  }
  return m;
}

}  // namespace stdd
