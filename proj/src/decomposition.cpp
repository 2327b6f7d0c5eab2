#include "stdd/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stdd/errors.hpp"

namespace stdd {

namespace {

// Element-local nodes of element e that sit at the smallest and largest x-index.
std::pair<int, int> x_range(const Mesh& mesh, std::size_t e) {
  int lo = 1 << 30;
  int hi = -1;
  for (int n : mesh.element(e)) {
    const int i = mesh.axis_index(static_cast<std::size_t>(n), 0);
    lo = std::min(lo, i);
    hi = std::max(hi, i);
  }
  return {lo, hi};
}

}  // namespace

Decomposition build_decomposition(const Mesh& mesh, int q, double overlap_fraction, double c_min) {
  if (q < 2) throw ConfigError("decomposition needs q >= 2 subdomains");
  if (!(overlap_fraction > 0.0 && overlap_fraction < 1.0)) {
    throw ConfigError("overlap_fraction must lie in (0, 1)");
  }
  if (!(c_min > 0.0 && c_min < 0.5)) {
    throw ConfigError("c_min must lie in (0, 0.5) so that b stays positive");
  }
  const int nx = mesh.cells(0);
  const double L = mesh.extent(0);

  Decomposition dec;
  dec.c_min_ = c_min;
  dec.num_global_nodes_ = mesh.num_nodes();

  for (int j = 0; j + 1 < q; ++j) {
    const double centre = static_cast<double>(j + 1) / q;
    Overlap ov;
    ov.i_start = static_cast<int>(std::lround(nx * (centre - 0.5 * overlap_fraction)));
    ov.i_end = static_cast<int>(std::lround(nx * (centre + 0.5 * overlap_fraction)));
    if (ov.i_end - ov.i_start < 2) {
      throw ConfigError("overlap " + std::to_string(j + 1) + " spans " +
                        std::to_string(ov.i_end - ov.i_start) +
                        " elements; at least 2 are required (refine the mesh or widen the overlap)");
    }
    if (ov.i_start < 1 || ov.i_end > nx - 1) {
      throw ConfigError("overlap " + std::to_string(j + 1) + " reaches the outer boundary");
    }
    if (!dec.overlaps_.empty() && dec.overlaps_.back().i_end > ov.i_start) {
      throw ConfigError("q = " + std::to_string(q) +
                        " strips do not fit: neighbouring overlaps intersect");
    }
    dec.overlaps_.push_back(ov);
  }

  const auto& ovs = dec.overlaps_;
  // Flux weight at grid index i for subdomain l (continuous, piecewise linear).
  auto a_value = [&](int l, int i) {
    if (l > 0) {
      const Overlap& o = ovs[l - 1];
      if (i >= o.i_start && i <= o.i_end) {
        return static_cast<double>(i - o.i_start) / (o.i_end - o.i_start);
      }
    }
    if (l < q - 1) {
      const Overlap& o = ovs[l];
      if (i >= o.i_start && i <= o.i_end) {
        return static_cast<double>(o.i_end - i) / (o.i_end - o.i_start);
      }
    }
    return 1.0;
  };
  // Reaction weight at grid index i, evaluated from inside an element spanning [e_lo, e_hi].
  auto b_value = [&](int l, int i, int e_lo, int e_hi) {
    if (l > 0) {
      const Overlap& o = ovs[l - 1];
      if (e_lo >= o.i_start && e_hi <= o.i_end) {
        return c_min + (1.0 - 2.0 * c_min) * (i - o.i_start) / (o.i_end - o.i_start);
      }
    }
    if (l < q - 1) {
      const Overlap& o = ovs[l];
      if (e_lo >= o.i_start && e_hi <= o.i_end) {
        return (1.0 - c_min) - (1.0 - 2.0 * c_min) * (i - o.i_start) / (o.i_end - o.i_start);
      }
    }
    return 1.0;
  };

  for (int l = 0; l < q; ++l) {
    const int ilo = l == 0 ? 0 : ovs[l - 1].i_start;
    const int ihi = l == q - 1 ? nx : ovs[l].i_end;

    Subdomain sd;
    sd.id = l;
    sd.x_lo = L * ilo / nx;
    sd.x_hi = L * ihi / nx;
    std::vector<int> local(mesh.num_nodes(), -1);
    for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
      const int i = mesh.axis_index(n, 0);
      if (i < ilo || i > ihi) continue;
      local[n] = static_cast<int>(sd.nodes.size());
      sd.nodes.push_back(static_cast<int>(n));
      const bool on_interface = (l > 0 && i == ilo) || (l < q - 1 && i == ihi);
      if (on_interface && !mesh.on_boundary(n)) sd.internal_boundary.push_back(static_cast<int>(n));
    }

    WeightFamily w;
    for (int n : sd.nodes) w.a.push_back(a_value(l, mesh.axis_index(static_cast<std::size_t>(n), 0)));

    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      const auto [e_lo, e_hi] = x_range(mesh, e);
      if (e_lo < ilo || e_hi > ihi) continue;
      sd.elements.push_back(static_cast<int>(e));
      std::array<double, 3> be{};
      const auto nodes = mesh.element(e);
      for (std::size_t a = 0; a < nodes.size(); ++a) {
        be[a] = b_value(l, mesh.axis_index(static_cast<std::size_t>(nodes[a]), 0), e_lo, e_hi);
      }
      w.b.push_back(be);
    }
    w.g = w.b;

    dec.subdomains_.push_back(std::move(sd));
    dec.weights_.push_back(std::move(w));
    dec.local_of_global_.push_back(std::move(local));
  }
  return dec;
}

double Decomposition::evaluate(const Mesh& mesh, int l, WeightKind kind, double x, Side side) const {
  const Subdomain& sd = subdomain(l);
  const WeightFamily& w = weights(l);
  for (std::size_t le = 0; le < sd.elements.size(); ++le) {
    const auto e = static_cast<std::size_t>(sd.elements[le]);
    const auto nodes = mesh.element(e);
    // two element-local nodes with distinct x
    std::size_t a0 = 0;
    std::size_t a1 = 0;
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      if (mesh.node(nodes[a]).x < mesh.node(nodes[a0]).x) a0 = a;
      if (mesh.node(nodes[a]).x > mesh.node(nodes[a1]).x) a1 = a;
    }
    const double x0 = mesh.node(nodes[a0]).x;
    const double x1 = mesh.node(nodes[a1]).x;
    const bool inside = side == Side::right ? (x >= x0 && (x < x1 || (x == x1 && x1 == sd.x_hi)))
                                            : ((x > x0 || (x == x0 && x0 == sd.x_lo)) && x <= x1);
    if (!inside) continue;
    double w0 = 0.0;
    double w1 = 0.0;
    if (kind == WeightKind::a) {
      w0 = w.a[static_cast<std::size_t>(local_index(l, static_cast<std::size_t>(nodes[a0])))];
      w1 = w.a[static_cast<std::size_t>(local_index(l, static_cast<std::size_t>(nodes[a1])))];
    } else {
      const auto& vals = kind == WeightKind::b ? w.b[le] : w.g[le];
      w0 = vals[a0];
      w1 = vals[a1];
    }
    return w0 + (w1 - w0) * (x - x0) / (x1 - x0);
  }
  return 0.0;
}

SpaceTimeField restrict_field(const Decomposition& dec, int l, const SpaceTimeField& u) {
  if (u.num_nodes() != dec.num_global_nodes()) {
    throw ContractError("restrict_field: field is not defined on the global mesh");
  }
  const Subdomain& sd = dec.subdomain(l);
  SpaceTimeField out(u.grid(), sd.nodes.size());
  for (int k = 1; k <= u.steps(); ++k) {
    const auto src = u.level(k);
    auto dst = out.level(k);
    for (std::size_t i = 0; i < sd.nodes.size(); ++i) dst[i] = src[static_cast<std::size_t>(sd.nodes[i])];
  }
  return out;
}

SpaceTimeField extend_field(const Decomposition& dec, int l, const SpaceTimeField& u_l) {
  const Subdomain& sd = dec.subdomain(l);
  if (u_l.num_nodes() != sd.nodes.size()) {
    throw ContractError("extend_field: field is not defined on subdomain " + std::to_string(l));
  }
  SpaceTimeField out(u_l.grid(), dec.num_global_nodes());
  for (int k = 1; k <= u_l.steps(); ++k) {
    const auto src = u_l.level(k);
    auto dst = out.level(k);
    for (std::size_t i = 0; i < sd.nodes.size(); ++i) dst[static_cast<std::size_t>(sd.nodes[i])] = src[i];
  }
  return out;
}

}  // namespace stdd
