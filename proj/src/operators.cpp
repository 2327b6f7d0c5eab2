#include "stdd/operators.hpp"

#include <cmath>
#include <string>

#include "stdd/errors.hpp"

namespace stdd {

namespace {

double at_point(const std::array<double, 3>& nodal, const QuadraturePoint& qp, std::size_t n) {
  double v = 0.0;
  for (std::size_t a = 0; a < n; ++a) v += qp.phi[a] * nodal[a];
  return v;
}

std::array<double, 3> gather(std::span<const double> u, const std::array<int, 3>& loc, std::size_t n) {
  std::array<double, 3> out{};
  for (std::size_t a = 0; a < n; ++a) out[a] = u[static_cast<std::size_t>(loc[a])];
  return out;
}

Vec2 gradient(const std::array<double, 3>& ue, std::span<const Vec2> grads) {
  Vec2 g{0.0, 0.0};
  for (std::size_t a = 0; a < grads.size(); ++a) g = g + ue[a] * grads[a];
  return g;
}

void require_region_field(const Region& r, const SpaceTimeField& u, const char* what) {
  if (u.num_nodes() != r.size()) {
    throw ContractError(std::string(what) + ": field has " + std::to_string(u.num_nodes()) +
                        " nodes, region has " + std::to_string(r.size()));
  }
}

}  // namespace

DiscreteOperatorContext::DiscreteOperatorContext(Mesh mesh, PStructureModel model, Decomposition dec,
                                                 TimeGrid grid)
    : mesh_(std::move(mesh)), model_(std::move(model)), dec_(std::move(dec)), grid_(grid) {
  model_.validate();
  grid_.validate();
  if (dec_.num_global_nodes() != mesh_.num_nodes()) {
    throw ContractError("decomposition was built for a different mesh");
  }
  const std::size_t npe = static_cast<std::size_t>(mesh_.nodes_per_element());
  const std::size_t N = mesh_.num_nodes();

  global_.nodes.resize(N);
  for (std::size_t i = 0; i < N; ++i) global_.nodes[i] = static_cast<int>(i);
  global_.lumped_mass.assign(N, 0.0);
  global_.capacity_mass.assign(N, 0.0);
  for (std::size_t e = 0; e < mesh_.num_elements(); ++e) {
    global_.elements.push_back(static_cast<int>(e));
    std::array<int, 3> loc{};
    const auto nodes = mesh_.element(e);
    for (std::size_t a = 0; a < npe; ++a) loc[a] = nodes[a];
    global_.local_elems.push_back(loc);
    global_.a.push_back({1.0, 1.0, 1.0});
    global_.b.push_back({1.0, 1.0, 1.0});
    for (const QuadraturePoint& qp : mesh_.quadrature(e)) {
      const double gam = model_.gamma(qp.x);
      if (!(gam >= 0.0) || !std::isfinite(gam)) {
        throw NumericError("capacity gamma must be finite and nonnegative");
      }
      for (std::size_t a = 0; a < npe; ++a) {
        global_.lumped_mass[static_cast<std::size_t>(nodes[a])] += qp.weight * qp.phi[a];
        global_.capacity_mass[static_cast<std::size_t>(nodes[a])] += qp.weight * gam * qp.phi[a];
      }
    }
  }

  for (int l = 0; l < dec_.q(); ++l) {
    const Subdomain& sd = dec_.subdomain(l);
    const WeightFamily& w = dec_.weights(l);
    Region r;
    r.nodes = sd.nodes;
    r.elements = sd.elements;
    r.lumped_mass.resize(r.nodes.size());
    r.capacity_mass.assign(r.nodes.size(), 0.0);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      r.lumped_mass[i] = global_.lumped_mass[static_cast<std::size_t>(r.nodes[i])];
    }
    for (std::size_t le = 0; le < sd.elements.size(); ++le) {
      const auto e = static_cast<std::size_t>(sd.elements[le]);
      const auto nodes = mesh_.element(e);
      std::array<int, 3> loc{};
      std::array<double, 3> ae{};
      for (std::size_t a = 0; a < npe; ++a) {
        loc[a] = dec_.local_index(l, static_cast<std::size_t>(nodes[a]));
        ae[a] = w.a[static_cast<std::size_t>(loc[a])];
      }
      r.local_elems.push_back(loc);
      r.a.push_back(ae);
      r.b.push_back(w.b[le]);
      for (const QuadraturePoint& qp : mesh_.quadrature(e)) {
        const double gq = at_point(w.g[le], qp, npe) * model_.gamma(qp.x);
        for (std::size_t a = 0; a < npe; ++a) {
          r.capacity_mass[static_cast<std::size_t>(loc[a])] += qp.weight * gq * qp.phi[a];
        }
      }
    }
    subdomains_.push_back(std::move(r));
  }

  const double dt = grid_.dt();
  capacity_scale_ = std::exp(-model_.shift_rate * dt);
  shift_coefficient_ = -std::expm1(-model_.shift_rate * dt) / dt;
}

const Region& DiscreteOperatorContext::region(RegionId id) const {
  if (id.is_global()) return global_;
  if (id.index() >= static_cast<int>(subdomains_.size())) {
    throw ContractError("no subdomain " + std::to_string(id.index()));
  }
  return subdomains_[static_cast<std::size_t>(id.index())];
}

std::vector<double> apply_A(const DiscreteOperatorContext& ctx, RegionId id, int k,
                            std::span<const double> u_k) {
  const Region& r = ctx.region(id);
  if (u_k.size() != r.size()) throw ContractError("apply_A: level has the wrong size");
  const Mesh& mesh = ctx.mesh();
  const PStructureModel& model = ctx.model();
  const double t = ctx.time_grid().time(k);
  const std::size_t npe = static_cast<std::size_t>(mesh.nodes_per_element());

  std::vector<double> out(r.size(), 0.0);
  for (std::size_t le = 0; le < r.elements.size(); ++le) {
    const auto e = static_cast<std::size_t>(r.elements[le]);
    const auto grads = mesh.gradients(e);
    const auto ue = gather(u_k, r.local_elems[le], npe);
    const Vec2 gu = gradient(ue, grads);
    for (const QuadraturePoint& qp : mesh.quadrature(e)) {
      const double aq = at_point(r.a[le], qp, npe);
      const double bq = at_point(r.b[le], qp, npe);
      const Vec2 flux = aq != 0.0 ? aq * eval_alpha(model, qp.x, t, gu) : Vec2{0.0, 0.0};
      const double react = bq * eval_beta(model, qp.x, t, at_point(ue, qp, npe));
      for (std::size_t a = 0; a < npe; ++a) {
        out[static_cast<std::size_t>(r.local_elems[le][a])] +=
            qp.weight * (dot(flux, grads[a]) + react * qp.phi[a]);
      }
    }
  }
  return out;
}

std::vector<double> source_load(const DiscreteOperatorContext& ctx, RegionId id, int k) {
  const Region& r = ctx.region(id);
  std::vector<double> out(r.size(), 0.0);
  const SourceTerm& src = ctx.model().source;
  if (src.is_zero()) return out;
  const Mesh& mesh = ctx.mesh();
  const double t = ctx.time_grid().time(k);
  const std::size_t npe = static_cast<std::size_t>(mesh.nodes_per_element());
  for (std::size_t le = 0; le < r.elements.size(); ++le) {
    const auto e = static_cast<std::size_t>(r.elements[le]);
    const auto grads = mesh.gradients(e);
    for (const QuadraturePoint& qp : mesh.quadrature(e)) {
      const double e0 = src.eta0 ? at_point(r.b[le], qp, npe) * src.eta0(qp.x, t) : 0.0;
      const Vec2 e1 = src.eta ? at_point(r.a[le], qp, npe) * src.eta(qp.x, t) : Vec2{0.0, 0.0};
      if (!std::isfinite(e0) || !is_finite(e1)) throw NumericError("non-finite source density");
      for (std::size_t a = 0; a < npe; ++a) {
        out[static_cast<std::size_t>(r.local_elems[le][a])] +=
            qp.weight * (e0 * qp.phi[a] + dot(e1, grads[a]));
      }
    }
  }
  return out;
}

SpaceTimeField apply_F(const DiscreteOperatorContext& ctx, RegionId id, const SpaceTimeField& u) {
  const Region& r = ctx.region(id);
  require_region_field(r, u, "apply_F");
  if (!(u.grid() == ctx.time_grid())) throw ContractError("apply_F: field uses another time grid");
  const double dt = ctx.time_grid().dt();
  const double kappa = ctx.capacity_scale();
  const double sigma = ctx.shift_coefficient();

  SpaceTimeField out(u.grid(), r.size());
  for (int k = 1; k <= u.steps(); ++k) {
    const auto uk = u.level(k);
    auto rk = out.level(k);
    const auto ak = apply_A(ctx, id, k, uk);
    const auto fk = source_load(ctx, id, k);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double prev = k > 1 ? u(k - 1, i) : 0.0;
      const double cm = r.capacity_mass[i];
      rk[i] = kappa * cm * (uk[i] - prev) / dt + sigma * cm * uk[i] + ak[i] + fk[i];
    }
  }
  return out;
}

SpaceTimeField to_h_representation(const DiscreteOperatorContext& ctx, RegionId id,
                                   SpaceTimeField dual) {
  const Region& r = ctx.region(id);
  require_region_field(r, dual, "to_h_representation");
  for (int k = 1; k <= dual.steps(); ++k) {
    auto lv = dual.level(k);
    for (std::size_t i = 0; i < r.size(); ++i) lv[i] /= r.lumped_mass[i];
  }
  return dual;
}

SpaceTimeField apply_F_h(const DiscreteOperatorContext& ctx, RegionId id, const SpaceTimeField& u) {
  if (u.num_nodes() != ctx.num_nodes()) throw ContractError("apply_F_h expects a global field");
  if (id.is_global()) return to_h_representation(ctx, id, apply_F(ctx, id, u));
  const int l = id.index();
  const Decomposition& dec = ctx.decomposition();
  return extend_field(dec, l, to_h_representation(ctx, id, apply_F(ctx, id, restrict_field(dec, l, u))));
}

double h_inner(const DiscreteOperatorContext& ctx, const SpaceTimeField& u, const SpaceTimeField& v,
               RegionId id) {
  u.require_compatible(v);
  if (u.num_nodes() != ctx.num_nodes()) throw ContractError("h_inner expects global fields");
  const Region& r = ctx.region(id);
  double sum = 0.0;
  for (int k = 1; k <= u.steps(); ++k) {
    const auto uk = u.level(k);
    const auto vk = v.level(k);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const auto n = static_cast<std::size_t>(r.nodes[i]);
      s += r.lumped_mass[i] * uk[n] * vk[n];
    }
    sum += s;
  }
  return ctx.time_grid().dt() * sum;
}

double h_norm(const DiscreteOperatorContext& ctx, const SpaceTimeField& u, RegionId id) {
  return std::sqrt(h_inner(ctx, u, u, id));
}

double duality_pairing(const DiscreteOperatorContext& ctx, const SpaceTimeField& dual,
                       const SpaceTimeField& u) {
  dual.require_compatible(u);
  double sum = 0.0;
  const auto a = dual.values();
  const auto b = u.values();
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return ctx.time_grid().dt() * sum;
}

double v_norm_p(const DiscreteOperatorContext& ctx, RegionId id, const SpaceTimeField& u) {
  const Region& r = ctx.region(id);
  require_region_field(r, u, "v_norm_p");
  const Mesh& mesh = ctx.mesh();
  const double p = ctx.model().p;
  const std::size_t npe = static_cast<std::size_t>(mesh.nodes_per_element());
  double sum = 0.0;
  for (int k = 1; k <= u.steps(); ++k) {
    const auto uk = u.level(k);
    for (std::size_t le = 0; le < r.elements.size(); ++le) {
      const auto e = static_cast<std::size_t>(r.elements[le]);
      const auto ue = gather(uk, r.local_elems[le], npe);
      const double gp = std::pow(norm(gradient(ue, mesh.gradients(e))), p);
      for (const QuadraturePoint& qp : mesh.quadrature(e)) {
        sum += qp.weight * (at_point(r.a[le], qp, npe) * gp +
                            at_point(r.b[le], qp, npe) * std::pow(std::abs(at_point(ue, qp, npe)), p));
      }
    }
  }
  return std::pow(ctx.time_grid().dt() * sum, 1.0 / p);
}

void assemble_A_linearization(const DiscreteOperatorContext& ctx, RegionId id, int k,
                              std::span<const double> u_k, double eps, Linearization kind,
                              MatrixEntries& out) {
  const Region& r = ctx.region(id);
  if (u_k.size() != r.size()) throw ContractError("assemble_A_linearization: wrong level size");
  const Mesh& mesh = ctx.mesh();
  const PStructureModel& model = ctx.model();
  if (kind == Linearization::secant && (!model.alpha_secant || !model.beta_secant)) {
    throw SolverError("model " + model.name + " has no secant coefficients", 0.0);
  }
  const double t = ctx.time_grid().time(k);
  const std::size_t npe = static_cast<std::size_t>(mesh.nodes_per_element());
  out.n = r.size();
  out.clear();
  for (std::size_t le = 0; le < r.elements.size(); ++le) {
    const auto e = static_cast<std::size_t>(r.elements[le]);
    const auto grads = mesh.gradients(e);
    const auto ue = gather(u_k, r.local_elems[le], npe);
    const Vec2 gu = gradient(ue, grads);
    std::array<std::array<double, 3>, 3> ke{};
    for (const QuadraturePoint& qp : mesh.quadrature(e)) {
      const double aq = at_point(r.a[le], qp, npe);
      const double bq = at_point(r.b[le], qp, npe);
      const double uq = at_point(ue, qp, npe);
      Mat2 J{0.0, 0.0, 0.0, 0.0};
      double db = 0.0;
      if (kind == Linearization::newton) {
        if (aq != 0.0) J = model.alpha_jacobian(qp.x, t, gu, eps);
        db = model.beta_derivative(qp.x, t, uq, eps);
      } else {
        if (aq != 0.0) J = Mat2::identity(model.alpha_secant(qp.x, t, gu, eps));
        db = model.beta_secant(qp.x, t, uq, eps);
      }
      for (std::size_t a = 0; a < npe; ++a) {
        for (std::size_t b = 0; b < npe; ++b) {
          ke[a][b] += qp.weight * (aq * dot(J * grads[b], grads[a]) + bq * db * qp.phi[a] * qp.phi[b]);
        }
      }
    }
    for (std::size_t a = 0; a < npe; ++a) {
      for (std::size_t b = 0; b < npe; ++b) {
        if (!std::isfinite(ke[a][b])) throw NumericError("non-finite Jacobian entry");
        out.add(r.local_elems[le][a], r.local_elems[le][b], ke[a][b]);
      }
    }
  }
}

}  // namespace stdd
