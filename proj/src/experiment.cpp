#include "stdd/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stdd/errors.hpp"
#include "stdd/reference.hpp"
#include "stdd/resolvent.hpp"

namespace stdd {

namespace {

using nlohmann::json;

// Strict view on one JSON object: every key must be consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("'" + display() + "' must be a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T required(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing required key '" + qualified(key) + "'");
    return convert<T>(key);
  }

  template <class T>
  T optional(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    return convert<T>(key);
  }

  Reader child(const std::string& key, bool required_key = true) {
    seen_.insert(key);
    if (!j_.contains(key)) {
      if (required_key) throw ConfigError("missing required key '" + qualified(key) + "'");
      return Reader(empty_object(), qualified(key));
    }
    return Reader(j_.at(key), qualified(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + qualified(it.key()) + "'");
    }
  }

 private:
  static const json& empty_object() {
    static const json e = json::object();
    return e;
  }
  std::string display() const { return path_.empty() ? "<root>" : path_; }
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  T convert(const std::string& key) const {
    const json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("'" + qualified(key) + "' must be true or false");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError("'" + qualified(key) + "' must be a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("'" + qualified(key) + "' must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
          throw ConfigError("'" + qualified(key) + "' must be nonnegative");
        }
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("'" + qualified(key) + "' must be a string");
    }
    try {
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("'" + qualified(key) + "': " + e.what());
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class T>
std::vector<T> number_list(const json& v, const std::string& name) {
  if (!v.is_array()) throw ConfigError("'" + name + "' must be an array");
  std::vector<T> out;
  for (const auto& x : v) {
    if (!x.is_number() || (std::is_integral_v<T> && !x.is_number_integer())) {
      throw ConfigError("'" + name + "' has a non-numeric entry");
    }
    out.push_back(x.get<T>());
  }
  return out;
}

NewtonOptions parse_newton(Reader r) {
  NewtonOptions n;
  n.max_iters = r.optional<int>("max_iters", n.max_iters);
  n.abs_tol = r.optional<double>("abs_tol", n.abs_tol);
  n.rel_tol = r.optional<double>("rel_tol", n.rel_tol);
  n.damping = r.optional<double>("damping", n.damping);
  n.epsilon_reg = r.optional<double>("epsilon_reg", n.epsilon_reg);
  r.finish();
  return n;
}

LinearOptions parse_linear(Reader r) {
  LinearOptions o;
  const std::string solver = r.optional<std::string>("solver", "auto");
  if (solver == "auto") {
    o.solver = LinearSolverKind::automatic;
  } else if (solver == "tridiagonal") {
    o.solver = LinearSolverKind::tridiagonal;
  } else if (solver == "conjugate_gradient") {
    o.solver = LinearSolverKind::conjugate_gradient;
  } else {
    throw ConfigError("scheme.linear.solver must be auto, tridiagonal or conjugate_gradient");
  }
  o.cg_tol = r.optional<double>("cg_tol", o.cg_tol);
  o.cg_max_iters = r.optional<int>("cg_max_iters", o.cg_max_iters);
  r.finish();
  return o;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Reader top(root, "");
  ExperimentConfig cfg;

  {
    Reader m = top.child("mesh");
    cfg.mesh.dim = m.required<int>("dim");
    m.required<json>("extent");
    m.required<json>("cells");
    cfg.mesh.extent = number_list<double>(root.at("mesh").at("extent"), "mesh.extent");
    cfg.mesh.cells = number_list<int>(root.at("mesh").at("cells"), "mesh.cells");
    m.finish();
  }
  {
    Reader t = top.child("time");
    cfg.time.T = t.required<double>("T");
    cfg.time.steps = t.required<int>("steps");
    t.finish();
    cfg.time.validate();
  }
  {
    Reader m = top.child("model");
    cfg.model.name = m.required<std::string>("name");
    cfg.model.p = m.optional<double>("p", cfg.model.p);
    cfg.model.lambda = m.optional<double>("lambda", cfg.model.lambda);
    cfg.model.gamma_kind = m.optional<std::string>("gamma_kind", cfg.model.gamma_kind);
    Reader g = m.child("gamma_params", false);
    cfg.model.gamma_value = g.optional<double>("value", cfg.model.gamma_value);
    if (cfg.model.gamma_kind == "indicator") {
      cfg.model.gamma_zero_lo = g.required<double>("zero_lo");
      cfg.model.gamma_zero_hi = g.required<double>("zero_hi");
    } else if (cfg.model.gamma_kind != "constant") {
      throw ConfigError("model.gamma_kind must be constant or indicator");
    }
    g.finish();
    m.finish();
  }
  {
    Reader s = top.child("source", false);
    cfg.source.name = s.optional<std::string>("name", cfg.source.name);
    if (cfg.source.name == "custom") {
      cfg.source.eta0 = s.optional<double>("eta0", 0.0);
      if (s.has("eta")) {
        const auto eta = number_list<double>(root.at("source").at("eta"), "source.eta");
        if (eta.empty() || eta.size() > 2) throw ConfigError("source.eta needs 1 or 2 entries");
        cfg.source.eta = {eta[0], eta.size() > 1 ? eta[1] : 0.0};
      }
      s.optional<json>("eta", json());
    } else if (cfg.source.name != "zero" && cfg.source.name != "manufactured_cos") {
      throw ConfigError("unknown source '" + cfg.source.name + "' (expected zero, manufactured_cos, custom)");
    }
    s.finish();
  }
  {
    Reader d = top.child("decomposition");
    cfg.decomposition.q = d.required<int>("q");
    cfg.decomposition.overlap_fraction = d.optional<double>("overlap_fraction", cfg.decomposition.overlap_fraction);
    cfg.decomposition.c_min = d.optional<double>("c_min", cfg.decomposition.c_min);
    d.finish();
  }
  {
    Reader s = top.child("scheme");
    SchemeConfig& sc = cfg.scheme;
    sc.scheme = parse_scheme(s.required<std::string>("name"));
    if (s.has("s")) sc.s = s.required<double>("s");
    if (s.has("s_rule")) {
      Reader rule = s.child("s_rule");
      sc.s_rule_C = rule.optional<double>("C", 1.0);
      rule.finish();
    }
    if (!sc.s && !sc.s_rule_C) sc.s = 1.0;
    sc.max_sweeps = s.optional<int>("max_sweeps", sc.max_sweeps);
    sc.stop_tol = s.optional<double>("stop_tol", sc.stop_tol);
    sc.threads = s.optional<int>("threads", sc.threads);
    cfg.initial_guess = s.optional<std::string>("initial_guess", cfg.initial_guess);
    if (cfg.initial_guess != "zero" && cfg.initial_guess != "random") {
      throw ConfigError("scheme.initial_guess must be zero or random");
    }
    sc.newton = parse_newton(s.child("newton", false));
    sc.linear = parse_linear(s.child("linear", false));
    s.finish();
  }
  {
    Reader o = top.child("output", false);
    cfg.output.csv_path = o.optional<std::string>("csv_path", "");
    cfg.output.json_summary_path = o.optional<std::string>("json_summary_path", "");
    cfg.output.record_wall_time = o.optional<bool>("record_wall_time", true);
    o.finish();
  }
  {
    Reader v = top.child("verify", false);
    cfg.verify_samples = v.optional<int>("samples", cfg.verify_samples);
    v.finish();
  }
  cfg.rng_seed = top.optional<std::uint64_t>("rng_seed", cfg.rng_seed);
  top.finish();
  cfg.scheme.record_wall_time = cfg.output.record_wall_time;
  if (cfg.verify_samples < 1) throw ConfigError("verify.samples must be >= 1");
  cfg.time.validate();
  cfg.scheme.validate(cfg.decomposition.q);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

PStructureModel build_model(const ExperimentConfig& cfg, const Mesh& mesh) {
  const ModelSpec& ms = cfg.model;
  if (!(ms.gamma_value >= 0.0)) throw ConfigError("model.gamma_params.value must be >= 0");
  auto gamma = ms.gamma_kind == "indicator"
                   ? indicator_gamma(ms.gamma_value, ms.gamma_zero_lo, ms.gamma_zero_hi)
                   : constant_gamma(ms.gamma_value);
  PStructureModel model;
  if (ms.name == "p_laplace") {
    model = make_p_laplace(ms.p, ms.lambda, gamma);
  } else if (ms.name == "anti_monotone") {
    model = make_anti_monotone(gamma);
  } else {
    throw ConfigError("unknown model '" + ms.name + "' (expected p_laplace or anti_monotone)");
  }
  if (cfg.source.name == "manufactured_cos") {
    model.source = manufactured_rhs(model, cosine_solution(mesh.dim()), mesh, cfg.time.T);
  } else if (cfg.source.name == "custom") {
    const double e0 = cfg.source.eta0;
    const Vec2 e1 = cfg.source.eta;
    if (e0 != 0.0) model.source.eta0 = [e0](const Vec2&, double) { return e0; };
    if (e1.x != 0.0 || e1.y != 0.0) model.source.eta = [e1](const Vec2&, double) { return e1; };
  }
  model.validate();
  return model;
}

DiscreteOperatorContext build_context(const ExperimentConfig& cfg) {
  Mesh mesh = build_mesh(cfg.mesh);
  PStructureModel model = build_model(cfg, mesh);
  const DecompositionSpec& d = cfg.decomposition;
  Decomposition dec = build_decomposition(mesh, d.q, d.overlap_fraction, d.c_min);
  return DiscreteOperatorContext(std::move(mesh), std::move(model), std::move(dec), cfg.time);
}

SpaceTimeField random_field(const TimeGrid& grid, std::size_t num_nodes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  SpaceTimeField u(grid, num_nodes);
  for (double& v : u.values()) v = dist(rng);
  return u;
}

void write_trace_csv(std::ostream& os, const IterationTrace& trace, int q) {
  os << "sweep,err_H,err_k_total";
  for (int l = 1; l <= q; ++l) os << ",err_k_" << l;
  os << ",pr_v_norm,pr_w_norm,wall_ms\n";
  for (const SweepRecord& r : trace.rows) {
    os << r.sweep;
    if (trace.has_reference) {
      os << ',' << fmt17(r.err_H) << ',' << fmt17(r.err_k_total);
      for (int l = 0; l < q; ++l) os << ',' << fmt17(r.err_k.at(static_cast<std::size_t>(l)));
    } else {
      os << ",,";
      for (int l = 0; l < q; ++l) os << ',';
    }
    os << ',' << (r.pr_v_norm ? fmt17(*r.pr_v_norm) : "");
    os << ',' << (r.pr_w_norm ? fmt17(*r.pr_w_norm) : "");
    os << ',' << (r.wall_ms ? fmt17(*r.wall_ms) : "") << '\n';
  }
}

std::string summary_json(const RunSummary& s, const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["final_err_H"] = s.final_err_H;
  j["final_err_k_total"] = s.final_err_k_total;
  j["sweeps"] = s.sweeps;
  j["s_used"] = s.s_used;
  j["monotone_violations"] = s.monotone_violations;
  j["converged"] = s.converged;
  j["scheme"] = to_string(cfg.scheme.scheme);
  j["c"] = s.c;
  j["rng_seed"] = cfg.rng_seed;
  return j.dump(2) + "\n";
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::error_code ec;
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

void write_csv_file(const std::string& path, const IterationTrace& trace, int q) {
  if (path.empty()) return;
  std::ofstream out = open_output(path);
  write_trace_csv(out, trace, q);
  if (!out) throw IoError("failed while writing '" + path + "'");
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  const DiscreteOperatorContext ctx = build_context(cfg);
  const int q = ctx.decomposition().q();
  SchemeConfig sc = cfg.scheme;
  sc.validate(q);
  std::mt19937_64 rng(cfg.rng_seed);
  if (cfg.initial_guess == "random") sc.initial_guess = random_field(cfg.time, ctx.num_nodes(), rng);

  MonolithicStats ms;
  const SpaceTimeField u_h = solve_monolithic(ctx, sc.newton, sc.linear, nullptr, &ms);
  log << "reference: " << ms.newton_iterations << " Newton iterations, max residual "
      << fmt17(ms.max_residual) << "\n";

  RunResult res;
  try {
    res = run_scheme(ctx, sc, &u_h);
  } catch (const SchemeFailure& e) {
    write_csv_file(cfg.output.csv_path, e.trace(), q);
    throw;
  }
  write_csv_file(cfg.output.csv_path, res.trace, q);

  RunSummary s;
  s.sweeps = res.sweeps;
  s.s_used = res.s_used;
  s.monotone_violations = res.trace.monotone_violations;
  s.converged = res.converged;
  s.c = res.trace.c;
  if (!res.trace.rows.empty()) {
    s.final_err_H = res.trace.rows.back().err_H;
    s.final_err_k_total = res.trace.rows.back().err_k_total;
  }
  const std::string js = summary_json(s, cfg);
  if (!cfg.output.json_summary_path.empty()) {
    std::ofstream out = open_output(cfg.output.json_summary_path);
    out << js;
    if (!out) throw IoError("failed while writing '" + cfg.output.json_summary_path + "'");
  }
  log << js;
  return s;
}

double partition_of_unity_error(const DiscreteOperatorContext& ctx) {
  const Mesh& mesh = ctx.mesh();
  const Decomposition& dec = ctx.decomposition();
  const std::size_t npe = static_cast<std::size_t>(mesh.nodes_per_element());
  const std::size_t nq = mesh.quadrature(0).size();
  // sums[e][qp][kind]
  std::vector<double> sums(mesh.num_elements() * nq * 3, 0.0);
  for (int l = 0; l < dec.q(); ++l) {
    const Region& r = ctx.region(RegionId::subdomain(l));
    const WeightFamily& w = dec.weights(l);
    for (std::size_t le = 0; le < r.elements.size(); ++le) {
      const auto e = static_cast<std::size_t>(r.elements[le]);
      const auto qps = mesh.quadrature(e);
      for (std::size_t iq = 0; iq < nq; ++iq) {
        double a = 0.0;
        double b = 0.0;
        double g = 0.0;
        for (std::size_t k = 0; k < npe; ++k) {
          a += qps[iq].phi[k] * r.a[le][k];
          b += qps[iq].phi[k] * w.b[le][k];
          g += qps[iq].phi[k] * w.g[le][k];
        }
        double* s = &sums[(e * nq + iq) * 3];
        s[0] += a;
        s[1] += b;
        s[2] += g;
      }
    }
  }
  double worst = 0.0;
  for (double s : sums) worst = std::max(worst, std::abs(s - 1.0));
  return worst;
}

double adjointness_error(const DiscreteOperatorContext& ctx, int pairs, std::mt19937_64& rng) {
  const Decomposition& dec = ctx.decomposition();
  const double dt = ctx.time_grid().dt();
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    const int l = p % dec.q();
    const Region& r = ctx.region(RegionId::subdomain(l));
    const SpaceTimeField ul = random_field(ctx.time_grid(), r.size(), rng);
    const SpaceTimeField v = random_field(ctx.time_grid(), ctx.num_nodes(), rng);
    const double lhs = h_inner(ctx, extend_field(dec, l, ul), v);
    const SpaceTimeField rv = restrict_field(dec, l, v);
    double rhs = 0.0;
    for (int k = 1; k <= ul.steps(); ++k) {
      for (std::size_t i = 0; i < r.size(); ++i) rhs += dt * r.lumped_mass[i] * ul(k, i) * rv(k, i);
    }
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

double capacity_reconstruction_error(const DiscreteOperatorContext& ctx) {
  const Mesh& mesh = ctx.mesh();
  const Decomposition& dec = ctx.decomposition();
  const PStructureModel& model = ctx.model();
  const std::size_t npe = static_cast<std::size_t>(mesh.nodes_per_element());
  const std::size_t nq = mesh.quadrature(0).size();
  std::vector<double> sum(mesh.num_elements() * nq, 0.0);
  std::vector<double> mass(ctx.num_nodes(), 0.0);
  for (int l = 0; l < dec.q(); ++l) {
    const Region& r = ctx.region(RegionId::subdomain(l));
    const WeightFamily& w = dec.weights(l);
    for (std::size_t le = 0; le < r.elements.size(); ++le) {
      const auto e = static_cast<std::size_t>(r.elements[le]);
      const auto qps = mesh.quadrature(e);
      for (std::size_t iq = 0; iq < nq; ++iq) {
        double g = 0.0;
        for (std::size_t k = 0; k < npe; ++k) g += qps[iq].phi[k] * w.g[le][k];
        sum[e * nq + iq] += g * model.gamma(qps[iq].x);
      }
    }
    for (std::size_t i = 0; i < r.size(); ++i) mass[static_cast<std::size_t>(r.nodes[i])] += r.capacity_mass[i];
  }
  double worst = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto qps = mesh.quadrature(e);
    for (std::size_t iq = 0; iq < nq; ++iq) {
      const double gam = model.gamma(qps[iq].x);
      worst = std::max(worst, std::abs(sum[e * nq + iq] - gam) / std::max(1.0, std::abs(gam)));
    }
  }
  const Region& glob = ctx.region(RegionId::global());
  double cmax = 0.0;
  for (double c : glob.capacity_mass) cmax = std::max(cmax, c);
  if (cmax > 0.0) {
    for (std::size_t i = 0; i < mass.size(); ++i) {
      worst = std::max(worst, std::abs(mass[i] - glob.capacity_mass[i]) / cmax);
    }
  }
  return worst;
}

double decomposition_identity_error(const DiscreteOperatorContext& ctx, int fields, std::mt19937_64& rng) {
  const Decomposition& dec = ctx.decomposition();
  double worst = 0.0;
  for (int f = 0; f < fields; ++f) {
    const SpaceTimeField u = random_field(ctx.time_grid(), ctx.num_nodes(), rng);
    const SpaceTimeField full = apply_F(ctx, RegionId::global(), u);
    SpaceTimeField sum = ctx.zero_field();
    for (int l = 0; l < dec.q(); ++l) {
      sum += extend_field(dec, l, apply_F(ctx, RegionId::subdomain(l), restrict_field(dec, l, u)));
    }
    double scale = 0.0;
    for (double v : full.values()) scale = std::max(scale, std::abs(v));
    worst = std::max(worst, max_abs_diff(sum, full) / std::max(scale, 1e-300));
  }
  return worst;
}

double resolvent_lipschitz(const DiscreteOperatorContext& ctx, const ResolventConfig& cfg, int pairs,
                           std::mt19937_64& rng) {
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    const int l = p % ctx.decomposition().q();
    const SpaceTimeField g1 = random_field(ctx.time_grid(), ctx.num_nodes(), rng);
    const SpaceTimeField g2 = random_field(ctx.time_grid(), ctx.num_nodes(), rng);
    const SpaceTimeField r1 = resolvent_solve(ctx, l, cfg, g1);
    const SpaceTimeField r2 = resolvent_solve(ctx, l, cfg, g2);
    worst = std::max(worst, cfg.s * h_norm(ctx, r1 - r2) / h_norm(ctx, g1 - g2));
  }
  return worst;
}

std::vector<CheckResult> verify_experiment(const ExperimentConfig& cfg, std::ostream& out) {
  const DiscreteOperatorContext ctx = build_context(cfg);
  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<CheckResult> results;
  auto add = [&](CheckResult r) {
    char line[256];
    std::snprintf(line, sizeof line, "%-28s %s  value=%.6e  threshold=%.6e", r.name.c_str(),
                  r.passed ? "PASS" : "FAIL", r.value, r.threshold);
    out << line;
    if (!r.note.empty()) out << "  (" << r.note << ")";
    out << '\n';
    results.push_back(std::move(r));
  };

  StructureSampler sampler;
  sampler.num_samples = cfg.verify_samples;
  sampler.seed = cfg.rng_seed;
  sampler.dim = ctx.mesh().dim();
  const StructureReport rep = check_p_structure(ctx.model(), sampler);
  auto slack_check = [&](const std::string& name, double slack) {
    add({name, slack >= -rep.tolerance, slack, -rep.tolerance, "minimum relative slack"});
  };
  slack_check("p_structure.continuity", rep.continuity);
  slack_check("p_structure.growth", rep.growth);
  slack_check("p_structure.monotonicity", rep.monotonicity);
  slack_check("p_structure.coercivity", rep.coercivity);

  const double pou = partition_of_unity_error(ctx);
  add({"partition_of_unity", pou <= 1e-12, pou, 1e-12, ""});
  const double adj = adjointness_error(ctx, 100, rng);
  add({"adjointness", adj <= 1e-12, adj, 1e-12, "relative, 100 pairs"});
  const double cap = capacity_reconstruction_error(ctx);
  add({"capacity_reconstruction", cap <= 1e-12, cap, 1e-12, ""});
  const double ident = decomposition_identity_error(ctx, 5, rng);
  add({"decomposition_identity", ident <= 1e-11, ident, 1e-11, "relative, 5 fields"});

  if (rep.passed) {
    ResolventConfig rc{cfg.scheme.s_used(), cfg.scheme.newton, cfg.scheme.linear};
    const double lip = resolvent_lipschitz(ctx, rc, 10, rng);
    add({"resolvent_nonexpansive", lip <= 1.0 + 1e-8, lip, 1.0 + 1e-8, "s ||R g1 - R g2|| / ||g1 - g2||"});
  } else {
    add({"resolvent_nonexpansive", false, 0.0, 1.0 + 1e-8, "skipped: model fails the p-structure checks"});
  }
  return results;
}

}  // namespace stdd
