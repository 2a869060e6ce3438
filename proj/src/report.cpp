#include "sysrisk/report.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "sysrisk/oracle.hpp"

namespace sysrisk {

using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json matrix_json(const DualVector& Z) {
  json rows = json::array();
  for (std::size_t i = 0; i < Z.rows(); ++i) {
    json r = json::array();
    for (double v : Z.row(i)) r.push_back(extended(v));
    rows.push_back(r);
  }
  return rows;
}

json vector_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(extended(x));
  return a;
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SolverOptions solver_options(const Instance& inst) {
  return {inst.solver.tol, inst.solver.max_iter};
}

ShortfallOptions shortfall_options(const Instance& inst) {
  return {inst.solver.tol, inst.solver.max_iter, inst.solver.restarts, inst.solver.seed};
}

RandomVariable first_row(const RandomVector& X) {
  auto r = X.row(0);
  return RandomVariable(std::vector<double>(r.begin(), r.end()));
}

double spread(const RandomVector& X) {
  const auto f = X.flat();
  return *std::max_element(f.begin(), f.end()) - *std::min_element(f.begin(), f.end());
}

struct Solved {
  DualityReport rep;
  std::optional<Diagnostics> diag;
  bool proper = true;
  int exit_code = kExitOk;
};

Solved solve_instance(const Instance& inst) {
  Solved s;
  const SolverOptions so = solver_options(inst);
  switch (inst.mode) {
    case DualMode::rho: {
      s.diag = diagnostics(inst.X, *inst.aggregation, *inst.acceptance, inst.space, so);
      s.proper = s.diag->proper;
      if (s.proper) {
        s.rep = dual_rho(inst.X, *inst.aggregation, *inst.acceptance, inst.space, so);
      } else {
        // No dual representation exists; report the primal alone.
        s.rep.primal = rho(inst.X, *inst.aggregation, *inst.acceptance, inst.space, so);
        s.rep.note = "rho(0) = -inf; the measure is not proper";
      }
      break;
    }
    case DualMode::rho_tilde: {
      const double at_zero =
          rho_A(*inst.acceptance, RandomVariable::constant(inst.space.size(), 0.0), inst.space);
      s.proper = at_zero > kNegInf;
      s.rep = dual_rho_tilde(inst.X, *inst.aggregation, *inst.acceptance, inst.space, so);
      break;
    }
    case DualMode::shortfall:
      s.rep = rho_u_dual(first_row(inst.X), *inst.shortfall, inst.space, shortfall_options(inst));
      break;
  }
  if (!s.proper) {
    s.rep.dual_value.reset();
    s.rep.Z_star.reset();
    s.rep.W_star.reset();
    fill_gaps(s.rep);
    s.exit_code = kExitNotProper;
  } else if (s.rep.primal.status == PrimalStatus::tolerance_reached ||
             s.rep.note.find("iteration limit") != std::string::npos) {
    s.exit_code = kExitNonconvergence;
  }
  spdlog::info("{}: primal {} dual {}", to_string(inst.mode), s.rep.primal.value,
               s.rep.dual_value ? *s.rep.dual_value : std::nan(""));
  return s;
}

json base_report(const Instance& inst, const char* command, const Solved& s) {
  json r;
  r["command"] = command;
  r["instance_hash"] = hex(instance_hash(inst));
  r["mode"] = to_string(inst.mode);
  r["primal"] = to_json(s.rep.primal);
  r["dual"] = to_json(s.rep);
  r["proper"] = s.proper;
  if (s.diag) r["diagnostics"] = to_json(*s.diag);
  return r;
}

struct PropertyLog {
  json items = json::array();
  bool all = true;
  void add(const std::string& name, bool ok, json detail) {
    items.push_back({{"name", name}, {"passed", ok}, {"detail", std::move(detail)}});
    all = all && ok;
    if (!ok) spdlog::error("property {} failed", name);
  }
};

double rho_of(const Instance& inst, const RandomVector& X) {
  const SolverOptions so = solver_options(inst);
  if (inst.mode == DualMode::rho) return rho(X, *inst.aggregation, *inst.acceptance, inst.space, so).value;
  if (inst.mode == DualMode::rho_tilde)
    return rho_tilde(X, *inst.aggregation, *inst.acceptance, inst.space, so).value;
  return rho_u_primal(first_row(X), *inst.shortfall, inst.space, std::min(so.tol, 1e-9)).value;
}

void check_properties(const Instance& inst, const Solved& s, PropertyLog& log) {
  const std::size_t d = inst.X.rows(), n = inst.X.cols();
  const double tol = inst.solver.tol;
  const double cash_tol = std::max(1e-5, 10.0 * tol);
  std::mt19937_64 rng(inst.solver.seed ^ 0x5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = 1.0 + spread(inst.X);
  const double base = s.rep.primal.value;

  // Deterministic capital shifts; rho_tilde shifts the institutions equally so
  // the aggregated position moves by a scalar only for the sum aggregation, hence
  // it is checked on rho_A directly.
  json shifts = json::array();
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> m(d);
    for (double& v : m) v = normal(rng) * scale;
    double expected, got;
    if (inst.mode == DualMode::rho_tilde) {
      const RandomVariable L = eval_vector(*inst.aggregation, inst.X);
      std::vector<double> Lc(L.values().begin(), L.values().end());
      for (double& v : Lc) v += m[0];
      got = rho_A(*inst.acceptance, RandomVariable(Lc), inst.space, tol * 1e-3);
      expected = rho_A(*inst.acceptance, L, inst.space, tol * 1e-3) - m[0];
    } else {
      got = rho_of(inst, shift(inst.X, m));
      double total = 0.0;
      for (double v : m) total += v;
      expected = base - total;
    }
    const double err = std::isfinite(expected) ? std::abs(got - expected) : (got == expected ? 0.0 : kInf);
    worst = std::max(worst, err);
    shifts.push_back(extended(err));
  }
  log.add("cash_additivity", worst <= cash_tol, {{"errors", shifts}, {"tolerance", cash_tol}});

  // Monotonicity and midpoint convexity against seeded perturbations.
  std::vector<double> up(inst.X.flat().begin(), inst.X.flat().end());
  std::vector<double> other = up;
  for (double& v : up) v += std::abs(normal(rng)) * scale;
  for (double& v : other) v += normal(rng) * scale;
  const RandomVector Xup(d, n, up), Y(d, n, other);
  std::vector<double> mid(d * n);
  for (std::size_t k = 0; k < mid.size(); ++k) mid[k] = 0.5 * (inst.X.flat()[k] + other[k]);
  const double r_up = rho_of(inst, Xup), r_y = rho_of(inst, Y), r_mid = rho_of(inst, RandomVector(d, n, mid));
  log.add("monotonicity", r_up <= base + 10.0 * tol * (1.0 + std::abs(base)),
          {{"rho_X", extended(base)}, {"rho_X_plus", extended(r_up)}});
  const double avg = 0.5 * (base + r_y);
  log.add("midpoint_convexity", !(r_mid > avg + 10.0 * tol * (1.0 + std::abs(avg))),
          {{"rho_mid", extended(r_mid)}, {"average", extended(avg)}});

  if (inst.mode != DualMode::shortfall) {
    const double r0 = rho_of(inst, RandomVector::zeros(d, n));
    log.add("rho_at_zero_nonpositive", r0 <= tol, {{"rho_0", extended(r0)}});
    const auto adm = check_admissibility(*inst.aggregation, default_admissibility_grid(d));
    log.add("aggregation_admissible", adm.violations.empty(), {{"violations", adm.violations.size()}});
  }
  if (inst.mode == DualMode::rho_tilde) {
    const double direct = rho_A(*inst.acceptance, eval_vector(*inst.aggregation, inst.X), inst.space);
    log.add("rho_tilde_is_rho_A_of_aggregate", std::abs(direct - base) <= 1e-4,
            {{"rho_A", extended(direct)}, {"rho_tilde", extended(base)}});
  }
  if (inst.mode == DualMode::shortfall && inst.shortfall->u0() <= 0.0) {
    // Same quantity through the general allocation solver.
    const auto agg = AggregationSpec::componentwise_utility({inst.shortfall->utility()});
    const auto acc = AcceptanceSpec::expectation_floor(inst.shortfall->u0());
    const double general = rho(inst.X, agg, acc, inst.space, solver_options(inst)).value;
    log.add("shortfall_matches_general_rho", std::abs(general - base) <= 10.0 * std::max(tol, 1e-6),
            {{"general", extended(general)}, {"shortfall", extended(base)}});
  }
  if (s.proper && s.rep.dual_value) {
    const double gap_tol = std::max(1e-4, 1e-4 * std::abs(base));
    log.add("duality_gap", s.rep.gap_abs <= gap_tol, {{"gap", extended(s.rep.gap_abs)}, {"tolerance", gap_tol}});
    if (inst.mode != DualMode::shortfall && s.rep.Z_star) {
      log.add("dual_optimizer_in_C", in_dual_simplex(*s.rep.Z_star, inst.space, 1e-7), json::object());
      const PenaltyEval a = alpha(*s.rep.Z_star, *inst.aggregation, *inst.acceptance, inst.space, false,
                                  solver_options(inst));
      log.add("penalty_nonpositive", !(a.value > 1e-6), {{"alpha", extended(a.value)}});
    }
  }
}

std::size_t saddle_points(std::size_t requested, std::size_t d, std::size_t n, const AcceptanceSpec& acc) {
  // The inf-sup sweep visits every X-grid point for every W candidate; keep that
  // product near 5e7.
  auto w_count = [&](double g) {
    switch (acc.kind()) {
      case AcceptanceSpec::Kind::expectation_floor: return g + double(d * n);
      case AcceptanceSpec::Kind::polyhedral: return std::pow(g, double(acc.densities().size())) + double(d);
      default: return std::pow(g + double(d), double(n));
    }
  };
  std::size_t g = requested % 2 == 0 ? requested + 1 : requested;
  while (g > 3 && std::pow(double(g), double(d * n)) * w_count(double(g)) > 5e7) g -= 2;
  return g;
}

}  // namespace

void apply_overrides(Instance& inst, const RunOptions& opt) {
  if (opt.tol) inst.solver.tol = *opt.tol;
  if (opt.max_iter) inst.solver.max_iter = *opt.max_iter;
  if (opt.seed) inst.solver.seed = *opt.seed;
}

json to_json(const PrimalResult& r) {
  json j{{"value", extended(r.value)},
         {"status", to_string(r.status)},
         {"iterations", r.iterations},
         {"lower_bound", extended(r.lower_bound)},
         {"upper_bound", extended(r.upper_bound)}};
  j["m_star"] = r.m_star ? vector_json(*r.m_star) : json(nullptr);
  return j;
}

json to_json(const DualityReport& r) {
  if (!r.dual_value) return json{{"skipped", true}, {"note", r.note}};
  json j{{"value", extended(*r.dual_value)},
         {"gap_abs", extended(r.gap_abs)},
         {"gap_rel", extended(r.gap_rel)},
         {"mode", to_string(r.mode)},
         {"degenerate", r.degenerate},
         {"note", r.note}};
  j["Z_star"] = r.Z_star ? matrix_json(*r.Z_star) : json(nullptr);
  j["W_star"] = r.W_star ? vector_json(r.W_star->values()) : json(nullptr);
  j["alpha_route"] = r.alpha_route ? extended(*r.alpha_route) : json(nullptr);
  j["sigma_route"] = r.sigma_route ? extended(*r.sigma_route) : json(nullptr);
  return j;
}

json to_json(const Diagnostics& d) {
  return {{"rho_at_zero", extended(d.rho_at_zero)},
          {"proper", d.proper},
          {"M0_intersection_trivial", d.M0_intersection_trivial},
          {"negative_constants_rejected", d.negative_constants_rejected},
          {"affine_dominance_ok", d.affine_dominance_ok},
          {"interior_point_found", d.interior_point_found.has_value()}};
}

RunResult run_solve(const Instance& inst, const RunOptions& opt) {
  Stopwatch clock;
  const Solved s = solve_instance(inst);
  RunResult out{base_report(inst, "solve", s), s.exit_code};
  if (opt.timings) out.report["timings"] = {{"total_seconds", clock.seconds()}};
  return out;
}

RunResult run_verify(const Instance& inst, const RunOptions& opt) {
  Stopwatch clock;
  const Solved s = solve_instance(inst);
  const double t_solve = clock.seconds();
  RunResult out{base_report(inst, "verify", s), s.exit_code};
  PropertyLog log;
  check_properties(inst, s, log);
  out.report["properties"] = log.items;
  out.report["all_properties_passed"] = log.all;
  if (!log.all && out.exit_code == kExitOk) out.exit_code = kExitPropertyFailure;
  if (opt.timings) out.report["timings"] = {{"solve_seconds", t_solve}, {"total_seconds", clock.seconds()}};
  return out;
}

RunResult run_oracle(const Instance& inst, std::size_t grid_points, const RunOptions& opt) {
  Stopwatch clock;
  const Solved s = solve_instance(inst);
  RunResult out{base_report(inst, "oracle", s), s.exit_code};
  const std::size_t d = inst.X.rows(), n = inst.X.cols();
  const double rho_val = s.rep.primal.value;
  json o;
  o["grid_points"] = grid_points;
  bool all_ok = true;

  if (std::isfinite(rho_val)) {
    // Window around the solver's allocation, deliberately off-center so that the
    // optimum does not sit on a grid node.
    const double half = std::max(1.0, spread(inst.X));
    const double h = 2.0 * half / double(grid_points - 1);
    json g;
    double grid_val = kInf, step = h;
    std::size_t dims = d;
    if (inst.mode == DualMode::rho) {
      const auto& m = *s.rep.primal.m_star;
      oracle::GridSpec spec{{}, {}, std::vector<std::size_t>(d, grid_points)};
      for (std::size_t i = 0; i < d; ++i) {
        spec.lower.push_back(m[i] + 0.37 * h - half);
        spec.upper.push_back(m[i] + 0.37 * h + half);
      }
      if (d <= 3) {
        const oracle::GridMin gm = oracle::rho_grid(inst.X, *inst.aggregation, *inst.acceptance, inst.space, spec);
        grid_val = gm.value;
        g["boundary_hit"] = gm.boundary_hit;
      }
    } else {
      dims = 1;
      oracle::GridSpec spec = oracle::GridSpec::uniform(1, rho_val + 0.37 * h - half, rho_val + 0.37 * h + half,
                                                        grid_points);
      if (inst.mode == DualMode::rho_tilde) {
        const RandomVariable L = eval_vector(*inst.aggregation, inst.X);
        const RandomVector U(1, n, std::vector<double>(L.values().begin(), L.values().end()));
        grid_val = oracle::rho_grid(U, AggregationSpec::sum(1), *inst.acceptance, inst.space, spec).value;
      } else {
        grid_val = oracle::shortfall_grid(first_row(inst.X), inst.shortfall->utility(), inst.shortfall->u0(),
                                          inst.space, spec);
      }
    }
    if (dims <= 3) {
      const double allowed = double(std::max<std::size_t>(2, dims)) * step;
      const bool ok = grid_val >= rho_val - inst.solver.tol && grid_val - rho_val <= allowed;
      g["value"] = extended(grid_val);
      g["solver"] = extended(rho_val);
      g["grid_step"] = step;
      g["allowed"] = allowed;
      g["agrees"] = ok;
      all_ok = all_ok && ok;
      o["rho_grid"] = g;
    }
  }

  if (inst.mode != DualMode::shortfall && s.rep.Z_star && d * n <= 6) {
    const DualVector& Z = *s.rep.Z_star;
    double zmax = 1.0, xmax = 0.0;
    for (double z : Z.flat()) zmax = std::max(zmax, z);
    for (double x : inst.X.flat()) xmax = std::max(xmax, std::abs(x));
    const double box = 2.0 * (1.0 + xmax);
    const double w_max = 2.0 * zmax;
    const PenaltyEval formula = alpha(Z, *inst.aggregation, *inst.acceptance, inst.space, false,
                                      solver_options(inst));
    const oracle::AlphaGrid ag =
        oracle::alpha_raw_grid(Z, *inst.aggregation, *inst.acceptance, inst.space, grid_points, box, w_max);
    // One x-step moves the inner value by at most h (Z + W Lipschitz(Lambda)) per coordinate.
    double lip = 0.0;
    const double h = 2.0 * box / double(grid_points - 1 + grid_points % 2);
    for (std::size_t w = 0; w < n; ++w)
      for (std::size_t i = 0; i < d; ++i) lip += inst.space.prob(w) * (Z(i, w) + w_max * 1.0);
    const double resolution = h * lip;
    const bool both_neg_inf = ag.unbounded && formula.value == kNegInf;
    const bool ok = both_neg_inf || (!ag.unbounded && std::abs(ag.value - formula.value) <= 2.0 * resolution);
    o["alpha_raw_grid"] = {{"value", extended(ag.value)},
                           {"unbounded", ag.unbounded},
                           {"formula", extended(formula.value)},
                           {"resolution", resolution},
                           {"agrees", ok}};
    all_ok = all_ok && ok;

    const std::size_t sp = saddle_points(grid_points, d, n, *inst.acceptance);
    const oracle::SaddleValues sv =
        oracle::saddle_grid(Z, *inst.aggregation, *inst.acceptance, inst.space, sp, box);
    const bool equality_case = inst.aggregation->positively_homogeneous() && inst.acceptance->is_cone();
    o["saddle_grid"] = {{"points", sp},
                        {"inf_sup", extended(sv.inf_sup)},
                        {"sup_inf", extended(sv.sup_inf)},
                        {"inf_sup_unbounded", sv.inf_sup_unbounded},
                        {"sup_inf_unbounded", sv.sup_inf_unbounded},
                        {"discrepancy", extended(sv.discrepancy())},
                        {"resolution", sv.resolution},
                        {"asserted", equality_case}};
    if (equality_case) all_ok = all_ok && sv.discrepancy() <= sv.resolution;
  }
  o["all_agree"] = all_ok;
  out.report["oracle"] = o;
  if (!all_ok && out.exit_code == kExitOk) out.exit_code = kExitPropertyFailure;
  if (opt.timings) out.report["timings"] = {{"total_seconds", clock.seconds()}};
  return out;
}

}  // namespace sysrisk
