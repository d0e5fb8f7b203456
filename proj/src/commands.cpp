#include "finsler/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <sstream>

#include "finsler/bregman.hpp"
#include "finsler/calibration.hpp"
#include "finsler/energy.hpp"
#include "finsler/errors.hpp"
#include "finsler/morrey.hpp"
#include "finsler/random.hpp"
#include "finsler/variational.hpp"

namespace finsler {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Fnv {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001B3ull;
    }
  }
  void str(const std::string& s) { bytes(s.data(), s.size()); }
  void num(double v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void values(const std::vector<double>& v) { bytes(v.data(), v.size() * sizeof(double)); }
  void marks(const std::vector<std::uint8_t>& v) { bytes(v.data(), v.size()); }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ull;
};

Fnv problem_fnv(const std::string& what, const GridDomain& g, const NormFamily& fam,
                const ExponentPair& ep, const GridFunction& V) {
  Fnv f;
  f.str(what);
  f.u64(g.mask_hash());
  f.num(g.h());
  f.u64(fam.fingerprint());
  f.num(ep.p());
  f.num(ep.s());
  f.values(V.values());
  return f;
}

std::string history_csv(const SolveResult& r) {
  std::ostringstream out;
  out << "iteration,value\n";
  for (std::size_t i = 0; i < r.history.size(); ++i) out << i << ',' << fmt(r.history[i]) << '\n';
  return out.str();
}

void add_minimizer(CommandOutput& out, const std::string& stem, const SolveResult& r) {
  if (r.minimizer.size() == 0) return;
  out.files.push_back({stem + "_minimizer.csv", to_csv(r.minimizer)});
  out.files.push_back({stem + "_minimizer.header.json", header_json(r.minimizer.grid())});
  out.files.push_back({stem + "_history.csv", history_csv(r)});
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

CommandOutput verify_norms(const Json& cfg) {
  CommandOutput out;
  const auto fam = config_family(cfg);
  const auto ep = config_exponents(cfg);
  const auto N = cfg.at("sampler").at("N").get<std::size_t>();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const double eps = cfg.at("sampler").at("eps").get<double>();
  const auto rep = verify_structure(fam, ep, N, seed);
  const auto sc = structure_constants(fam, ep);
  const double delta = modulus_of_convexity_estimate(fam, ep, eps, N, seed);
  Json j = {{"command", "verify-norms"},
            {"n", fam.dim()},
            {"p", ep.p()},
            {"s", ep.s()},
            {"seed", seed},
            {"points", rep.points},
            {"structure", {{"kappa", sc.kappa}, {"nu", sc.nu}, {"alpha", sc.alpha}, {"beta", sc.beta}}},
            {"euler_err", rep.euler_err},
            {"homogeneity_err", rep.homogeneity_err},
            {"monotone_min", rep.monotone_min},
            {"monotone_failures", rep.monotone_failures},
            {"fd_err", rep.fd_err},
            {"bound_failures", rep.bound_failures},
            {"modulus_of_convexity", {{"eps", eps}, {"delta", delta}}},
            {"passed", rep.passed}};
  out.files.push_back({"verify-norms.json", dump(j)});
  out.lines.push_back("structure checks on " + std::to_string(N) + " points: " +
                      (rep.passed ? "pass" : "FAIL"));
  out.lines.push_back("modulus of convexity estimate at eps=" + fmt(eps) + ": " + fmt(delta));
  out.status = rep.passed ? kExitOk : kExitAssertion;
  return out;
}

CommandOutput verify_bregman(const Json& cfg) {
  CommandOutput out;
  const auto fam = config_family(cfg);
  const auto ep = config_exponents(cfg);
  const auto sc = config_sampler(cfg);
  const auto N = cfg.at("sampler").at("N").get<std::size_t>();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const double cap_factor = cfg.at("sampler").at("cap_factor").get<double>();
  const std::string which = cfg.at("sampler").at("lemma").get<std::string>();
  const std::size_t n = fam.dim();

  std::vector<LemmaId> lemmas;
  if (which == "all") {
    lemmas = applicable_lemmas(fam, ep);
  } else {
    lemmas.push_back(lemma_from_string(which));
  }
  if (lemmas.empty()) throw ConfigurationError("no two-sided estimate applies to this family and (p, s)");

  std::optional<CalibrationTable> cal;
  try {
    cal = config_calibration(cfg);
  } catch (const ConfigurationError&) {
    if (!cfg.at("calibration").at("path").get<std::string>().empty()) throw;
  }

  std::ostringstream csv, vcsv;
  csv << "lemma,p,s,n,N,seed,c_hat,C_hat,calibrated_C,cap,lower_asserted,upper_asserted,violations\n";
  vcsv << "lemma,reason,ratio,xi,eta\n";
  std::size_t total = 0;
  Json rows = Json::array();
  for (std::size_t k = 0; k < lemmas.size(); ++k) {
    const LemmaId id = lemmas[k];
    SamplerConfig c = sc;
    double cal_C = std::numeric_limits<double>::quiet_NaN();
    if (asserts_upper(id) && cal) {
      const double s_key = id == LemmaId::Matrix ? 2.0 : ep.s();
      if (auto e = cal->find(to_string(id), ep.p(), s_key, n)) {
        cal_C = e->C_hat;
        c.upper_cap = cap_factor * cal_C;
      }
    }
    const auto rep = estimate_equivalence_constants(id, fam, ep, c, N, derive_seed(seed, k));
    total += rep.violation_count;
    csv << to_string(id) << ',' << fmt(ep.p()) << ',' << fmt(ep.s()) << ',' << n << ',' << N << ','
        << rep.seed << ',' << fmt(rep.c_hat) << ',' << fmt(rep.C_hat) << ',' << fmt(cal_C) << ','
        << fmt(c.upper_cap) << ',' << asserts_lower(id) << ',' << asserts_upper(id) << ','
        << rep.violation_count << '\n';
    for (const auto& v : rep.violations) {
      vcsv << to_string(id) << ',' << v.reason << ',' << fmt(v.ratio) << ",\"";
      for (std::size_t i = 0; i < v.xi.size(); ++i) vcsv << (i ? " " : "") << fmt(v.xi[i]);
      vcsv << "\",\"";
      for (std::size_t i = 0; i < v.eta.size(); ++i) vcsv << (i ? " " : "") << fmt(v.eta[i]);
      vcsv << "\"\n";
    }
    rows.push_back(Json{{"lemma", to_string(id)}, {"c_hat", rep.c_hat}, {"C_hat", rep.C_hat},
                    {"cap", c.upper_cap}, {"violations", rep.violation_count}});
    out.lines.push_back(to_string(id) + ": c_hat=" + fmt(rep.c_hat) + " C_hat=" + fmt(rep.C_hat) +
                        " violations=" + std::to_string(rep.violation_count));
  }
  out.files.push_back({"estimate_report.csv", csv.str()});
  out.files.push_back({"violations.csv", vcsv.str()});
  out.files.push_back({"verify-bregman.json",
                       dump({{"command", "verify-bregman"}, {"p", ep.p()}, {"s", ep.s()}, {"n", n},
                             {"N", N}, {"seed", seed}, {"lemmas", rows}, {"violations", total}})});
  out.status = total == 0 ? kExitOk : kExitAssertion;
  return out;
}

CommandOutput calibrate(const Json& cfg) {
  CommandOutput out;
  const Json& c = cfg.at("calibration");
  const auto N = c.at("N").get<std::size_t>();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  auto sc = config_sampler(cfg);
  CalibrationTable table;
  std::ostringstream csv;
  csv << "lemma,p,s,n,N,seed,c_hat,C_hat\n";
  std::uint64_t run = 0;
  auto record = [&](LemmaId id, const NormFamily& fam, const ExponentPair& ep, std::size_t n) {
    const auto rep = estimate_equivalence_constants(id, fam, ep, sc, N, derive_seed(seed, run++));
    table.put(rep);
    csv << to_string(id) << ',' << fmt(ep.p()) << ',' << fmt(ep.s()) << ',' << n << ',' << N << ','
        << rep.seed << ',' << fmt(rep.c_hat) << ',' << fmt(rep.C_hat) << '\n';
  };
  const auto ps = c.at("p_values").get<std::vector<double>>();
  const auto ss = c.at("s_values").get<std::vector<double>>();
  for (std::size_t n : c.at("n_values").get<std::vector<std::size_t>>()) {
    for (double p : ps) {
      for (double s : ss) {
        const auto fam = NormFamily::weighted_s(s, std::vector<double>(n, 1.0));
        const ExponentPair ep(p, s);
        for (LemmaId id : applicable_lemmas(fam, ep)) record(id, fam, ep, n);
      }
      record(LemmaId::Matrix, NormFamily::matrix(Eigen::MatrixXd::Identity(n, n)), ExponentPair(p, 2.0), n);
    }
  }
  const std::string path = c.at("path").get<std::string>();
  if (path.empty()) {
    out.files.push_back({"calibration.json", table.dump()});
  } else {
    out.external.push_back({path, table.dump()});
  }
  out.files.push_back({"calibration_summary.csv", csv.str()});
  out.lines.push_back("calibrated " + std::to_string(table.size()) + " entries with N=" + std::to_string(N));
  return out;
}

// Half-sine product over the mask's bounding box, zero on the boundary layer.
GridFunction bump(const GridPtr& g) {
  std::array<double, 3> lo{}, hi{};
  double x[3];
  for (std::size_t a = 0; a < g->dim(); ++a) {
    lo[a] = std::numeric_limits<double>::infinity();
    hi[a] = -lo[a];
  }
  for (std::size_t idx : g->mask_nodes()) {
    g->coords(idx, x);
    for (std::size_t a = 0; a < g->dim(); ++a) {
      lo[a] = std::min(lo[a], x[a]);
      hi[a] = std::max(hi[a], x[a]);
    }
  }
  const auto layer = g->boundary_layer();
  GridFunction psi(g, 0.0);
  for (std::size_t idx : g->mask_nodes()) {
    if (layer[idx]) continue;
    g->coords(idx, x);
    double v = 1.0;
    for (std::size_t a = 0; a < g->dim(); ++a) {
      v *= std::sin(std::numbers::pi * (x[a] - lo[a]) / (hi[a] - lo[a]));
    }
    psi[idx] = std::max(v, 0.0);
  }
  return psi;
}

CommandOutput energy(const Json& cfg) {
  CommandOutput out;
  const auto fam = config_family(cfg);
  const auto ep = config_exponents(cfg);
  const auto g = config_grid(cfg);
  const auto V = config_potential(cfg, g);
  const Json& e = cfg.at("energy");
  const double c0 = e.at("u_offset").get<double>();
  auto slope = e.at("u_slope").get<std::vector<double>>();
  if (slope.empty()) slope.assign(g->dim(), 0.0);
  if (slope.size() != g->dim()) throw ConfigurationError("energy.u_slope needs n entries");
  const auto u = GridFunction::from_function(g, [&](const double* x) {
    double v = c0;
    for (std::size_t a = 0; a < slope.size(); ++a) v += slope[a] * x[a];
    return v;
  });
  const auto psi = bump(g);
  GridFunction phi(g, 0.0);
  for (std::size_t idx : g->mask_nodes()) phi[idx] = u[idx] * psi[idx];
  const double Q = energy_Q(phi, fam, ep, V);
  Json j = {{"command", "energy"}, {"Q", Q}, {"h", g->h()}, {"p", ep.p()}, {"s", ep.s()},
            {"mask_hash", g->mask_hash_hex()}};
  if (fam.kind() == NormKind::WeightedS && V.values() == std::vector<double>(g->size(), 0.0)) {
    const auto br = simplified_energy_bracket(u, psi, fam, ep, config_calibration(cfg));
    j["bracket"] = {{"lower", br.lower},         {"upper", br.upper},
                    {"inside", br.inside},       {"regime", br.regime},
                    {"omega1_nodes", br.omega1_nodes}, {"omega2_nodes", br.omega2_nodes},
                    {"dropped_nodes", br.dropped_nodes}, {"drop_threshold", br.drop_threshold}};
    out.lines.push_back("bracket [" + fmt(br.lower) + ", " + fmt(br.upper) + "] " +
                        (br.inside ? "contains" : "MISSES") + " Q");
    if (!br.inside) out.status = kExitAssertion;
  }
  out.lines.insert(out.lines.begin(), "Q[u psi] = " + fmt(Q));
  out.files.push_back({"energy.json", dump(j)});
  if (e.at("write_field").get<bool>()) {
    out.files.push_back({"energy_field.csv", to_csv(phi)});
    out.files.push_back({"energy_field.header.json", header_json(*g)});
  }
  return out;
}

CommandOutput morrey(const Json& cfg) {
  CommandOutput out;
  const auto spec = config_morrey(cfg);
  const auto g = config_grid(cfg);
  const std::size_t n = g->dim();
  const Json& m = cfg.at("morrey");
  const double alpha = m.contains("alpha") ? m.at("alpha").get<double>() : static_cast<double>(n) / spec.q;
  const auto c = domain_center(cfg);
  const double h = g->h();
  // Singularity at a cell center, so node values stay finite.
  const auto f = GridFunction::from_function(g, [&](const double* x) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < n; ++a) r2 += (x[a] - c[a] - 0.5 * h) * (x[a] - c[a] - 0.5 * h);
    return std::pow(r2, -0.5 * alpha);
  });
  std::ostringstream csv;
  csv << "level,center_stride,steps_per_octave,centers,radii,value,best_radius\n";
  Json levels = Json::array();
  const auto L = m.at("levels").get<std::size_t>();
  double prev = 0.0, change = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    const auto lat = MorreyLattice::refined(l);
    const auto r = morrey_norm(f, spec, lat);
    csv << l << ',' << lat.center_stride << ',' << lat.steps_per_octave << ',' << r.centers << ','
        << r.radii << ',' << fmt(r.value) << ',' << fmt(r.best_radius) << '\n';
    levels.push_back({{"level", l}, {"value", r.value}, {"best_radius", r.best_radius}});
    if (l > 0) change = prev > 0.0 ? std::abs(r.value - prev) / prev : 0.0;
    prev = r.value;
    out.lines.push_back("level " + std::to_string(l) + ": " + fmt(r.value));
  }
  out.files.push_back({"morrey_levels.csv", csv.str()});
  out.files.push_back({"morrey.json", dump({{"command", "morrey"}, {"p", spec.p}, {"q", spec.q},
                                            {"variant", to_string(spec.variant)}, {"alpha", alpha},
                                            {"h", h}, {"levels", levels},
                                            {"final_rel_change", change}})});
  return out;
}

HardyProblem hardy_problem(const Json& cfg) {
  const auto g = config_grid(cfg);
  return HardyProblem{g, config_family(cfg), config_exponents(cfg), config_potential(cfg, g),
                      config_weight(cfg, g)};
}

std::string hardy_hash(const HardyProblem& prob) {
  Fnv f = problem_fnv("hardy", *prob.grid, prob.fam, prob.ep, prob.V);
  f.values(prob.g.values());
  return f.hex();
}

CommandOutput hardy(const Json& cfg) {
  CommandOutput out;
  const auto prob = hardy_problem(cfg);
  const auto sc = config_solver(cfg);
  const auto r = hardy_constant(prob, sc);
  out.files.push_back({"hardy.json", dump(solve_result_json(r, hardy_hash(prob), sc.seed,
                                                           prob.grid->h(), prob.ep))});
  add_minimizer(out, "hardy", r);
  out.lines.push_back("S_g = " + fmt(r.value) + (r.converged ? "" : " (not converged)"));
  return out;
}

CommandOutput capacity_cmd(const Json& cfg) {
  CommandOutput out;
  const auto g = config_grid(cfg);
  const auto compacts = config_compacts(cfg, *g);
  CapacityProblem prob{g, config_family(cfg), config_exponents(cfg), config_potential(cfg, g),
                       compacts.front(), config_obstacle(cfg, g)};
  const auto sc = config_solver(cfg);
  const auto r = capacity(prob, sc);
  Fnv f = problem_fnv("capacity", *g, prob.fam, prob.ep, prob.V);
  f.marks(prob.K);
  f.values(prob.u.values());
  out.files.push_back({"capacity.json", dump(solve_result_json(r, f.hex(), sc.seed, g->h(), prob.ep))});
  add_minimizer(out, "capacity", r);
  out.lines.push_back("cap(K, u) = " + fmt(r.value) + (r.converged ? "" : " (not converged)"));
  return out;
}

CommandOutput mazya(const Json& cfg) {
  CommandOutput out;
  const auto prob = hardy_problem(cfg);
  const auto u = config_obstacle(cfg, prob.grid);
  const auto compacts = config_compacts(cfg, *prob.grid);
  const auto sc = config_solver(cfg);
  const double C_cal = mazya_constant(config_calibration(cfg), prob.ep, prob.grid->dim());
  const auto r = mazya_ratio(prob, u, compacts, sc, C_cal);
  std::ostringstream csv;
  csv << "compact,nodes,mass,capacity,ratio,skipped\n";
  for (const auto& row : r.rows) {
    csv << row.index << ',' << row.nodes << ',' << fmt(row.mass) << ',' << fmt(row.capacity) << ','
        << fmt(row.ratio) << ',' << row.skipped << '\n';
  }
  out.files.push_back({"mazya_table.csv", csv.str()});
  out.files.push_back({"mazya.json",
                       dump({{"command", "mazya"}, {"problem_hash", hardy_hash(prob)},
                             {"norm_u", r.norm_u}, {"S_g", r.S_g}, {"hardy_norm", r.hardy_norm},
                             {"C_cal", r.C_cal}, {"slack", r.slack}, {"upper_ok", r.upper_ok},
                             {"lower_ok", r.lower_ok}, {"seed", sc.seed}, {"h", prob.grid->h()},
                             {"p", prob.ep.p()}, {"s", prob.ep.s()}})});
  out.lines.push_back("||g||_u = " + fmt(r.norm_u) + ", 1/S_g = " + fmt(r.hardy_norm) +
                      ", C_cal = " + fmt(C_cal));
  out.status = r.upper_ok && r.lower_ok ? kExitOk : kExitAssertion;
  return out;
}

CommandOutput tail(const Json& cfg) {
  CommandOutput out;
  const auto prob = hardy_problem(cfg);
  const auto sc = config_solver(cfg);
  const auto ex = config_exhaustion(cfg, *prob.grid);
  const auto rs = hardy_tail_constant(prob, ex, sc);
  const auto radii = cfg.at("exhaustion").at("radii").get<std::vector<double>>();
  std::ostringstream csv;
  csv << "index,radius,value,infinite,converged,iterations\n";
  Json rows = Json::array();
  for (std::size_t i = 0; i < rs.size(); ++i) {
    csv << i << ',' << fmt(radii[i]) << ',' << fmt(rs[i].value) << ',' << rs[i].infinite << ','
        << rs[i].converged << ',' << rs[i].iterations << '\n';
    rows.push_back({{"radius", radii[i]}, {"value", rs[i].infinite ? Json("inf") : Json(rs[i].value)},
                    {"infinite", rs[i].infinite}, {"converged", rs[i].converged}});
    out.lines.push_back("collar " + std::to_string(i) + ": " +
                        (rs[i].infinite ? std::string("+inf") : fmt(rs[i].value)));
  }
  out.files.push_back({"tail.csv", csv.str()});
  out.files.push_back({"tail.json", dump({{"command", "tail"}, {"problem_hash", hardy_hash(prob)},
                                          {"seed", sc.seed}, {"h", prob.grid->h()},
                                          {"p", prob.ep.p()}, {"s", prob.ep.s()}, {"collars", rows}})});
  return out;
}

CommandOutput attainment(const Json& cfg) {
  CommandOutput out;
  const auto prob = hardy_problem(cfg);
  const auto sc = config_solver(cfg);
  const auto rep = attainment_check(prob, sc);
  Json j = solve_result_json(rep.hardy, hardy_hash(prob), sc.seed, prob.grid->h(), prob.ep);
  j["command"] = "attainment";
  j["min_value"] = rep.min_value;
  j["max_value"] = rep.max_value;
  j["positive_fraction"] = rep.positive_fraction;
  j["sign_quantile"] = rep.sign_quantile;
  j["sign_definite"] = rep.sign_definite;
  j["sign_test"] = "quantile criterion on mask nodes (discrete reading)";
  j["residual_abs"] = rep.residual_abs;
  j["residual_rel"] = rep.residual_rel;
  j["residual_ok"] = rep.residual_ok;
  j["rayleigh_gap"] = rep.rayleigh_gap;
  out.files.push_back({"attainment.json", dump(j)});
  add_minimizer(out, "attainment", rep.hardy);
  out.lines.push_back("S_g = " + fmt(rep.hardy.value) + ", sign definite: " +
                      (rep.sign_definite ? "yes" : "no") + ", residual " + fmt(rep.residual_rel));
  return out;
}

CommandOutput acceptance(const Json& cfg, const std::string& self_path) {
  CommandOutput out;
  AcceptanceContext ctx;
  ctx.seed = cfg.at("seed").get<std::uint64_t>();
  ctx.threads = cfg.at("threads").get<unsigned>();
  ctx.calibration = config_calibration(cfg);
  ctx.cli_path = self_path;
  ctx.work_dir = cfg.at("out").get<std::string>();
  auto ids = cfg.at("acceptance").at("criteria").get<std::vector<int>>();
  if (ids.empty()) ids = all_criteria();
  std::vector<CriterionResult> results;
  bool all = true;
  for (int id : ids) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = run_criterion(id, ctx);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = r.budget_seconds <= 0.0 || secs <= r.budget_seconds;
    const bool ok = r.passed && in_time;
    all = all && ok;
    char line[160];
    std::snprintf(line, sizeof line, "criterion %2d %-28s %s  (%.1f s, budget %.0f s)", id,
                  r.name.c_str(), ok ? "PASS" : "FAIL", secs, r.budget_seconds);
    out.lines.push_back(line);
    for (auto& f : r.files) out.files.push_back(std::move(f));
    r.files.clear();
    results.push_back(std::move(r));
  }
  out.files.push_back({"acceptance.json", acceptance_summary(results, ctx.seed)});
  out.status = all ? kExitOk : kExitAssertion;
  return out;
}

}  // namespace

Json solve_result_json(const SolveResult& r, const std::string& problem_hash, std::uint64_t seed,
                       double h, const ExponentPair& ep) {
  Json j;
  j["problem_hash"] = problem_hash;
  j["value"] = r.infinite ? Json("inf") : Json(r.value);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["seed"] = seed;
  j["h"] = h;
  j["p"] = ep.p();
  j["s"] = ep.s();
  j["stationarity"] = r.stationarity;
  j["infinite"] = r.infinite;
  j["supercritical"] = r.supercritical;
  j["best_restart"] = r.best_restart;
  return j;
}

CommandOutput run_command(const Json& cfg, const std::string& self_path) {
  const std::string cmd = cfg.at("command").get<std::string>();
  if (cmd == "verify-norms") return verify_norms(cfg);
  if (cmd == "verify-bregman") return verify_bregman(cfg);
  if (cmd == "calibrate") return calibrate(cfg);
  if (cmd == "energy") return energy(cfg);
  if (cmd == "morrey") return morrey(cfg);
  if (cmd == "hardy") return hardy(cfg);
  if (cmd == "capacity") return capacity_cmd(cfg);
  if (cmd == "mazya") return mazya(cfg);
  if (cmd == "tail") return tail(cfg);
  if (cmd == "attainment") return attainment(cfg);
  if (cmd == "acceptance") return acceptance(cfg, self_path);
  throw ConfigurationError("unknown command: " + cmd);
}

}  // namespace finsler
