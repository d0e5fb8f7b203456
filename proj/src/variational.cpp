#include "finsler/variational.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numbers>
#include <optional>

#include "finsler/errors.hpp"
#include "finsler/random.hpp"
#include "finsler/summation.hpp"

namespace finsler {

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != 0.0 && b[i] != 0.0) s += a[i] * b[i];
  }
  return s.value();
}

double max_abs(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Objective and gradient at a feasible point, plus the convergence measure.
struct Evaluation {
  double f = 0.0;
  Vec grad;
  double stationarity = 0.0;
  bool negative_energy = false;
};

struct SpgProblem {
  std::function<void(const Vec&, Evaluation&)> eval;
  std::function<void(Vec&)> project;
  // Optional f(x + s) - f(x) without cancellation, given f(x); used by the
  // line search.
  std::function<double(const Vec&, const Vec&, double)> delta;
};

struct SpgRun {
  Vec x;
  double f = 0.0;
  double stationarity = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool supercritical = false;
  std::vector<double> history;
};

// Spectral projected gradient: Barzilai-Borwein trial step, then monotone
// Armijo backtracking along the projection arc.
SpgRun spg(const SpgProblem& prob, Vec x, const SolverConfig& cfg) {
  SpgRun run;
  prob.project(x);
  Evaluation cur, trial;
  prob.eval(x, cur);
  if (cfg.keep_history) run.history.push_back(cur.f);
  if (cur.negative_energy) {
    run.x = std::move(x);
    run.f = cur.f;
    run.supercritical = true;
    return run;
  }

  const double gmax = max_abs(cur.grad);
  const double xmax = max_abs(x);
  Vec xt(x.size()), s(x.size()), y(x.size());
  if (gmax == 0.0) {
    run.converged = true;
    run.x = std::move(x);
    run.f = cur.f;
    return run;
  }

  // First step from a Barzilai-Borwein quotient along a short probe, so it
  // reflects curvature rather than the gradient size. Every scale here is
  // relative, which keeps the iteration equivariant under x -> t x.
  const double probe = (xmax > 0.0 ? 1e-3 * xmax : 1.0) / gmax;
  double a0 = probe;
  {
    for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] - probe * cur.grad[i];
    prob.project(xt);
    prob.eval(xt, trial);
    for (std::size_t i = 0; i < x.size(); ++i) {
      s[i] = xt[i] - x[i];
      y[i] = trial.grad[i] - cur.grad[i];
    }
    const double sy = dot(s, y);
    if (sy > 0.0) a0 = dot(s, s) / sy;
  }
  const double a_min = 1e-10 * a0, a_max = 1e10 * a0;
  const double stat_tol = cfg.stat_tol();
  double alpha = a0;
  // With an increment callback the history accumulates the accurate
  // decrements, so it cannot rise by round-off in the direct values.
  double tracked = cur.f;
  std::size_t streak = 0;
  bool stalled = false;

  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    bool accepted = false;
    double df = 0.0;
    double a = alpha;
    for (std::size_t bt = 0; bt <= cfg.max_backtracks; ++bt, a *= cfg.shrink) {
      for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] - a * cur.grad[i];
      prob.project(xt);
      for (std::size_t i = 0; i < x.size(); ++i) s[i] = xt[i] - x[i];
      const double gd = dot(cur.grad, s);
      prob.eval(xt, trial);
      df = prob.delta ? prob.delta(x, s, cur.f) : trial.f - cur.f;
      if (df <= cfg.armijo_c * gd) {
        accepted = true;
        break;
      }
      // Below round-off the sufficient decrease cannot be resolved: take a
      // step that does not increase the objective, else stop.
      if (!prob.delta && std::abs(gd) <= 8e-16 * std::abs(cur.f)) {
        accepted = df <= 0.0;
        stalled = !accepted;
        break;
      }
      if (prob.delta && std::abs(gd) <= 1e-300) {
        stalled = true;
        break;
      }
    }
    if (!accepted) break;

    for (std::size_t i = 0; i < x.size(); ++i) y[i] = trial.grad[i] - cur.grad[i];
    const double sy = dot(s, y);
    const double ss = dot(s, s);
    alpha = sy > 0.0 ? std::clamp(ss / sy, a_min, a_max) : a_max;

    const double change = std::abs(df) / std::max(std::abs(trial.f), 1e-300);
    x.swap(xt);
    std::swap(cur, trial);
    ++run.iterations;
    tracked = prob.delta ? tracked + df : cur.f;
    if (cfg.keep_history) run.history.push_back(tracked);
    if (cur.negative_energy) {
      run.supercritical = true;
      break;
    }
    streak = change < cfg.tol ? streak + 1 : 0;
    if (streak >= cfg.patience && cur.stationarity <= stat_tol) {
      run.converged = true;
      break;
    }
    if (ss == 0.0) break;
  }
  if (!run.converged && !run.supercritical) {
    // A stall at round-off has no objective change left to measure.
    run.converged = (streak >= cfg.patience || stalled) && cur.stationarity <= stat_tol;
  }
  run.x = std::move(x);
  run.f = cur.f;
  run.stationarity = cur.stationarity;
  return run;
}

// Product of half-sine profiles over the mask's bounding box, widened by
// one node so that every mask node gets a positive value.
constexpr std::size_t kCoarseStartNodes = 20000;

Vec half_sine_bump(const GridDomain& g) {
  std::array<double, 3> lo{}, hi{};
  for (std::size_t a = 0; a < g.dim(); ++a) {
    lo[a] = std::numeric_limits<double>::infinity();
    hi[a] = -std::numeric_limits<double>::infinity();
  }
  double x[3];
  for (std::size_t idx : g.mask_nodes()) {
    g.coords(idx, x);
    for (std::size_t a = 0; a < g.dim(); ++a) {
      lo[a] = std::min(lo[a], x[a] - g.h());
      hi[a] = std::max(hi[a], x[a] + g.h());
    }
  }
  Vec out(g.size(), 0.0);
  for (std::size_t idx : g.mask_nodes()) {
    g.coords(idx, x);
    double v = 1.0;
    for (std::size_t a = 0; a < g.dim(); ++a) {
      v *= std::sin(std::numbers::pi * (x[a] - lo[a]) / (hi[a] - lo[a]));
    }
    out[idx] = v;
  }
  return out;
}

// BFS distance (in steps) from the marked nodes, through mask nodes.
std::vector<std::size_t> bfs_distance(const GridDomain& g, const std::vector<std::uint8_t>& seeds,
                                      bool through_all) {
  const std::size_t inf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> d(g.size(), inf);
  std::deque<std::size_t> q;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    if (seeds[idx]) {
      d[idx] = 0;
      q.push_back(idx);
    }
  }
  while (!q.empty()) {
    const std::size_t c = q.front();
    q.pop_front();
    for (std::size_t a = 0; a < g.dim(); ++a) {
      for (int dir : {-1, 1}) {
        const std::size_t nb = g.neighbor(c, a, dir);
        if (nb == kNoNode || d[nb] != inf) continue;
        if (!through_all && !g.in_mask(nb)) continue;
        d[nb] = d[c] + 1;
        q.push_back(nb);
      }
    }
  }
  return d;
}

void perturb(Vec& x, const GridDomain& g, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t idx : g.mask_nodes()) x[idx] *= 0.5 + rng.uniform();
}

// Every other node of a lattice with an odd node count per axis. Empty when
// the lattice cannot be halved or the coarse mask is unusable.
std::optional<GridDomain> coarsen(const GridDomain& g, std::size_t min_mask) {
  std::array<std::size_t, 3> cn{1, 1, 1};
  for (std::size_t a = 0; a < g.dim(); ++a) {
    if (g.nodes(a) % 2 == 0 || g.nodes(a) < 5) return std::nullopt;
    cn[a] = (g.nodes(a) - 1) / 2 + 1;
  }
  std::vector<std::uint8_t> mask(cn[0] * cn[1] * cn[2], 0);
  std::size_t count = 0;
  for (std::size_t k = 0; k < cn[2]; ++k) {
    for (std::size_t j = 0; j < cn[1]; ++j) {
      for (std::size_t i = 0; i < cn[0]; ++i) {
        const std::size_t f = g.index(2 * i, g.dim() > 1 ? 2 * j : 0, g.dim() > 2 ? 2 * k : 0);
        const bool in = g.in_mask(f);
        mask[i + cn[0] * (j + cn[1] * k)] = in;
        count += in;
      }
    }
  }
  if (count < min_mask) return std::nullopt;
  try {
    return GridDomain(g.dim(), cn, 2.0 * g.h(), {g.lower(0), g.lower(1), g.lower(2)},
                      std::move(mask));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// Restriction by injection.
Vec restrict_to(const GridDomain& fine, const GridDomain& coarse, const Vec& f) {
  Vec out(coarse.size(), 0.0);
  for (std::size_t c = 0; c < coarse.size(); ++c) {
    const auto ijk = coarse.unravel(c);
    out[c] = f[fine.index(2 * ijk[0], 2 * ijk[1], 2 * ijk[2])];
  }
  return out;
}

// Multilinear interpolation onto the fine mask; coarse values off the
// coarse mask read as zero.
Vec prolong(const GridDomain& coarse, const GridDomain& fine, const Vec& c) {
  Vec out(fine.size(), 0.0);
  for (std::size_t idx : fine.mask_nodes()) {
    const auto ijk = fine.unravel(idx);
    double acc = 0.0;
    std::size_t terms = 0;
    const std::size_t corners = std::size_t{1} << fine.dim();
    for (std::size_t m = 0; m < corners; ++m) {
      std::array<std::size_t, 3> q{0, 0, 0};
      bool dup = false;
      for (std::size_t a = 0; a < fine.dim(); ++a) {
        const bool up = (m >> a) & 1u;
        if (ijk[a] % 2 == 0 && up) dup = true;
        q[a] = ijk[a] / 2 + (up ? 1 : 0);
      }
      if (dup) continue;
      const std::size_t ci = coarse.index(q[0], q[1], q[2]);
      if (coarse.in_mask(ci)) acc += c[ci];
      ++terms;
    }
    out[idx] = acc / static_cast<double>(terms);
  }
  return out;
}

void check_problem_grid(const GridPtr& grid, const NormFamily& fam, const GridFunction& V) {
  if (!grid) throw ArgumentError("problem needs a grid");
  if (fam.dim() != grid->dim()) {
    throw ArgumentError("norm family dimension does not match the grid dimension");
  }
  if (V.size() != grid->size()) throw ArgumentError("potential V does not match the grid");
  if (!V.all_finite()) throw SetupError("potential V has non-finite values");
}

}  // namespace

GridFunction rebind(const GridFunction& f, GridPtr grid) {
  if (f.size() != grid->size()) throw ArgumentError("cannot rebind: lattice shapes differ");
  return GridFunction(std::move(grid), f.values());
}

// ---------------------------------------------------------------------------

SolveResult hardy_constant(const HardyProblem& prob, const SolverConfig& cfg) {
  check_problem_grid(prob.grid, prob.fam, prob.V);
  const GridDomain& g = *prob.grid;
  if (prob.g.size() != g.size()) throw ArgumentError("Hardy weight g does not match the grid");
  if (!(cfg.tol > 0.0) || cfg.max_iter < 1) throw ConfigurationError("solver needs tol > 0, max_iter >= 1");
  bool any = false, on_mask = false;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    if (!std::isfinite(prob.g[idx])) throw SetupError("Hardy weight g has non-finite values");
    if (prob.g[idx] != 0.0) {
      any = true;
      on_mask = on_mask || g.in_mask(idx);
    }
  }
  if (!any) throw SetupError("Hardy weight g vanishes identically");

  SolveResult res;
  res.minimizer = GridFunction(prob.grid);
  if (!on_mask) {
    res.value = std::numeric_limits<double>::infinity();
    res.infinite = true;
    res.converged = true;
    return res;
  }

  EnergyFunctional Q(prob.grid, prob.fam, prob.ep, rebind(prob.V, prob.grid));
  const Vec& w = prob.g.values();
  const double p = prob.ep.p();

  Vec gq, gg;
  SpgProblem sp;
  sp.project = [&](Vec& x) {
    const double G = Q.weighted_mass(w, x);
    if (G > 0.0) {
      const double sc = 1.0 / std::pow(G, 1.0 / p);
      for (double& v : x) v *= sc;
    }
  };
  sp.eval = [&](const Vec& x, Evaluation& ev) {
    const double q = Q.value_and_gradient(x, gq);
    const double G = Q.weighted_mass_and_gradient(w, x, gg);
    const double R = q / G;
    ev.f = R;
    ev.grad.resize(x.size());
    double rmax = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      ev.grad[i] = (gq[i] - R * gg[i]) / G;
      rmax = std::max(rmax, std::abs(gq[i] - R * gg[i]));
    }
    const double qmax = max_abs(gq);
    ev.stationarity = qmax > 0.0 ? rmax / qmax : 0.0;
    ev.negative_energy = q < 0.0;
  };
  // R(x + s) - R(x) = (dQ - R dG) / (G + dG), free of the cancellation in
  // the difference of two quotients near the minimum.
  sp.delta = [&](const Vec& x, const Vec& step, double R) {
    const double dQ = Q.value_increment(x, step);
    const double dG = Q.weighted_mass_increment(w, x, step);
    return (dQ - R * dG) / (Q.weighted_mass(w, x) + dG);
  };

  Vec start = half_sine_bump(g);
  if (Q.weighted_mass(w, start) <= 0.0) {
    for (std::size_t idx : g.mask_nodes()) start[idx] = 1.0;
  }
  if (Q.weighted_mass(w, start) <= 0.0) {
    res.value = std::numeric_limits<double>::infinity();
    res.infinite = true;
    res.converged = true;
    return res;
  }

  if (g.mask_count() >= kCoarseStartNodes) {
    if (auto cg = coarsen(g, 1)) {
      auto cgrid = std::make_shared<const GridDomain>(std::move(*cg));
      HardyProblem hp{cgrid, prob.fam, prob.ep,
                      GridFunction(cgrid, restrict_to(g, *cgrid, prob.V.values())),
                      GridFunction(cgrid, restrict_to(g, *cgrid, w))};
      bool any_w = false;
      for (std::size_t c : cgrid->mask_nodes()) any_w = any_w || hp.g[c] != 0.0;
      if (any_w) {
        SolverConfig cc = cfg;
        cc.restarts = 1;
        cc.keep_history = false;
        const SolveResult coarse = hardy_constant(hp, cc);
        if (!coarse.supercritical && !coarse.infinite) {
          Vec x = prolong(*cgrid, g, coarse.minimizer.values());
          if (Q.weighted_mass(w, x) > 0.0) start = std::move(x);
        }
      }
    }
  }

  const std::size_t restarts = std::max<std::size_t>(cfg.restarts, 1);
  bool have = false;
  for (std::size_t r = 0; r < restarts; ++r) {
    Vec x0 = start;
    if (r > 0) perturb(x0, g, derive_seed(cfg.seed, r));
    SpgRun run = spg(sp, std::move(x0), cfg);
    if (run.supercritical) {
      res.value = run.f;
      res.supercritical = true;
      res.converged = false;
      res.iterations = run.iterations;
      res.minimizer = GridFunction(prob.grid, std::move(run.x));
      res.history = std::move(run.history);
      res.best_restart = r;
      return res;
    }
    if (!have || run.f < res.value) {
      have = true;
      res.value = run.f;
      res.converged = run.converged;
      res.iterations = run.iterations;
      res.stationarity = run.stationarity;
      res.minimizer = GridFunction(prob.grid, std::move(run.x));
      res.history = std::move(run.history);
      res.best_restart = r;
    }
  }
  // Global sign normalization: the minimizer is reported with positive mass.
  CompensatedSum total;
  for (std::size_t idx : g.mask_nodes()) total += res.minimizer[idx];
  if (total.value() < 0.0) {
    for (double& v : res.minimizer.values()) v = -v;
  }
  return res;
}

// ---------------------------------------------------------------------------

SolveResult capacity(const CapacityProblem& prob, const SolverConfig& cfg) {
  check_problem_grid(prob.grid, prob.fam, prob.V);
  const GridDomain& g = *prob.grid;
  if (prob.K.size() != g.size() || prob.u.size() != g.size()) {
    throw ArgumentError("compact K or obstacle u does not match the grid");
  }
  if (!(cfg.tol > 0.0) || cfg.max_iter < 1) throw ConfigurationError("solver needs tol > 0, max_iter >= 1");
  std::vector<std::size_t> knodes;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    if (!prob.K[idx]) continue;
    if (!g.in_mask(idx)) throw ArgumentError("compact K must lie inside the mask");
    knodes.push_back(idx);
  }
  for (std::size_t idx : g.mask_nodes()) {
    if (!(prob.u[idx] > 0.0) || !std::isfinite(prob.u[idx])) {
      throw ArgumentError("obstacle u must be positive and finite on the mask");
    }
  }

  SolveResult res;
  res.minimizer = GridFunction(prob.grid);
  if (knodes.empty()) {
    res.converged = true;
    return res;
  }

  EnergyFunctional Q(prob.grid, prob.fam, prob.ep, rebind(prob.V, prob.grid));
  const Vec& u = prob.u.values();
  std::vector<std::uint8_t> inK(g.size(), 0);
  for (std::size_t idx : knodes) inK[idx] = 1;

  SpgProblem sp;
  sp.project = [&](Vec& x) {
    for (std::size_t idx : knodes) x[idx] = std::max(x[idx], u[idx]);
  };
  sp.eval = [&](const Vec& x, Evaluation& ev) {
    ev.f = Q.value_and_gradient(x, ev.grad);
    double pg = 0.0;
    for (std::size_t idx : g.mask_nodes()) {
      double gi = ev.grad[idx];
      if (inK[idx] && x[idx] <= u[idx]) gi = std::min(gi, 0.0);
      pg = std::max(pg, std::abs(gi));
    }
    const double gmax = max_abs(ev.grad);
    ev.stationarity = gmax > 0.0 ? pg / gmax : 0.0;
    ev.negative_energy = ev.f < 0.0;
  };
  sp.delta = [&](const Vec& x, const Vec& step, double) { return Q.value_increment(x, step); };

  // u on K, decaying linearly in graph distance to zero off the mask.
  std::vector<std::uint8_t> outside(g.size(), 0);
  for (std::size_t idx = 0; idx < g.size(); ++idx) outside[idx] = g.in_mask(idx) ? 0 : 1;
  bool any_outside = false;
  for (auto o : outside) any_outside = any_outside || o;
  const auto dK = bfs_distance(g, inK, false);
  const auto dB = any_outside ? bfs_distance(g, outside, true)
                              : std::vector<std::size_t>(g.size(), 1);
  Vec start(g.size(), 0.0);
  for (std::size_t idx : g.mask_nodes()) {
    if (inK[idx]) {
      start[idx] = u[idx];
    } else if (dK[idx] != std::numeric_limits<std::size_t>::max()) {
      const double a = static_cast<double>(dK[idx]), b = static_cast<double>(dB[idx]);
      start[idx] = u[idx] * b / (a + b);
    }
  }

  // Large lattices start from the interpolated solution on every other node.
  if (g.mask_count() >= kCoarseStartNodes) {
    if (auto cg = coarsen(g, 1)) {
      auto cgrid = std::make_shared<const GridDomain>(std::move(*cg));
      const Vec Kf(prob.K.begin(), prob.K.end());
      const Vec Kc = restrict_to(g, *cgrid, Kf);
      CapacityProblem cp{cgrid, prob.fam, prob.ep,
                         GridFunction(cgrid, restrict_to(g, *cgrid, prob.V.values())),
                         std::vector<std::uint8_t>(Kc.size(), 0),
                         GridFunction(cgrid, restrict_to(g, *cgrid, u))};
      bool any_k = false;
      for (std::size_t c = 0; c < Kc.size(); ++c) {
        cp.K[c] = Kc[c] != 0.0;
        any_k = any_k || cp.K[c];
      }
      if (any_k) {
        SolverConfig cc = cfg;
        cc.restarts = 1;
        cc.keep_history = false;
        const SolveResult coarse = capacity(cp, cc);
        if (!coarse.supercritical) start = prolong(*cgrid, g, coarse.minimizer.values());
      }
    }
  }

  const std::size_t restarts = std::max<std::size_t>(cfg.restarts, 1);
  bool have = false;
  for (std::size_t r = 0; r < restarts; ++r) {
    Vec x0 = start;
    if (r > 0) perturb(x0, g, derive_seed(cfg.seed, r));
    SpgRun run = spg(sp, std::move(x0), cfg);
    if (run.supercritical) {
      res.value = run.f;
      res.supercritical = true;
      res.converged = false;
      res.iterations = run.iterations;
      res.minimizer = GridFunction(prob.grid, std::move(run.x));
      res.history = std::move(run.history);
      res.best_restart = r;
      return res;
    }
    if (!have || run.f < res.value) {
      have = true;
      res.value = run.f;
      res.converged = run.converged;
      res.iterations = run.iterations;
      res.stationarity = run.stationarity;
      res.minimizer = GridFunction(prob.grid, std::move(run.x));
      res.history = std::move(run.history);
      res.best_restart = r;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------

double mazya_constant(const CalibrationTable& cal, const ExponentPair& ep, std::size_t n) {
  const double p = ep.p();
  const char* lemma = p == ep.s() ? "pseudo" : "uniform";
  const auto& e = cal.at(lemma, p, ep.s(), n);
  return (std::pow(2.0, p) - 1.0) * std::pow(2.0, p) * e.C_hat / e.c_hat;
}

MazyaResult mazya_ratio(const HardyProblem& prob, const GridFunction& u,
                        const std::vector<std::vector<std::uint8_t>>& compacts,
                        const SolverConfig& cfg, double C_cal, double slack) {
  if (compacts.empty()) throw ArgumentError("mazya_ratio needs at least one compact set");
  const GridDomain& g = *prob.grid;
  if (u.size() != g.size()) throw ArgumentError("u does not match the grid");
  const double p = prob.ep.p();
  MazyaResult res;
  res.C_cal = C_cal;
  res.slack = slack;

  bool g_zero = true;
  for (std::size_t idx = 0; idx < g.size(); ++idx) g_zero = g_zero && prob.g[idx] == 0.0;

  for (std::size_t k = 0; k < compacts.size(); ++k) {
    MazyaRow row;
    row.index = k;
    const auto& K = compacts[k];
    if (K.size() != g.size()) throw ArgumentError("compact set does not match the grid");
    CompensatedSum mass;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      if (!K[idx]) continue;
      if (!g.in_mask(idx)) throw ArgumentError("compact set must lie inside the mask");
      ++row.nodes;
      mass += std::abs(prob.g[idx]) * std::pow(u[idx], p);
    }
    row.mass = mass.value() * g.cell_volume();
    if (row.nodes == 0) {
      row.skipped = true;
      res.rows.push_back(row);
      continue;
    }
    if (row.mass == 0.0) {
      // Zero mass gives a zero ratio whatever the capacity.
      res.rows.push_back(row);
      continue;
    }
    CapacityProblem cp{prob.grid, prob.fam, prob.ep, prob.V, K, rebind(u, prob.grid)};
    const SolveResult c = capacity(cp, cfg);
    row.capacity = c.value;
    if (!(c.value > 0.0)) {
      row.skipped = true;
    } else {
      row.ratio = row.mass / c.value;
      res.norm_u = std::max(res.norm_u, row.ratio);
    }
    res.rows.push_back(row);
  }

  if (g_zero) {
    res.S_g = std::numeric_limits<double>::infinity();
    res.hardy_norm = 0.0;
    res.hardy.infinite = true;
  } else {
    res.hardy = hardy_constant(prob, cfg);
    res.S_g = res.hardy.value;
    res.hardy_norm = res.hardy.infinite ? 0.0 : 1.0 / res.S_g;
  }
  res.upper_ok = res.norm_u <= (1.0 + slack) * res.hardy_norm;
  res.lower_ok = res.hardy_norm <= C_cal * res.norm_u;
  return res;
}

// ---------------------------------------------------------------------------

std::vector<SolveResult> hardy_tail_constant(
    const HardyProblem& prob, const std::vector<std::vector<std::uint8_t>>& exhaustion,
    const SolverConfig& cfg) {
  const GridDomain& g = *prob.grid;
  if (exhaustion.empty()) throw ArgumentError("exhaustion needs at least one set");
  std::vector<std::vector<std::uint8_t>> collars;
  for (std::size_t i = 0; i < exhaustion.size(); ++i) {
    const auto& w = exhaustion[i];
    if (w.size() != g.size()) throw ArgumentError("exhaustion set does not match the grid");
    std::vector<std::uint8_t> collar(g.size(), 0);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      if (w[idx] && !g.in_mask(idx)) throw ArgumentError("exhaustion set must lie in the mask");
      if (i > 0 && exhaustion[i - 1][idx] && !w[idx]) {
        throw ArgumentError("exhaustion sets must be nested increasing");
      }
      collar[idx] = g.in_mask(idx) && !w[idx] ? 1 : 0;
    }
    if (!g.connected(collar)) {
      throw ArgumentError("collar " + std::to_string(i) + " is empty or disconnected");
    }
    collars.push_back(std::move(collar));
  }
  std::vector<SolveResult> out;
  for (auto& collar : collars) {
    auto sub = std::make_shared<const GridDomain>(g.with_mask(collar));
    HardyProblem hp{sub, prob.fam, prob.ep, rebind(prob.V, sub), rebind(prob.g, sub)};
    out.push_back(hardy_constant(hp, cfg));
  }
  return out;
}

// ---------------------------------------------------------------------------

AttainmentReport attainment_check(const HardyProblem& prob, const SolverConfig& cfg) {
  return attainment_check(prob, cfg, hardy_constant(prob, cfg));
}

AttainmentReport attainment_check(const HardyProblem& prob, const SolverConfig& cfg,
                                  const SolveResult& solved) {
  const GridDomain& g = *prob.grid;
  AttainmentReport rep;
  rep.hardy = solved;
  if (solved.infinite || solved.supercritical) return rep;
  const Vec& phi = solved.minimizer.values();

  double mn = std::numeric_limits<double>::infinity(), mx = -mn;
  std::size_t pos = 0;
  for (std::size_t idx : g.mask_nodes()) {
    mn = std::min(mn, phi[idx]);
    mx = std::max(mx, phi[idx]);
    if (phi[idx] > 0.0) ++pos;
  }
  rep.min_value = mn;
  rep.max_value = mx;
  rep.positive_fraction = static_cast<double>(pos) / static_cast<double>(g.mask_count());
  rep.sign_definite = rep.positive_fraction >= rep.sign_quantile;

  // Residual of Q'_{V - S_g|g|} against every hat e_j, j in the mask.
  EnergyFunctional Q(prob.grid, prob.fam, prob.ep, rebind(prob.V, prob.grid));
  Vec gq, gg;
  const double q = Q.value_and_gradient(phi, gq);
  const double G = Q.weighted_mass_and_gradient(prob.g.values(), phi, gg);
  const double S = solved.value;
  const double p = prob.ep.p();
  double rmax = 0.0, qmax = 0.0;
  for (std::size_t idx : g.mask_nodes()) {
    rmax = std::max(rmax, std::abs(gq[idx] - S * gg[idx]) / p);
    qmax = std::max(qmax, std::abs(gq[idx]) / p);
  }
  rep.residual_abs = rmax;
  rep.residual_rel = qmax > 0.0 ? rmax / qmax : 0.0;
  rep.residual_ok = rep.residual_rel <= 10.0 * cfg.stat_tol();
  rep.rayleigh_gap = std::abs(q / G - S);
  return rep;
}

}  // namespace finsler
