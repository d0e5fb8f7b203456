#include "finsler/energy.hpp"

#include <cmath>

#include "finsler/bregman.hpp"
#include "finsler/errors.hpp"
#include "finsler/summation.hpp"

namespace finsler {

namespace {

inline double masked(const GridDomain& g, const std::vector<double>& f, std::size_t idx) {
  return (idx != kNoNode && g.in_mask(idx)) ? f[idx] : 0.0;
}

inline double pow_abs(double x, double p) {
  if (p == 2.0) return x * x;
  return x == 0.0 ? 0.0 : std::pow(std::abs(x), p);
}

// |x|^{p-2} x
inline double pow_signed(double x, double p) {
  if (p == 2.0) return x;
  if (x == 0.0) return 0.0;
  const double v = std::pow(std::abs(x), p - 1.0);
  return x < 0.0 ? -v : v;
}

void check_same_grid(const GridFunction& a, const GridFunction& b, const char* what) {
  if (a.grid_ptr() != b.grid_ptr() && a.size() != b.size()) {
    throw ArgumentError(std::string("grid mismatch for ") + what);
  }
  if (a.size() != b.size()) throw ArgumentError(std::string("grid mismatch for ") + what);
}

}  // namespace

std::vector<double> discrete_gradient(const GridFunction& u) {
  const GridDomain& g = u.grid();
  const std::size_t n = g.dim();
  const double inv_h = 1.0 / g.h();
  std::vector<double> out(g.size() * n, 0.0);
  const auto& vals = u.values();
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const double v = masked(g, vals, idx);
    for (std::size_t a = 0; a < n; ++a) {
      out[idx * n + a] = (masked(g, vals, g.neighbor(idx, a, 1)) - v) * inv_h;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

EnergyFunctional::EnergyFunctional(GridPtr grid, const NormFamily& fam, const ExponentPair& ep,
                                   const GridFunction& V)
    : grid_(std::move(grid)), ev_(fam, ep), V_(V.values()) {
  if (fam.dim() != grid_->dim()) {
    throw ArgumentError("norm family dimension does not match the grid dimension");
  }
  if (V_.size() != grid_->size()) throw ArgumentError("potential V does not match the grid");
  const GridDomain& g = *grid_;
  if (g.size() >= kNone) throw ArgumentError("grid too large");
  has_potential_ = false;
  for (std::size_t idx : g.mask_nodes()) {
    if (V_[idx] != 0.0) has_potential_ = true;
  }
  n_ = g.dim();
  inv_h_ = 1.0 / g.h();

  const auto& act = g.active_nodes();
  std::vector<std::uint32_t> pos(g.size(), kNone);
  act_node_.resize(act.size());
  act_self_.resize(act.size());
  act_fwd_.resize(act.size() * n_);
  for (std::size_t k = 0; k < act.size(); ++k) {
    const std::size_t idx = act[k];
    pos[idx] = static_cast<std::uint32_t>(k);
    act_node_[k] = static_cast<std::uint32_t>(idx);
    act_self_[k] = g.in_mask(idx) ? static_cast<std::uint32_t>(idx) : kNone;
    for (std::size_t a = 0; a < n_; ++a) {
      const std::size_t nb = g.neighbor(idx, a, 1);
      act_fwd_[k * n_ + a] =
          (nb != kNoNode && g.in_mask(nb)) ? static_cast<std::uint32_t>(nb) : kNone;
    }
  }
  const auto& msk = g.mask_nodes();
  mask_self_.resize(msk.size());
  mask_pred_.resize(msk.size() * n_);
  for (std::size_t m = 0; m < msk.size(); ++m) {
    mask_self_[m] = pos[msk[m]];
    for (std::size_t a = 0; a < n_; ++a) {
      const std::size_t prev = g.neighbor(msk[m], a, -1);
      mask_pred_[m * n_ + a] = prev == kNoNode ? kNone : pos[prev];
    }
  }
}

void EnergyFunctional::gradient_at(const std::vector<double>& phi, std::size_t k,
                                   double* out) const {
  const std::uint32_t self = act_self_[k];
  const double v = self == kNone ? 0.0 : phi[self];
  const std::uint32_t* fwd = &act_fwd_[k * n_];
  for (std::size_t a = 0; a < n_; ++a) {
    out[a] = ((fwd[a] == kNone ? 0.0 : phi[fwd[a]]) - v) * inv_h_;
  }
}

double EnergyFunctional::value(const std::vector<double>& phi) const {
  const GridDomain& g = *grid_;
  if (phi.size() != g.size()) throw ArgumentError("function does not match the grid");
  const double p = ev_.p();
  double d[3];
  CompensatedSum sum;
  for (std::size_t k = 0; k < act_node_.size(); ++k) {
    gradient_at(phi, k, d);
    sum += ev_.hp(d);
  }
  if (has_potential_) {
    for (std::size_t idx : g.mask_nodes()) sum += V_[idx] * pow_abs(phi[idx], p);
  }
  return sum.value() * g.cell_volume();
}

double EnergyFunctional::value_and_gradient(const std::vector<double>& phi,
                                            std::vector<double>& grad) const {
  const GridDomain& g = *grid_;
  if (phi.size() != g.size()) throw ArgumentError("function does not match the grid");
  const std::size_t n = n_;
  const double p = ev_.p();
  thread_local std::vector<double> flux;
  flux.resize(act_node_.size() * n);

  double d[3];
  CompensatedSum sum;
  for (std::size_t k = 0; k < act_node_.size(); ++k) {
    gradient_at(phi, k, d);
    sum += ev_.hp_and_flux(d, &flux[k * n]);
  }
  grad.assign(g.size(), 0.0);
  const double scale = p * g.cell_volume();
  const auto& msk = g.mask_nodes();
  for (std::size_t m = 0; m < msk.size(); ++m) {
    const std::size_t idx = msk[m];
    const double* own = &flux[mask_self_[m] * n];
    double acc = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      const std::uint32_t prev = mask_pred_[m * n + a];
      const double fp = prev == kNone ? 0.0 : flux[prev * n + a];
      acc += (fp - own[a]) * inv_h_;
    }
    if (has_potential_) {
      sum += V_[idx] * pow_abs(phi[idx], p);
      acc += V_[idx] * pow_signed(phi[idx], p);
    }
    grad[idx] = scale * acc;
  }
  return sum.value() * g.cell_volume();
}

double EnergyFunctional::value_increment(const std::vector<double>& phi,
                                         const std::vector<double>& step) const {
  const GridDomain& g = *grid_;
  if (phi.size() != g.size() || step.size() != g.size()) {
    throw ArgumentError("function does not match the grid");
  }
  const double p = ev_.p();
  double d[3], ds[3];
  CompensatedSum sum;
  for (std::size_t k = 0; k < act_node_.size(); ++k) {
    gradient_at(step, k, ds);
    bool zero = true;
    for (std::size_t a = 0; a < n_; ++a) zero = zero && ds[a] == 0.0;
    if (zero) continue;
    gradient_at(phi, k, d);
    sum += ev_.hp_increment(d, ds);
  }
  if (has_potential_) {
    for (std::size_t idx : g.mask_nodes()) {
      const double x = phi[idx], t = step[idx];
      if (t == 0.0 || V_[idx] == 0.0) continue;
      sum += V_[idx] * (p * pow_signed(x, p) * t + scalar_bregman_delta(p, x, t));
    }
  }
  return sum.value() * g.cell_volume();
}

double EnergyFunctional::residual(const std::vector<double>& u,
                                  const std::vector<double>& test) const {
  const GridDomain& g = *grid_;
  if (u.size() != g.size() || test.size() != g.size()) {
    throw ArgumentError("function does not match the grid");
  }
  const std::size_t n = g.dim();
  const double p = ev_.p();
  double du[3], dt[3], a[3];
  CompensatedSum sum;
  for (std::size_t j = 0; j < act_node_.size(); ++j) {
    gradient_at(test, j, dt);
    bool zero = true;
    for (std::size_t k = 0; k < n; ++k) zero = zero && dt[k] == 0.0;
    if (zero) continue;
    gradient_at(u, j, du);
    ev_.flux(du, a);
    for (std::size_t k = 0; k < n; ++k) sum += a[k] * dt[k];
  }
  for (std::size_t idx : g.mask_nodes()) {
    if (test[idx] != 0.0) sum += V_[idx] * pow_signed(u[idx], p) * test[idx];
  }
  return sum.value() * g.cell_volume();
}

double EnergyFunctional::weighted_mass(const std::vector<double>& w,
                                       const std::vector<double>& phi) const {
  const GridDomain& g = *grid_;
  const double p = ev_.p();
  CompensatedSum sum;
  for (std::size_t idx : g.mask_nodes()) {
    if (w[idx] != 0.0) sum += std::abs(w[idx]) * pow_abs(phi[idx], p);
  }
  return sum.value() * g.cell_volume();
}

double EnergyFunctional::weighted_mass_increment(const std::vector<double>& w,
                                                 const std::vector<double>& phi,
                                                 const std::vector<double>& step) const {
  const GridDomain& g = *grid_;
  const double p = ev_.p();
  CompensatedSum sum;
  for (std::size_t idx : g.mask_nodes()) {
    const double x = phi[idx], t = step[idx];
    if (t == 0.0 || w[idx] == 0.0) continue;
    sum += std::abs(w[idx]) * (p * pow_signed(x, p) * t + scalar_bregman_delta(p, x, t));
  }
  return sum.value() * g.cell_volume();
}

double EnergyFunctional::weighted_mass_and_gradient(const std::vector<double>& w,
                                                    const std::vector<double>& phi,
                                                    std::vector<double>& grad) const {
  const GridDomain& g = *grid_;
  const double p = ev_.p();
  grad.assign(g.size(), 0.0);
  const double scale = p * g.cell_volume();
  CompensatedSum sum;
  for (std::size_t idx : g.mask_nodes()) {
    if (w[idx] == 0.0) continue;
    const double aw = std::abs(w[idx]);
    sum += aw * pow_abs(phi[idx], p);
    grad[idx] = scale * aw * pow_signed(phi[idx], p);
  }
  return sum.value() * g.cell_volume();
}

// ---------------------------------------------------------------------------

double energy_Q(const GridFunction& phi, const NormFamily& fam, const ExponentPair& ep,
                const GridFunction& V) {
  check_same_grid(phi, V, "potential V");
  EnergyFunctional Q(phi.grid_ptr(), fam, ep, V);
  return Q.value(phi.values());
}

double residual_Qprime(const GridFunction& u, const NormFamily& fam, const ExponentPair& ep,
                       const GridFunction& V, const GridFunction& test) {
  check_same_grid(u, V, "potential V");
  check_same_grid(u, test, "test function");
  EnergyFunctional Q(u.grid_ptr(), fam, ep, V);
  return Q.residual(u.values(), test.values());
}

// ---------------------------------------------------------------------------

BracketResult simplified_energy_bracket(const GridFunction& u_pos, const GridFunction& psi,
                                        const NormFamily& fam, const ExponentPair& ep,
                                        const CalibrationTable& cal) {
  check_same_grid(u_pos, psi, "psi");
  const GridDomain& g = u_pos.grid();
  if (fam.kind() != NormKind::WeightedS) {
    throw ArgumentError("the simplified-energy bracket needs a weighted s-norm family");
  }
  check_compatible(fam, ep);
  if (fam.dim() != g.dim()) throw ArgumentError("norm family dimension does not match the grid");
  for (std::size_t idx : g.mask_nodes()) {
    if (!(u_pos[idx] > 0.0)) throw ArgumentError("u must be strictly positive on the mask");
  }
  const auto layer = g.boundary_layer();
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    if (psi[idx] < 0.0) throw ArgumentError("psi must be nonnegative");
    if ((!g.in_mask(idx) || layer[idx]) && psi[idx] != 0.0) {
      throw ArgumentError("psi must vanish off the mask and on its boundary layer");
    }
  }

  const double p = ep.p(), s = ep.s(), m = ep.m(), M = ep.M();
  const std::size_t n = g.dim();
  BracketResult res;
  res.regime = p == s ? "p=s" : (s < p ? "s<p" : "p<s");

  NormEvaluator ev(fam, ep);
  const double inv_h = 1.0 / g.h();
  double xi[3], eta[3], zeta[3];
  CompensatedSum q_sum, r1M_all, r2_all, r1_o1, r2_o2, r2_o2pp;
  const auto& u = u_pos.values();
  const auto& ps = psi.values();

  for (std::size_t idx : g.active_nodes()) {
    const double psi0 = ps[idx];
    double grad_u2 = 0.0;
    bool any = psi0 != 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t nb = g.neighbor(idx, a, 1);
      const double psi1 = nb == kNoNode ? 0.0 : ps[nb];
      const double u1 = nb == kNoNode ? 0.0 : u[nb];
      const double du = nb == kNoNode ? 0.0 : (u1 - u[idx]) * inv_h;
      grad_u2 += du * du;
      xi[a] = psi0 * du;
      eta[a] = u1 * (psi1 - psi0) * inv_h;
      zeta[a] = xi[a] + eta[a];
      any = any || psi1 != 0.0;
    }
    if (!any) continue;
    q_sum += ev.hp(zeta);

    const double nx = ev.h(xi), ne = ev.h(eta);
    const bool omega1 = nx <= ne;
    omega1 ? ++res.omega1_nodes : ++res.omega2_nodes;
    auto R1 = [&](double l) {
      return ne == 0.0 ? 0.0 : std::pow(ne, l) * std::pow(ne + nx, p - l);
    };
    auto R2 = [&]() {
      return r2(fam, ep, std::span<const double>(xi, n), std::span<const double>(eta, n));
    };

    if (res.regime == "p=s") {
      r2_all += R2();
    } else if (res.regime == "s<p") {
      r1M_all += R1(M);
      r2_all += R2();
      if (omega1) {
        r1_o1 += R1(M);
      } else {
        r2_o2 += R2();
      }
    } else {
      if (omega1) {
        r1_o1 += R1(m);
      } else {
        r2_o2 += R2();
        if (std::sqrt(grad_u2) >= res.drop_threshold) {
          r2_o2pp += R2();
        } else {
          ++res.dropped_nodes;
        }
      }
    }
  }

  const double vol = g.cell_volume();
  res.Q_value = q_sum.value() * vol;
  auto C = [&](const char* lemma) { return cal.at(lemma, p, s, n); };
  if (res.regime == "p=s") {
    const auto& e = C("pseudo");
    res.lower = e.c_hat * r2_all.value() * vol;
    res.upper = e.C_hat * r2_all.value() * vol;
  } else if (res.regime == "s<p") {
    res.lower = 0.5 * (C("uniform").c_hat * r1M_all.value() +
                       C("s_lt_p_lower").c_hat * r2_all.value()) * vol;
    res.upper = (C("small_xi").C_hat * r1_o1.value() +
                 C("large_xi_s_lt_p_upper").C_hat * r2_o2.value()) * vol;
  } else {
    res.lower = (C("small_xi").c_hat * r1_o1.value() +
                 C("large_xi_p_lt_s_lower").c_hat * r2_o2.value()) * vol;
    res.upper = (C("small_xi").C_hat * r1_o1.value() +
                 C("p_lt_s_upper").C_hat * r2_o2pp.value()) * vol;
  }
  // Relative slack of 1e-12 absorbs round-off when the bracket collapses.
  res.inside = res.Q_value >= res.lower * (1.0 - 1e-12) && res.Q_value <= res.upper * (1.0 + 1e-12);
  return res;
}

}  // namespace finsler
