#include "entroflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "entroflow/error.hpp"
#include "entroflow/functionals.hpp"
#include "entroflow/summation.hpp"

namespace entroflow {

namespace {

struct FacePair {
  std::size_t lo, hi;
};

class Stepper {
 public:
  Stepper(const DesingularizedNonlinearity& dnl, const FlowTarget& target, Field u, Mobility mobility)
      : dnl_(dnl), target_(target), u_(std::move(u)), mobility_(mobility) {
    const Domain& dom = u_.domain();
    faces_.resize(static_cast<std::size_t>(dom.dim()));
    for (std::size_t k = 0; k < dom.size(); ++k) {
      const CellIndex idx = dom.multi_index(k);
      for (int a = 0; a < dom.dim(); ++a)
        if (idx[a] + 1 < dom.cells(a)) faces_[static_cast<std::size_t>(a)].push_back({k, k + dom.stride(a)});
    }
    psi_.resize(dom.size());
    U_.resize(dom.size());
    phi_.resize(dom.size());
    du_.resize(dom.size());
  }

  double stable_dt(double safety) const {
    const Domain& dom = u_.domain();
    double diff = 0.0, adv = 0.0;
    for (int a = 0; a < dom.dim(); ++a) {
      const double h = dom.spacing(a);
      diff = std::max(diff, dnl_.M() / (h * h));
      for (const FacePair& f : faces_[static_cast<std::size_t>(a)])
        adv = std::max(adv, std::abs(target_.psi_v[f.hi] - target_.psi_v[f.lo]) / (h * h));
    }
    return safety / (2.0 * dom.dim() * (diff + adv));
  }

  // Fills du_ with the flux divergence of the current state and returns the
  // discrete dissipation Σ m (Dφ)² |cell|.
  double evaluate() {
    const Domain& dom = u_.domain();
    for (std::size_t i = 0; i < u_.size(); ++i) {
      psi_[i] = dnl_.psi(u_[i]);
      U_[i] = dnl_.U(u_[i]);
      phi_[i] = psi_[i] - target_.psi_v[i];
      du_[i] = 0.0;
    }
    CompensatedSum prod;
    for (int a = 0; a < dom.dim(); ++a) {
      const double h = dom.spacing(a);
      for (const FacePair& f : faces_[static_cast<std::size_t>(a)]) {
        const double m = mobility(f.lo, f.hi);
        const double g = (phi_[f.hi] - phi_[f.lo]) / h;
        const double flux = -m * g;
        du_[f.lo] -= flux / h;
        du_[f.hi] += flux / h;
        prod.add(m * g * g);
      }
    }
    return prod.value() * dom.cell_volume();
  }

  void advance(double dt) {
    evaluate();
    for (std::size_t i = 0; i < u_.size(); ++i) {
      const double next = u_[i] + dt * du_[i];
      if (!(next >= 0.0) || !std::isfinite(next)) {
        std::ostringstream os;
        os << "cell " << i << " became " << next << " (dt=" << dt << ")";
        throw Error(ErrorCode::scheme_failure, os.str());
      }
      u_[i] = next;
    }
  }

  const Field& u() const noexcept { return u_; }

 private:
  double mobility(std::size_t i, std::size_t j) const {
    const double ui = u_[i], uj = u_[j];
    if (mobility_ == Mobility::arithmetic) return 0.5 * (ui + uj);
    const double dpsi = psi_[j] - psi_[i];
    if (std::abs(uj - ui) <= 1e-6 * std::max(ui, uj) || dpsi == 0.0) return 0.5 * (ui + uj);
    return (U_[j] - U_[i]) / dpsi;
  }

  const DesingularizedNonlinearity& dnl_;
  const FlowTarget& target_;
  Field u_;
  Mobility mobility_;
  std::vector<std::vector<FacePair>> faces_;
  std::vector<double> psi_, U_, phi_, du_;
};

std::vector<double> recording_times(const FlowConfig& cfg) {
  if (!(cfg.end_time > 0.0)) throw Error(ErrorCode::invalid_argument, "end time must be positive");
  std::vector<double> ts{0.0, cfg.end_time};
  if (cfg.snapshot_interval > 0.0) {
    const auto n = static_cast<long>(std::floor(cfg.end_time / cfg.snapshot_interval + 1e-9));
    for (long k = 1; k <= n; ++k) ts.push_back(std::min(cfg.end_time, k * cfg.snapshot_interval));
  }
  for (double t : cfg.extra_times)
    if (t > 0.0 && t <= cfg.end_time) ts.push_back(t);
  std::sort(ts.begin(), ts.end());
  std::vector<double> out;
  for (double t : ts)
    if (out.empty() || t - out.back() > 1e-12 * std::max(1.0, t)) out.push_back(t);
  return out;
}

void validate_initial(const FlowTarget& target, const Field& u0) {
  require_same_domain(target.v, u0, "run_flow");
  require_same_domain(target.psi_v, u0, "run_flow");
  for (std::size_t i = 0; i < u0.size(); ++i) {
    if (!(u0[i] > 0.0) || !std::isfinite(u0[i])) {
      std::ostringstream os;
      os << "initial datum must be positive and finite, u0(" << i << ") = " << u0[i];
      throw Error(ErrorCode::negative_value, os.str());
    }
  }
  if (!target.psi_v.all_finite()) throw Error(ErrorCode::invalid_argument, "psi_eps(v) must be finite");
}

}  // namespace

FlowTarget target_from_profile(const DesingularizedNonlinearity& dnl, const Field& v) {
  if (!v.all_positive()) throw Error(ErrorCode::negative_value, "target profile must be positive; use target_from_potential");
  return FlowTarget{v, v.map([&](double x) { return dnl.psi(x); })};
}

FlowTarget target_from_potential(const DesingularizedNonlinearity& dnl, const Potential& pot, const Domain& domain,
                                 double mass) {
  const Field V = pot.sample(domain);
  auto profile = [&](double beta) { return V.map([&](double x) { return dnl.inverse_psi(beta - x); }); };
  auto mass_at = [&](double beta) {
    const Field v = profile(beta);
    return v.all_finite() ? integrate(v) : std::numeric_limits<double>::infinity();
  };
  const double beta = solve_normalizer(mass_at, mass, V.min());
  FlowTarget t{profile(beta), V.map([&](double x) { return beta - x; })};
  return t;
}

double flow_entropy(const DesingularizedNonlinearity& dnl, const FlowTarget& target, const Field& u) {
  CompensatedSum s;
  for (std::size_t i = 0; i < u.size(); ++i) s.add(dnl.H(u[i]) - u[i] * target.psi_v[i]);
  return s.value() * u.domain().cell_volume();
}

FlowTrace run_flow(const DesingularizedNonlinearity& dnl, const FlowTarget& target, const Field& u0,
                   const FlowConfig& cfg) {
  validate_initial(target, u0);
  if (!(cfg.safety > 0.0 && cfg.safety <= 1.0)) throw Error(ErrorCode::parameter_out_of_range, "CFL safety must lie in (0, 1]");
  if (cfg.require_mass_match) require_mass_match(integrate(u0), integrate(target.v));

  Stepper st(dnl, target, u0, cfg.mobility);
  const double dt = st.stable_dt(cfg.safety);
  if (!(dt >= cfg.dt_floor)) {
    std::ostringstream os;
    os << "stable step " << dt << " below floor " << cfg.dt_floor;
    throw Error(ErrorCode::cfl_violation, os.str());
  }

  FlowTrace tr;
  tr.dt = dt;
  const std::vector<double> times = recording_times(cfg);
  double t = 0.0;
  double mass = integrate(u0);
  double lambda = flow_entropy(dnl, target, u0);
  auto record = [&](double at) {
    tr.t.push_back(at);
    tr.mass.push_back(mass);
    tr.entropy.push_back(lambda);
    tr.production.push_back(st.evaluate());
    if (cfg.keep_snapshots) tr.snapshots.push_back(st.u());
  };

  std::size_t r = 0;
  while (r < times.size()) {
    const double remaining = times[r] - t;
    if (remaining <= 1e-13 * std::max(1.0, t)) {
      record(times[r]);
      t = times[r];
      ++r;
      continue;
    }
    const double h = std::min(dt, remaining);
    st.advance(h);
    ++tr.steps;
    t = h == remaining ? times[r] : t + h;
    const double m2 = integrate(st.u());
    const double l2 = flow_entropy(dnl, target, st.u());
    tr.max_step_mass_change = std::max(tr.max_step_mass_change, std::abs(m2 - mass));
    tr.max_step_entropy_increase = std::max(tr.max_step_entropy_increase, l2 - lambda);
    mass = m2;
    lambda = l2;
  }
  tr.final_u = st.u();
  return tr;
}

Field stationary_family(const DesingularizedNonlinearity& dnl, const Field& v, double alpha) {
  if (alpha == 0.0) return v;
  if (!v.all_positive()) throw Error(ErrorCode::negative_value, "stationary family needs a positive profile");
  return v.map([&](double x) { return dnl.inverse_psi(dnl.psi(x) + alpha); });
}

Field stationary_family(const DesingularizedNonlinearity& dnl, const FlowTarget& target, double alpha) {
  if (alpha == 0.0) return target.v;
  return target.psi_v.map([&](double p) { return dnl.inverse_psi(p + alpha); });
}

ComparisonReport check_comparison(const DesingularizedNonlinearity& dnl, const FlowTarget& target,
                                  const Field& u1_0, const Field& u2_0, FlowConfig cfg) {
  validate_initial(target, u1_0);
  validate_initial(target, u2_0);
  ComparisonReport rep;
  rep.min_gap = std::numeric_limits<double>::infinity();
  auto gap = [](const Field& a, const Field& b) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) g = std::min(g, b[i] - a[i]);
    return g;
  };
  rep.initial_gap = gap(u1_0, u2_0);
  if (rep.initial_gap < 0.0) throw Error(ErrorCode::invalid_argument, "comparison needs u1_0 <= u2_0");
  rep.min_gap = rep.initial_gap;

  Stepper s1(dnl, target, u1_0, cfg.mobility), s2(dnl, target, u2_0, cfg.mobility);
  const double dt = std::min(s1.stable_dt(cfg.safety), s2.stable_dt(cfg.safety));
  if (!(dt >= cfg.dt_floor)) throw Error(ErrorCode::cfl_violation, "stable step below floor");
  double t = 0.0;
  while (cfg.end_time - t > 1e-13 * std::max(1.0, t)) {
    const double h = std::min(dt, cfg.end_time - t);
    s1.advance(h);
    s2.advance(h);
    t += h;
    ++rep.steps;
    const double g = gap(s1.u(), s2.u());
    if (g < rep.min_gap) {
      rep.min_gap = g;
      rep.time_of_min = t;
    }
  }
  return rep;
}

double entropy_derivative(const DesingularizedNonlinearity& dnl, const FlowTarget& target, const Field& u) {
  const Field phi = target.psi_v - u.map([&](double x) { return dnl.psi(x); });
  return -integrate(u * gamma(phi, phi));
}

double entropy_second_derivative(const DesingularizedNonlinearity& dnl, const FlowTarget& target,
                                 const Field& u) {
  const Domain& dom = u.domain();
  const Field phi = target.psi_v - u.map([&](double x) { return dnl.psi(x); });
  const Field Uu = u.map([&](double x) { return dnl.U(x); });
  const Field U2u = u.map([&](double x) { return dnl.U2(x); });
  const VectorField gphi = gradient(phi);
  const Field lap = laplacian(phi);

  Field bulk = hessian_form(hessian(target.psi_v), gphi, gphi) * u * -1.0;
  bulk += lap * lap * U2u;
  bulk += gamma2(phi, phi) * Uu;

  const Field G = gamma(gphi, gphi);
  double boundary = 0.0;
  for (const Face& f : dom.faces()) {
    const std::vector<double> dG = face_values(partial(G, f.axis), f);
    const std::vector<double> Uf = face_values(Uu, f);
    std::vector<double> prod(dG.size());
    for (std::size_t k = 0; k < dG.size(); ++k) prod[k] = f.normal_sign() * dG[k] * Uf[k];
    boundary += face_sum(dom, f, prod);
  }
  return 2.0 * integrate(bulk) - boundary;
}

SecondDerivativeReport check_second_derivative_identity(const DesingularizedNonlinearity& dnl,
                                                        const FlowTarget& target, const Field& u0,
                                                        FlowConfig cfg, const std::vector<double>& probes,
                                                        double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::invalid_argument, "tau must be positive");
  if (!target.v.all_positive()) throw Error(ErrorCode::invalid_argument, "identity check needs a positive v");
  for (double p : probes) {
    if (!(p - tau > 0.0)) throw Error(ErrorCode::probe_out_of_range, "probe window must start after t = 0");
    cfg.extra_times.insert(cfg.extra_times.end(), {p - tau, p, p + tau});
    cfg.end_time = std::max(cfg.end_time, p + tau);
  }
  cfg.keep_snapshots = true;
  const FlowTrace tr = run_flow(dnl, target, u0, cfg);
  auto snapshot = [&](double at) -> const Field& {
    for (std::size_t k = 0; k < tr.t.size(); ++k)
      if (std::abs(tr.t[k] - at) <= 1e-12 * std::max(1.0, at)) return tr.snapshots[k];
    throw Error(ErrorCode::probe_out_of_range, "probe time missing from the trace");
  };

  SecondDerivativeReport rep;
  for (double p : probes) {
    IdentityProbe pr;
    pr.t = p;
    pr.finite_difference = (entropy_derivative(dnl, target, snapshot(p + tau)) -
                            entropy_derivative(dnl, target, snapshot(p - tau))) / (2.0 * tau);
    pr.formula = entropy_second_derivative(dnl, target, snapshot(p));
    const double scale = std::abs(pr.formula);
    pr.rel_error = scale > 0.0 ? std::abs(pr.finite_difference - pr.formula) / scale
                               : std::abs(pr.finite_difference - pr.formula);
    rep.max_rel_error = std::max(rep.max_rel_error, pr.rel_error);
    rep.probes.push_back(pr);
  }
  return rep;
}

double fit_decay_rate(const FlowTrace& trace, double t_begin, double t_end) {
  std::vector<double> ts, ys;
  for (std::size_t k = 0; k < trace.t.size(); ++k) {
    if (trace.t[k] < t_begin || trace.t[k] > t_end) continue;
    if (!(trace.production[k] > 0.0)) throw Error(ErrorCode::degenerate_window, "production is not positive in the window");
    ts.push_back(trace.t[k]);
    ys.push_back(std::log(trace.production[k]));
  }
  if (ts.size() < 10) throw Error(ErrorCode::degenerate_window, "fewer than 10 samples in the fit window");
  const double n = static_cast<double>(ts.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    mt += ts[k];
    my += ys[k];
  }
  mt /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    sxy += (ts[k] - mt) * (ys[k] - my);
    sxx += (ts[k] - mt) * (ts[k] - mt);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::degenerate_window, "fit window has no time spread");
  return -sxy / sxx;
}

void write_trace_csv(const FlowTrace& trace, std::ostream& os) {
  os << "t,mass,entropy,production\n";
  char buf[160];
  for (std::size_t k = 0; k < trace.t.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", trace.t[k], trace.mass[k], trace.entropy[k],
                  trace.production[k]);
    os << buf;
  }
}

}  // namespace entroflow
