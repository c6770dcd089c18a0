#pragma once

// Point symmetry machinery: classification of the cubic coefficient profile
// into its symmetry cases, symmetry bases in gauged and original variables,
// an invariance checker for candidate fields, and verification of conditional
// reduction operators with unit time component.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nws/equivalence.hpp"
#include "nws/errors.hpp"
#include "nws/expr.hpp"
#include "nws/model.hpp"

namespace nws {

enum class CaseTag { Arbitrary, Power, Exponential, Constant };

inline const char* tag_name(CaseTag t) {
  switch (t) {
    case CaseTag::Arbitrary: return "arbitrary";
    case CaseTag::Power: return "power";
    case CaseTag::Exponential: return "exponential";
    case CaseTag::Constant: return "constant";
  }
  return "?";
}

// Parameters of the recognized profile; only the fields of the matched shape
// are meaningful.  Shapes (with positive base on the working interval):
//   Constant     c = mu
//   Exponential  c = mu * exp(sigma t)
//   Power        c = mu * (gamma t + delta)^rho, gamma = +-1
//   Arbitrary    anything else
struct ClassificationCase {
  CaseTag tag = CaseTag::Arbitrary;
  double mu = nan_d();
  double gamma = nan_d();
  double delta = nan_d();
  double rho = nan_d();
  double sigma = nan_d();
  std::vector<VectorField> basis;
  std::string description;
};

namespace detail {

inline Expr zero_expr() { return Expr::number(0.0); }

inline std::vector<VectorField> gauged_basis(const ClassificationCase& k) {
  Expr t = Expr::variable("t"), x = Expr::variable("x"), u = Expr::variable("u");
  Expr zero = zero_expr(), one = Expr::number(1.0);
  std::vector<VectorField> basis;
  basis.push_back({zero, one, zero});  // space translation, present in every case
  switch (k.tag) {
    case CaseTag::Arbitrary:
      break;
    case CaseTag::Power:
      basis.push_back({2.0 * (k.gamma * t + k.delta), k.gamma * x,
                       -(k.gamma * (k.rho + 1.0)) * u});
      break;
    case CaseTag::Exponential:
      basis.push_back({Expr::number(2.0), zero, -k.sigma * u});
      break;
    case CaseTag::Constant:
      basis.push_back({one, zero, zero});
      basis.push_back({2.0 * t, x, -u});
      break;
  }
  return basis;
}

inline std::string case_description(const ClassificationCase& k) {
  switch (k.tag) {
    case CaseTag::Constant: return "c = " + format_number(k.mu);
    case CaseTag::Exponential:
      return "c = " + format_number(k.mu) + "*exp(" + format_number(k.sigma) + "*t)";
    case CaseTag::Power:
      return "c = " + format_number(k.mu) + "*(" + format_number(k.gamma) + "*t+" +
             format_number(k.delta) + ")^" + format_number(k.rho);
    case CaseTag::Arbitrary: return "c arbitrary";
  }
  return "";
}

}  // namespace detail

// Decision procedure on r = c'/c:
//   r identically 0                  -> Constant
//   r' identically 0                 -> Exponential
//   (1/r)' identically a constant s  -> Power with rho = 1/s
//   otherwise                        -> Arbitrary
inline ClassificationCase classify_lie(const Coefficient& c, const Interval& iv,
                                       const ZeroTestOptions& opt = {}) {
  ClassificationCase k;
  double t0 = iv.mid();

  double prev = 0.0;
  for (int i = 0; i < 32; ++i) {
    double v = c.value(iv.sample(i, 32));
    if (!std::isfinite(v) || v == 0.0 || (i > 0 && (prev < 0.0) != (v < 0.0)))
      throw InvariantViolation("profile '" + c.label() +
                               "' is singular or vanishes on the interval");
    prev = v;
  }

  if (c.symbolic()) {
    Expr ce = c.expr();
    Expr r = differentiate(ce, "t") / ce;
    Box box;
    box.add("t", iv.lo, iv.hi);
    Coefficient rc(r);
    if (is_identically_zero(r, box, opt)) {
      k.tag = CaseTag::Constant;
      k.mu = c.value(t0);
    } else if (is_identically_zero(differentiate(r, "t"), box, opt)) {
      k.tag = CaseTag::Exponential;
      k.sigma = rc.value(t0);
      k.mu = c.value(t0) * std::exp(-k.sigma * t0);
    } else {
      Expr s = differentiate(Expr::number(1.0) / r, "t");
      bool power = false;
      try {
        power = is_identically_zero(differentiate(s, "t"), box, opt);
      } catch (const InconclusiveError&) {
        power = false;
      }
      if (power) {
        k.tag = CaseTag::Power;
        double sv = Coefficient(s).value(t0);
        k.rho = 1.0 / sv;
        double w = k.rho / rc.value(t0);
        k.gamma = (w >= 0.0) ? 1.0 : -1.0;
        k.delta = k.gamma * (w - t0);
        k.mu = c.value(t0) / std::pow(k.gamma * t0 + k.delta, k.rho);
      }
    }
  } else {
    // Sampled profile: derivative channels reach second order only, so
    // constancy is judged by the spread of the sampled quantity.
    int n = std::max(64, opt.trials);
    std::vector<double> rs(n), ss(n);
    double rmax = 0.0;
    for (int i = 0; i < n; ++i) {
      Jet3 j = c.jet(iv.sample(i, n));
      if (!std::isfinite(j.v) || !std::isfinite(j.d1) || !std::isfinite(j.d2))
        throw InconclusiveError("profile jets not evaluable across the interval");
      double r = j.d1 / j.v;
      double rt = j.d2 / j.v - r * r;
      rs[i] = r;
      ss[i] = -rt / (r * r);  // d/dt (1/r)
      rmax = std::max(rmax, std::fabs(r));
    }
    double tol = std::max(opt.tol, 1e-7);
    auto spread = [](const std::vector<double>& v) {
      double lo = v[0], hi = v[0];
      for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      return hi - lo;
    };
    Jet3 j0 = c.jet(t0);
    double r0 = j0.d1 / j0.v;
    if (rmax <= tol) {
      k.tag = CaseTag::Constant;
      k.mu = j0.v;
    } else if (spread(rs) <= tol * (1.0 + rmax)) {
      k.tag = CaseTag::Exponential;
      k.sigma = r0;
      k.mu = j0.v * std::exp(-k.sigma * t0);
    } else {
      bool finite = true;
      double smax = 0.0;
      for (double s : ss) {
        if (!std::isfinite(s)) { finite = false; break; }
        smax = std::max(smax, std::fabs(s));
      }
      if (finite && spread(ss) <= tol * (1.0 + smax)) {
        k.tag = CaseTag::Power;
        double sv = ss[0];
        k.rho = 1.0 / sv;
        double w = k.rho / r0;
        k.gamma = (w >= 0.0) ? 1.0 : -1.0;
        k.delta = k.gamma * (w - t0);
        k.mu = j0.v / std::pow(k.gamma * t0 + k.delta, k.rho);
      }
    }
  }

  k.basis = detail::gauged_basis(k);
  k.description = detail::case_description(k);
  return k;
}

inline ClassificationCase classify_lie(const Expr& c, const Interval& iv,
                                       const ZeroTestOptions& opt = {}) {
  return classify_lie(Coefficient(c), iv, opt);
}

// Classification plus a symmetry basis in the ORIGINAL variables for a general
// triple.  Writing T for the gauge time (dT/dt = a^2, T(t_ref) = 0) and
// pulling the gauged fields back through t~ = T, u~ = exp(-int b) u gives
//   Power:        (2/a^2)(gamma T + delta) dt + gamma x dx
//                     + ((2b/a^2)(gamma T + delta) - (rho+1) gamma) u du
//   Exponential:  (2/a^2) dt + (2b/a^2 - sigma) u du
//   Constant:     (1/a^2)(dt + b u du),  (2T/a^2) dt + x dx + ((2b/a^2) T - 1) u du
// with dx alone present in every case.
struct UngaugedClassification {
  ClassificationCase gauged_case;
  std::vector<VectorField> basis;
  EquivTransform gauge;
};

inline UngaugedClassification lie_basis_ungauged(const CoefficientTriple& tr,
                                                 const ZeroTestOptions& opt = {}) {
  if (!tr.a.symbolic() || !tr.b.symbolic())
    throw Error("basis construction needs symbolic a and b coefficients");
  validate_triple(tr);
  GaugeResult gr = gauge_transform(tr);
  UngaugedClassification out;
  out.gauge = gr.transform;
  out.gauged_case = classify_lie(gr.gauged.c, gr.gauged.t_interval, opt);
  const ClassificationCase& k = out.gauged_case;

  ScalarMap theta = gr.transform.theta;
  Expr a2 = tr.a.expr() * tr.a.expr();
  Expr b = tr.b.expr();
  Expr T = Expr::external("T", [theta](double t) { return theta.value(t); }, a2, "t");
  Expr x = Expr::variable("x"), u = Expr::variable("u");
  Expr zero = detail::zero_expr(), one = Expr::number(1.0);

  out.basis.push_back({zero, one, zero});
  switch (k.tag) {
    case CaseTag::Arbitrary:
      break;
    case CaseTag::Power: {
      Expr base = k.gamma * T + k.delta;
      out.basis.push_back({2.0 * base / a2, k.gamma * x,
                           (2.0 * b / a2 * base - (k.rho + 1.0) * k.gamma) * u});
      break;
    }
    case CaseTag::Exponential:
      out.basis.push_back({2.0 / a2, zero, (2.0 * b / a2 - k.sigma) * u});
      break;
    case CaseTag::Constant:
      out.basis.push_back({one / a2, zero, b / a2 * u});
      out.basis.push_back({2.0 * T / a2, x, (2.0 * b / a2 * T - 1.0) * u});
      break;
  }
  return out;
}

struct InvarianceReport {
  bool invariant = false;
  double max_scaled = nan_d();
  std::string reason;
};

struct InvarianceOptions {
  double x_lo = -2.0, x_hi = 2.0;
  double u_lo = 0.1, u_hi = 2.0;
  double ux_lo = -2.0, ux_hi = 2.0;
  double uxx_lo = -2.0, uxx_hi = 2.0;
  ZeroTestOptions zero;
};

// Second-prolongation test of tau dt + xi dx + eta du on
// u_t = a^2 u_xx + b u - c u^3, with u_t eliminated on-shell.  Requires
// tau = tau(t) and xi = xi(t, x); fields outside that shape are rejected.
inline InvarianceReport check_lie_invariance_report(const PDEInstance& p,
                                                    const VectorField& f,
                                                    const InvarianceOptions& opt = {}) {
  const CoefficientTriple& tr = p.coeffs;
  if (!tr.a.symbolic() || !tr.b.symbolic() || !tr.c.symbolic())
    throw Error("invariance check needs symbolic coefficients");

  InvarianceReport rep;
  Box shape_box;
  shape_box.add("t", tr.t_interval.lo, tr.t_interval.hi)
      .add("x", opt.x_lo, opt.x_hi)
      .add("u", opt.u_lo, opt.u_hi);
  auto vanishes = [&](const Expr& e) {
    return is_identically_zero(e, shape_box, opt.zero);
  };
  if (!vanishes(differentiate(f.tau, "x")) || !vanishes(differentiate(f.tau, "u"))) {
    rep.reason = "time component must depend on t only";
    return rep;
  }
  if (!vanishes(differentiate(f.xi, "u"))) {
    rep.reason = "space component must not depend on u";
    return rep;
  }

  Expr u = Expr::variable("u"), ux = Expr::variable("ux"), uxx = Expr::variable("uxx");
  Expr a2 = tr.a.expr() * tr.a.expr();
  Expr b = tr.b.expr(), c = tr.c.expr();
  Expr a2_t = differentiate(a2, "t"), b_t = differentiate(b, "t"), c_t = differentiate(c, "t");

  const Expr& tau = f.tau;
  const Expr& xi = f.xi;
  const Expr& eta = f.eta;
  Expr tau_t = differentiate(tau, "t");
  Expr xi_t = differentiate(xi, "t"), xi_x = differentiate(xi, "x");
  Expr xi_xx = differentiate(xi_x, "x");
  Expr eta_t = differentiate(eta, "t"), eta_x = differentiate(eta, "x");
  Expr eta_u = differentiate(eta, "u");
  Expr eta_xx = differentiate(eta_x, "x"), eta_xu = differentiate(eta_x, "u");
  Expr eta_uu = differentiate(eta_u, "u");

  Expr F = a2 * uxx + b * u - c * u * u * u;  // u_t on-shell
  Expr G = tau * (-(a2_t * uxx) - b_t * u + c_t * u * u * u) +
           eta * (-b + 3.0 * c * u * u) +
           (eta_t + (eta_u - tau_t) * F - ux * xi_t) -
           a2 * (eta_xx + (2.0 * eta_xu - xi_xx) * ux + eta_uu * ux * ux +
                 (eta_u - 2.0 * xi_x) * uxx);

  Box box;
  box.add("t", tr.t_interval.lo, tr.t_interval.hi)
      .add("x", opt.x_lo, opt.x_hi)
      .add("u", opt.u_lo, opt.u_hi)
      .add("ux", opt.ux_lo, opt.ux_hi)
      .add("uxx", opt.uxx_lo, opt.uxx_hi);
  ZeroTestReport zr = zero_test(G, box, opt.zero);
  rep.invariant = zr.zero;
  rep.max_scaled = zr.max_scaled;
  if (!rep.invariant) rep.reason = "prolonged action does not vanish on solutions";
  return rep;
}

inline bool check_lie_invariance(const PDEInstance& p, const VectorField& f,
                                 const InvarianceOptions& opt = {}) {
  return check_lie_invariance_report(p, f, opt).invariant;
}

struct EquationCheck {
  int index = 0;
  double max_scaled_residual = 0.0;
  bool pass = false;
};

struct NonclassicalReport {
  bool pass = false;
  std::vector<EquationCheck> equations;
};

inline nlohmann::json to_json(const NonclassicalReport& r) {
  nlohmann::json eqs = nlohmann::json::array();
  for (const auto& e : r.equations)
    eqs.push_back({{"index", e.index},
                   {"max_scaled_residual", e.max_scaled_residual},
                   {"verdict", e.pass ? "pass" : "fail"}});
  return {{"pass", r.pass}, {"equations", eqs}};
}

struct NonclassicalOptions {
  double t_lo = 0.25, t_hi = 2.5;
  double x_lo = -3.0, x_hi = 3.0;
  double u_lo = 0.1, u_hi = 2.0;
  ZeroTestOptions zero;
};

// Determining system for a reduction operator dt + xi dx + eta du of
// u_t = u_xx - c(t) u^3 (unit time component, u allowed in xi and eta):
//   E1 = xi_uu
//   E2 = eta_uu - 2 (xi_xu - xi xi_u)
//   E3 = eta_t - eta_xx + 2 xi_x eta + (2 xi_x - eta_u) c u^3 + 3 eta c u^2 + c' u^3
//   E4 = xi_t - xi_xx + 2 xi xi_x - 2 xi_u eta + 2 eta_xu - 3 xi_u c u^3
inline NonclassicalReport verify_nonclassical(const Expr& xi, const Expr& eta,
                                              const Expr& c,
                                              const NonclassicalOptions& opt = {}) {
  Expr u = Expr::variable("u");
  Expr c_t = differentiate(c, "t");
  Expr xi_t = differentiate(xi, "t"), xi_x = differentiate(xi, "x"),
       xi_u = differentiate(xi, "u");
  Expr xi_xx = differentiate(xi_x, "x"), xi_xu = differentiate(xi_x, "u"),
       xi_uu = differentiate(xi_u, "u");
  Expr eta_t = differentiate(eta, "t"), eta_x = differentiate(eta, "x"),
       eta_u = differentiate(eta, "u");
  Expr eta_xx = differentiate(eta_x, "x"), eta_xu = differentiate(eta_x, "u"),
       eta_uu = differentiate(eta_u, "u");

  Expr u3 = u * u * u;
  std::vector<Expr> eqs;
  eqs.push_back(xi_uu);
  eqs.push_back(eta_uu - 2.0 * (xi_xu - xi * xi_u));
  eqs.push_back(eta_t - eta_xx + 2.0 * xi_x * eta + (2.0 * xi_x - eta_u) * c * u3 +
                3.0 * eta * c * u * u + c_t * u3);
  eqs.push_back(xi_t - xi_xx + 2.0 * xi * xi_x - 2.0 * xi_u * eta + 2.0 * eta_xu -
                3.0 * xi_u * c * u3);

  Box box;
  box.add("t", opt.t_lo, opt.t_hi).add("x", opt.x_lo, opt.x_hi).add("u", opt.u_lo, opt.u_hi);
  NonclassicalReport rep;
  rep.pass = true;
  for (int i = 0; i < 4; ++i) {
    ZeroTestReport zr = zero_test(eqs[i], box, opt.zero);
    rep.equations.push_back({i + 1, zr.max_scaled, zr.zero});
    rep.pass = rep.pass && zr.zero;
  }
  return rep;
}

inline NonclassicalReport verify_nonclassical(const VectorField& f, const Expr& c,
                                              const NonclassicalOptions& opt = {}) {
  Box box;
  box.add("t", opt.t_lo, opt.t_hi).add("x", opt.x_lo, opt.x_hi).add("u", opt.u_lo, opt.u_hi);
  if (!is_identically_zero(f.tau - Expr::number(1.0), box, opt.zero))
    throw DomainError("reduction operator must have unit time component");
  return verify_nonclassical(f.xi, f.eta, c, opt);
}

struct CatalogEntry {
  VectorField op;
  Expr c = Expr::number(1.0);
  std::string name;
};

// Known reduction operators beyond the point symmetries.  Constant profiles
// carry the 1/x drift operator; exponential profiles exp(sigma t) carry the
// u-shear operator plus front operators whose shape depends on sgn(sigma).
inline std::vector<CatalogEntry> nonclassical_catalog(CaseTag tag, double sigma = 0.0) {
  std::vector<CatalogEntry> out;
  Expr t = Expr::variable("t"), x = Expr::variable("x"), u = Expr::variable("u");
  Expr one = Expr::number(1.0);
  if (tag == CaseTag::Constant) {
    out.push_back({{one, -3.0 / x, -3.0 / (x * x) * u}, one, "inv-x"});
    return out;
  }
  if (tag != CaseTag::Exponential) return out;
  if (sigma == 0.0) throw DomainError("exponential selector needs nonzero sigma");
  Expr c = exp(sigma * t);
  if (sigma > 0.0) {
    double alpha = sigma / 4.0;
    double beta = 3.0 / std::sqrt(2.0);
    Expr shear = beta * exp(2.0 * alpha * t) * u;
    out.push_back({{one, shear,
                    (Expr::number(alpha) -
                     (beta * beta / 3.0) * exp(4.0 * alpha * t) * u * u) *
                        u},
                   c,
                   "shear-exp"});
    double rs = std::sqrt(sigma);
    Expr th = tanh(Expr::number(rs / 2.0) * x);
    out.push_back({{one, Expr::number(-1.5 * rs) * th,
                    Expr::number(-0.75 * sigma) * (th * th - 1.0 / 3.0) * u},
                   c,
                   "tanh-front"});
    Expr ch = coth(Expr::number(rs / 2.0) * x);
    out.push_back({{one, Expr::number(-1.5 * rs) * ch,
                    Expr::number(-0.75 * sigma) * (ch * ch - 1.0 / 3.0) * u},
                   c,
                   "coth-front"});
  } else {
    double rs = std::sqrt(-sigma);
    Expr tn = tan(Expr::number(rs / 2.0) * x);
    out.push_back({{one, Expr::number(1.5 * rs) * tn,
                    Expr::number(0.75 * sigma) * (tn * tn + 1.0 / 3.0) * u},
                   c,
                   "tan-front"});
  }
  return out;
}

// tau u_t + xi u_x - eta along a solution; zero means the solution lies on
// the operator's invariant surface.
inline std::optional<double> invariant_surface_residual(const VectorField& f,
                                                        const Solution& s, double t,
                                                        double x) {
  FieldJet j = s.at(t, x);
  if (j.pole) return std::nullopt;
  EvalPoint p{{"t", t}, {"x", x}, {"u", j.u}};
  EvalResult tv = evaluate(f.tau, p), xv = evaluate(f.xi, p), ev = evaluate(f.eta, p);
  if (tv.pole || xv.pole || ev.pole) return std::nullopt;
  return tv.value * j.ut + xv.value * j.ux - ev.value;
}

}  // namespace nws
