#pragma once

// Point transformations t~ = theta(t), x~ = delta1 x + delta2, u~ = phi(t) u
// acting on coefficient triples and on solutions, the constant-coefficient
// reducibility criterion, and the gauge / normalization maps built from it.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nws/errors.hpp"
#include "nws/expr.hpp"
#include "nws/jets.hpp"
#include "nws/model.hpp"
#include "nws/quadrature.hpp"

namespace nws {

// Monotone scalar reparameterization (or scalar amplitude factor) of t,
// evaluable as a 3-jet, optionally invertible.
class ScalarMap {
 public:
  using JetFn = std::function<Jet3(double)>;
  using InvFn = std::function<double(double)>;

  ScalarMap()
      : jets_([](double t) { return Jet3{t, 1.0, 0.0, 0.0}; }),
        inverse_([](double y) { return y; }),
        label_("t"),
        trivial_(true) {}

  ScalarMap(JetFn jets, InvFn inverse, std::string label, bool trivial = false)
      : jets_(std::move(jets)),
        inverse_(std::move(inverse)),
        label_(std::move(label)),
        trivial_(trivial) {}

  static ScalarMap identity() { return ScalarMap(); }

  static ScalarMap constant_one() {
    return ScalarMap([](double) { return Jet3{1.0, 0.0, 0.0, 0.0}; }, nullptr, "1", true);
  }

  static ScalarMap from_expr(const Expr& e, double invert_hint = 0.0) {
    Coefficient c(e);
    auto jets = [c](double t) { return c.jet(t); };
    auto inv = [c, invert_hint](double y) {
      return invert_monotone([c](double t) { return c.value(t); },
                             [c](double t) { return c.jet(t).d1; }, y, invert_hint);
    };
    return ScalarMap(jets, inv, to_text(e));
  }

  static ScalarMap from_jets(JetFn f, std::string label) {
    return ScalarMap(std::move(f), nullptr, std::move(label));
  }

  // scale * Integral_{t_ref}^{t} f; strictly monotone when scale*f keeps one sign.
  static ScalarMap from_antiderivative(const Coefficient& f, double t_ref, double scale,
                                       double tol = 1e-12) {
    auto handle = std::make_shared<AntiderivativeHandle>(
        [f](double t) { return f.value(t); }, t_ref, tol);
    auto jets = [handle, f, scale](double t) {
      Jet3 j = f.jet(t);
      return Jet3{scale * (*handle)(t), scale * j.v, scale * j.d1, scale * j.d2};
    };
    auto inv = [handle, f, scale, t_ref](double y) {
      return invert_monotone([handle, scale](double t) { return scale * (*handle)(t); },
                             [f, scale](double t) { return scale * f.value(t); }, y, t_ref);
    };
    std::string label = (scale == 1.0 ? std::string() : format_number(scale) + "*") +
                        "int(" + f.label() + ", " + format_number(t_ref) + ", t)";
    return ScalarMap(jets, inv, label);
  }

  // exp(-Integral_{t_ref}^{t} b)
  static ScalarMap exp_neg_antiderivative(const Coefficient& b, double t_ref,
                                          double tol = 1e-12) {
    auto handle = std::make_shared<AntiderivativeHandle>(
        [b](double t) { return b.value(t); }, t_ref, tol);
    auto jets = [handle, b](double t) {
      Jet3 j = b.jet(t);
      return jet3_exp({-(*handle)(t), -j.v, -j.d1, -j.d2});
    };
    std::string label = "exp(-int(" + b.label() + ", " + format_number(t_ref) + ", t))";
    return ScalarMap(jets, nullptr, label);
  }

  static ScalarMap inverse_of(const ScalarMap& th) {
    if (th.trivial_) return identity();
    auto jets = [th](double y) {
      double s = th.invert(y);
      return jet3_inverse(th.jet(s), s);
    };
    auto inv = [th](double t) { return th.value(t); };
    return ScalarMap(jets, inv, "inv(" + th.label() + ")");
  }

  // t~ -> 1 / phi(theta^{-1}(t~)), the amplitude factor of an inverted transform.
  static ScalarMap reciprocal_compose(const ScalarMap& phi, const ScalarMap& theta) {
    if (phi.trivial_ && theta.trivial_) return constant_one();
    auto jets = [phi, theta](double y) {
      double s = theta.invert(y);
      Jet3 sj = jet3_inverse(theta.jet(s), s);
      return jet3_compose(jet3_recip(phi.jet(s)), sj);
    };
    return ScalarMap(jets, nullptr, "1/(" + phi.label() + ")@inv(" + theta.label() + ")");
  }

  Jet3 jet(double t) const { return jets_(t); }
  double value(double t) const { return jets_(t).v; }
  double invert(double y) const {
    if (!inverse_) throw Error("map '" + label_ + "' has no inverse");
    return inverse_(y);
  }
  bool invertible() const { return static_cast<bool>(inverse_); }
  const std::string& label() const { return label_; }
  bool trivial() const { return trivial_; }

 private:
  JetFn jets_;
  InvFn inverse_;
  std::string label_;
  bool trivial_ = false;  // identity map t or constant map 1
};

struct EquivTransform {
  ScalarMap theta = ScalarMap::identity();
  double delta1 = 1.0;
  double delta2 = 0.0;
  ScalarMap phi = ScalarMap::constant_one();
  std::string label = "identity";

  bool is_identity() const {
    return theta.trivial() && phi.trivial() && delta1 == 1.0 && delta2 == 0.0;
  }

  EquivTransform inverse() const {
    if (is_identity()) return *this;
    EquivTransform h;
    h.theta = ScalarMap::inverse_of(theta);
    h.delta1 = 1.0 / delta1;
    h.delta2 = -delta2 / delta1;
    h.phi = ScalarMap::reciprocal_compose(phi, theta);
    h.label = "inverse(" + label + ")";
    return h;
  }
};

// delta1 != 0, theta strictly increasing, phi nonvanishing, all sampled.
inline void validate_transform(const EquivTransform& g, const Interval& iv,
                               int samples = 64) {
  if (g.delta1 == 0.0) throw InvariantViolation("transform has delta1 = 0");
  for (int i = 0; i < samples; ++i) {
    double t = iv.sample(i, samples);
    Jet3 th = g.theta.jet(t);
    if (!std::isfinite(th.v) || !std::isfinite(th.d1) || th.d1 <= 0.0)
      throw InvariantViolation("transform '" + g.label +
                               "': d(theta)/dt must stay positive (t = " +
                               std::to_string(t) + ")");
    double p = g.phi.value(t);
    if (!std::isfinite(p) || p == 0.0)
      throw InvariantViolation("transform '" + g.label + "': phi vanishes (t = " +
                               std::to_string(t) + ")");
  }
}

// New coefficients read at t~; s = theta^{-1}(t~) throughout:
//   a~^2 = delta1^2 a^2 / theta',  b~ = (phi b + phi') / (phi theta'),
//   c~   = c / (phi^2 theta').
// Third-derivative channels of the results are generally NaN.
inline CoefficientTriple push_coefficients(const EquivTransform& g,
                                           const CoefficientTriple& tr) {
  if (g.is_identity()) return tr;
  validate_transform(g, tr.t_interval);
  if (!g.theta.invertible()) throw Error("transform '" + g.label + "' is not invertible");

  ScalarMap theta = g.theta, phi = g.phi;
  Coefficient a = tr.a, b = tr.b, c = tr.c;
  double dabs = std::fabs(g.delta1);

  auto a_new = Coefficient(
      [theta, a, dabs](double tt) {
        double s = theta.invert(tt);
        Jet3 th = theta.jet(s);
        Jet3 G = (dabs * a.jet(s)) / jet3_sqrt(jet3_shift(th));
        return jet3_compose(G, jet3_inverse(th, s));
      },
      "pushed(" + a.label() + ")");
  auto b_new = Coefficient(
      [theta, phi, b](double tt) {
        double s = theta.invert(tt);
        Jet3 th = theta.jet(s);
        Jet3 ph = phi.jet(s);
        Jet3 G = (ph * b.jet(s) + jet3_shift(ph)) / (ph * jet3_shift(th));
        return jet3_compose(G, jet3_inverse(th, s));
      },
      "pushed(" + b.label() + ")");
  auto c_new = Coefficient(
      [theta, phi, c](double tt) {
        double s = theta.invert(tt);
        Jet3 th = theta.jet(s);
        Jet3 ph = phi.jet(s);
        Jet3 G = c.jet(s) / (ph * ph * jet3_shift(th));
        return jet3_compose(G, jet3_inverse(th, s));
      },
      "pushed(" + c.label() + ")");

  Interval iv{g.theta.value(tr.t_interval.lo), g.theta.value(tr.t_interval.hi)};
  return {a_new, b_new, c_new, iv};
}

// Gauge a~ = 1, b~ = 0 via theta' = a^2 and phi = exp(-int b).
struct GaugeResult {
  EquivTransform transform;
  CoefficientTriple gauged;
};

namespace detail {
inline bool coefficient_is(const Coefficient& f, double target, const Interval& iv) {
  if (f.symbolic()) {
    Box box;
    box.add("t", iv.lo, iv.hi);
    return is_identically_zero(f.expr() - Expr::number(target), box);
  }
  for (int i = 0; i < 48; ++i) {
    double v = f.value(iv.sample(i, 48));
    if (!(std::fabs(v - target) <= 1e-12 * (1.0 + std::fabs(target)))) return false;
  }
  return true;
}
}  // namespace detail

// True when a is identically +-1 and b identically 0 on the interval.
inline bool is_gauged(const CoefficientTriple& tr) {
  return (detail::coefficient_is(tr.a, 1.0, tr.t_interval) ||
          detail::coefficient_is(tr.a, -1.0, tr.t_interval)) &&
         detail::coefficient_is(tr.b, 0.0, tr.t_interval);
}

inline GaugeResult gauge_transform(const CoefficientTriple& tr,
                                   std::optional<double> t_ref_opt = std::nullopt) {
  double t_ref = t_ref_opt.value_or(tr.t_interval.mid());
  if (!tr.t_interval.contains(t_ref)) throw DomainError("t_ref outside the t-interval");
  EquivTransform g;
  bool a_is_one = detail::coefficient_is(tr.a, 1.0, tr.t_interval) ||
                  detail::coefficient_is(tr.a, -1.0, tr.t_interval);
  bool b_is_zero = detail::coefficient_is(tr.b, 0.0, tr.t_interval);
  if (!a_is_one) g.theta = ScalarMap::from_antiderivative(tr.a.squared(), t_ref, 1.0);
  if (!b_is_zero) g.phi = ScalarMap::exp_neg_antiderivative(tr.b, t_ref);
  g.label = "gauge(a->1, b->0; t_ref=" + format_number(t_ref) + ")";
  return {g, push_coefficients(g, tr)};
}

struct WitnessSample {
  double t = 0.0;
  double L = 0.0;
};

struct ReducibilityResult {
  bool reducible = false;
  double lambda = nan_d();
  std::optional<Expr> lambda_expr;
  std::vector<WitnessSample> samples;
  std::string method;  // "symbolic" or "sampled"
};

// L(t) = (b - a'/a + c'/(2c)) / a^2; the triple maps to a constant-coefficient
// instance exactly when L is constant, and then lambda = L.
inline ReducibilityResult reducibility_lambda(const CoefficientTriple& tr,
                                              const ZeroTestOptions& opt = {}) {
  ReducibilityResult res;
  const Interval& iv = tr.t_interval;
  auto sample_L = [&](auto&& L_of_t) {
    for (int i = 0; i < 16; ++i) {
      double t = iv.sample(i, 16);
      res.samples.push_back({t, L_of_t(t)});
    }
  };

  if (tr.a.symbolic() && tr.b.symbolic() && tr.c.symbolic()) {
    res.method = "symbolic";
    Expr a = tr.a.expr(), b = tr.b.expr(), c = tr.c.expr();
    Expr a2 = a * a;
    Expr L = b / a2 + 0.5 * differentiate(c / a2, "t") / c;
    res.lambda_expr = L;
    Coefficient Lc(L);
    sample_L([&](double t) { return Lc.value(t); });
    Box box;
    box.add("t", iv.lo, iv.hi);
    ZeroTestOptions o = opt;
    res.reducible = zero_test(differentiate(L, "t"), box, o).zero;
    if (res.reducible) res.lambda = Lc.value(iv.mid());
    return res;
  }

  res.method = "sampled";
  auto L_jet = [&](double t) {
    Jet3 aj = tr.a.jet(t), bj = tr.b.jet(t), cj = tr.c.jet(t);
    double N = bj.v - aj.d1 / aj.v + 0.5 * cj.d1 / cj.v;
    double dN = bj.d1 - (aj.d2 / aj.v - (aj.d1 / aj.v) * (aj.d1 / aj.v)) +
                0.5 * (cj.d2 / cj.v - (cj.d1 / cj.v) * (cj.d1 / cj.v));
    double a2 = aj.v * aj.v;
    double L = N / a2;
    double dL = dN / a2 - 2.0 * N * aj.d1 / (a2 * aj.v);
    return std::pair<double, double>(L, dL);
  };
  sample_L([&](double t) { return L_jet(t).first; });
  double max_L = 0.0, max_dL = 0.0;
  int n = std::max(64, opt.trials);
  for (int i = 0; i < n; ++i) {
    auto [L, dL] = L_jet(iv.sample(i, n));
    if (!std::isfinite(L) || !std::isfinite(dL))
      throw InconclusiveError("criterion function not evaluable across the interval");
    max_L = std::max(max_L, std::fabs(L));
    max_dL = std::max(max_dL, std::fabs(dL));
  }
  res.reducible = max_dL <= opt.tol * (1.0 + max_L);
  if (res.reducible) res.lambda = L_jet(iv.mid()).first;
  return res;
}

inline nlohmann::json to_json(const ReducibilityResult& r) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& w : r.samples) samples.push_back({{"t", w.t}, {"L", w.L}});
  nlohmann::json j{{"reducible", r.reducible}, {"samples", samples}};
  j["lambda"] = r.reducible ? nlohmann::json(r.lambda) : nlohmann::json(nullptr);
  return j;
}

// Normalize a reducible triple to (1, sgn lambda, 1):
//   lambda != 0:  theta = |lambda| int a^2, delta1 = sqrt|lambda|,
//                 phi = sqrt(c/|lambda|)/a
//   lambda  = 0:  theta = int a^2, delta1 = 1, phi = sqrt(c)/a
// Requires c > 0 on the interval so that phi stays real.
inline EquivTransform to_constant_transform(const CoefficientTriple& tr,
                                            const ReducibilityResult& r,
                                            std::optional<double> t_ref_opt = std::nullopt) {
  if (!r.reducible)
    throw DomainError("triple does not satisfy the constant-coefficient criterion");
  double t_ref = t_ref_opt.value_or(tr.t_interval.mid());
  if (!tr.t_interval.contains(t_ref)) throw DomainError("t_ref outside the t-interval");
  for (int i = 0; i < 64; ++i) {
    double cv = tr.c.value(tr.t_interval.sample(i, 64));
    if (!(cv > 0.0))
      throw DomainError("coefficient c must stay positive for the normalization");
  }
  double lam = r.lambda;
  double alam = std::fabs(lam);
  // Criterion values this close to zero are rounding residue of an exactly
  // vanishing lambda; route them to the zero-lambda normalization.
  bool lam_zero = alam <= 1e-8;
  if (lam_zero) lam = 0.0;
  EquivTransform g;
  bool a_is_one = detail::coefficient_is(tr.a, 1.0, tr.t_interval) ||
                  detail::coefficient_is(tr.a, -1.0, tr.t_interval);
  if (!lam_zero) {
    g.theta = ScalarMap::from_antiderivative(tr.a.squared(), t_ref, alam);
    g.delta1 = std::sqrt(alam);
  } else if (!a_is_one) {
    g.theta = ScalarMap::from_antiderivative(tr.a.squared(), t_ref, 1.0);
  }
  double inv_alam = lam_zero ? 1.0 : 1.0 / alam;
  if (tr.a.symbolic() && tr.c.symbolic()) {
    Expr phi = sqrt(tr.c.expr() * Expr::number(inv_alam)) / tr.a.expr();
    g.phi = ScalarMap::from_expr(phi);
  } else {
    Coefficient a = tr.a, c = tr.c;
    g.phi = ScalarMap::from_jets(
        [a, c, inv_alam](double t) {
          return jet3_sqrt(inv_alam * c.jet(t)) / a.jet(t);
        },
        "sqrt(c/|lambda|)/a");
  }
  g.label = "to-constant(lambda=" + format_number(lam) + ", t_ref=" + format_number(t_ref) + ")";
  return g;
}

// Pull a solution of the transformed instance back to the source variables:
// u(t, x) = u~(theta(t), delta1 x + delta2) / phi(t).
inline Solution pull_solution(const EquivTransform& g, const Solution& target) {
  if (g.is_identity()) return target;
  ScalarMap theta = g.theta, phi = g.phi;
  double d1 = g.delta1, d2 = g.delta2;
  Solution s;
  s.family_id = target.family_id;
  s.params = target.params;
  s.provenance = target.provenance;
  s.provenance.push_back(g.label);
  auto target_eval = target;
  s.eval = [theta, phi, d1, d2, target_eval](double t, double x) {
    Jet3 th = theta.jet(t);
    Jet3 ph = phi.jet(t);
    if (!std::isfinite(th.v) || !std::isfinite(ph.v) || ph.v == 0.0) return field_pole();
    FieldJet w = target_eval.at(th.v, d1 * x + d2);
    if (w.pole) return field_pole();
    FieldJet out;
    out.u = w.u / ph.v;
    out.ut = (w.ut * th.d1) / ph.v - w.u * ph.d1 / (ph.v * ph.v);
    out.ux = w.ux * d1 / ph.v;
    out.uxx = w.uxx * d1 * d1 / ph.v;
    out.pole = false;
    return out;
  };
  if (target.valid) {
    auto tv = target.valid;
    s.valid = [theta, d1, d2, tv](double t, double x) {
      return tv(theta.value(t), d1 * x + d2);
    };
  }
  return s;
}

}  // namespace nws
