#pragma once

// Core domain objects: time-dependent coefficients evaluable as 3-jets,
// coefficient triples (a, b, c) with their working t-interval, vector fields,
// closed-form solutions as field jets, and the PDE residual
// u_t - a^2 u_xx - b u + c u^3.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nws/expr.hpp"
#include "nws/jets.hpp"

namespace nws {

struct Interval {
  double lo = 0.0, hi = 1.0;
  double mid() const { return 0.5 * (lo + hi); }
  double length() const { return hi - lo; }
  // i-th of n equispaced sample points (interior-shifted to avoid endpoints).
  double sample(int i, int n) const { return lo + (hi - lo) * (i + 0.5) / double(n); }
  bool contains(double t) const { return t >= lo && t <= hi; }
};

// A scalar function of t with derivatives up to third order: either symbolic
// (derivatives taken symbolically) or callable (a jet-valued closure, e.g. a
// coefficient produced by pushing a triple through a transform; its d3
// channel may be NaN).
class Coefficient {
 public:
  Coefficient() : Coefficient(Expr::number(0.0)) {}
  explicit Coefficient(const Expr& e, std::string var = "t")
      : expr_(e),
        d1_(differentiate(e, var)),
        d2_(differentiate(d1_, var)),
        d3_(differentiate(d2_, var)),
        var_(std::move(var)),
        label_(to_text(e)),
        symbolic_(true) {}
  Coefficient(std::function<Jet3(double)> fn, std::string label)
      : fn_(std::move(fn)), label_(std::move(label)), symbolic_(false) {}

  static Coefficient parse(const std::string& text) {
    return Coefficient(parse_expr(text, {"t"}));
  }

  Jet3 jet(double t) const {
    if (!symbolic_) return fn_(t);
    EvalPoint p;
    p.set(var_, t);
    auto ev = [&](const Expr& e) {
      EvalResult r = evaluate(e, p);
      return r.pole ? nan_d() : r.value;
    };
    return {ev(expr_), ev(d1_), ev(d2_), ev(d3_)};
  }
  double value(double t) const { return jet(t).v; }

  bool symbolic() const { return symbolic_; }
  const Expr& expr() const {
    if (!symbolic_) throw Error("coefficient '" + label_ + "' is not symbolic");
    return expr_;
  }
  const std::string& label() const { return label_; }

  Coefficient squared() const {
    if (symbolic_) return Coefficient(expr_ * expr_, var_);
    auto f = fn_;
    return Coefficient([f](double t) { Jet3 j = f(t); return j * j; },
                       "(" + label_ + ")^2");
  }

 private:
  Expr expr_, d1_, d2_, d3_;
  std::function<Jet3(double)> fn_;
  std::string var_ = "t";
  std::string label_;
  bool symbolic_ = true;
};

struct CoefficientTriple {
  Coefficient a, b, c;
  Interval t_interval;
};

inline CoefficientTriple parse_triple(const std::string& a, const std::string& b,
                                      const std::string& c, double lo, double hi) {
  return {Coefficient::parse(a), Coefficient::parse(b), Coefficient::parse(c), {lo, hi}};
}

// a and c must be finite and nonvanishing across the interval; a sign change
// between neighboring samples betrays a zero even if no sample hits it.
inline void validate_triple(const CoefficientTriple& tr, int samples = 64) {
  auto check = [&](const Coefficient& f, const char* which) {
    double prev = 0.0;
    for (int i = 0; i < samples; ++i) {
      double t = tr.t_interval.sample(i, samples);
      double v = f.value(t);
      if (!std::isfinite(v) || v == 0.0)
        throw InvariantViolation(std::string("coefficient ") + which + " ('" + f.label() +
                                 "') is singular or vanishes near t = " + std::to_string(t));
      if (i > 0 && ((prev < 0.0) != (v < 0.0)))
        throw InvariantViolation(std::string("coefficient ") + which + " ('" + f.label() +
                                 "') changes sign inside the interval");
      prev = v;
    }
  };
  check(tr.a, "a");
  check(tr.c, "c");
  for (int i = 0; i < samples; ++i) {
    double t = tr.t_interval.sample(i, samples);
    if (!std::isfinite(tr.b.value(t)))
      throw InvariantViolation("coefficient b ('" + tr.b.label() +
                               "') is singular near t = " + std::to_string(t));
  }
}

struct PDEInstance {
  CoefficientTriple coeffs;
};

inline PDEInstance parse_instance(const std::string& a, const std::string& b,
                                  const std::string& c, double lo, double hi) {
  PDEInstance p{parse_triple(a, b, c, lo, hi)};
  validate_triple(p.coeffs);
  return p;
}

// Candidate symmetry / reduction operator tau dt + xi dx + eta du.
struct VectorField {
  Expr tau, xi, eta;
  std::string display() const {
    return "(" + to_text(tau) + ") dt + (" + to_text(xi) + ") dx + (" + to_text(eta) + ") du";
  }
};

struct Solution {
  std::string family_id;
  std::map<std::string, double> params;
  std::function<FieldJet(double, double)> eval;
  std::function<bool(double, double)> valid;  // predicted pole-free
  std::vector<std::string> provenance;

  FieldJet at(double t, double x) const {
    if (valid && !valid(t, x)) return field_pole();
    FieldJet j = eval(t, x);
    if (!j.pole && !(std::isfinite(j.u) && std::isfinite(j.ut) && std::isfinite(j.ux) &&
                     std::isfinite(j.uxx)))
      return field_pole();
    return j;
  }
};

inline std::optional<double> residual(const PDEInstance& p, const Solution& s, double t,
                                      double x) {
  FieldJet j = s.at(t, x);
  if (j.pole) return std::nullopt;
  double a = p.coeffs.a.value(t);
  double b = p.coeffs.b.value(t);
  double c = p.coeffs.c.value(t);
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) return std::nullopt;
  return j.ut - a * a * j.uxx - b * j.u + c * j.u * j.u * j.u;
}

struct GridSpec {
  double t0 = 0.0, t1 = 1.0;
  int nt = 2;
  double x0 = -1.0, x1 = 1.0;
  int nx = 2;
  double t_at(int i) const { return nt > 1 ? t0 + (t1 - t0) * i / double(nt - 1) : t0; }
  double x_at(int j) const { return nx > 1 ? x0 + (x1 - x0) * j / double(nx - 1) : x0; }
};

struct ResidualStats {
  double max_abs = 0.0;
  double rms = 0.0;
  long n_evaluated = 0;
  long n_poles = 0;
  GridSpec grid;
};

inline ResidualStats residual_stats(const PDEInstance& p, const Solution& s,
                                    const GridSpec& grid) {
  ResidualStats st;
  st.grid = grid;
  double sumsq = 0.0;
  for (int i = 0; i < grid.nt; ++i) {
    for (int j = 0; j < grid.nx; ++j) {
      std::optional<double> r = residual(p, s, grid.t_at(i), grid.x_at(j));
      if (!r) {
        ++st.n_poles;
        continue;
      }
      ++st.n_evaluated;
      double v = std::fabs(*r);
      st.max_abs = std::max(st.max_abs, v);
      sumsq += v * v;
    }
  }
  if (st.n_evaluated == 0) throw Error("every grid point is a pole");
  st.rms = std::sqrt(sumsq / double(st.n_evaluated));
  return st;
}

inline nlohmann::json to_json(const GridSpec& g) {
  return {{"t0", g.t0}, {"t1", g.t1}, {"nt", g.nt}, {"x0", g.x0}, {"x1", g.x1}, {"nx", g.nx}};
}

inline nlohmann::json to_json(const ResidualStats& st) {
  return {{"max_abs", st.max_abs},
          {"rms", st.rms},
          {"n_evaluated", st.n_evaluated},
          {"n_poles", st.n_poles},
          {"grid", to_json(st.grid)}};
}

}  // namespace nws
