#pragma once

// Small fixed-order jet types used throughout: Jet2 for univariate profile
// functions F(z) (value + two z-derivatives), Jet3 for time-dependent scalar
// maps (value + three t-derivatives; an unknown third derivative is carried
// as NaN and confined to the d3 channel), and FieldJet for solution fields
// (u, u_t, u_x, u_xx) with a pole flag.

#include <cmath>
#include <limits>

namespace nws {

inline double nan_d() { return std::numeric_limits<double>::quiet_NaN(); }

// ---------------------------------------------------------------------------

struct Jet2 {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
  bool pole = false;
};

inline Jet2 jet2(double v, double d1, double d2) { return {v, d1, d2, false}; }
inline Jet2 jet2_pole() { return {nan_d(), nan_d(), nan_d(), true}; }

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.pole || b.pole};
}
inline Jet2 operator-(const Jet2& a, const Jet2& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.pole || b.pole};
}
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2,
          a.pole || b.pole};
}
inline Jet2 operator*(double s, const Jet2& a) { return {s * a.v, s * a.d1, s * a.d2, a.pole}; }
inline Jet2 operator/(const Jet2& f, const Jet2& g) {
  if (g.v == 0.0) return jet2_pole();
  double q0 = f.v / g.v;
  double q1 = (f.d1 - q0 * g.d1) / g.v;
  double q2 = (f.d2 - 2.0 * q1 * g.d1 - q0 * g.d2) / g.v;
  Jet2 r{q0, q1, q2, f.pole || g.pole};
  if (!std::isfinite(q0) || !std::isfinite(q1) || !std::isfinite(q2)) r.pole = true;
  return r;
}

// g composed with f: g's derivatives are with respect to its own argument,
// evaluated at f.v.
inline Jet2 jet2_compose(const Jet2& g, const Jet2& f) {
  return {g.v, g.d1 * f.d1, g.d2 * f.d1 * f.d1 + g.d1 * f.d2, g.pole || f.pole};
}

// ---------------------------------------------------------------------------

struct Jet3 {
  double v = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
};

inline Jet3 jet3(double v, double d1, double d2, double d3 = nan_d()) {
  return {v, d1, d2, d3};
}
inline Jet3 jet3_const(double v) { return {v, 0.0, 0.0, 0.0}; }

inline Jet3 operator+(const Jet3& a, const Jet3& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3};
}
inline Jet3 operator-(const Jet3& a, const Jet3& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.d3 - b.d3};
}
inline Jet3 operator*(const Jet3& a, const Jet3& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2,
          a.d3 * b.v + 3.0 * a.d2 * b.d1 + 3.0 * a.d1 * b.d2 + a.v * b.d3};
}
inline Jet3 operator*(double s, const Jet3& a) { return {s * a.v, s * a.d1, s * a.d2, s * a.d3}; }

inline Jet3 jet3_recip(const Jet3& g) {
  double r0 = 1.0 / g.v;
  double r1 = -g.d1 * r0 * r0;
  double r2 = (2.0 * g.d1 * g.d1 - g.v * g.d2) * r0 * r0 * r0;
  double r3 = -g.d3 * r0 * r0 + 6.0 * g.d1 * g.d2 * r0 * r0 * r0 -
              6.0 * g.d1 * g.d1 * g.d1 * r0 * r0 * r0 * r0;
  return {r0, r1, r2, r3};
}
inline Jet3 operator/(const Jet3& a, const Jet3& b) { return a * jet3_recip(b); }

inline Jet3 jet3_exp(const Jet3& f) {
  double e = std::exp(f.v);
  return {e, f.d1 * e, (f.d2 + f.d1 * f.d1) * e,
          (f.d3 + 3.0 * f.d1 * f.d2 + f.d1 * f.d1 * f.d1) * e};
}

inline Jet3 jet3_sqrt(const Jet3& f) {
  double s0 = std::sqrt(f.v);
  double s1 = f.d1 / (2.0 * s0);
  double s2 = (f.d2 - 2.0 * s1 * s1) / (2.0 * s0);
  double s3 = (f.d3 - 6.0 * s1 * s2) / (2.0 * s0);
  return {s0, s1, s2, s3};
}

// Drop the value channel: the jet of f' given the jet of f (the new third
// derivative is unknown).
inline Jet3 jet3_shift(const Jet3& f) { return {f.d1, f.d2, f.d3, nan_d()}; }

// Faa di Bruno to third order: f's derivatives are with respect to its own
// argument, evaluated at s.v; the result is a jet in s's variable.
inline Jet3 jet3_compose(const Jet3& f, const Jet3& s) {
  return {f.v, f.d1 * s.d1, f.d2 * s.d1 * s.d1 + f.d1 * s.d2,
          f.d3 * s.d1 * s.d1 * s.d1 + 3.0 * f.d2 * s.d1 * s.d2 + f.d1 * s.d3};
}

// Jet of the inverse function: given theta's jet at t (theta.d1 != 0), the
// derivatives of theta^{-1} at theta(t). The value channel is t itself.
inline Jet3 jet3_inverse(const Jet3& theta, double t) {
  double s1 = 1.0 / theta.d1;
  double s2 = -theta.d2 * s1 * s1 * s1;
  double s3 = (3.0 * theta.d2 * theta.d2 - theta.d1 * theta.d3) * s1 * s1 * s1 * s1 * s1;
  return {t, s1, s2, s3};
}

// ---------------------------------------------------------------------------

struct FieldJet {
  double u = 0.0, ut = 0.0, ux = 0.0, uxx = 0.0;
  bool pole = false;
};

inline FieldJet field_pole() { return {nan_d(), nan_d(), nan_d(), nan_d(), true}; }
inline FieldJet field_const(double c) { return {c, 0.0, 0.0, 0.0, false}; }
inline FieldJet field_of_t(double v, double vt) { return {v, vt, 0.0, 0.0, false}; }
inline FieldJet field_of_x(double v, double vx, double vxx) { return {v, 0.0, vx, vxx, false}; }

inline FieldJet operator+(const FieldJet& a, const FieldJet& b) {
  return {a.u + b.u, a.ut + b.ut, a.ux + b.ux, a.uxx + b.uxx, a.pole || b.pole};
}
inline FieldJet operator-(const FieldJet& a, const FieldJet& b) {
  return {a.u - b.u, a.ut - b.ut, a.ux - b.ux, a.uxx - b.uxx, a.pole || b.pole};
}
inline FieldJet operator-(const FieldJet& a) { return {-a.u, -a.ut, -a.ux, -a.uxx, a.pole}; }
inline FieldJet operator*(const FieldJet& a, const FieldJet& b) {
  return {a.u * b.u, a.ut * b.u + a.u * b.ut, a.ux * b.u + a.u * b.ux,
          a.uxx * b.u + 2.0 * a.ux * b.ux + a.u * b.uxx, a.pole || b.pole};
}
inline FieldJet operator*(double s, const FieldJet& a) {
  return {s * a.u, s * a.ut, s * a.ux, s * a.uxx, a.pole};
}
inline FieldJet field_recip(const FieldJet& g) {
  if (g.u == 0.0) return field_pole();
  double r = 1.0 / g.u;
  FieldJet out{r, -g.ut * r * r, -g.ux * r * r, (2.0 * g.ux * g.ux - g.u * g.uxx) * r * r * r,
               g.pole};
  if (!std::isfinite(out.u) || !std::isfinite(out.uxx)) out.pole = true;
  return out;
}
inline FieldJet operator/(const FieldJet& a, const FieldJet& b) { return a * field_recip(b); }

// F applied to the field w, where F is the 2-jet of a univariate function
// evaluated at w.u.
inline FieldJet field_compose(const Jet2& F, const FieldJet& w) {
  return {F.v, F.d1 * w.ut, F.d1 * w.ux, F.d2 * w.ux * w.ux + F.d1 * w.uxx, F.pole || w.pole};
}

}  // namespace nws
