#pragma once

// Adaptive Gauss-Kronrod (G7,K15) quadrature, antiderivative handles with a
// memoized checkpoint table, and safeguarded inversion of monotone functions.

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <string>

#include "nws/errors.hpp"

namespace nws {

using RealFn = std::function<double(double)>;

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
inline const double kGkNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline const double kGkWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline const double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelResult {
  double kronrod;
  double err;
};

inline PanelResult gk15(const RealFn& f, double a, double b) {
  double mid = 0.5 * (a + b);
  double half = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    double dx = half * kGkNodes[i];
    fv[i] = f(mid - dx);
    fv[14 - i] = f(mid + dx);
  }
  fv[7] = f(mid);
  double kron = 0.0, gauss = 0.0;
  for (int i = 0; i < 8; ++i) {
    double pair = (i == 7) ? fv[7] : fv[i] + fv[14 - i];
    kron += kGkWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  kron *= half;
  gauss *= half;
  if (!std::isfinite(kron))
    throw QuadratureError("integrand not finite on [" + std::to_string(a) + ", " +
                          std::to_string(b) + "]");
  return {kron, std::fabs(kron - gauss)};
}

inline double adaptive(const RealFn& f, double a, double b, double tol, int depth) {
  PanelResult p = gk15(f, a, b);
  if (p.err <= tol || p.err <= 1e-16 * std::fabs(p.kronrod)) return p.kronrod;
  if (depth <= 0)
    throw QuadratureError("quadrature failed to converge on [" + std::to_string(a) + ", " +
                          std::to_string(b) + "]");
  double mid = 0.5 * (a + b);
  return adaptive(f, a, mid, 0.5 * tol, depth - 1) + adaptive(f, mid, b, 0.5 * tol, depth - 1);
}

}  // namespace detail

inline double integrate(const RealFn& f, double a, double b, double tol = 1e-12) {
  if (a == b) return 0.0;
  return detail::adaptive(f, a, b, tol, 48);
}

// F(t) = integral of f from t_ref to t, with F(t_ref) = 0. Checkpoints are
// accumulated on the unit-spaced grid t_ref + j so that stored values do not
// depend on query order and far queries reuse earlier panels. The table is
// mutex-guarded; handles are shareable across threads.
class AntiderivativeHandle {
 public:
  AntiderivativeHandle() = default;
  AntiderivativeHandle(RealFn integrand, double t_ref, double tol = 1e-12)
      : f_(std::move(integrand)), t_ref_(t_ref), tol_(tol) {}

  double operator()(double t) const {
    std::lock_guard<std::mutex> lock(mu_);
    double off = t - t_ref_;
    long j = static_cast<long>(std::trunc(off));
    double base = checkpoint(j);
    return base + integrate(f_, t_ref_ + double(j), t, tol_);
  }
  double value(double t) const { return (*this)(t); }

  double base_point() const { return t_ref_; }
  double tolerance() const { return tol_; }
  std::size_t checkpoint_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return table_.size();
  }

 private:
  // Requires mu_ held.
  double checkpoint(long j) const {
    auto it = table_.find(j);
    if (it != table_.end()) return it->second;
    if (j == 0) return table_[0] = 0.0;
    long step = j > 0 ? 1 : -1;
    long near_ = 0;
    for (long i = j - step; i != 0; i -= step) {
      if (table_.count(i)) {
        near_ = i;
        break;
      }
    }
    double acc = near_ == 0 ? checkpoint(0) : table_[near_];
    for (long i = near_; i != j; i += step) {
      acc += integrate(f_, t_ref_ + double(i), t_ref_ + double(i + step), tol_);
      table_[i + step] = acc;
    }
    return acc;
  }

  RealFn f_;
  double t_ref_ = 0.0;
  double tol_ = 1e-12;
  mutable std::mutex mu_;
  mutable std::map<long, double> table_;
};

// Solve F(t) = y for strictly monotone F with derivative dF, starting from
// `hint`: expanding bracket, then bisection safeguarded Newton refinement.
inline double invert_monotone(const RealFn& F, const RealFn& dF, double y, double hint,
                              double tol = 1e-13) {
  double f0 = F(hint);
  if (f0 == y) return hint;
  double probe = F(hint + 1.0);
  double sgn = (probe >= f0) ? 1.0 : -1.0;  // sign making sgn*F increasing
  double Y = sgn * y;
  auto G = [&](double t) { return sgn * F(t); };

  double lo = hint, hi = hint;
  double glo = sgn * f0, ghi = glo;
  double step = 1.0;
  for (int i = 0; i < 200 && glo > Y; ++i) {
    hi = lo;
    ghi = glo;
    lo -= step;
    glo = G(lo);
    step *= 2.0;
  }
  step = 1.0;
  for (int i = 0; i < 200 && ghi < Y; ++i) {
    lo = hi;
    glo = ghi;
    hi += step;
    ghi = G(hi);
    step *= 2.0;
  }
  if (!(glo <= Y && Y <= ghi)) throw InversionError("failed to bracket the target value");

  double t = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    double g = G(t);
    if (g > Y)
      hi = t;
    else
      lo = t;
    if (hi - lo <= tol * (1.0 + std::fabs(t))) break;
    double d = sgn * dF(t);
    double tn = (d != 0.0) ? t - (g - Y) / d : t;
    if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
    t = tn;
  }
  return t;
}

}  // namespace nws
