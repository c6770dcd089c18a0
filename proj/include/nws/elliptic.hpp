#pragma once

// Real-argument Jacobi elliptic functions sn, cn, dn and the complete
// elliptic integral K, via the arithmetic-geometric mean and the descending
// Landen recursion (Abramowitz & Stegun 16.4 / 17.6). Values carry analytic
// first and second derivatives in the argument.

#include <algorithm>
#include <cmath>
#include <optional>

#include "nws/errors.hpp"
#include "nws/jets.hpp"

namespace nws {

inline double elliptic_K(double k) {
  if (!(k >= 0.0) || k >= 1.0) throw DomainError("elliptic_K requires modulus k in [0, 1)");
  double a = 1.0;
  double b = std::sqrt((1.0 - k) * (1.0 + k));
  for (int i = 0; i < 64 && std::fabs(a - b) > 1e-17 * a; ++i) {
    double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return 1.57079632679489661923 / a;
}

struct EllipticJet {
  double sn = 0.0, cn = 1.0, dn = 1.0;
  double d1_sn = 0.0, d1_cn = 0.0, d1_dn = 0.0;
  double d2_sn = 0.0, d2_cn = 0.0, d2_dn = 0.0;
  double k = 0.0;

  Jet2 sn_jet() const { return jet2(sn, d1_sn, d2_sn); }
  Jet2 cn_jet() const { return jet2(cn, d1_cn, d2_cn); }
  Jet2 dn_jet() const { return jet2(dn, d1_dn, d2_dn); }
};

namespace detail {

inline void sncndn(double z, double k, double& sn, double& cn, double& dn) {
  if (!(k >= 0.0) || k > 1.0) throw DomainError("jacobi modulus must lie in [0, 1]");
  if (k < 1e-10) {
    sn = std::sin(z);
    cn = std::cos(z);
    dn = 1.0;
    return;
  }
  if (k == 1.0) {
    sn = std::tanh(z);
    cn = 1.0 / std::cosh(z);
    dn = cn;
    return;
  }
  // Reduce by the common period 4K to keep the scaled phase small.
  double K = elliptic_K(k);
  z = std::remainder(z, 4.0 * K);

  double a[32], c[32];
  a[0] = 1.0;
  c[0] = k;
  double b = std::sqrt((1.0 - k) * (1.0 + k));
  int n = 0;
  while (std::fabs(c[n]) > 1e-16 * a[n] && n < 30) {
    double an = a[n];
    a[n + 1] = 0.5 * (an + b);
    c[n + 1] = 0.5 * (an - b);
    b = std::sqrt(an * b);
    ++n;
  }
  double phi = std::ldexp(1.0, n) * a[n] * z;
  for (int i = n; i >= 1; --i) {
    double s = (c[i] / a[i]) * std::sin(phi);
    s = std::clamp(s, -1.0, 1.0);
    phi = 0.5 * (phi + std::asin(s));
  }
  sn = std::sin(phi);
  cn = std::cos(phi);
  double d2 = 1.0 - k * k * sn * sn;
  dn = std::sqrt(std::max(d2, 0.0));
}

}  // namespace detail

inline EllipticJet jacobi_jet(double z, double k) {
  EllipticJet j;
  j.k = k;
  detail::sncndn(z, k, j.sn, j.cn, j.dn);
  double k2 = k * k;
  j.d1_sn = j.cn * j.dn;
  j.d1_cn = -j.sn * j.dn;
  j.d1_dn = -k2 * j.sn * j.cn;
  j.d2_sn = 2.0 * k2 * j.sn * j.sn * j.sn - (1.0 + k2) * j.sn;
  j.d2_cn = (2.0 * k2 * j.sn * j.sn - 1.0) * j.cn;
  j.d2_dn = k2 * (2.0 * j.sn * j.sn - 1.0) * j.dn;
  return j;
}

// ds(z,k) = dn/sn, with a pole wherever sn vanishes (z = 0 mod 2K).
inline Jet2 jacobi_ds_jet(double z, double k) {
  EllipticJet j = jacobi_jet(z, k);
  if (std::fabs(j.sn) < 1e-12) return jet2_pole();
  return j.dn_jet() / j.sn_jet();
}

inline std::optional<double> jacobi_ds(double z, double k) {
  Jet2 j = jacobi_ds_jet(z, k);
  if (j.pole) return std::nullopt;
  return j.v;
}

}  // namespace nws
