#pragma once

// Method-of-lines solver for u_t = a^2(t) u_xx + b(t) u - c(t) u^3: uniform
// grid, second-order central differences in x, Dirichlet boundary columns
// read from a reference field at each stage time, and an adaptive embedded
// Runge-Kutta 5(4) pair (Dormand-Prince coefficients) in time.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nws/errors.hpp"
#include "nws/model.hpp"

namespace nws {

struct SolveStats {
  long steps = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

inline nlohmann::json to_json(const SolveStats& s) {
  return {{"steps", s.steps}, {"rejected", s.rejected}, {"rhs_evals", s.rhs_evals}};
}

using SpaceTimeFn = std::function<double(double, double)>;

inline SpaceTimeFn as_space_time_fn(const Solution& s) {
  return [s](double t, double x) {
    FieldJet j = s.at(t, x);
    if (j.pole)
      throw DomainError("reference field has a pole at (t, x) = (" + std::to_string(t) +
                        ", " + std::to_string(x) + ")");
    return j.u;
  };
}

struct MolOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  long max_steps = 5'000'000;
  double h_min_rel = 1e-13;
};

struct NumericField {
  std::vector<double> t_levels;
  std::vector<double> x_nodes;
  std::vector<std::vector<double>> values;  // one row per stored level
  SolveStats stats;
};

inline NumericField mol_solve(const PDEInstance& p, const SpaceTimeFn& ref,
                              const GridSpec& grid, const MolOptions& opt = {}) {
  if (grid.nx < 3) throw DomainError("need at least 3 space nodes");
  if (grid.nt < 2) throw DomainError("need at least 2 stored time levels");
  if (!(grid.t1 > grid.t0) || !(grid.x1 > grid.x0))
    throw DomainError("grid extents must be increasing");

  const int nx = grid.nx;
  const int m = nx - 2;
  const double dx = (grid.x1 - grid.x0) / (nx - 1);
  const double inv_dx2 = 1.0 / (dx * dx);

  NumericField out;
  out.x_nodes.resize(nx);
  for (int j = 0; j < nx; ++j) out.x_nodes[j] = grid.x_at(j);

  std::vector<double> y(m);
  for (int i = 0; i < m; ++i) y[i] = ref(grid.t0, out.x_nodes[i + 1]);

  SolveStats st;
  auto rhs = [&](double t, const std::vector<double>& u, std::vector<double>& f) {
    ++st.rhs_evals;
    double a = p.coeffs.a.value(t);
    double a2 = a * a;
    double b = p.coeffs.b.value(t);
    double c = p.coeffs.c.value(t);
    if (!std::isfinite(a2) || !std::isfinite(b) || !std::isfinite(c))
      throw DomainError("coefficients not evaluable at t = " + std::to_string(t));
    double lb = ref(t, out.x_nodes[0]);
    double rb = ref(t, out.x_nodes[nx - 1]);
    for (int i = 0; i < m; ++i) {
      double um = (i > 0) ? u[i - 1] : lb;
      double up = (i + 1 < m) ? u[i + 1] : rb;
      f[i] = a2 * (um - 2.0 * u[i] + up) * inv_dx2 + b * u[i] - c * u[i] * u[i] * u[i];
    }
  };

  // Dormand-Prince 5(4) tableau
  static const double a21 = 1.0 / 5.0;
  static const double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static const double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static const double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                      a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static const double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                      a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static const double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static const double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                      b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
  static const double e1 = 5179.0 / 57600.0, e3 = 7571.0 / 16695.0, e4 = 393.0 / 640.0,
                      e5 = -92097.0 / 339200.0, e6 = 187.0 / 2100.0, e7 = 1.0 / 40.0;

  std::vector<double> k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), k7(m), ytmp(m), y5(m);

  double t = grid.t0;
  const double T = grid.t1;
  int next_store = 0;
  auto store_level = [&](double tl) {
    std::vector<double> row(nx);
    row[0] = ref(tl, out.x_nodes[0]);
    row[nx - 1] = ref(tl, out.x_nodes[nx - 1]);
    for (int i = 0; i < m; ++i) row[i + 1] = y[i];
    out.t_levels.push_back(tl);
    out.values.push_back(std::move(row));
  };
  store_level(t);
  next_store = 1;

  rhs(t, y, k1);
  double h = (T - t) / 100.0;

  // k1 always holds the derivative at (t, y): seeded above, refreshed by the
  // first-same-as-last swap on acceptance, untouched by rejections.
  while (t < T) {
    double t_target = grid.t_at(next_store);
    if (h > t_target - t) h = t_target - t;
    if (h < opt.h_min_rel * (1.0 + std::fabs(t)))
      throw StepSizeUnderflow("time step collapsed below the relative floor", t);
    if (st.steps + st.rejected > opt.max_steps)
      throw Error("step budget exhausted before reaching the final time");

    for (int i = 0; i < m; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, ytmp, k2);
    for (int i = 0; i < m; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, ytmp, k3);
    for (int i = 0; i < m; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, ytmp, k4);
    for (int i = 0; i < m; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, ytmp, k5);
    for (int i = 0; i < m; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                            a65 * k5[i]);
    rhs(t + h, ytmp, k6);
    for (int i = 0; i < m; ++i)
      y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(t + h, y5, k7);

    double err = 0.0;
    for (int i = 0; i < m; ++i) {
      double y4i = y[i] + h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                               e6 * k6[i] + e7 * k7[i]);
      double sc = opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
      double d = (y5[i] - y4i) / sc;
      err += d * d;
    }
    err = std::sqrt(err / m);

    if (err <= 1.0) {
      t += h;
      y.swap(y5);
      k1.swap(k7);  // first-same-as-last
      ++st.steps;
      if (t >= t_target - 1e-14 * (1.0 + std::fabs(t_target))) {
        t = t_target;
        store_level(t);
        ++next_store;
        if (next_store >= grid.nt) break;
      }
    } else {
      ++st.rejected;
    }
    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    h *= std::min(5.0, std::max(0.2, fac));
  }

  out.stats = st;
  return out;
}

// Largest pointwise deviation from the reference on the final stored level.
inline double max_error_final(const NumericField& f, const SpaceTimeFn& ref) {
  if (f.t_levels.empty()) throw Error("field holds no stored levels");
  double t = f.t_levels.back();
  const std::vector<double>& row = f.values.back();
  double m = 0.0;
  for (std::size_t j = 0; j < f.x_nodes.size(); ++j)
    m = std::max(m, std::fabs(row[j] - ref(t, f.x_nodes[j])));
  return m;
}

struct ConvergenceReport {
  double p12 = nan_d();
  double p23 = nan_d();
  bool degenerate = false;  // errors at the rounding floor carry no rate
};

inline ConvergenceReport convergence_order(double err1, double err2, double err3) {
  ConvergenceReport r;
  const double floor = 1e-13;
  if (!(err1 > floor) || !(err2 > floor) || !(err3 > floor)) {
    r.degenerate = true;
    return r;
  }
  r.p12 = std::log2(err1 / err2);
  r.p23 = std::log2(err2 / err3);
  return r;
}

}  // namespace nws
