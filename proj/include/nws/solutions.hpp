#pragma once

// Closed-form solution families of the constant-coefficient instances
// u_t = u_xx + eps u - u^3 with eps in {+1, -1, 0}, and their transport to
// arbitrary reducible variable-coefficient instances through the
// normalization transform.  Elliptic profiles use the fixed modulus
// k = sqrt(2)/2.

#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nws/elliptic.hpp"
#include "nws/equivalence.hpp"
#include "nws/errors.hpp"
#include "nws/jets.hpp"
#include "nws/model.hpp"

namespace nws {

struct FamilyParams {
  std::map<std::string, double> values;
  bool negate = false;  // u -> -u, a solution again since the cubic is odd
};

struct FamilyInfo {
  std::string id;
  int eps = 1;
  std::vector<std::string> param_names;
  std::string description;
};

inline const std::vector<FamilyInfo>& list_families() {
  static const std::vector<FamilyInfo> table = {
      {"TW", 1, {}, "traveling kink (1 - tanh(sqrt(2)/4 x - 3/4 t)) / 2"},
      {"P1", 1, {"C1", "C1p", "C2"}, "ratio of three exponential modes"},
      {"P2", 1, {"C1", "C2"}, "sinh envelope times dn/sn of a cosh phase"},
      {"P3", 1, {"C1", "C2"}, "cosh envelope times dn/sn of a sinh phase"},
      {"P4", 1, {"C1", "C2"}, "sinh envelope times (1+cn)/sn of a cosh phase"},
      {"P5", 1, {"C1", "C2"}, "cosh envelope times (1+cn)/sn of a sinh phase"},
      {"N1", -1, {"C2"}, "sine over exponentially shifted cosine"},
      {"N2", -1, {"C1", "C2"}, "sine envelope times dn/sn of a cosine phase"},
      {"N3", -1, {"C1", "C2"}, "cosine envelope times (1+cn)/sn of a sine phase"},
      {"Z1", 0, {}, "2 sqrt(2) x dn/sn of x^2 + 6t"},
      {"Z2", 0, {}, "sqrt(2) x (1+cn)/sn of x^2 + 6t"},
      {"Z3", 0, {}, "rational hump 2 sqrt(2) x / (x^2 + 6t)"},
      {"Z4", 0, {}, "stationary hyperbola sqrt(2)/x"},
      {"Z5", 0, {}, "stationary sqrt(2) dn/sn of x"},
      {"Z6", 0, {}, "stationary sqrt(2)/2 (1+cn)/sn of x"},
  };
  return table;
}

inline const FamilyInfo& family_info(const std::string& id) {
  for (const auto& f : list_families())
    if (f.id == id) return f;
  throw DomainError("unknown solution family '" + id + "'");
}

namespace detail {

inline double family_modulus() { return std::sqrt(0.5); }
inline double family_quarter_period() {
  static const double K = elliptic_K(family_modulus());
  return K;
}
constexpr double kPoleMargin = 0.05;

inline Jet2 jexp(double z) {
  double e = std::exp(z);
  return jet2(e, e, e);
}
inline Jet2 jsinh(double z) { return jet2(std::sinh(z), std::cosh(z), std::sinh(z)); }
inline Jet2 jcosh(double z) { return jet2(std::cosh(z), std::sinh(z), std::cosh(z)); }
inline Jet2 jsin(double z) { return jet2(std::sin(z), std::cos(z), -std::sin(z)); }
inline Jet2 jcos(double z) { return jet2(std::cos(z), -std::sin(z), -std::cos(z)); }
inline Jet2 jtanh(double z) {
  double th = std::tanh(z);
  double s = 1.0 - th * th;
  return jet2(th, s, -2.0 * th * s);
}

// (1 + cn z)/sn z, switching to the identical form sn/(1 - cn) when that
// denominator is better conditioned; the genuine poles sit at z = 0 mod 4K.
inline Jet2 half_angle_ratio(double z, double k) {
  EllipticJet e = jacobi_jet(z, k);
  Jet2 one = jet2(1.0, 0.0, 0.0);
  if (std::fabs(e.sn) >= std::fabs(1.0 - e.cn)) return (one + e.cn_jet()) / e.sn_jet();
  return e.sn_jet() / (one - e.cn_jet());
}

inline double lattice_distance(double z, double period) {
  return std::fabs(std::remainder(z, period));
}

inline double param(const FamilyParams& p, const std::string& name, double dflt) {
  auto it = p.values.find(name);
  return it == p.values.end() ? dflt : it->second;
}

inline void reject_unknown_params(const FamilyInfo& info, const FamilyParams& p) {
  for (const auto& kv : p.values) {
    bool known = false;
    for (const auto& n : info.param_names) known = known || (n == kv.first);
    if (!known)
      throw DomainError("family " + info.id + " has no parameter '" + kv.first + "'");
  }
}

}  // namespace detail

// A member of the named family as a solution of u_t = u_xx + eps u - u^3.
// Defaults: C1 = C1p = 1 and C2 = 0, except C2 = 1 where the zero value would
// put a pole through the origin (P3, P5, N1, N3).
inline Solution constant_solution(const std::string& id, int eps,
                                  const FamilyParams& params = {}) {
  const FamilyInfo& info = family_info(id);
  if (info.eps != eps)
    throw SignMismatchError("family " + id + " solves the instance with linear sign " +
                            std::to_string(info.eps) + ", not " + std::to_string(eps));
  detail::reject_unknown_params(info, params);

  const double s2h = std::sqrt(0.5);     // sqrt(2)/2
  const double k = detail::family_modulus();
  const double K2 = 2.0 * detail::family_quarter_period();
  const double K4 = 2.0 * K2;
  const double margin = detail::kPoleMargin;

  Solution s;
  s.family_id = id;
  s.params["eps"] = double(eps);
  for (const auto& n : info.param_names) {
    double dflt = (n == "C2") ? ((id == "P3" || id == "P5" || id == "N1" || id == "N3")
                                     ? 1.0
                                     : 0.0)
                              : 1.0;
    s.params[n] = detail::param(params, n, dflt);
  }
  s.provenance.push_back("family " + id + " on the constant instance (eps = " +
                         std::to_string(eps) + ")");

  auto needs_C1 = [&]() {
    if (s.params.at("C1") == 0.0)
      throw DomainError("family " + id + " degenerates when C1 = 0");
  };

  if (id == "TW") {
    s.eval = [s2h](double t, double x) {
      FieldJet z{0.5 * s2h * x - 0.75 * t, -0.75, 0.5 * s2h, 0.0, false};
      return 0.5 * (field_const(1.0) - field_compose(detail::jtanh(z.u), z));
    };
  } else if (id == "P1") {
    double C1 = s.params.at("C1"), C1p = s.params.at("C1p"), C2 = s.params.at("C2");
    if (C1 == 0.0 && C1p == 0.0 && C2 == 0.0)
      throw DomainError("family P1 is undefined when all constants vanish");
    auto den_value = [C1, C1p, C2, s2h](double t, double x) {
      double L = s2h * x;
      return C2 * std::exp(-1.5 * t) + C1 * std::exp(L) + C1p * std::exp(-L);
    };
    s.eval = [C1, C1p, C2, s2h](double t, double x) {
      FieldJet Lf{s2h * x, 0.0, s2h, 0.0, false};
      FieldJet eL = field_compose(detail::jexp(Lf.u), Lf);
      FieldJet emL = field_compose(detail::jexp(-Lf.u), -Lf);
      FieldJet Ef = field_of_t(std::exp(-1.5 * t), -1.5 * std::exp(-1.5 * t));
      return (C1 * eL - C1p * emL) / (C2 * Ef + C1 * eL + C1p * emL);
    };
    s.valid = [den_value, margin](double t, double x) {
      return std::fabs(den_value(t, x)) >= margin;
    };
  } else if (id == "P2" || id == "P3" || id == "P4" || id == "P5") {
    needs_C1();
    double C1 = s.params.at("C1"), C2 = s.params.at("C2");
    bool sinh_envelope = (id == "P2" || id == "P4");
    bool ratio = (id == "P4" || id == "P5");
    auto arg_value = [C1, C2, s2h, sinh_envelope](double t, double x) {
      double L = s2h * x;
      double phase = sinh_envelope ? std::cosh(L) : std::sinh(L);
      return C1 * std::exp(1.5 * t) * phase + C2;
    };
    s.eval = [C1, C2, s2h, sinh_envelope, ratio, k](double t, double x) {
      FieldJet Lf{s2h * x, 0.0, s2h, 0.0, false};
      FieldJet E = field_of_t(std::exp(1.5 * t), 1.5 * std::exp(1.5 * t));
      FieldJet sh = field_compose(detail::jsinh(Lf.u), Lf);
      FieldJet ch = field_compose(detail::jcosh(Lf.u), Lf);
      FieldJet env = sinh_envelope ? sh : ch;
      FieldJet phase = sinh_envelope ? ch : sh;
      FieldJet M = (ratio ? 0.5 * C1 : C1) * (E * env);
      FieldJet arg = C1 * (E * phase) + field_const(C2);
      Jet2 G = ratio ? detail::half_angle_ratio(arg.u, k) : jacobi_ds_jet(arg.u, k);
      return M * field_compose(G, arg);
    };
    double period = ratio ? K4 : K2;
    s.valid = [arg_value, period, margin](double t, double x) {
      return detail::lattice_distance(arg_value(t, x), period) >= margin;
    };
  } else if (id == "N1") {
    double C2 = s.params.at("C2");
    auto den_value = [C2, s2h](double t, double x) {
      return C2 * std::exp(1.5 * t) + std::cos(s2h * x);
    };
    s.eval = [C2, s2h](double t, double x) {
      FieldJet Sf{s2h * x, 0.0, s2h, 0.0, false};
      FieldJet sinS = field_compose(detail::jsin(Sf.u), Sf);
      FieldJet cosS = field_compose(detail::jcos(Sf.u), Sf);
      FieldJet E = field_of_t(std::exp(1.5 * t), 1.5 * std::exp(1.5 * t));
      return sinS / (C2 * E + cosS);
    };
    s.valid = [den_value, margin](double t, double x) {
      return std::fabs(den_value(t, x)) >= margin;
    };
  } else if (id == "N2" || id == "N3") {
    needs_C1();
    double C1 = s.params.at("C1"), C2 = s.params.at("C2");
    bool ratio = (id == "N3");
    auto arg_value = [C1, C2, s2h, ratio](double t, double x) {
      double S = s2h * x;
      double phase = ratio ? std::sin(S) : std::cos(S);
      return C1 * std::exp(-1.5 * t) * phase + C2;
    };
    s.eval = [C1, C2, s2h, ratio, k](double t, double x) {
      FieldJet Sf{s2h * x, 0.0, s2h, 0.0, false};
      FieldJet E = field_of_t(std::exp(-1.5 * t), -1.5 * std::exp(-1.5 * t));
      FieldJet sinS = field_compose(detail::jsin(Sf.u), Sf);
      FieldJet cosS = field_compose(detail::jcos(Sf.u), Sf);
      FieldJet env = ratio ? cosS : sinS;
      FieldJet phase = ratio ? sinS : cosS;
      FieldJet M = (ratio ? 0.5 * C1 : C1) * (E * env);
      FieldJet arg = C1 * (E * phase) + field_const(C2);
      Jet2 G = ratio ? detail::half_angle_ratio(arg.u, k) : jacobi_ds_jet(arg.u, k);
      return M * field_compose(G, arg);
    };
    double period = ratio ? K4 : K2;
    s.valid = [arg_value, period, margin](double t, double x) {
      return detail::lattice_distance(arg_value(t, x), period) >= margin;
    };
  } else if (id == "Z1" || id == "Z2") {
    bool ratio = (id == "Z2");
    double amp = ratio ? std::sqrt(2.0) : 2.0 * std::sqrt(2.0);
    s.eval = [amp, ratio, k](double t, double x) {
      FieldJet w{x * x + 6.0 * t, 6.0, 2.0 * x, 2.0, false};
      FieldJet xf = field_of_x(x, 1.0, 0.0);
      Jet2 G = ratio ? detail::half_angle_ratio(w.u, k) : jacobi_ds_jet(w.u, k);
      return amp * (xf * field_compose(G, w));
    };
    double period = ratio ? K4 : K2;
    s.valid = [period, margin](double t, double x) {
      return detail::lattice_distance(x * x + 6.0 * t, period) >= margin;
    };
  } else if (id == "Z3") {
    s.eval = [](double t, double x) {
      FieldJet w{x * x + 6.0 * t, 6.0, 2.0 * x, 2.0, false};
      FieldJet xf = field_of_x(x, 1.0, 0.0);
      return 2.0 * std::sqrt(2.0) * (xf / w);
    };
    s.valid = [margin](double t, double x) { return std::fabs(x * x + 6.0 * t) >= margin; };
  } else if (id == "Z4") {
    s.eval = [](double, double x) {
      return std::sqrt(2.0) * field_recip(field_of_x(x, 1.0, 0.0));
    };
    s.valid = [margin](double, double x) { return std::fabs(x) >= margin; };
  } else if (id == "Z5" || id == "Z6") {
    bool ratio = (id == "Z6");
    double amp = ratio ? std::sqrt(0.5) : std::sqrt(2.0);
    s.eval = [amp, ratio, k](double, double x) {
      FieldJet xf = field_of_x(x, 1.0, 0.0);
      Jet2 G = ratio ? detail::half_angle_ratio(x, k) : jacobi_ds_jet(x, k);
      return amp * field_compose(G, xf);
    };
    double period = ratio ? K4 : K2;
    s.valid = [period, margin](double, double x) {
      return detail::lattice_distance(x, period) >= margin;
    };
  } else {
    throw DomainError("unknown solution family '" + id + "'");
  }

  if (params.negate) {
    s.params["negate"] = 1.0;
    auto base = s.eval;
    s.eval = [base](double t, double x) { return -base(t, x); };
    s.provenance.push_back("negated");
  }
  return s;
}

// Transport a family member to a reducible variable-coefficient instance: the
// normalization transform maps the instance to (1, sgn lambda, 1), and the
// constant-instance solution pulls back through it.
inline Solution instantiate(const std::string& id, const CoefficientTriple& tr,
                            const ReducibilityResult& r, const FamilyParams& params = {},
                            std::optional<double> t_ref = std::nullopt) {
  if (!r.reducible)
    throw DomainError("triple does not satisfy the constant-coefficient criterion");
  int eps = (std::fabs(r.lambda) <= 1e-8) ? 0 : (r.lambda > 0.0 ? 1 : -1);
  const FamilyInfo& info = family_info(id);
  if (info.eps != eps)
    throw SignMismatchError("family " + id + " needs linear sign " +
                            std::to_string(info.eps) + " but the instance reduces to sign " +
                            std::to_string(eps));
  EquivTransform g = to_constant_transform(tr, r, t_ref);
  Solution target = constant_solution(id, eps, params);
  return pull_solution(g, target);
}

inline void write_solution_csv(std::ostream& os, const Solution& s, const GridSpec& g) {
  os << "t,x,u\n";
  for (int i = 0; i < g.nt; ++i) {
    for (int j = 0; j < g.nx; ++j) {
      double t = g.t_at(i), x = g.x_at(j);
      FieldJet f = s.at(t, x);
      os << format_number(t) << ',' << format_number(x) << ',';
      if (!f.pole) os << format_number(f.u);
      os << '\n';
    }
  }
}

}  // namespace nws
