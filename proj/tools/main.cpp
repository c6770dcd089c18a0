// Command-line surface for the toolkit.  Exit codes: 0 verified/pass,
// 1 negative mathematical verdict (not reducible, verification failed),
// 2 usage or evaluation errors.

#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nws/nws.hpp"

namespace {

using nlohmann::json;

struct CommonFlags {
  std::string a = "1", b = "0", c = "1";
  std::string t_range = "0.25:2.5";
  std::string x_range = "-3:3";
  int nt = 41, nx = 81;
  double lambda = 0.0;
  std::string family;
  std::string params_text;
  double tol = -1.0;
  unsigned seed = 1;
  std::string format = "json";
  std::string out_path;
};

std::pair<double, double> parse_range(const std::string& s, const char* flag) {
  auto pos = s.find(':');
  if (pos == std::string::npos)
    throw nws::DomainError(std::string(flag) + " expects lo:hi, got '" + s + "'");
  double lo = 0.0, hi = 0.0;
  try {
    lo = std::stod(s.substr(0, pos));
    hi = std::stod(s.substr(pos + 1));
  } catch (const std::exception&) {
    throw nws::DomainError(std::string(flag) + " bounds in '" + s + "' are not numeric");
  }
  if (!(hi > lo))
    throw nws::DomainError(std::string(flag) + " needs hi > lo, got '" + s + "'");
  return {lo, hi};
}

nws::FamilyParams parse_params(const std::string& text) {
  nws::FamilyParams p;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw nws::DomainError("--params entries look like key=value, got '" + item + "'");
    std::string key = item.substr(0, eq);
    double val = 0.0;
    try {
      val = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw nws::DomainError("--params value in '" + item + "' is not numeric");
    }
    if (key == "negate")
      p.negate = (val != 0.0);
    else
      p.values[key] = val;
  }
  return p;
}

nws::CoefficientTriple make_triple(const CommonFlags& f) {
  auto [lo, hi] = parse_range(f.t_range, "--t");
  nws::CoefficientTriple tr = nws::parse_triple(f.a, f.b, f.c, lo, hi);
  nws::validate_triple(tr);
  return tr;
}

nws::ZeroTestOptions zero_options(const CommonFlags& f, double default_tol = 1e-9) {
  nws::ZeroTestOptions z;
  z.tol = f.tol > 0.0 ? f.tol : default_tol;
  z.seed = f.seed;
  return z;
}

void emit(const std::string& text, const std::string& out_path) {
  std::string body = text;
  if (body.empty() || body.back() != '\n') body += '\n';
  if (out_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw nws::Error("cannot open output path '" + out_path + "'");
    out << body;
  }
}

void emit_json(const json& j, const std::string& out_path) { emit(j.dump(2), out_path); }

json field_to_json(const nws::VectorField& v) {
  return {{"tau", nws::to_text(v.tau)}, {"xi", nws::to_text(v.xi)}, {"eta", nws::to_text(v.eta)}};
}

json case_to_json(const nws::ClassificationCase& k) {
  json j{{"tag", nws::tag_name(k.tag)}, {"description", k.description}};
  json params = json::object();
  auto put = [&](const char* name, double v) {
    if (std::isfinite(v)) params[name] = v;
  };
  put("mu", k.mu);
  put("gamma", k.gamma);
  put("delta", k.delta);
  put("rho", k.rho);
  put("sigma", k.sigma);
  j["parameters"] = params;
  return j;
}

json sample_pushed(const nws::CoefficientTriple& tr, int n = 9) {
  json rows = json::array();
  for (int i = 0; i < n; ++i) {
    double t = tr.t_interval.sample(i, n);
    rows.push_back({{"t", t},
                    {"a", tr.a.value(t)},
                    {"b", tr.b.value(t)},
                    {"c", tr.c.value(t)}});
  }
  return rows;
}

int run_parse_check(const CommonFlags& f, const std::vector<std::pair<std::string, std::string>>& inputs) {
  json checks = json::array();
  bool ok = true;
  for (const auto& [flag, text] : inputs) {
    json entry{{"flag", flag}, {"input", text}};
    try {
      nws::Expr e = nws::parse_expr(text, {"t"});
      entry["status"] = "ok";
      entry["parsed"] = nws::to_text(e);
    } catch (const nws::Error& err) {
      entry["status"] = "error";
      entry["message"] = err.what();
      ok = false;
    }
    checks.push_back(entry);
  }
  emit_json({{"ok", ok}, {"checks", checks}}, f.out_path);
  return ok ? 0 : 2;
}

int run_classify(const CommonFlags& f) {
  nws::CoefficientTriple tr = make_triple(f);
  nws::ZeroTestOptions z = zero_options(f);
  json report;
  if (nws::is_gauged(tr)) {
    nws::ClassificationCase k = nws::classify_lie(tr.c, tr.t_interval, z);
    report = case_to_json(k);
    report["gauged"] = true;
    json basis = json::array();
    for (const auto& v : k.basis) basis.push_back(field_to_json(v));
    report["basis"] = basis;
  } else {
    nws::UngaugedClassification uc = nws::lie_basis_ungauged(tr, z);
    report = case_to_json(uc.gauged_case);
    report["gauged"] = false;
    report["gauge_label"] = uc.gauge.label;
    json basis = json::array();
    for (const auto& v : uc.basis) basis.push_back(field_to_json(v));
    report["basis"] = basis;
  }
  emit_json(report, f.out_path);
  return 0;
}

int run_criterion(const CommonFlags& f) {
  nws::CoefficientTriple tr = make_triple(f);
  nws::ReducibilityResult r = nws::reducibility_lambda(tr, zero_options(f));
  emit_json(nws::to_json(r), f.out_path);
  return r.reducible ? 0 : 1;
}

int run_transform_gauge(const CommonFlags& f) {
  nws::CoefficientTriple tr = make_triple(f);
  nws::GaugeResult gr = nws::gauge_transform(tr);
  json report{{"label", gr.transform.label},
              {"t_interval", {gr.gauged.t_interval.lo, gr.gauged.t_interval.hi}},
              {"samples", sample_pushed(gr.gauged)}};
  emit_json(report, f.out_path);
  return 0;
}

int run_transform_to_constant(const CommonFlags& f, bool lambda_set) {
  nws::CoefficientTriple tr = make_triple(f);
  nws::ReducibilityResult r = nws::reducibility_lambda(tr, zero_options(f));
  if (!r.reducible) {
    emit_json(nws::to_json(r), f.out_path);
    return 1;
  }
  if (lambda_set) r.lambda = f.lambda;
  nws::EquivTransform g = nws::to_constant_transform(tr, r);
  nws::CoefficientTriple pushed = nws::push_coefficients(g, tr);
  json report{{"lambda", r.lambda},
              {"label", g.label},
              {"delta1", g.delta1},
              {"t_interval", {pushed.t_interval.lo, pushed.t_interval.hi}},
              {"samples", sample_pushed(pushed)}};
  emit_json(report, f.out_path);
  return 0;
}

json verify_one_family(const std::string& id, const nws::CoefficientTriple& tr,
                       const nws::ReducibilityResult& r, const nws::FamilyParams& params,
                       const nws::GridSpec& grid, double tol) {
  nws::Solution s = nws::instantiate(id, tr, r, params);
  nws::PDEInstance p{tr};
  nws::ResidualStats st = nws::residual_stats(p, s, grid);
  bool pass = st.max_abs <= tol;
  json entry{{"family", id}, {"pass", pass}, {"residual", nws::to_json(st)}};
  json pj = json::object();
  for (const auto& kv : s.params) pj[kv.first] = kv.second;
  entry["params"] = pj;
  return entry;
}

int run_verify_solution(const CommonFlags& f, bool all) {
  nws::CoefficientTriple tr = make_triple(f);
  nws::ReducibilityResult r = nws::reducibility_lambda(tr, zero_options(f));
  if (!r.reducible) {
    emit_json(nws::to_json(r), f.out_path);
    return 1;
  }
  double tol = f.tol > 0.0 ? f.tol : 1e-8;
  auto [xlo, xhi] = parse_range(f.x_range, "--x");
  nws::GridSpec grid{tr.t_interval.lo, tr.t_interval.hi, f.nt, xlo, xhi, f.nx};
  nws::FamilyParams params = parse_params(f.params_text);

  json families = json::array();
  bool pass = true;
  if (all) {
    int eps = (std::fabs(r.lambda) <= 1e-8) ? 0 : (r.lambda > 0.0 ? 1 : -1);
    std::vector<std::string> ids;
    for (const auto& info : nws::list_families())
      if (info.eps == eps) ids.push_back(info.id);
    std::vector<std::future<json>> jobs;
    for (const auto& id : ids)
      jobs.push_back(std::async(std::launch::async, [&, id]() {
        return verify_one_family(id, tr, r, params, grid, tol);
      }));
    for (auto& job : jobs) {
      json entry = job.get();
      pass = pass && entry["pass"].get<bool>();
      families.push_back(std::move(entry));
    }
  } else {
    if (f.family.empty()) throw nws::DomainError("--family or --all is required");
    json entry = verify_one_family(f.family, tr, r, params, grid, tol);
    pass = entry["pass"].get<bool>();
    families.push_back(std::move(entry));
  }
  emit_json({{"lambda", r.lambda}, {"tol", tol}, {"pass", pass}, {"families", families}},
            f.out_path);
  return pass ? 0 : 1;
}

int run_verify_operator(const CommonFlags& f, const std::string& tau, const std::string& xi,
                        const std::string& eta, bool t_set, bool x_set) {
  std::vector<std::string> vars{"t", "x", "u"};
  nws::Expr tau_e = nws::parse_expr(tau, vars);
  nws::Expr xi_e = nws::parse_expr(xi, vars);
  nws::Expr eta_e = nws::parse_expr(eta, vars);
  nws::Expr c_e = nws::parse_expr(f.c, {"t"});
  nws::NonclassicalOptions opt;
  opt.zero = zero_options(f);
  if (t_set) {
    auto [lo, hi] = parse_range(f.t_range, "--t");
    opt.t_lo = lo;
    opt.t_hi = hi;
  }
  if (x_set) {
    auto [lo, hi] = parse_range(f.x_range, "--x");
    opt.x_lo = lo;
    opt.x_hi = hi;
  }
  nws::NonclassicalReport rep = nws::verify_nonclassical({tau_e, xi_e, eta_e}, c_e, opt);
  emit_json(nws::to_json(rep), f.out_path);
  return rep.pass ? 0 : 1;
}

int run_simulate(const CommonFlags& f) {
  nws::CoefficientTriple tr = make_triple(f);
  nws::ReducibilityResult r = nws::reducibility_lambda(tr, zero_options(f));
  if (!r.reducible) {
    emit_json(nws::to_json(r), f.out_path);
    return 1;
  }
  std::string family = f.family.empty() ? "TW" : f.family;
  nws::Solution s = nws::instantiate(family, tr, r, parse_params(f.params_text));
  nws::SpaceTimeFn ref = nws::as_space_time_fn(s);
  auto [xlo, xhi] = parse_range(f.x_range, "--x");
  nws::GridSpec grid{tr.t_interval.lo, tr.t_interval.hi, f.nt, xlo, xhi, f.nx};
  nws::PDEInstance p{tr};
  nws::NumericField field = nws::mol_solve(p, ref, grid);
  double err = nws::max_error_final(field, ref);
  double tol = f.tol > 0.0 ? f.tol : 1e-3;
  bool pass = err <= tol;
  if (f.format == "csv") {
    std::ostringstream os;
    os << "t,x,u\n";
    for (std::size_t i = 0; i < field.t_levels.size(); ++i)
      for (std::size_t j = 0; j < field.x_nodes.size(); ++j)
        os << nws::format_number(field.t_levels[i]) << ',' << nws::format_number(field.x_nodes[j])
           << ',' << nws::format_number(field.values[i][j]) << '\n';
    emit(os.str(), f.out_path);
  } else {
    emit_json({{"family", family},
               {"max_error", err},
               {"tol", tol},
               {"pass", pass},
               {"stats", nws::to_json(field.stats)},
               {"grid", nws::to_json(grid)}},
              f.out_path);
  }
  return pass ? 0 : 1;
}

int run_sample(const CommonFlags& f, bool lambda_set) {
  nws::CoefficientTriple tr = make_triple(f);
  nws::ReducibilityResult r = nws::reducibility_lambda(tr, zero_options(f));
  if (!r.reducible) {
    emit_json(nws::to_json(r), f.out_path);
    return 1;
  }
  if (lambda_set) r.lambda = f.lambda;
  if (f.family.empty()) throw nws::DomainError("--family is required");
  nws::Solution s = nws::instantiate(f.family, tr, r, parse_params(f.params_text));
  auto [xlo, xhi] = parse_range(f.x_range, "--x");
  nws::GridSpec grid{tr.t_interval.lo, tr.t_interval.hi, f.nt, xlo, xhi, f.nx};
  if (f.format == "csv") {
    std::ostringstream os;
    nws::write_solution_csv(os, s, grid);
    emit(os.str(), f.out_path);
  } else {
    json rows = json::array();
    for (int i = 0; i < grid.nt; ++i)
      for (int j = 0; j < grid.nx; ++j) {
        double t = grid.t_at(i), x = grid.x_at(j);
        nws::FieldJet u = s.at(t, x);
        rows.push_back({{"t", t}, {"x", x}, {"u", u.pole ? json(nullptr) : json(u.u)}});
      }
    emit_json({{"family", f.family}, {"grid", nws::to_json(grid)}, {"rows", rows}},
              f.out_path);
  }
  return 0;
}

int run_list_solutions(const CommonFlags& f) {
  json out = json::array();
  for (const auto& info : nws::list_families()) {
    json names = json::array();
    for (const auto& n : info.param_names) names.push_back(n);
    out.push_back({{"id", info.id},
                   {"sign", info.eps},
                   {"parameters", names},
                   {"description", info.description}});
  }
  emit_json(out, f.out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"classify, transform, solve, and cross-check cubic reaction-diffusion instances"};
  app.require_subcommand(1);

  CommonFlags f;
  std::string tau = "1", xi, eta;

  auto add_triple_flags = [&](CLI::App* sc) {
    sc->add_option("--a", f.a, "diffusion coefficient expression in t");
    sc->add_option("--b", f.b, "linear coefficient expression in t");
    sc->add_option("--c", f.c, "cubic coefficient expression in t");
    sc->add_option("--t", f.t_range, "time interval lo:hi");
  };
  auto add_common = [&](CLI::App* sc) {
    sc->add_option("--tol", f.tol, "tolerance");
    sc->add_option("--seed", f.seed, "sampling seed");
    sc->add_option("--format", f.format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sc->add_option("--out", f.out_path, "write the report to this path");
  };

  auto* pc = app.add_subcommand("parse-check", "parse coefficient expressions");
  std::string pa, pb, pcx;
  pc->add_option("--a", pa, "expression for a");
  pc->add_option("--b", pb, "expression for b");
  pc->add_option("--c", pcx, "expression for c");
  pc->add_option("--out", f.out_path, "write the report to this path");

  auto* cl = app.add_subcommand("classify", "symmetry class of a triple");
  add_triple_flags(cl);
  add_common(cl);

  auto* cr = app.add_subcommand("criterion", "constant-coefficient reducibility test");
  add_triple_flags(cr);
  add_common(cr);

  auto* trf = app.add_subcommand("transform", "push a triple through a transform");
  trf->require_subcommand(1);
  auto* trg = trf->add_subcommand("gauge", "normalize a to 1 and b to 0");
  add_triple_flags(trg);
  add_common(trg);
  auto* trc = trf->add_subcommand("to-constant", "normalize to a constant-coefficient triple");
  add_triple_flags(trc);
  add_common(trc);
  auto* trc_lambda = trc->add_option("--lambda", f.lambda, "override the computed lambda");

  auto* vs = app.add_subcommand("verify-solution", "residual check of a family on a triple");
  add_triple_flags(vs);
  add_common(vs);
  bool vs_all = false;
  vs->add_option("--family", f.family, "family id");
  vs->add_flag("--all", vs_all, "verify every family matching the reduced sign");
  vs->add_option("--x", f.x_range, "space interval lo:hi");
  vs->add_option("--nt", f.nt, "grid levels in t");
  vs->add_option("--nx", f.nx, "grid nodes in x");
  vs->add_option("--params", f.params_text, "family constants key=value,...");

  auto* vo = app.add_subcommand("verify-operator", "determining-system check of an operator");
  vo->add_option("--tau", tau, "time component (default 1)");
  vo->add_option("--xi", xi, "space component expression in t,x,u")->required();
  vo->add_option("--eta", eta, "shift component expression in t,x,u")->required();
  vo->add_option("--c", f.c, "cubic coefficient expression in t");
  auto* vo_t = vo->add_option("--t", f.t_range, "time box lo:hi");
  auto* vo_x = vo->add_option("--x", f.x_range, "space box lo:hi");
  add_common(vo);

  auto* sim = app.add_subcommand("simulate", "numeric solve against an exact profile");
  add_triple_flags(sim);
  add_common(sim);
  sim->add_option("--family", f.family, "reference family id (default TW)");
  sim->add_option("--x", f.x_range, "space interval lo:hi");
  sim->add_option("--nt", f.nt, "stored time levels")->default_str("11");
  sim->add_option("--nx", f.nx, "space nodes")->default_str("200");
  sim->add_option("--params", f.params_text, "family constants key=value,...");

  auto* sa = app.add_subcommand("sample", "tabulate a solution on a grid");
  add_triple_flags(sa);
  add_common(sa);
  sa->add_option("--family", f.family, "family id")->required();
  sa->add_option("--x", f.x_range, "space interval lo:hi");
  sa->add_option("--nt", f.nt, "grid levels in t")->default_str("21");
  sa->add_option("--nx", f.nx, "grid nodes in x")->default_str("41");
  sa->add_option("--params", f.params_text, "family constants key=value,...");
  auto* sa_lambda = sa->add_option("--lambda", f.lambda, "override the computed lambda");

  auto* ls = app.add_subcommand("list-solutions", "catalog of solution families");
  ls->add_option("--out", f.out_path, "write the report to this path");

  sa->get_option("--format")->default_str("csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  // the flag variables are shared between subcommands, so defaults that
  // differ per subcommand are resolved here instead of at option setup
  if (sim->parsed()) {
    if (!sim->count("--nt")) f.nt = 11;
    if (!sim->count("--nx")) f.nx = 200;
  } else if (sa->parsed()) {
    if (!sa->count("--nt")) f.nt = 21;
    if (!sa->count("--nx")) f.nx = 41;
    if (!sa->count("--format")) f.format = "csv";
  }

  try {
    if (pc->parsed()) {
      std::vector<std::pair<std::string, std::string>> inputs;
      if (pc->count("--a")) inputs.emplace_back("a", pa);
      if (pc->count("--b")) inputs.emplace_back("b", pb);
      if (pc->count("--c")) inputs.emplace_back("c", pcx);
      if (inputs.empty()) throw nws::DomainError("parse-check needs at least one of --a/--b/--c");
      return run_parse_check(f, inputs);
    }
    if (cl->parsed()) return run_classify(f);
    if (cr->parsed()) return run_criterion(f);
    if (trf->parsed()) {
      if (trg->parsed()) return run_transform_gauge(f);
      return run_transform_to_constant(f, trc_lambda->count() > 0);
    }
    if (vs->parsed()) return run_verify_solution(f, vs_all);
    if (vo->parsed())
      return run_verify_operator(f, tau, xi, eta, vo_t->count() > 0, vo_x->count() > 0);
    if (sim->parsed()) return run_simulate(f);
    if (sa->parsed()) return run_sample(f, sa_lambda->count() > 0);
    if (ls->parsed()) return run_list_solutions(f);
  } catch (const nws::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
