#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include "nws/solutions.hpp"

using namespace nws;
using Catch::Approx;

TEST_CASE("family table", "[solutions]") {
  const auto& fams = list_families();
  REQUIRE(fams.size() == 15);
  int plus = 0, minus = 0, zero = 0;
  for (const auto& f : fams) {
    CHECK_FALSE(f.id.empty());
    CHECK_FALSE(f.description.empty());
    if (f.eps == 1) ++plus;
    if (f.eps == -1) ++minus;
    if (f.eps == 0) ++zero;
  }
  CHECK(plus == 6);
  CHECK(minus == 3);
  CHECK(zero == 6);
  CHECK(family_info("TW").eps == 1);
  CHECK(family_info("N2").param_names.size() == 2);
  CHECK_THROWS_AS(family_info("XX"), DomainError);
}

TEST_CASE("pointwise values of simple members", "[solutions]") {
  Solution z4 = constant_solution("Z4", 0);
  FieldJet j = z4.at(0.7, 2.0);
  REQUIRE_FALSE(j.pole);
  CHECK(j.u == Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
  CHECK(j.ut == 0.0);
  CHECK(z4.at(0.0, 0.0).pole);

  Solution tw = constant_solution("TW", 1);
  CHECK(tw.at(0.0, 0.0).u == Approx(0.5).epsilon(1e-14));
  double expect = 0.5 * (1.0 - std::tanh(std::sqrt(2.0) / 4.0 * 1.3 - 0.75 * 0.4));
  CHECK(tw.at(0.4, 1.3).u == Approx(expect).epsilon(1e-13));

  // stationary families do not move
  for (const char* id : {"Z4", "Z5", "Z6"}) {
    Solution s = constant_solution(id, 0);
    FieldJet a = s.at(0.2, 1.1);
    FieldJet b = s.at(1.7, 1.1);
    REQUIRE_FALSE(a.pole);
    CHECK(a.ut == 0.0);
    CHECK(a.u == Approx(b.u).epsilon(1e-14));
  }

  // the half-angle ratio is finite at its removable lattice points
  double K2 = 2.0 * elliptic_K(std::sqrt(0.5));
  Solution z6 = constant_solution("Z6", 0);
  FieldJet rem = z6.at(0.0, K2);
  REQUIRE_FALSE(rem.pole);
  CHECK(rem.u == Approx(0.0).margin(1e-10));
}

TEST_CASE("constructor guards", "[solutions]") {
  CHECK_THROWS_AS(constant_solution("TW", -1), SignMismatchError);
  CHECK_THROWS_AS(constant_solution("N1", 1), SignMismatchError);
  CHECK_THROWS_AS(constant_solution("Z1", 1), SignMismatchError);
  FamilyParams dead;
  dead.values["C1"] = 0.0;
  CHECK_THROWS_AS(constant_solution("P2", 1, dead), DomainError);
  CHECK_THROWS_AS(constant_solution("N3", -1, dead), DomainError);
  FamilyParams allzero;
  allzero.values = {{"C1", 0.0}, {"C1p", 0.0}, {"C2", 0.0}};
  CHECK_THROWS_AS(constant_solution("P1", 1, allzero), DomainError);
  FamilyParams stray;
  stray.values["C9"] = 1.0;
  CHECK_THROWS_AS(constant_solution("TW", 1, stray), DomainError);

  // default constants: C2 = 1 exactly where 0 would park a pole at the origin
  CHECK(constant_solution("P3", 1).params.at("C2") == 1.0);
  CHECK(constant_solution("P2", 1).params.at("C2") == 0.0);
  CHECK(constant_solution("N1", -1).params.at("C2") == 1.0);
}

namespace {
struct FamilyGrid {
  const char* id;
  GridSpec grid;
  bool pole_free;
};
}  // namespace

TEST_CASE("every family solves its constant instance", "[solutions]") {
  const std::vector<FamilyGrid> table = {
      {"TW", {0.0, 1.5, 21, -4.0, 4.0, 41}, true},
      {"P1", {0.0, 1.5, 21, -3.0, 3.0, 41}, true},
      {"P2", {0.0, 0.5, 21, -1.0, 1.0, 41}, true},
      {"P3", {0.0, 0.4, 21, 0.3, 1.2, 41}, true},
      {"P4", {0.0, 0.5, 21, -1.0, 1.0, 41}, true},
      {"P5", {0.0, 0.4, 21, 0.3, 1.2, 41}, true},
      {"N1", {0.25, 2.0, 21, -4.0, 4.0, 41}, true},
      {"N2", {0.0, 0.5, 21, -0.8, 0.8, 41}, true},
      {"N3", {0.0, 0.5, 21, -0.8, 0.8, 41}, true},
      {"Z1", {0.1, 0.45, 21, -0.8, 0.8, 41}, true},
      {"Z2", {0.1, 0.45, 21, -0.8, 0.8, 41}, true},
      {"Z3", {0.1, 0.45, 21, -0.8, 0.8, 41}, true},
      {"Z4", {0.0, 1.0, 11, 0.3, 2.0, 41}, true},
      {"Z5", {0.0, 1.0, 11, 0.3, 3.3, 41}, true},
      {"Z6", {0.0, 1.0, 11, 0.3, 4.5, 41}, true},
  };
  PDEInstance plus = parse_instance("1", "1", "1", 0.0, 2.0);
  PDEInstance minus = parse_instance("1", "-1", "1", 0.0, 2.0);
  PDEInstance none = parse_instance("1", "0", "1", 0.0, 2.0);

  for (const auto& fg : table) {
    int eps = family_info(fg.id).eps;
    const PDEInstance& p = (eps == 1) ? plus : (eps == -1 ? minus : none);
    Solution s = constant_solution(fg.id, eps);
    ResidualStats st = residual_stats(p, s, fg.grid);
    INFO(fg.id << ": max_abs = " << st.max_abs << ", poles = " << st.n_poles);
    CHECK(st.max_abs <= 1e-8);
    if (fg.pole_free) CHECK(st.n_poles == 0);
    CHECK(st.n_evaluated >= long(fg.grid.nt) * fg.grid.nx / 4);
  }
}

TEST_CASE("wider grids with excluded poles still verify", "[solutions]") {
  PDEInstance none = parse_instance("1", "0", "1", 0.0, 2.0);
  Solution z5 = constant_solution("Z5", 0);
  ResidualStats st = residual_stats(none, z5, {0.0, 1.0, 3, -5.0, 5.0, 101});
  CHECK(st.n_poles > 0);
  CHECK(st.max_abs <= 1e-8);

  PDEInstance minus = parse_instance("1", "-1", "1", 0.0, 2.0);
  Solution n2 = constant_solution("N2", -1);
  ResidualStats sn = residual_stats(minus, n2, {0.0, 1.0, 11, -6.0, 6.0, 61});
  CHECK(sn.n_poles > 0);
  CHECK(sn.max_abs <= 1e-8);
}

TEST_CASE("negation maps solutions to solutions", "[solutions]") {
  PDEInstance plus = parse_instance("1", "1", "1", 0.0, 2.0);
  FamilyParams neg;
  neg.negate = true;
  Solution s = constant_solution("TW", 1, neg);
  CHECK(s.params.at("negate") == 1.0);
  CHECK(s.at(0.0, 0.0).u == Approx(-0.5).epsilon(1e-14));
  bool tagged = false;
  for (const auto& line : s.provenance) tagged = tagged || line == "negated";
  CHECK(tagged);
  ResidualStats st = residual_stats(plus, s, {0.0, 1.5, 21, -4.0, 4.0, 41});
  CHECK(st.max_abs <= 1e-8);
}

TEST_CASE("transport to variable-coefficient instances", "[solutions]") {
  SECTION("growing cubic profile carries the kink") {
    CoefficientTriple tr = parse_triple("1", "1/2", "exp(t)", 0.0, 2.0);
    ReducibilityResult r = reducibility_lambda(tr);
    REQUIRE(r.reducible);
    Solution s = instantiate("TW", tr, r);
    // theta = t - 1, phi = exp(t/2): u = tw(t - 1, x) exp(-t/2)
    double want = 0.5 * (1.0 - std::tanh(std::sqrt(2.0) / 4.0 * 0.6 - 0.75 * 0.4)) *
                  std::exp(-0.7);
    CHECK(s.at(1.4, 0.6).u == Approx(want).epsilon(1e-9));
    ResidualStats st = residual_stats(PDEInstance{tr}, s, {0.1, 1.9, 21, -3.0, 3.0, 31});
    CHECK(st.max_abs <= 1e-8);
    CHECK(st.n_poles == 0);
  }

  SECTION("rational coefficients carry the exponential-mode ratio") {
    CoefficientTriple tr = parse_triple("1", "1 - 1/t", "t^2", 0.5, 3.0);
    ReducibilityResult r = reducibility_lambda(tr);
    REQUIRE(r.reducible);
    Solution s = instantiate("P1", tr, r);
    ResidualStats st = residual_stats(PDEInstance{tr}, s, {0.6, 2.9, 21, -3.0, 3.0, 31});
    CHECK(st.max_abs <= 1e-8);
    CHECK(st.n_poles == 0);
  }

  SECTION("decaying profile carries the oscillatory ratio") {
    CoefficientTriple tr = parse_triple("1", "-1/2", "exp(-t)", 0.0, 2.0);
    ReducibilityResult r = reducibility_lambda(tr);
    REQUIRE(r.reducible);
    CHECK(r.lambda == Approx(-1.0).epsilon(1e-10));
    Solution s = instantiate("N1", tr, r);
    ResidualStats st = residual_stats(PDEInstance{tr}, s, {0.1, 1.9, 21, -4.0, 4.0, 41});
    CHECK(st.max_abs <= 1e-8);
  }

  SECTION("threshold profile carries the stationary hyperbola") {
    CoefficientTriple tr = parse_triple("1", "-1/t", "t^2", 0.5, 3.0);
    ReducibilityResult r = reducibility_lambda(tr);
    REQUIRE(r.reducible);
    Solution s = instantiate("Z4", tr, r);
    CHECK(s.at(2.0, 1.5).u == Approx(std::sqrt(2.0) / 3.0).epsilon(1e-9));
    ResidualStats st = residual_stats(PDEInstance{tr}, s, {0.6, 2.9, 21, 0.3, 3.0, 31});
    CHECK(st.max_abs <= 1e-8);

    Solution rat = instantiate("Z3", tr, r);
    ResidualStats sr = residual_stats(PDEInstance{tr}, rat, {0.6, 2.9, 21, -3.0, 3.0, 31});
    CHECK(sr.max_abs <= 1e-8);
  }

  SECTION("sign and reducibility guards") {
    CoefficientTriple grow = parse_triple("1", "1/2", "exp(t)", 0.0, 2.0);
    ReducibilityResult rg = reducibility_lambda(grow);
    CHECK_THROWS_AS(instantiate("N1", grow, rg), SignMismatchError);
    CHECK_THROWS_AS(instantiate("Z4", grow, rg), SignMismatchError);

    CoefficientTriple bad = parse_triple("1", "t", "1", 0.0, 2.0);
    ReducibilityResult rb = reducibility_lambda(bad);
    CHECK_THROWS_AS(instantiate("TW", bad, rb), DomainError);
  }
}

TEST_CASE("csv export leaves pole cells empty", "[solutions]") {
  Solution z4 = constant_solution("Z4", 0);
  std::ostringstream os;
  write_solution_csv(os, z4, {0.0, 0.0, 1, -1.0, 1.0, 3});
  std::string text = os.str();
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x,u");
  std::getline(in, line);
  CHECK(line.find("0,-1,") == 0);
  CHECK(line.find(",-1.41421356") != std::string::npos);
  std::getline(in, line);
  CHECK(line == "0,0,");  // pole: value column left empty
  std::getline(in, line);
  CHECK(line.back() != ',');
  CHECK_FALSE(std::getline(in, line));
}
