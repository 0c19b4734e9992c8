#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>
#include <sstream>

#include "doctest.h"
#include "vaw/parse.hpp"
#include "vaw/suite.hpp"

using namespace vaw;

namespace {

bool samePoly(const LambdaPoly& a, const LambdaPoly& b) {
  int n = std::max(a.size(), b.size());
  for (int k = 0; k < n; ++k)
    if (!(a.entry(k) == b.entry(k))) return false;
  return true;
}

}  // namespace

TEST_CASE("parsing the documented example forms") {
  auto cs = makeCoords(CoordSystem::flat(2));
  Patch p = Patch::make(cs);

  CHECK(parseField(p.c(), ":b[1] d^1 c[1]:") == wick(p.b(0), p.cf(0, 1)));

  QueryResult q = parseQuery(p.c(), "[beta[1] lam gamma[1]^2]");
  REQUIRE(std::holds_alternative<LambdaPoly>(q));
  CoeffFn g1 = CoeffFn::coord(cs, 0);
  CHECK(samePoly(std::get<LambdaPoly>(q), bracket(p.beta(0), p.coeff(g1 * g1))));

  CHECK_THROWS_WITH_AS(parseField(p.c(), ":b[1]"),
                       "parse: unbalanced normal-order delimiter at position 1", Error);
  CHECK_THROWS_WITH_AS(parseField(p.c(), "x[1]"),
                       "parse: unknown generator 'x[1]' at position 1", Error);
  CHECK_THROWS_AS(parseField(p.c(), "b[1] +"), Error);
  CHECK_THROWS_AS(parseField(p.c(), "b[1] b[2]"), Error);  // juxtaposition needs :...:

  SUBCASE("query operators") {
    QueryResult c0 = parseQuery(p.c(), "b[1] o(0) c[1]");
    REQUIRE(std::holds_alternative<FieldExpr>(c0));
    CHECK(std::get<FieldExpr>(c0) == circle(p.b(0), 0, p.cf(0)));

    QueryResult m1 = parseQuery(p.c(), "b[1]_(1) c[1]");
    REQUIRE(std::holds_alternative<FieldExpr>(m1));
    CHECK(std::get<FieldExpr>(m1) == modeApply(p.b(0), 1, p.cf(0)));

    QueryResult mneg = parseQuery(p.c(), "b[1] o(-1) c[1]");
    CHECK(std::get<FieldExpr>(mneg) == wick(p.b(0), p.cf(0)));
  }

  SUBCASE("free-form input is canonicalized") {
    CHECK(parseField(p.c(), "2*b[1] + 3*b[1]") == p.b(0) * Scalar(5));
    CHECK(parseField(p.c(), "gamma[1]*gamma[2]") ==
          p.coeff(CoeffFn::coord(cs, 0) * CoeffFn::coord(cs, 1)));
    CHECK(parseField(p.c(), ":c[2] c[1]:") == -wick(p.cf(0), p.cf(1)));
    CHECK(parseField(p.c(), "0") == p.zero());
    CHECK(parseField(p.c(), "i*i") == -p.unit());
  }
}

TEST_CASE("printing and re-parsing is the identity") {
  auto cs = makeCoords(CoordSystem::flatAngular(1, 1));
  Patch p = Patch::make(cs);
  std::mt19937_64 rng(20260815u);
  auto pick = [&](int n) { return static_cast<int>(rng() % n); };

  std::vector<FieldExpr> atoms;
  for (int d = 0; d < 3; ++d) {
    atoms.push_back(p.b(0, d));
    atoms.push_back(p.cf(1, d));
    atoms.push_back(p.beta(0, d));
    atoms.push_back(p.jet(0, d));
    atoms.push_back(p.jet(1, d));
  }
  std::vector<CoeffFn> coeffs = {
      CoeffFn::one(cs),
      CoeffFn::coord(cs, 0),
      CoeffFn::coord(cs, 0) * CoeffFn::coord(cs, 0),
      CoeffFn::fourier(cs, 1, 1),
      CoeffFn::fourier(cs, 1, -2),
      CoeffFn::coord(cs, 0) * CoeffFn::fourier(cs, 1, 3) + CoeffFn::one(cs),
  };
  std::vector<Scalar> scalars = {Scalar(1),  Scalar(-1),          Scalar(7),
                                 Scalar::ratio(-2, 3), Scalar::i(), Scalar(Rat(1), Rat(2))};

  for (int trial = 0; trial < 200; ++trial) {
    FieldExpr x = p.zero();
    int terms = 1 + pick(3);
    for (int t = 0; t < terms; ++t) {
      FieldExpr m = p.coeff(coeffs[pick(static_cast<int>(coeffs.size()))]);
      int k = pick(3);
      for (int j = 0; j < k; ++j) m = wick(atoms[pick(static_cast<int>(atoms.size()))], m);
      x += m * scalars[pick(static_cast<int>(scalars.size()))];
    }
    CAPTURE(str(x));
    CHECK(parseField(p.c(), str(x)) == x);
  }

  SUBCASE("quotient contexts print and re-parse too") {
    auto b2 = makeCoords(CoordSystem::flat(2));
    QuotientContext qc = QuotientContext::make(
        b2, DiffForm::monomial(CoeffFn::one(b2), {0, 1}), DiffForm::zero(b2), DiffForm::zero(b2));
    std::vector<FieldExpr> qa = {qc.A(),     qc.iotaA(),  qc.iota(0), qc.w(1),
                                 qc.l(0),    qc.jet(1),   qc.A(2),    qc.iotaA(1),
                                 qc.iota(1, 1), wick(qc.A(), qc.iotaA())};
    for (int trial = 0; trial < 60; ++trial) {
      FieldExpr x = qa[pick(static_cast<int>(qa.size()))] * scalars[pick(6)] +
                    qa[pick(static_cast<int>(qa.size()))];
      CAPTURE(str(x));
      CHECK(parseField(qc.c(), str(x)) == x);
    }
  }

  SUBCASE("canonicalization is idempotent") {
    for (const char* s : {"b[1]*c[1]", ":gamma[1] beta[1]: + :beta[1] gamma[1]:",
                          "d^2 b[1] + -d^2 b[1]", ":c[2] c[1] b[1]:"}) {
      FieldExpr once = parseField(p.c(), s);
      CHECK(parseField(p.c(), str(once)) == once);
    }
  }
}

TEST_CASE("suite configuration loading and validation") {
  auto load = [](const std::string& text) {
    std::istringstream in(text);
    return loadSuiteConfig(in);
  };

  SuiteConfig cfg = load(
      "# comment\n"
      "[patch]\n"
      "flat = 2\n"
      "angular = 0\n"
      "[suite]\n"
      "name = tduality\n"
      "seed = 42\n"
      "samples = 10\n"
      "[forms]\n"
      "FA = :c[1] c[2]:\n"
      "FAhat = 2*:c[1] c[2]:\n"
      "H3 = 0\n");
  CHECK(cfg.flatCoords == 2);
  CHECK(cfg.seed == 42);
  CHECK(cfg.suiteName == "tduality");
  CHECK(cfg.forms.at("FA") ==
        DiffForm::monomial(CoeffFn::one(cfg.base), {0, 1}));
  CHECK(cfg.forms.at("FAhat") ==
        DiffForm::monomial(CoeffFn::one(cfg.base), {0, 1}) * Scalar(2));
  CHECK(cfg.form("H3").isZero());

  CHECK_THROWS_AS(load("[patch]\nflat = banana\n"), Error);
  CHECK_THROWS_AS(load("[nope]\nx = 1\n"), Error);
  CHECK_THROWS_AS(load("flat = 1\n"), Error);                      // key outside a section
  CHECK_THROWS_AS(load("[forms]\nFA = :c[1]:\n"), Error);          // degree must be 2
  CHECK_THROWS_AS(load("[patch]\nflat = 3\n[forms]\nH = :gamma[3] c[1] c[2]:\n"), Error);
  CHECK_THROWS_AS(load("[patch]\nflat = 4\n[forms]\n"
                       "FA = :c[1] c[2]:\nFAhat = :c[3] c[4]:\nH3 = 0\n"),
                  Error);  // d(H3) = -FA ^ FAhat fails
  // the honest-flux variant of the same data loads
  SuiteConfig flux = load(
      "[patch]\nflat = 4\n[forms]\n"
      "FA = :c[1] c[2]:\nFAhat = :c[3] c[4]:\n"
      "H3 = -:gamma[1] c[2] c[3] c[4]:\n");
  CHECK(flux.forms.at("H3").d() ==
        -DiffForm::wedge(flux.forms.at("FA"), flux.forms.at("FAhat")));
}

TEST_CASE("suite runs are deterministic and exact") {
  std::istringstream in(
      "[patch]\nflat = 2\n[suite]\nseed = 7\nsamples = 8\norder = 3\n"
      "[forms]\nFA = :c[1] c[2]:\nFAhat = 2*:c[1] c[2]:\nH3 = 0\n");
  SuiteConfig cfg = loadSuiteConfig(in);

  Report cdrRep = runCdrSuite(cfg);
  CHECK(cdrRep.records.size() == 10);
  CHECK(cdrRep.passed() == 10);
  CHECK(cdrRep.failed() == 0);

  Report t1 = runTdualitySuite(cfg);
  Report t2 = runTdualitySuite(cfg);
  CHECK(t1.renderRecords() == t2.renderRecords());
  CHECK(t1.failed() == 0);
  bool sawSign = false;
  for (const auto& r : t1.records)
    if (r.check == "tduality.sign.epsilon") {
      sawSign = true;
      CHECK(r.anchor.find("epsilon = -1") != std::string::npos);
      CHECK(r.status == CheckStatus::Pass);
    }
  CHECK(sawSign);

  Report ch = runCharactersSuite(cfg);
  CHECK(ch.failed() == 0);

  SUBCASE("courant axioms pass and the corrupted bracket fails the second") {
    std::istringstream cin(
        "[patch]\nflat = 3\n[suite]\nseed = 7\nsamples = 6\n"
        "[forms]\nH = :gamma[2] c[1] c[2] c[3]:\n");
    SuiteConfig ccfg = loadSuiteConfig(cin);
    Report good = runCourantSuite(ccfg);
    CHECK(good.failed() == 0);
    CHECK(good.records.size() == 10);

    SuiteConfig badCfg = ccfg;
    badCfg.corruptBracket = true;
    Report bad = runCourantSuite(badCfg);
    bool axiom2Failed = false;
    for (const auto& r : bad.records)
      if (r.check == "courant.std.axiom2") axiom2Failed = r.status == CheckStatus::Fail;
    CHECK(axiom2Failed);
    for (const auto& r : bad.records)  // the twisted family is untouched
      if (r.suite == "courant" && r.check.find("twisted") != std::string::npos)
        CHECK(r.status == CheckStatus::Pass);
  }
}

TEST_CASE("report renderings agree on status counts") {
  Report rep;
  rep.seed = 5;
  rep.add("demo", "demo.b", "second check", true);
  rep.add("demo", "demo.a", "first check", true);
  rep.add("demo", "demo.c", "third check", false, ":b[1] c[1]:");
  rep.skip("demo", "demo.d", "fourth check", "not applicable");

  std::string text = rep.renderText();
  std::string records = rep.renderRecords();
  CHECK(text.find("2 passed, 1 failed, 1 skipped") != std::string::npos);
  CHECK(records.find("#summary|2|1|1") != std::string::npos);
  CHECK(text.find("witness: :b[1] c[1]:") != std::string::npos);
  CHECK(records.find("demo|demo.c|third check|fail|:b[1] c[1]:") != std::string::npos);

  // sorted by check id in both renderings
  CHECK(records.find("demo.a") < records.find("demo.b"));
  CHECK(records.find("demo.b") < records.find("demo.c"));
  CHECK(text.find("demo.a") < text.find("demo.b"));

  // the failure witness is itself a valid expression
  Patch p = Patch::make(makeCoords(CoordSystem::flat(2)));
  CHECK(parseField(p.c(), ":b[1] c[1]:") == wick(p.b(0), p.cf(0)));
}
