#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "vaw/tduality.hpp"

using namespace vaw;

namespace {

CoordsPtr flat(int n) { return makeCoords(CoordSystem::flat(n)); }

DiffForm dg(const CoordsPtr& cs, int u) { return DiffForm::dcoord(cs, u); }
CoeffFn g(const CoordsPtr& cs, int u) { return CoeffFn::coord(cs, u); }

std::vector<FieldExpr> atomsOf(const QuotientContext& q) {
  std::vector<FieldExpr> r;
  for (int u = 0; u < q.n(); ++u) r.push_back(q.iota(u));
  for (int u = 0; u < q.n(); ++u) r.push_back(q.w(u));
  for (int u = 0; u < q.n(); ++u) r.push_back(q.l(u));
  for (int u = 0; u < q.n(); ++u) r.push_back(q.jet(u));
  r.push_back(q.A());
  r.push_back(q.iotaA());
  return r;
}

// Every table bracket must pass through the map entry by entry.
void checkBracketHom(const std::vector<FieldExpr>& atoms,
                     const std::function<FieldExpr(const FieldExpr&)>& hom) {
  for (const auto& x : atoms)
    for (const auto& y : atoms) {
      LambdaPoly from = bracket(x, y);
      LambdaPoly to = bracket(hom(x), hom(y));
      int top = std::max(from.size(), to.size());
      for (int k = 0; k < top; ++k) CHECK(hom(from.entry(k)) == to.entry(k));
    }
}

// Realization of a presented quotient inside the free model of the honest
// quotient: first into the total chart (connection shifts, twist shift of
// the lie atoms), then killing the central fiber current.  The composite is
// bracket-preserving on the nose, so presented tables are checked by exact
// equality; a stray fiber jet or fiber-dependent coefficient is a hard error.
struct Realize {
  const QuotientContext* q;
  const BundlePatch* bp;
  QuotientContext model;
  DiffForm Htot;

  Realize(const QuotientContext& qq, const BundlePatch& b)
      : q(&qq),
        bp(&b),
        model(QuotientContext::make(qq.base, DiffForm::zero(qq.base), DiffForm::zero(qq.base),
                                    DiffForm::zero(qq.base), "free-model")) {
    Htot = bp->liftF(q->h3) + DiffForm::wedge(bp->A(), bp->liftF(q->h2));
  }

  FieldExpr toPatch(const FieldExpr& x) const {
    const Patch& p = bp->p;
    std::map<int, FieldExpr> img;
    for (int u = 0; u < q->n(); ++u) {
      VectorField hor = bp->horizontal(VectorField::unitDir(q->base, u));
      img[q->iotaGen[u]] = p.iotaField(hor);
      img[q->wGen[u]] = p.cf(u);
      img[q->lGen[u]] = p.lieField(hor) + p.formField(contract(hor, Htot));
      img[q->jetId[u]] = p.jet(u);
    }
    img[q->aGen] = p.formField(bp->A());
    img[q->iaGen] = p.b(bp->fiber);
    return applyHom(p.c(), img, [this](const CoeffFn& f) { return bp->lift(f); }, x);
  }

  FieldExpr drop(const FieldExpr& x) const {
    const Patch& p = bp->p;
    std::map<int, FieldExpr> img;
    for (int u = 0; u < q->n(); ++u) {
      img[p.bGen[u]] = model.iota(u);
      img[p.cGen[u]] = model.w(u);
      img[p.betaGen[u]] = model.l(u);
      img[p.jetId[u]] = model.jet(u);
    }
    img[p.bGen[bp->fiber]] = model.iotaA();
    img[p.cGen[bp->fiber]] = model.A();
    img[p.betaGen[bp->fiber]] = model.zero();
    auto dropFn = [this](const CoeffFn& f) {
      CoeffFn r = CoeffFn::zero(q->base);
      for (const auto& t : f.terms) {
        if (t.e.back() != 0) throw Error("model: coefficient depends on the fiber");
        std::vector<int> e(t.e.begin(), t.e.end() - 1);
        r = r + CoeffFn::monomial(q->base, e, t.c);
      }
      return r;
    };
    return applyHom(model.c(), img, dropFn, x);
  }

  FieldExpr operator()(const FieldExpr& x) const { return drop(toPatch(x)); }
};

void checkAgainstModel(const QuotientContext& q, const BundlePatch& bp) {
  Realize R(q, bp);
  auto atoms = atomsOf(q);
  checkBracketHom(atoms, [&](const FieldExpr& x) { return R(x); });
  for (const auto& x : atoms) CHECK(R(q.D(x)) == R.model.D(R(x)));
}

}  // namespace

TEST_CASE("bundle charts carry the connection data") {
  auto b2 = flat(2);
  DiffForm a = DiffForm::monomial(g(b2, 0), {1});  // gamma^1 dgamma^2
  BundlePatch bp = BundlePatch::make(b2, a);

  CHECK(bp.fiber == 2);
  CHECK(bp.total->size() == 3);
  CHECK(fnPart(contract(bp.XA(), bp.A())) == CoeffFn::one(bp.total));
  CHECK(bp.FA() == bp.liftF(a.d()));
  CHECK(bp.FA().d().isZero());
  CHECK(bp.LA() == bp.p.beta(2));

  CHECK(weightOf(bp.Afield()) == 0);
  CHECK(degreeOf(bp.Afield()) == 1);
  CHECK(parityOf(bp.Afield()) == 1);
  CHECK(weightOf(bp.iotaA()) == 1);
  CHECK(degreeOf(bp.iotaA()) == -1);
  CHECK(weightOf(bp.LA()) == 1);
  CHECK(degreeOf(bp.LA()) == 0);

  VectorField h1 = bp.horizontal(VectorField::unitDir(b2, 0));
  VectorField h2 = bp.horizontal(VectorField::unitDir(b2, 1));
  CHECK(h1.comp[2].isZero());
  CHECK(h2.comp[2] == CoeffFn::zero(bp.total) - bp.lift(g(b2, 0)));
  CHECK(fnPart(contract(h1, bp.A())).isZero());
  CHECK(fnPart(contract(h2, bp.A())).isZero());

  CHECK_THROWS(BundlePatch::make(b2, a.d()));  // two-form is not a connection
  auto b3 = flat(3);
  CHECK_THROWS(BundlePatch::make(b2, DiffForm::monomial(g(b3, 0), {1})));
}

TEST_CASE("the gamma field pairs with the fiber current") {
  auto b2 = flat(2);

  BundlePatch bp0 = BundlePatch::make(b2, DiffForm::zero(b2));
  CHECK(bp0.gammaA() == bp0.p.jet(2));
  CHECK(bp0.xiA().isZero());
  CHECK(bp0.p.D(bp0.gammaA()) == derivative(bp0.Afield(), 1));

  DiffForm a = DiffForm::monomial(g(b2, 0), {1});
  BundlePatch bp = BundlePatch::make(b2, a);
  CHECK(weightOf(bp.gammaA()) == 1);
  CHECK(degreeOf(bp.gammaA()) == 0);
  CHECK(weightOf(bp.xiA()) == 1);
  CHECK(degreeOf(bp.xiA()) == 1);
  CHECK(bp.p.D(bp.gammaA()) + bp.xiA() == derivative(bp.Afield(), 1));
  CHECK(bp.p.D(bp.xiA()) == derivative(bp.FAfield(), 1));

  // weight-lowering operator values on the block
  VectorField hor = bp.horizontal(VectorField::unitDir(b2, 1));
  CHECK(bp.p.G0(bp.p.lieField(hor)) == bp.p.iotaField(hor));
  CHECK(bp.p.G0(derivative(bp.Afield(), 1)) == bp.gammaA());
  CHECK(bp.p.G0(bp.gammaA()).isZero());
  CHECK(bp.p.G0(bp.LA()) == bp.iotaA());

  // rank-one pairings with nonzero curvature
  LambdaPoly heis = bracket(bp.LA(), bp.gammaA());
  CHECK(heis.entry(0).isZero());
  CHECK(heis.entry(1) == FieldExpr::unit(bp.c()));
  CHECK(heis.size() <= 2);
  CHECK(bracket(bp.LA(), bp.LA()) == LambdaPoly(bp.c()));
  CHECK(bracket(bp.gammaA(), bp.gammaA()) == LambdaPoly(bp.c()));
  LambdaPoly bc = bracket(bp.iotaA(), bp.Afield());
  CHECK(bc.entry(0) == FieldExpr::unit(bp.c()));
  CHECK(bc.size() == 1);
}

TEST_CASE("membership in the joint kernel of the fiber modes") {
  auto b2 = flat(2);
  DiffForm a = DiffForm::monomial(g(b2, 0), {1});
  BundlePatch bp = BundlePatch::make(b2, a);

  CHECK(invariantCheck(bp, bp.p.coeff(bp.lift(g(b2, 0) * g(b2, 1)))));
  CHECK(invariantCheck(bp, bp.iotaA()));
  CHECK(invariantCheck(bp, bp.Afield()));
  CHECK(invariantCheck(bp, bp.LA()));
  CHECK(invariantCheck(bp, bp.p.lieField(bp.horizontal(VectorField::unitDir(b2, 1)))));
  CHECK(invariantCheck(bp, bp.xiA()));

  CHECK_FALSE(invariantCheck(bp, bp.gammaA()));
  CHECK(circle(bp.LA(), 1, bp.gammaA()) == FieldExpr::unit(bp.c()));
  CHECK_FALSE(invariantCheck(bp, bp.p.jet(bp.fiber)));
  CHECK_FALSE(invariantCheck(bp, bp.p.coeff(CoeffFn::fourier(bp.total, bp.fiber, 1))));
}

TEST_CASE("presented quotients validate their twist data") {
  auto b0 = flat(0);
  auto b2 = flat(2);
  auto b3 = flat(3);
  auto b4 = flat(4);
  DiffForm F2 = DiffForm::wedge(dg(b2, 0), dg(b2, 1));

  SUBCASE("point base degenerates to the odd pair") {
    QuotientContext q = QuotientContext::make(b0, DiffForm::zero(b0), DiffForm::zero(b0),
                                              DiffForm::zero(b0));
    CHECK(q.n() == 0);
    CHECK(q.c()->gens.size() == 2);
    CHECK(q.ctx->strictGrading);
    LambdaPoly bc = bracket(q.iotaA(), q.A());
    CHECK(bc.entry(0) == q.unit());
    CHECK(bc.size() == 1);
    CHECK(bracket(q.A(), q.A()) == LambdaPoly(q.c()));
    CHECK(q.D(q.A()).isZero());
    CHECK(q.D(q.iotaA()).isZero());
    CHECK(q.Dmod(q.A()).isZero());
  }

  SUBCASE("zero twist data keeps the curvature entries only") {
    QuotientContext q = QuotientContext::make(b2, F2, DiffForm::zero(b2), DiffForm::zero(b2));
    CHECK(q.ctx->strictGrading);
    for (int u = 0; u < 2; ++u) {
      LambdaPoly d = bracket(q.iota(u), q.w(u));
      CHECK(d.entry(0) == q.unit());
      CHECK(bracket(q.iota(u), q.w(1 - u)) == LambdaPoly(q.c()));
    }
    // [l_u lam A] = (iota_u F)~
    CHECK(bracket(q.l(0), q.A()).entry(0) == q.formPayload(contract(VectorField::unitDir(b2, 0), F2)));
    CHECK(bracket(q.l(1), q.A()).entry(0) == q.formPayload(contract(VectorField::unitDir(b2, 1), F2)));
    CHECK(bracket(q.l(0), q.iotaA()) == LambdaPoly(q.c()));
    // [l_u lam iota_v] = (iota_u iota_v F) iota_A
    CoeffFn k2 = fnPart(contract(VectorField::unitDir(b2, 0), contract(VectorField::unitDir(b2, 1), F2)));
    CHECK(bracket(q.l(0), q.iota(1)).entry(0) == wick(q.coeff(k2), q.iotaA()));
    CHECK(bracket(q.l(0), q.iota(0)) == LambdaPoly(q.c()));
    CHECK(bracket(q.l(0), q.l(1)) == LambdaPoly(q.c()));  // constant curvature
  }

  SUBCASE("nonconstant curvature feeds the lie-lie entry") {
    DiffForm curv = DiffForm::monomial(g(b3, 0) * g(b3, 1), {2}).d();
    CHECK(curv.d().isZero());
    QuotientContext q = QuotientContext::make(b3, curv, DiffForm::zero(b3), DiffForm::zero(b3));
    CoeffFn k2 = fnPart(contract(VectorField::unitDir(b3, 1), contract(VectorField::unitDir(b3, 2), curv)));
    CHECK(bracket(q.l(1), q.l(2)).entry(0) == wick(q.formPayload(DiffForm::fn(k2).d()), q.iotaA()));
  }

  SUBCASE("the two-form twist pairs lie atoms with the fiber contraction") {
    DiffForm h2 = F2 * Scalar(2);
    QuotientContext q = QuotientContext::make(b2, F2, h2, DiffForm::zero(b2));
    CHECK_FALSE(q.ctx->strictGrading);
    VectorField X(b2);
    X.comp[1] = CoeffFn::one(b2) + g(b2, 0);
    LambdaPoly lp = bracket(q.lieX(X), q.iotaA());
    CHECK(lp.entry(0) == q.formPayload(contract(X, h2)));
    CHECK(lp.size() <= 1);
  }

  SUBCASE("twist data guards") {
    CHECK_THROWS(QuotientContext::make(b3, DiffForm::monomial(g(b3, 0), {1, 2}), DiffForm::zero(b3),
                                       DiffForm::zero(b3)));  // curvature not closed
    CHECK_THROWS(QuotientContext::make(b3, DiffForm::zero(b3), DiffForm::monomial(g(b3, 0), {1, 2}),
                                       DiffForm::zero(b3)));  // twist two-form not closed
    CHECK_THROWS(QuotientContext::make(b2, dg(b2, 0), DiffForm::zero(b2),
                                       DiffForm::zero(b2)));  // wrong degree
    DiffForm FA4 = DiffForm::wedge(dg(b4, 0), dg(b4, 1));
    DiffForm Fh4 = DiffForm::wedge(dg(b4, 2), dg(b4, 3));
    CHECK_THROWS(QuotientContext::make(b4, FA4, Fh4, DiffForm::zero(b4)));  // d h3 != -curv ^ h2
    DiffForm h3ok = -DiffForm::wedge(DiffForm::monomial(g(b4, 0), {1}), Fh4);
    QuotientContext q4 = QuotientContext::make(b4, FA4, Fh4, h3ok);
    CHECK(q4.n() == 4);
  }
}

TEST_CASE("the free model certifies the presented tables") {
  auto b2 = flat(2);
  DiffForm a2 = DiffForm::monomial(g(b2, 0), {1});
  BundlePatch bp2 = BundlePatch::make(b2, a2);

  SUBCASE("curvature only") {
    QuotientContext q = QuotientContext::make(b2, a2.d(), DiffForm::zero(b2), DiffForm::zero(b2));
    checkAgainstModel(q, bp2);
  }
  SUBCASE("constant two-form twist") {
    QuotientContext q = QuotientContext::make(b2, a2.d(), a2.d() * Scalar(2), DiffForm::zero(b2));
    checkAgainstModel(q, bp2);
  }
  SUBCASE("nonconstant twist data with a three-form component") {
    auto b3 = flat(3);
    DiffForm a3 = DiffForm::monomial(g(b3, 0), {1});
    DiffForm h2 = DiffForm::monomial(g(b3, 2), {0, 1}) - DiffForm::monomial(g(b3, 0), {1, 2});
    CHECK(h2.d().isZero());
    DiffForm h3 = DiffForm::monomial(g(b3, 1), {0, 1, 2});
    BundlePatch bp3 = BundlePatch::make(b3, a3);
    QuotientContext q = QuotientContext::make(b3, a3.d(), h2, h3);
    checkAgainstModel(q, bp3);
  }
  SUBCASE("honest flux: d h3 = -curv ^ h2 nonzero") {
    auto b4 = flat(4);
    DiffForm a4 = DiffForm::monomial(g(b4, 0), {1});
    DiffForm h2 = DiffForm::wedge(dg(b4, 2), dg(b4, 3));
    DiffForm h3 = -DiffForm::wedge(DiffForm::monomial(g(b4, 0), {1}), h2);
    CHECK(h3.d() == -DiffForm::wedge(a4.d(), h2));
    BundlePatch bp4 = BundlePatch::make(b4, a4);
    QuotientContext q = QuotientContext::make(b4, a4.d(), h2, h3);
    checkAgainstModel(q, bp4);
  }
}

TEST_CASE("the quotient differential squares to zero") {
  auto b3 = flat(3);
  DiffForm curv = DiffForm::wedge(dg(b3, 0), dg(b3, 1));
  DiffForm h2 = DiffForm::monomial(g(b3, 2), {0, 1}) - DiffForm::monomial(g(b3, 0), {1, 2});
  DiffForm h3 = DiffForm::monomial(g(b3, 1), {0, 1, 2});
  QuotientContext q = QuotientContext::make(b3, curv, h2, h3);

  VectorField X(b3);
  X.comp[0] = CoeffFn::one(b3);
  X.comp[1] = g(b3, 0) * g(b3, 2);
  CoeffFn f = g(b3, 0) * g(b3, 1);
  InvariantForm G{DiffForm::monomial(g(b3, 2), {0}), DiffForm::fn(g(b3, 1))};

  std::vector<FieldExpr> sample = atomsOf(q);
  sample.push_back(q.iotaX(X));
  sample.push_back(q.lieX(X));
  sample.push_back(q.Hfield());
  sample.push_back(wick(q.A(), q.iotaA()));
  sample.push_back(q.pairPayload(G));
  sample.push_back(wick(q.coeff(f), q.l(0)));
  for (const auto& x : sample) {
    CHECK(q.D(q.D(x)).isZero());
    CHECK(q.Dmod(q.Dmod(x)).isZero());
  }

  // the modified differential restores the de Rham shape on the generators
  for (int u = 0; u < 3; ++u) {
    CHECK(q.Dmod(q.iota(u)) == q.l(u));
    CHECK(q.Dmod(q.l(u)).isZero());
  }
  CHECK(q.Dmod(q.coeff(f)) == q.formPayload(DiffForm::fn(f).d()));
  CHECK(q.Dmod(q.formPayload(DiffForm::monomial(f, {2}))) ==
        q.formPayload(DiffForm::monomial(f, {2}).d()));
  CHECK(q.Dmod(q.A()) == q.formPayload(curv));
  CHECK(q.Dmod(q.iotaA()) == q.formPayload(h2));
  CHECK(q.Dmod(q.iotaX(X)) == q.lieX(X));
  CHECK(q.Dmod(q.lieX(X)).isZero());
  CHECK(q.D(q.iotaA()).isZero());

  // expansion rules of the composite payloads
  VectorField gX(b3);
  for (int u = 0; u < 3; ++u) gX.comp[u] = X.comp[u] * f;
  CHECK(q.iotaX(gX) == wick(q.coeff(f), q.iotaX(X)));
  CHECK(q.lieX(gX) ==
        wick(q.formPayload(DiffForm::fn(f).d()), q.iotaX(X)) + wick(q.coeff(f), q.lieX(X)));

  // zero twist data degenerates the modified differential to the plain one
  QuotientContext qp = QuotientContext::make(b3, curv, DiffForm::zero(b3), DiffForm::zero(b3));
  CHECK(qp.Hfield().isZero());
  for (const auto& x : atomsOf(qp)) CHECK(qp.Dmod(x) == qp.D(x));
  CHECK(qp.D(qp.iotaX(X)) == qp.lieX(X));
}

TEST_CASE("untwisting moves only the lie atoms") {
  auto b3 = flat(3);
  DiffForm curv = DiffForm::wedge(dg(b3, 0), dg(b3, 1));
  DiffForm h2 = DiffForm::monomial(g(b3, 2), {0, 1}) - DiffForm::monomial(g(b3, 0), {1, 2});
  DiffForm h3 = DiffForm::monomial(g(b3, 1), {0, 1, 2});
  QuotientContext q = QuotientContext::make(b3, curv, h2, h3);
  QuotientUntwisting U = untwistQuotient(q);

  for (int u = 0; u < 3; ++u) {
    CHECK(U.apply(U.plain.iota(u)) == q.iota(u));
    CHECK(U.apply(U.plain.w(u)) == q.w(u));
    CHECK(U.apply(U.plain.jet(u)) == q.jet(u));
    DiffForm iu3 = contract(VectorField::unitDir(b3, u), h3);
    DiffForm iu2 = contract(VectorField::unitDir(b3, u), h2);
    CHECK(U.apply(U.plain.l(u)) ==
          q.l(u) - q.formPayload(iu3) + wick(q.A(), q.formPayload(iu2)));
  }
  CHECK(U.apply(U.plain.A()) == q.A());
  CHECK(U.apply(U.plain.iotaA()) == q.iotaA());

  checkBracketHom(atomsOf(U.plain), [&](const FieldExpr& x) { return U.apply(x); });

  std::vector<FieldExpr> sample = atomsOf(U.plain);
  VectorField X(b3);
  X.comp[2] = CoeffFn::one(b3) + g(b3, 1);
  sample.push_back(U.plain.lieX(X));
  sample.push_back(wick(U.plain.A(), U.plain.iota(0)));
  for (const auto& x : sample) {
    CHECK(U.apply(U.plain.D(x)) == q.D(U.apply(x)));
    CHECK(U.unapply(U.apply(x)) == x);
  }
  for (const auto& y : atomsOf(q)) CHECK(U.apply(U.unapply(y)) == y);

  // with zero twist data the untwisting is the identity renaming
  QuotientContext q0 = QuotientContext::make(b3, curv, DiffForm::zero(b3), DiffForm::zero(b3));
  QuotientUntwisting U0 = untwistQuotient(q0);
  for (int u = 0; u < 3; ++u) CHECK(U0.apply(U0.plain.l(u)) == q0.l(u));
}

TEST_CASE("the duality swap preserves the presented brackets") {
  auto b2 = flat(2);
  DiffForm FA = DiffForm::wedge(dg(b2, 0), dg(b2, 1));
  DiffForm FAhat = FA * Scalar(2);
  DualPairSetup s = DualPairSetup::make(b2, FA, FAhat, DiffForm::zero(b2));
  ChiralTauMap tau = tauCh(s);

  CHECK(tau.apply(s.zSide.A()) == s.hatSide.iotaA());
  CHECK(tau.apply(s.zSide.iotaA()) == s.hatSide.A());
  for (int u = 0; u < 2; ++u) {
    CHECK(tau.apply(s.zSide.iota(u)) == s.hatSide.iota(u));
    CHECK(tau.apply(s.zSide.l(u)) == s.hatSide.l(u));
    CHECK(tau.apply(s.zSide.w(u)) == s.hatSide.w(u));
  }

  checkBracketHom(atomsOf(s.zSide), [&](const FieldExpr& x) { return tau.apply(x); });
  checkBracketHom(atomsOf(s.hatSide), [&](const FieldExpr& y) { return tau.applyBack(y); });

  // parity is preserved, weight traded on the odd pair
  CHECK(parityOf(tau.apply(s.zSide.A())) == 1);
  CHECK(weightOf(s.zSide.A()) == 0);
  CHECK(weightOf(tau.apply(s.zSide.A())) == 1);
  CHECK(weightOf(tau.apply(s.zSide.iotaA())) == 0);

  std::vector<FieldExpr> sample = atomsOf(s.zSide);
  sample.push_back(wick(s.zSide.A(), s.zSide.iotaA()));
  sample.push_back(wick(s.zSide.coeff(g(b2, 0)), derivative(s.zSide.A(), 1)));
  for (const auto& x : sample) CHECK(tau.applyBack(tau.apply(x)) == x);

  // payload constructors are fixed
  VectorField X(b2);
  X.comp[0] = g(b2, 1);
  X.comp[1] = CoeffFn::one(b2);
  CHECK(tau.apply(s.zSide.iotaX(X)) == s.hatSide.iotaX(X));
  CHECK(tau.apply(s.zSide.lieX(X)) == s.hatSide.lieX(X));
  CHECK(tau.apply(s.zSide.coeff(g(b2, 0))) == s.hatSide.coeff(g(b2, 0)));
  CHECK(tau.apply(s.zSide.formPayload(FA)) == s.hatSide.formPayload(FA));

  SUBCASE("point base reduces to the swap of the odd pair") {
    auto b0 = flat(0);
    DualPairSetup s0 = DualPairSetup::make(b0, DiffForm::zero(b0), DiffForm::zero(b0),
                                           DiffForm::zero(b0));
    ChiralTauMap t0 = tauCh(s0);
    CHECK(t0.apply(s0.zSide.A()) == s0.hatSide.iotaA());
    CHECK(t0.apply(wick(s0.zSide.iotaA(), s0.zSide.A())) ==
          wick(s0.hatSide.A(), s0.hatSide.iotaA()));
    checkBracketHom(atomsOf(s0.zSide), [&](const FieldExpr& x) { return t0.apply(x); });
  }

  SUBCASE("mismatched twist data is rejected") {
    DualPairSetup bad = s;
    bad.hatSide = QuotientContext::make(b2, FA, FAhat, DiffForm::zero(b2));
    CHECK_THROWS(tauCh(bad));
  }
}

TEST_CASE("replaying the duality proof computations") {
  auto b3 = flat(3);
  DiffForm FA = DiffForm::wedge(dg(b3, 0), dg(b3, 1));
  DiffForm FAhat = DiffForm::monomial(g(b3, 2), {0, 1}) - DiffForm::monomial(g(b3, 0), {1, 2});
  DiffForm H3 = DiffForm::monomial(g(b3, 1), {0, 1, 2});
  DualPairSetup s = DualPairSetup::make(b3, FA, FAhat, H3);
  ChiralTauMap tau = tauCh(s);
  const QuotientContext& z = s.zSide;
  const QuotientContext& h = s.hatSide;

  VectorField X(b3), Y(b3);
  X.comp[1] = CoeffFn::one(b3) + g(b3, 0);
  Y.comp[0] = g(b3, 1);
  Y.comp[2] = CoeffFn::one(b3);
  VectorField XY = vecBracket(X, Y);

  CoeffFn k2 = fnPart(contract(X, contract(Y, z.curv)));   // iota_X iota_Y F_A
  CoeffFn t2 = fnPart(contract(X, contract(Y, z.h2)));     // iota_X iota_Y F_Ahat
  DiffForm t3 = contract(X, contract(Y, z.h3));

  SUBCASE("lie against the fiber contraction") {
    LambdaPoly lp = bracket(z.lieX(X), z.iotaA());
    CHECK(lp.entry(0) == z.formPayload(contract(X, z.h2)));
    CHECK(lp.size() <= 1);
    LambdaPoly lphat = bracket(h.lieX(X), h.A());
    CHECK(lphat.entry(0) == h.formPayload(contract(X, h.curv)));
    CHECK(lphat.size() <= 1);
    CHECK(tau.apply(lp.entry(0)) == lphat.entry(0));
  }
  SUBCASE("lie against the connection atom") {
    LambdaPoly lp = bracket(z.lieX(X), z.A());
    CHECK(lp.entry(0) == z.formPayload(contract(X, z.curv)));
    CHECK(lp.size() <= 1);
    LambdaPoly lphat = bracket(h.lieX(X), h.iotaA());
    CHECK(lphat.entry(0) == h.formPayload(contract(X, h.h2)));
    CHECK(tau.apply(lp.entry(0)) == lphat.entry(0));
  }
  SUBCASE("lie against a horizontal contraction") {
    LambdaPoly lp = bracket(z.lieX(X), z.iotaX(Y));
    FieldExpr display = z.iotaX(XY) + wick(z.coeff(k2), z.iotaA()) + z.formPayload(t3) +
                        wick(z.coeff(t2), z.A());
    CHECK(lp.entry(0) == display);
    CHECK(lp.size() <= 1);
    LambdaPoly lphat = bracket(h.lieX(X), h.iotaX(Y));
    FieldExpr displayHat = h.iotaX(XY) + wick(h.coeff(k2), h.A()) + h.formPayload(t3) +
                           wick(h.coeff(t2), h.iotaA());
    CHECK(lphat.entry(0) == displayHat);
    CHECK(tau.apply(lp.entry(0)) == lphat.entry(0));
  }
  SUBCASE("lie against lie") {
    LambdaPoly lp = bracket(z.lieX(X), z.lieX(Y));
    FieldExpr display = z.lieX(XY) +
                        z.D(z.formPayload(t3) + wick(z.coeff(t2), z.A())) +
                        wick(z.formPayload(DiffForm::fn(k2).d()), z.iotaA()) +
                        z.formPayload(k2 * z.h2);
    CHECK(lp.entry(0) == display);
    CHECK(lp.size() <= 1);
    // same structural display, with the hat side's own curvature and twist
    LambdaPoly lphat = bracket(h.lieX(X), h.lieX(Y));
    FieldExpr displayHat = h.lieX(XY) +
                           h.D(h.formPayload(t3) + wick(h.coeff(k2), h.A())) +
                           wick(h.formPayload(DiffForm::fn(t2).d()), h.iotaA()) +
                           h.formPayload(t2 * h.h2);
    CHECK(lphat.entry(0) == displayHat);
    CHECK(tau.apply(lp.entry(0)) == lphat.entry(0));
  }
  SUBCASE("honest flux replay") {
    auto b4 = flat(4);
    DiffForm FA4 = DiffForm::wedge(dg(b4, 0), dg(b4, 1));
    DiffForm Fh4 = DiffForm::wedge(dg(b4, 2), dg(b4, 3));
    DiffForm H34 = -DiffForm::wedge(DiffForm::monomial(g(b4, 0), {1}), Fh4);
    DualPairSetup s4 = DualPairSetup::make(b4, FA4, Fh4, H34);
    ChiralTauMap tau4 = tauCh(s4);
    VectorField X4(b4), Y4(b4);
    X4.comp[1] = CoeffFn::one(b4);
    Y4.comp[2] = g(b4, 3);
    LambdaPoly lp = bracket(s4.zSide.lieX(X4), s4.zSide.iotaX(Y4));
    LambdaPoly lphat = bracket(s4.hatSide.lieX(X4), s4.hatSide.iotaX(Y4));
    CHECK(tau4.apply(lp.entry(0)) == lphat.entry(0));
    CHECK(tau4.apply(lp.entry(1)) == lphat.entry(1));
  }
}

TEST_CASE("modified differentials intertwine while the plain ones cannot") {
  auto b2 = flat(2);
  DiffForm FA = DiffForm::wedge(dg(b2, 0), dg(b2, 1));
  DiffForm FAhat = FA * Scalar(2);
  DualPairSetup s = DualPairSetup::make(b2, FA, FAhat, DiffForm::zero(b2));
  ChiralTauMap tau = tauCh(s);
  const QuotientContext& z = s.zSide;
  const QuotientContext& h = s.hatSide;

  // the displayed failure of the unmodified differentials
  CHECK(z.D(z.iotaA()).isZero());
  CHECK(tau.apply(z.D(z.iotaA())).isZero());
  CHECK(h.D(tau.apply(z.iotaA())) == h.formPayload(h.curv));
  CHECK_FALSE(h.D(tau.apply(z.iotaA())).isZero());

  // the zero mode of the twist repairs it on every atom
  std::vector<FieldExpr> sample = atomsOf(z);
  VectorField X(b2);
  X.comp[0] = g(b2, 1) * g(b2, 1);
  sample.push_back(z.iotaX(X));
  sample.push_back(z.lieX(X));
  sample.push_back(wick(z.A(), z.iota(0)));
  sample.push_back(wick(z.coeff(g(b2, 0)), wick(z.iotaA(), z.A())));
  for (const auto& x : sample) CHECK(tau.apply(z.Dmod(x)) == h.Dmod(tau.apply(x)));

  CHECK(tau.apply(z.Dmod(z.iotaA())) == h.formPayload(FA * Scalar(2)));
  CHECK(h.Dmod(h.A()) == h.formPayload(FAhat));
}

TEST_CASE("the module map extends the classical duality") {
  auto b2 = flat(2);
  DiffForm FA = DiffForm::wedge(dg(b2, 0), dg(b2, 1));
  DiffForm FAhat = FA * Scalar(2);
  DualPairSetup s = DualPairSetup::make(b2, FA, FAhat, DiffForm::zero(b2));
  ChiralT t = tCh(s);
  const QuotientContext& zq = t.zPlain();
  const QuotientContext& hq = t.hatPlain();

  // the composed swap still preserves every bracket between the plain sides
  checkBracketHom(atomsOf(zq), [&](const FieldExpr& x) { return t.tauPlain(x); });
  for (const auto& x : atomsOf(zq)) CHECK(t.tauPlainBack(t.tauPlain(x)) == x);

  CHECK(t.applyWord(ModeWord{}) == hq.A());                      // image of the vacuum
  CHECK(t.applyWord(ModeWord{Scalar(1), {{zq.A(), 0}}}) == -hq.unit());

  // weight zero coincides with the classical map on a spanning set
  std::vector<CoeffFn> fns = {CoeffFn::one(b2), g(b2, 0), g(b2, 0) * g(b2, 1)};
  for (const auto& f : fns)
    for (int mask = 0; mask < 4; ++mask)
      for (int withA = 0; withA < 2; ++withA) {
        ModeWord wd;
        if (withA) wd.ops.push_back({zq.A(), 0});
        wd.ops.push_back({zq.coeff(f), 0});
        DiffForm base = DiffForm::fn(f);
        for (int u = 0; u < 2; ++u)
          if (mask & (1 << u)) {
            wd.ops.push_back({zq.w(u), 0});
            base = DiffForm::wedge(base, dg(b2, u));
          }
        InvariantForm G = withA ? InvariantForm{DiffForm::zero(b2), base}
                                : InvariantForm{base, DiffForm::zero(b2)};
        CHECK(evalWord(zq, wd) == zq.pairPayload(G));
        CHECK(t.applyWord(wd) == hq.pairPayload(horiT(G)));
      }

  CHECK_THROWS(t.applyWord(ModeWord{Scalar(1), {{zq.A() + zq.iotaA(), 0}}}));
  CHECK_THROWS(evalWord(zq, ModeWord{Scalar(1), {{zq.A() + zq.iotaA(), 0}}}));
}

TEST_CASE("mode words of equal value share an image") {
  auto b2 = flat(2);
  DiffForm FA = DiffForm::wedge(dg(b2, 0), dg(b2, 1));
  DualPairSetup s = DualPairSetup::make(b2, FA, FA * Scalar(2), DiffForm::zero(b2));
  ChiralT t = tCh(s);
  const QuotientContext& zq = t.zPlain();

  int pairs = 0;
  auto sameImage = [&](const std::vector<ModeWord>& u, const std::vector<ModeWord>& v) {
    FieldExpr eu = zq.zero(), ev = zq.zero();
    for (const auto& wd : u) eu += evalWord(zq, wd);
    for (const auto& wd : v) ev += evalWord(zq, wd);
    CHECK(eu == ev);
    CHECK(t.apply(u) == t.apply(v));
    ++pairs;
  };

  // modes of bracket-commuting odd atoms anticommute
  std::vector<std::pair<FieldExpr, FieldExpr>> oddPairs = {
      {zq.iota(0), zq.iota(1)}, {zq.iota(0), zq.iotaA()}, {zq.w(0), zq.w(1)},
      {zq.w(0), zq.iotaA()}};
  std::vector<std::pair<int, int>> modes = {{-1, -1}, {-2, -1}, {-1, -3}};
  for (const auto& [x, y] : oddPairs)
    for (const auto& [k, m] : modes)
      sameImage({{Scalar(1), {{x, k}, {y, m}}}}, {{Scalar(-1), {{y, m}, {x, k}}}});

  // even atoms with vanishing brackets commute
  sameImage({{Scalar(1), {{zq.coeff(g(b2, 0)), -1}, {zq.w(0), -1}}}},
            {{Scalar(1), {{zq.w(0), -1}, {zq.coeff(g(b2, 0)), -1}}}});
  sameImage({{Scalar(1), {{zq.l(0), -1}, {zq.w(1), -1}}}},
            {{Scalar(1), {{zq.w(1), -1}, {zq.l(0), -1}}}});

  // derivative rule for shifted modes (letters whose weight the swap keeps)
  sameImage({{Scalar(1), {{derivative(zq.iota(0), 1), -2}, {zq.iota(1), -1}}}},
            {{Scalar(1), {{zq.iota(0), -2}, {zq.iota(1), -1}}}});
  sameImage({{Scalar(1), {{derivative(zq.w(0), 1), -1}, {zq.iota(0), -1}}}},
            {{Scalar(1), {{zq.w(0), -1}, {zq.iota(0), -1}}}});
  sameImage({{Scalar(1), {{derivative(zq.jet(0), 1), -1}, {zq.w(0), -1}}}}, {});

  // the odd pair contributes the delta anticommutator
  sameImage({{Scalar(1), {{zq.iotaA(), 0}, {zq.A(), 0}, {zq.w(0), -1}}},
             {Scalar(1), {{zq.A(), 0}, {zq.iotaA(), 0}, {zq.w(0), -1}}}},
            {{Scalar(1), {{zq.w(0), -1}}}});
  sameImage({{Scalar(1), {{zq.iotaA(), 1}, {zq.A(), -1}, {zq.w(0), -1}}},
             {Scalar(1), {{zq.A(), -1}, {zq.iotaA(), 1}, {zq.w(0), -1}}}},
            {{Scalar(1), {{zq.w(0), -1}}}});

  // scalar linearity
  sameImage({{Scalar(1), {{zq.iota(0) * Scalar(2), -1}}}}, {{Scalar(2), {{zq.iota(0), -1}}}});
  sameImage({{Scalar(1), {{zq.w(0) * Scalar(3), -1}}}}, {{Scalar(3), {{zq.w(0), -1}}}});

  CHECK(pairs >= 20);
}

TEST_CASE("the module map respects weight and flips parity") {
  auto b2 = flat(2);
  DiffForm FA = DiffForm::wedge(dg(b2, 0), dg(b2, 1));
  DualPairSetup s = DualPairSetup::make(b2, FA, FA * Scalar(2), DiffForm::zero(b2));
  ChiralT t = tCh(s);
  const QuotientContext& zq = t.zPlain();

  std::vector<FieldExpr> pool = {zq.iota(0), zq.iota(1), zq.w(0),    zq.w(1),
                                 zq.l(0),    zq.jet(1),  zq.A(),     zq.iotaA(),
                                 zq.coeff(g(b2, 0))};
  std::mt19937_64 rng{20260815u};
  int seen = 0, attempts = 0;
  while (seen < 50 && attempts < 600) {
    ++attempts;
    ModeWord wd;
    int len = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < len; ++i)
      wd.ops.push_back({pool[rng() % pool.size()], -1 - static_cast<int>(rng() % 2)});
    FieldExpr v = evalWord(zq, wd);
    if (v.isZero()) continue;
    auto wv = weightOf(v);
    if (!wv || *wv > 2) continue;
    FieldExpr tv = t.applyWord(wd);
    CHECK_FALSE(tv.isZero());
    CHECK(weightOf(tv) == *wv);
    CHECK(parityOf(tv) == (*parityOf(v) + 1) % 2);
    ++seen;
  }
  CHECK(seen == 50);
}

TEST_CASE("equal curvature connections share the extended block") {
  auto b2 = flat(2);
  DiffForm a1 = DiffForm::monomial(g(b2, 0), {1});
  // gauge-shifted potential with the same curvature
  DiffForm a2 = a1 + DiffForm::fn(g(b2, 0) * g(b2, 1)).d();
  BundlePatch bpA = BundlePatch::make(b2, a1);
  BundlePatch bpB = BundlePatch::over(bpA, a2);
  CHECK(bpA.FA() == bpB.FA());
  CHECK_FALSE(bpA.A() == bpB.A());
  CHECK(bpA.xiA() == bpB.xiA());
  CHECK(bpA.LA() == bpB.LA());

  for (const BundlePatch* bp : {&bpA, &bpB}) {
    LambdaPoly heis = bracket(bp->LA(), bp->gammaA());
    CHECK(heis.entry(1) == FieldExpr::unit(bp->c()));
    CHECK(heis.entry(0).isZero());
    CHECK(bracket(bp->gammaA(), bp->gammaA()) == LambdaPoly(bp->c()));
    // gamma commutes with pullbacks and horizontal contractions
    CHECK(bracket(bp->gammaA(), bp->p.coeff(bp->lift(g(b2, 1)))) == LambdaPoly(bp->c()));
    CHECK(bracket(bp->gammaA(), bp->p.formField(bp->liftF(dg(b2, 1)))) == LambdaPoly(bp->c()));
    VectorField hor = bp->horizontal(VectorField::unitDir(b2, 1));
    CHECK(bracket(bp->gammaA(), bp->p.iotaField(hor)) == LambdaPoly(bp->c()));
    // [L_X lam gamma] is a single pole: the curvature contraction on jets
    LambdaPoly lg = bracket(bp->p.lieField(hor), bp->gammaA());
    DiffForm ixF = contract(hor, bp->FA());
    FieldExpr expect = FieldExpr::zero(bp->c());
    for (int v = 0; v < static_cast<int>(bp->total->size()); ++v) {
      CoeffFn cv = fnPart(contract(VectorField::unitDir(bp->total, v), ixF));
      if (!cv.isZero()) expect += wick(bp->p.coeff(cv), bp->p.jet(v));
    }
    CHECK(lg.entry(0) == expect);
    CHECK(lg.size() <= 1);
  }
}
