#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "vaw/cdr.hpp"
#include "vaw/courant.hpp"

namespace vaw {

// ---------------------------------------------------------------------------
// Trivialized circle bundle over a coordinate chart.
//
// The total chart appends one angular fiber coordinate (always the last
// coordinate).  The connection form is A = dtheta + a with a pulled back from
// the base, so iota_A A = 1 holds by construction and F_A = da is closed.
// ---------------------------------------------------------------------------
struct BundlePatch {
  CoordsPtr base;
  CoordsPtr total;
  int fiber = 0;  // index of the fiber coordinate in `total`
  Patch p;        // free chart of the total space
  DiffForm a;     // connection potential, lifted to the total chart

  const Context* c() const { return p.c(); }
  int nBase() const { return static_cast<int>(base->size()); }

  // Coefficient transport along the projection (exponent extension; the
  // fiber slot of a lifted function is always zero).
  CoeffFn lift(const CoeffFn& f) const {
    CoeffFn r = CoeffFn::zero(total);
    for (const auto& t : f.terms) {
      std::vector<int> e = t.e;
      e.push_back(0);
      r = r + CoeffFn::monomial(total, e, t.c);
    }
    return r;
  }
  DiffForm liftF(const DiffForm& w) const {
    DiffForm r(total);
    for (const auto& [m, f] : w.terms) r.terms[m] = lift(f);
    return r;
  }

  DiffForm A() const { return DiffForm::dcoord(total, fiber) + a; }
  DiffForm FA() const { return a.d(); }
  VectorField XA() const { return VectorField::unitDir(total, fiber); }

  // Horizontal lift: same base components, fiber component fixed by
  // iota_X A = 0.
  VectorField horizontal(const VectorField& Xbase) const {
    if (Xbase.cs != base) throw Error("bundle: vector field lives on the wrong chart");
    VectorField r(total);
    for (int u = 0; u < nBase(); ++u) r.comp[u] = lift(Xbase.comp[u]);
    r.comp[fiber] = CoeffFn::zero(total) - fnPart(contract(r, a));
    return r;
  }

  FieldExpr Afield() const { return p.formField(A()); }
  FieldExpr FAfield() const { return p.formField(FA()); }
  FieldExpr iotaA() const { return p.b(fiber); }
  FieldExpr LA() const { return p.lieField(XA()); }

  // gamma^A = G_0(dz A); its differential is dz A - xi^A with xi^A = G_0(dz F_A).
  FieldExpr gammaA() const { return p.G0(derivative(Afield(), 1)); }
  FieldExpr xiA() const { return p.G0(derivative(FAfield(), 1)); }

  static BundlePatch make(const CoordsPtr& baseCs, const DiffForm& aBase,
                          std::string name = "bundle") {
    BundlePatch bp;
    bp.base = baseCs;
    int nf = 0, na = 0;
    for (size_t u = 0; u < baseCs->size(); ++u) (baseCs->isFlat(u) ? nf : na)++;
    bp.total = makeCoords(CoordSystem::flatAngular(nf, na + 1));
    bp.fiber = static_cast<int>(baseCs->size());
    if (aBase.cs != baseCs) throw Error("bundle: connection potential lives on the wrong chart");
    if (!aBase.isZero() && !(aBase == aBase.part(1)))
      throw Error("bundle: connection potential must be a one-form");
    bp.a = bp.liftF(aBase);
    bp.p = Patch::make(bp.total, std::move(name));
    if (!(fnPart(contract(bp.XA(), bp.A())) == CoeffFn::one(bp.total)))
      throw Error("bundle: fiber pairing is not normalized");
    return bp;
  }

  // Same total chart, different connection potential.
  static BundlePatch over(const BundlePatch& other, const DiffForm& aBase) {
    BundlePatch bp = other;
    if (aBase.cs != bp.base) throw Error("bundle: connection potential lives on the wrong chart");
    if (!aBase.isZero() && !(aBase == aBase.part(1)))
      throw Error("bundle: connection potential must be a one-form");
    bp.a = bp.liftF(aBase);
    return bp;
  }
};

// Joint kernel of the nonnegative fiber modes.  All weights in the free
// chart are >= 0, so modes beyond the top weight of x vanish identically.
inline bool invariantCheck(const BundlePatch& bp, const FieldExpr& x) {
  if (x.ctx != bp.c()) throw Error("invariant: expression lives on the wrong chart");
  FieldExpr la = bp.LA();
  int bound = 0;
  for (const auto& t : x.terms) bound = std::max(bound, monoWeight(x.ctx, t));
  for (int k = 0; k <= bound + 1; ++k)
    if (!circle(la, k, x).isZero()) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Presented quotient of the invariant algebra of a circle bundle.
//
// Atoms: iota_a, w^a (= dgamma^a), l_a, jets for each base coordinate, plus
// the odd pair A (weight 0) and iota_A (weight 1).  The bracket table is the
// dimension-reduced twisted table with the fiber current replaced by the
// two-form h2 = iota_A H; it is parity-homogeneous but mixes weight and
// integer degree unless the twist data vanish.
// ---------------------------------------------------------------------------
struct QuotientContext {
  ContextPtr ctx;
  CoordsPtr base;
  DiffForm curv, h2, h3;
  std::vector<int> iotaGen, wGen, lGen, jetId;
  int aGen = -1, iaGen = -1;

  const Context* c() const { return ctx.get(); }
  int n() const { return static_cast<int>(base->size()); }

  FieldExpr iota(int u, int d = 0) const { return FieldExpr::generator(c(), iotaGen[u], d); }
  FieldExpr w(int u, int d = 0) const { return FieldExpr::generator(c(), wGen[u], d); }
  FieldExpr l(int u, int d = 0) const { return FieldExpr::generator(c(), lGen[u], d); }
  FieldExpr jet(int u, int d = 0) const { return FieldExpr::generator(c(), jetId[u], d); }
  FieldExpr A(int d = 0) const { return FieldExpr::generator(c(), aGen, d); }
  FieldExpr iotaA(int d = 0) const { return FieldExpr::generator(c(), iaGen, d); }
  FieldExpr coeff(const CoeffFn& f) const { return FieldExpr::fromCoeff(c(), f); }
  FieldExpr unit() const { return FieldExpr::unit(c()); }
  FieldExpr zero() const { return FieldExpr::zero(c()); }

  FieldExpr formPayload(const DiffForm& wf) const {
    if (wf.cs != base) throw Error("quotient: form lives on the wrong chart");
    FieldExpr r = zero();
    for (const auto& [m, f] : wf.terms) {
      std::vector<Factor> fs;
      for (int bit = 0; bit < 32; ++bit)
        if (m & (Mask(1) << bit)) fs.push_back(Factor{0, wGen[bit]});
      r += FieldExpr::mono(c(), f, fs);
    }
    return r;
  }
  // G0 + A /\ G1 for a pair of base forms.
  FieldExpr pairPayload(const InvariantForm& G) const {
    return formPayload(G.g0) + wick(A(), formPayload(G.g1));
  }

  FieldExpr iotaX(const VectorField& X) const {
    if (X.cs != base) throw Error("quotient: vector field lives on the wrong chart");
    FieldExpr r = zero();
    for (int u = 0; u < n(); ++u)
      if (!X.comp[u].isZero()) r += wick(coeff(X.comp[u]), iota(u));
    return r;
  }
  FieldExpr lieX(const VectorField& X) const {
    if (X.cs != base) throw Error("quotient: vector field lives on the wrong chart");
    FieldExpr r = zero();
    CoeffFn div = CoeffFn::zero(base);
    for (int u = 0; u < n(); ++u) {
      if (!X.comp[u].isZero()) r += wick(coeff(X.comp[u]), l(u));
      for (int v = 0; v < n(); ++v) {
        CoeffFn dv = X.comp[u].partial(v);
        if (!dv.isZero()) r += wick(coeff(dv), wick(w(v), iota(u)));
      }
      div = div + X.comp[u].partial(u);
    }
    // reordering contraction of the w-iota pair; makes lieX equal D(iotaX)
    if (!div.isZero()) r += derivative(coeff(div), 1);
    return r;
  }

  // (h3)~ + :A (h2)~: — the twist, as an element of the quotient.
  FieldExpr Hfield() const { return formPayload(h3) + wick(A(), formPayload(h2)); }

  // Descended differential: D(w^a) = 0, D(jet) = dz w^a, D(A) = curv~,
  // D(iota_A) = 0, D(iota_a) = l_a - (i_a h3)~ + :A (i_a h2)~:,
  // D(l_a) = (d i_a h3)~ - (curv /\ i_a h2)~ + :A (d i_a h2)~:.
  FieldExpr D(const FieldExpr& x) const {
    std::map<int, FieldExpr> img;
    for (int u = 0; u < n(); ++u) {
      DiffForm iu3 = contract(VectorField::unitDir(base, u), h3);
      DiffForm iu2 = contract(VectorField::unitDir(base, u), h2);
      img[iotaGen[u]] = l(u) - formPayload(iu3) + wick(A(), formPayload(iu2));
      img[wGen[u]] = zero();
      img[lGen[u]] =
          formPayload(iu3.d()) - formPayload(DiffForm::wedge(curv, iu2)) + wick(A(), formPayload(iu2.d()));
      img[jetId[u]] = derivative(w(u), 1);
    }
    img[aGen] = formPayload(curv);
    img[iaGen] = zero();
    auto coeffRule = [this](const CoeffFn& f) {
      FieldExpr r = zero();
      for (int u = 0; u < n(); ++u) {
        CoeffFn df = f.partial(u);
        if (!df.isZero()) r += FieldExpr::mono(c(), df, {Factor{0, wGen[u]}});
      }
      return r;
    };
    return applyOddDerivation(img, coeffRule, x);
  }

  // Modified differential D + H_0, H_0 the residue mode of the twist.
  FieldExpr Dmod(const FieldExpr& x) const { return D(x) + circle(Hfield(), 0, x); }

  static QuotientContext make(const CoordsPtr& baseCs, const DiffForm& curvIn,
                              const DiffForm& h2In, const DiffForm& h3In,
                              std::string name = "quotient") {
    QuotientContext q;
    q.base = baseCs;
    q.curv = curvIn;
    q.h2 = h2In;
    q.h3 = h3In;
    auto need = [](const DiffForm& f, int k, const char* what) {
      if (!f.isZero() && !(f == f.part(k))) throw Error(std::string("quotient: ") + what);
    };
    need(q.curv, 2, "curvature must be a two-form");
    need(q.h2, 2, "twist two-form must have degree two");
    need(q.h3, 3, "twist three-form must have degree three");
    if (!q.curv.d().isZero()) throw Error("quotient: curvature must be closed");
    if (!q.h2.d().isZero()) throw Error("quotient: twist two-form must be closed");
    if (!(q.h3.d() == -DiffForm::wedge(q.curv, q.h2)))
      throw Error("quotient: three-form twist fails the closedness constraint");

    auto ctx = std::make_shared<Context>();
    ctx->name = std::move(name);
    ctx->coords = baseCs;
    ctx->strictGrading = q.h2.isZero() && q.h3.isZero();
    int n = static_cast<int>(baseCs->size());
    ctx->jetGen.assign(n, -1);
    for (int u = 0; u < n; ++u) {
      q.iotaGen.push_back(static_cast<int>(ctx->gens.size()));
      ctx->gens.push_back({"iota[" + std::to_string(u + 1) + "]", GenKind::B, 1, -1, true, -1, {}});
    }
    for (int u = 0; u < n; ++u) {
      q.wGen.push_back(static_cast<int>(ctx->gens.size()));
      ctx->gens.push_back({"w[" + std::to_string(u + 1) + "]", GenKind::C, 0, 1, true, -1, {}});
    }
    for (int u = 0; u < n; ++u) {
      q.lGen.push_back(static_cast<int>(ctx->gens.size()));
      ctx->gens.push_back({"l[" + std::to_string(u + 1) + "]", GenKind::Beta, 1, 0, false, -1,
                           {{u, CoeffFn::one(baseCs)}}});
    }
    int flatSeen = 0, angSeen = 0;
    for (int u = 0; u < n; ++u) {
      q.jetId.push_back(static_cast<int>(ctx->gens.size()));
      ctx->jetGen[u] = q.jetId.back();
      std::string nm = baseCs->isFlat(u) ? "dgamma[" + std::to_string(++flatSeen) + "]"
                                         : "dtheta[" + std::to_string(++angSeen) + "]";
      ctx->gens.push_back({nm, GenKind::Jet, 1, 0, false, u, {}});
    }
    q.aGen = static_cast<int>(ctx->gens.size());
    ctx->gens.push_back({"A", GenKind::C, 0, 1, true, -1, {}});
    q.iaGen = static_cast<int>(ctx->gens.size());
    ctx->gens.push_back({"iotaA", GenKind::B, 1, -1, true, -1, {}});
    q.ctx = ctx;

    for (int u = 0; u < n; ++u)
      ctx->table[{q.iotaGen[u], q.wGen[u]}] = {q.unit()};
    ctx->table[{q.iaGen, q.aGen}] = {q.unit()};
    auto dir = [&](int u) { return VectorField::unitDir(baseCs, u); };
    for (int u = 0; u < n; ++u) {
      DiffForm iuC = contract(dir(u), q.curv);
      if (!iuC.isZero()) ctx->table[{q.lGen[u], q.aGen}] = {q.formPayload(iuC)};
      DiffForm iu2 = contract(dir(u), q.h2);
      if (!iu2.isZero()) ctx->table[{q.lGen[u], q.iaGen}] = {q.formPayload(iu2)};
      for (int v = 0; v < n; ++v) {
        CoeffFn k2 = fnPart(contract(dir(u), contract(dir(v), q.curv)));
        CoeffFn t2 = fnPart(contract(dir(u), contract(dir(v), q.h2)));
        DiffForm t3 = contract(dir(u), contract(dir(v), q.h3));
        FieldExpr e = wick(q.coeff(k2), q.iotaA()) + q.formPayload(t3) + wick(q.coeff(t2), q.A());
        if (!e.isZero()) ctx->table[{q.lGen[u], q.iotaGen[v]}] = {e};
        if (u < v) {
          FieldExpr ll = q.formPayload(t3.d()) + q.formPayload(t2 * q.curv) -
                         wick(q.A(), q.formPayload(DiffForm::fn(t2).d())) +
                         wick(q.formPayload(DiffForm::fn(k2).d()), q.iotaA()) +
                         q.formPayload(k2 * q.h2);
          if (!ll.isZero()) ctx->table[{q.lGen[u], q.lGen[v]}] = {ll};
        }
      }
    }
    ctx->validate();
    return q;
  }
};

// ---------------------------------------------------------------------------
// Dual pair: two quotient presentations over the same base, with the
// curvature of each side appearing as the two-form twist of the other and a
// shared three-form component.
// ---------------------------------------------------------------------------
struct DualPairSetup {
  CoordsPtr base;
  DiffForm FA, FAhat, H3;
  QuotientContext zSide, hatSide;

  static DualPairSetup make(const CoordsPtr& baseCs, const DiffForm& FAIn,
                            const DiffForm& FAhatIn, const DiffForm& H3In) {
    DualPairSetup s;
    s.base = baseCs;
    s.FA = FAIn;
    s.FAhat = FAhatIn;
    s.H3 = H3In;
    s.zSide = QuotientContext::make(baseCs, s.FA, s.FAhat, s.H3, "quotient-z");
    s.hatSide = QuotientContext::make(baseCs, s.FAhat, s.FA, s.H3, "quotient-hat");
    return s;
  }
};

namespace detail {
inline FieldExpr quotientHom(const QuotientContext& from, const QuotientContext& to,
                             const std::function<FieldExpr(int)>& lImage, int aTo, int iaTo,
                             const FieldExpr& x) {
  if (x.ctx != from.c()) throw Error("hom: expression lives on the wrong context");
  std::map<int, FieldExpr> img;
  for (int u = 0; u < from.n(); ++u) {
    img[from.iotaGen[u]] = to.iota(u);
    img[from.wGen[u]] = to.w(u);
    img[from.jetId[u]] = to.jet(u);
    img[from.lGen[u]] = lImage(u);
  }
  img[from.aGen] = FieldExpr::generator(to.c(), aTo);
  img[from.iaGen] = FieldExpr::generator(to.c(), iaTo);
  return applyHom(to.c(), img, [](const CoeffFn& f) { return f; }, x);
}
}  // namespace detail

// Untwisting of a quotient presentation: the companion table with zero twist
// data (same curvature), and the generator maps between the two.  Only the
// Lie atoms move: l_a picks up the contraction of the twist.
struct QuotientUntwisting {
  QuotientContext plain;            // zero twist data
  const QuotientContext* twisted;   // presented twisted table

  FieldExpr lShift(const QuotientContext& tgt, int u, int sign) const {
    DiffForm iu3 = contract(VectorField::unitDir(plain.base, u), twisted->h3);
    DiffForm iu2 = contract(VectorField::unitDir(plain.base, u), twisted->h2);
    FieldExpr sh = tgt.formPayload(iu3) - wick(tgt.A(), tgt.formPayload(iu2));
    return tgt.l(u) + (sign > 0 ? sh : -sh);
  }
  // plain -> twisted: l_a |-> l_a - (i_a h3)~ + :A (i_a h2)~:
  FieldExpr apply(const FieldExpr& x) const {
    return detail::quotientHom(plain, *twisted, [&](int u) { return lShift(*twisted, u, -1); },
                               twisted->aGen, twisted->iaGen, x);
  }
  // twisted -> plain
  FieldExpr unapply(const FieldExpr& y) const {
    return detail::quotientHom(*twisted, plain, [&](int u) { return lShift(plain, u, +1); },
                               plain.aGen, plain.iaGen, y);
  }
};

inline QuotientUntwisting untwistQuotient(const QuotientContext& q) {
  QuotientUntwisting u;
  u.plain = QuotientContext::make(q.base, q.curv, DiffForm::zero(q.base), DiffForm::zero(q.base),
                                  q.ctx->name + "-plain");
  u.twisted = &q;
  return u;
}
inline QuotientUntwisting untwistQuotient(const DualPairSetup& s, bool hatSide) {
  return untwistQuotient(hatSide ? s.hatSide : s.zSide);
}

// ---------------------------------------------------------------------------
// The duality swap between the two presented quotients: A <-> iota_A across
// sides, every base generator fixed.  Parity is preserved; weight is not
// (the odd pair trades weight 0 for weight 1).
// ---------------------------------------------------------------------------
struct ChiralTauMap {
  const QuotientContext* z = nullptr;
  const QuotientContext* hat = nullptr;

  FieldExpr apply(const FieldExpr& x) const {
    return detail::quotientHom(*z, *hat, [&](int u) { return hat->l(u); }, hat->iaGen, hat->aGen, x);
  }
  FieldExpr applyBack(const FieldExpr& y) const {
    return detail::quotientHom(*hat, *z, [&](int u) { return z->l(u); }, z->iaGen, z->aGen, y);
  }
};

inline ChiralTauMap tauCh(const DualPairSetup& s) {
  if (!(s.zSide.h2 == s.hatSide.curv) || !(s.zSide.curv == s.hatSide.h2) ||
      !(s.zSide.h3 == s.hatSide.h3))
    throw Error("tau: twist data of the two sides do not match");
  return ChiralTauMap{&s.zSide, &s.hatSide};
}

// ---------------------------------------------------------------------------
// The module map between the plain quotients.  Inputs are mode words
// (shifted modes, weight-homogeneous operands) applied to the vacuum; the
// map is defined inductively through the plain-quotient duality swap, which
// is the twisted swap conjugated by the two untwistings.
//
// The mode index means "lowers weight by k" on each side with that side's
// own weights.  Equal-value words are guaranteed equal images for words in
// the quotient-atom alphabet (and their scalar combinations); derivatives of
// the two odd atoms are excluded, since the swap trades their weights and
// the derivative reduction rule carries weight-dependent coefficients.
// ---------------------------------------------------------------------------
struct ModeWord {
  Scalar coeff = Scalar(1);
  std::vector<std::pair<FieldExpr, int>> ops;  // applied right to left
};

// Shifted k-th mode of a weight-inhomogeneous field: each homogeneous piece
// carries its own shift, so the mode lowers weight by k uniformly.
inline FieldExpr modeApplyGraded(const FieldExpr& a, int k, const FieldExpr& x) {
  std::map<int, FieldExpr> parts;
  for (const auto& m : a.terms) {
    int w = monoWeight(a.ctx, m);
    auto it = parts.find(w);
    if (it == parts.end()) it = parts.emplace(w, FieldExpr::zero(a.ctx)).first;
    it->second += FieldExpr::mono(a.ctx, m.coeff, m.factors);
  }
  FieldExpr r = FieldExpr::zero(x.ctx);
  for (const auto& [w, part] : parts) r += circle(part, k + w - 1, x);
  return r;
}

inline FieldExpr evalWord(const QuotientContext& q, const ModeWord& wd) {
  FieldExpr v = q.unit();
  for (auto it = wd.ops.rbegin(); it != wd.ops.rend(); ++it)
    v = modeApply(it->first, it->second, v);
  return v * wd.coeff;
}

struct ChiralT {
  QuotientUntwisting uz, uhat;
  ChiralTauMap tau;

  const QuotientContext& zPlain() const { return uz.plain; }
  const QuotientContext& hatPlain() const { return uhat.plain; }

  FieldExpr tauPlain(const FieldExpr& x) const {
    return uhat.unapply(tau.apply(uz.apply(x)));
  }
  FieldExpr tauPlainBack(const FieldExpr& y) const {
    return uz.unapply(tau.applyBack(uhat.apply(y)));
  }

  FieldExpr applyWord(const ModeWord& wd) const {
    FieldExpr acc = hatPlain().A();
    for (auto it = wd.ops.rbegin(); it != wd.ops.rend(); ++it) {
      auto par = parityOf(it->first);
      if (!par) throw Error("tch: mode operand is not parity-homogeneous");
      if (!weightOf(it->first) && !it->first.isZero())
        throw Error("tch: mode operand is not weight-homogeneous");
      acc = modeApplyGraded(tauPlain(it->first), it->second, acc);
      if (*par == 1) acc = -acc;
    }
    return acc * wd.coeff;
  }
  FieldExpr apply(const std::vector<ModeWord>& words) const {
    FieldExpr r = hatPlain().zero();
    for (const auto& wd : words) r += applyWord(wd);
    return r;
  }
};

inline ChiralT tCh(const DualPairSetup& s) {
  ChiralT t;
  t.uz = untwistQuotient(s.zSide);
  t.uhat = untwistQuotient(s.hatSide);
  t.tau = tauCh(s);
  return t;
}

}  // namespace vaw
