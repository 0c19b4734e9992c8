#pragma once
// Charts of the sheaf calculus: a free chart carries, for each coordinate u,
// the odd pair (b_u, c^u) and the even pair (beta_u, dgamma^u); beta_u acts on
// coefficients as d/du.  Structure fields J, Q, G, L close the standard
// weight-(1,1,2,2) algebra; D = Q_(0) is the chart differential and
// G0 = G_(1) its contracting homotopy relative to L0.

#include "vaw/field.hpp"
#include "vaw/forms.hpp"

namespace vaw {

struct Patch {
  ContextPtr ctx;
  std::vector<int> bGen, cGen, betaGen, jetId;

  const Context* c() const { return ctx.get(); }
  size_t n() const { return ctx->coords->size(); }

  static Patch make(const CoordsPtr& coords, std::string name = "patch") {
    Patch p;
    auto ctx = std::make_shared<Context>();
    ctx->name = std::move(name);
    ctx->coords = coords;
    size_t n = coords->size();
    ctx->jetGen.assign(n, -1);
    int flatSeen = 0, angSeen = 0;
    std::vector<std::string> jetNames(n);
    for (size_t u = 0; u < n; ++u) {
      if (coords->isFlat(u))
        jetNames[u] = "dgamma[" + std::to_string(++flatSeen) + "]";
      else
        jetNames[u] = "dtheta[" + std::to_string(++angSeen) + "]";
    }
    for (size_t u = 0; u < n; ++u) {
      p.bGen.push_back(static_cast<int>(ctx->gens.size()));
      ctx->gens.push_back({"b[" + std::to_string(u + 1) + "]", GenKind::B, 1, -1, true, -1, {}});
    }
    for (size_t u = 0; u < n; ++u) {
      p.cGen.push_back(static_cast<int>(ctx->gens.size()));
      ctx->gens.push_back({"c[" + std::to_string(u + 1) + "]", GenKind::C, 0, 1, true, -1, {}});
    }
    for (size_t u = 0; u < n; ++u) {
      p.betaGen.push_back(static_cast<int>(ctx->gens.size()));
      ctx->gens.push_back({"beta[" + std::to_string(u + 1) + "]", GenKind::Beta, 1, 0, false, -1,
                           {{static_cast<int>(u), CoeffFn::one(coords)}}});
    }
    for (size_t u = 0; u < n; ++u) {
      p.jetId.push_back(static_cast<int>(ctx->gens.size()));
      ctx->jetGen[u] = p.jetId.back();
      ctx->gens.push_back({jetNames[u], GenKind::Jet, 1, 0, false, static_cast<int>(u), {}});
    }
    for (size_t u = 0; u < n; ++u)
      ctx->table[{p.bGen[u], p.cGen[u]}] = {FieldExpr::unit(ctx.get())};
    ctx->validate();
    p.ctx = std::move(ctx);
    return p;
  }

  FieldExpr b(int u, int d = 0) const { return FieldExpr::generator(c(), bGen[u], d); }
  FieldExpr cf(int u, int d = 0) const { return FieldExpr::generator(c(), cGen[u], d); }
  FieldExpr beta(int u, int d = 0) const { return FieldExpr::generator(c(), betaGen[u], d); }
  FieldExpr jet(int u, int d = 0) const { return FieldExpr::generator(c(), jetId[u], d); }
  FieldExpr coeff(const CoeffFn& f) const { return FieldExpr::fromCoeff(c(), f); }
  FieldExpr unit() const { return FieldExpr::unit(c()); }
  FieldExpr zero() const { return FieldExpr::zero(c()); }

  // degree current: J_0 acts as the polynomial (fermion) degree, [J_l b]=-b, [J_l c]=+c
  FieldExpr J() const {
    FieldExpr r = zero();
    for (size_t u = 0; u < n(); ++u) r -= wick(b(u), cf(u));
    return r;
  }
  FieldExpr Q() const {
    FieldExpr r = zero();
    for (size_t u = 0; u < n(); ++u) r += wick(beta(u), cf(u));
    return r;
  }
  FieldExpr G() const {
    FieldExpr r = zero();
    for (size_t u = 0; u < n(); ++u) r += wick(b(u), jet(u));
    return r;
  }
  FieldExpr L() const {
    FieldExpr r = zero();
    for (size_t u = 0; u < n(); ++u) r += wick(beta(u), jet(u)) - wick(b(u), cf(u, 1));
    return r;
  }

  // A differential form becomes a field: dx^{u1<...<uk} |-> :c^{u1}...c^{uk}:.
  FieldExpr formField(const DiffForm& w) const {
    FieldExpr r = zero();
    for (const auto& [m, f] : w.terms) {
      std::vector<Factor> fs;
      for (int bbit = 0; bbit < 32; ++bbit)
        if (m & (Mask(1) << bbit)) fs.push_back(Factor{0, cGen[bbit]});
      r += FieldExpr::mono(c(), f, fs);
    }
    return r;
  }

  FieldExpr iotaField(const VectorField& X) const {
    FieldExpr r = zero();
    for (size_t u = 0; u < n(); ++u)
      if (!X.comp[u].isZero()) r += wick(coeff(X.comp[u]), b(u));
    return r;
  }
  FieldExpr lieField(const VectorField& X) const { return circle(Q(), 0, iotaField(X)); }

  FieldExpr D(const FieldExpr& x) const { return circle(Q(), 0, x); }
  FieldExpr G0(const FieldExpr& x) const { return circle(G(), 1, x); }
  FieldExpr L0(const FieldExpr& x) const { return circle(L(), 1, x); }
};

// A closed 3-form twist.
struct TwistData {
  DiffForm H;
  explicit TwistData(DiffForm h) : H(std::move(h)) {
    if (!H.d().isZero()) throw Error("twist: 3-form is not closed");
    for (const auto& [m, f] : H.terms)
      if (maskDegree(m) != 3) throw Error("twist: not a 3-form");
  }
};

// D_H = D + :H x:; preserves weight, shifts fermion degree by +1/+3, so only
// the Z/2 grading survives.  At weight zero this is d + H wedge.
inline FieldExpr twistedD(const Patch& p, const TwistData& tw, const FieldExpr& x) {
  return p.D(x) + wick(p.formField(tw.H), x);
}

// Solve D_H(b) = a for weight-homogeneous a of weight w > 0 with D_H(a) = 0:
// peel lowest fermion degree with G0/w, which strictly raises it.
inline FieldExpr vanishingWitness(const Patch& p, const TwistData* tw, const FieldExpr& a0) {
  auto w = weightOf(a0);
  if (!w) throw Error("witness: input is not weight-homogeneous");
  if (*w <= 0) throw Error("witness: weight must be positive");
  if (!(tw ? twistedD(p, *tw, a0) : p.D(a0)).isZero()) throw Error("witness: input is not closed");
  FieldExpr a = a0;
  FieldExpr b = p.zero();
  Scalar invw(Rat(1) / Rat(*w));
  int guard = 0;
  while (!a.isZero()) {
    if (++guard > 1000) throw Error("witness: no convergence");
    int lowest = 0;
    bool first = true;
    for (const auto& t : a.terms) {
      int d = monoDegree(p.c(), t);
      if (first || d < lowest) lowest = d, first = false;
    }
    FieldExpr piece = degreePart(a, lowest);
    FieldExpr step = p.G0(piece) * invw;
    b += step;
    a -= tw ? twistedD(p, *tw, step) : p.D(step);
  }
  return b;
}

// ---- polynomial coordinate changes (flat charts) ----
// New coordinates y^i = g^i(x) with declared polynomial inverse x = f(y).
struct CoordChange {
  Patch source;                // the x-chart
  Patch target;                // the y-chart
  std::vector<CoeffFn> g;      // over source coords
  std::vector<CoeffFn> f;      // over target coords

  static CoordChange make(Patch src, Patch tgt, std::vector<CoeffFn> gIn,
                          std::vector<CoeffFn> fIn) {
    CoordChange cc{std::move(src), std::move(tgt), std::move(gIn), std::move(fIn)};
    size_t n = cc.source.n();
    if (cc.target.n() != n || cc.g.size() != n || cc.f.size() != n)
      throw Error("chart map: arity mismatch");
    for (size_t u = 0; u < n; ++u)
      if (!cc.source.ctx->coords->isFlat(u) || !cc.target.ctx->coords->isFlat(u))
        throw Error("chart map: flat coordinates only");
    for (size_t i = 0; i < n; ++i) {
      if (!(cc.f[i].subst(cc.g) == CoeffFn::coord(cc.source.ctx->coords, static_cast<int>(i))))
        throw Error("chart map: f(g(x)) != x");
      if (!(cc.g[i].subst(cc.f) == CoeffFn::coord(cc.target.ctx->coords, static_cast<int>(i))))
        throw Error("chart map: g(f(y)) != y");
    }
    return cc;
  }

  // Image of a field written in the y-chart as a field in the x-chart.
  FieldExpr apply(const FieldExpr& x) const {
    const Context* src = source.c();
    size_t n = source.n();
    std::map<int, FieldExpr> images;
    for (size_t i = 0; i < n; ++i) {
      // c~^i -> (dg^i/dx^j) c^j
      FieldExpr ci = source.zero();
      for (size_t j = 0; j < n; ++j) {
        CoeffFn dg = g[i].partial(static_cast<int>(j));
        if (!dg.isZero()) ci += wick(source.coeff(dg), source.cf(static_cast<int>(j)));
      }
      images[target.cGen[i]] = ci;
      // b~_i -> (df^j/dy^i composed with g) b_j
      FieldExpr bi = source.zero();
      for (size_t j = 0; j < n; ++j) {
        CoeffFn df = f[j].partial(static_cast<int>(i)).subst(g);
        if (!df.isZero()) bi += wick(source.coeff(df), source.b(static_cast<int>(j)));
      }
      images[target.bGen[i]] = bi;
      // beta~_i -> :beta_j (df^j/dy^i o g): + second-derivative correction
      FieldExpr betai = source.zero();
      for (size_t j = 0; j < n; ++j) {
        CoeffFn df = f[j].partial(static_cast<int>(i)).subst(g);
        if (!df.isZero()) betai += wick(source.beta(static_cast<int>(j)), source.coeff(df));
      }
      for (size_t k = 0; k < n; ++k)
        for (size_t l = 0; l < n; ++l) {
          CoeffFn d2f = f[k].partial(static_cast<int>(i)).partial(static_cast<int>(l)).subst(g);
          if (d2f.isZero()) continue;
          for (size_t r = 0; r < n; ++r) {
            CoeffFn dg = g[l].partial(static_cast<int>(r));
            if (dg.isZero()) continue;
            betai += wick(source.coeff(d2f * dg),
                          wick(source.cf(static_cast<int>(r)), source.b(static_cast<int>(k))));
          }
        }
      images[target.betaGen[i]] = betai;
      // jet of y^i -> derivative of g^i(x)
      images[target.jetId[i]] = derivative(source.coeff(g[i]));
    }
    auto coeffMap = [this](const CoeffFn& h) { return h.subst(g); };
    return applyHom(src, images, coeffMap, x);
  }
};

// ---- the H-twisted chart as a presented context ----
// Atoms: iota_u (odd, wt 1, deg -1), ct^u (odd, wt 0, deg +1),
// l_u (even, wt 1, acting as d/du), and the coordinate jets.  The table is
// only Z/2-homogeneous: [l_u lam iota_v]_0 = (i_u i_v H)~ and
// [l_u lam l_v]_0 = (d i_u i_v H)~.
struct TwistedPatch {
  ContextPtr ctx;
  DiffForm H;
  std::vector<int> iotaGen, ctGen, lGen, jetId;

  const Context* c() const { return ctx.get(); }
  size_t n() const { return ctx->coords->size(); }

  FieldExpr iota(int u, int d = 0) const { return FieldExpr::generator(c(), iotaGen[u], d); }
  FieldExpr ct(int u, int d = 0) const { return FieldExpr::generator(c(), ctGen[u], d); }
  FieldExpr l(int u, int d = 0) const { return FieldExpr::generator(c(), lGen[u], d); }
  FieldExpr jet(int u, int d = 0) const { return FieldExpr::generator(c(), jetId[u], d); }
  FieldExpr coeff(const CoeffFn& f) const { return FieldExpr::fromCoeff(c(), f); }

  FieldExpr formField(const DiffForm& w) const {
    FieldExpr r = FieldExpr::zero(c());
    for (const auto& [m, f] : w.terms) {
      std::vector<Factor> fs;
      for (int bbit = 0; bbit < 32; ++bbit)
        if (m & (Mask(1) << bbit)) fs.push_back(Factor{0, ctGen[bbit]});
      r += FieldExpr::mono(c(), f, fs);
    }
    return r;
  }

  static TwistedPatch make(const CoordsPtr& coords, const TwistData& tw) {
    TwistedPatch t;
    t.H = tw.H;
    auto ctx = std::make_shared<Context>();
    ctx->name = "twisted-patch";
    ctx->coords = coords;
    ctx->strictGrading = false;
    size_t n = coords->size();
    ctx->jetGen.assign(n, -1);
    for (size_t u = 0; u < n; ++u) {
      t.iotaGen.push_back(static_cast<int>(ctx->gens.size()));
      ctx->gens.push_back({"iota[" + std::to_string(u + 1) + "]", GenKind::B, 1, -1, true, -1, {}});
    }
    for (size_t u = 0; u < n; ++u) {
      t.ctGen.push_back(static_cast<int>(ctx->gens.size()));
      ctx->gens.push_back({"ct[" + std::to_string(u + 1) + "]", GenKind::C, 0, 1, true, -1, {}});
    }
    for (size_t u = 0; u < n; ++u) {
      t.lGen.push_back(static_cast<int>(ctx->gens.size()));
      ctx->gens.push_back({"l[" + std::to_string(u + 1) + "]", GenKind::Beta, 1, 0, false, -1,
                           {{static_cast<int>(u), CoeffFn::one(coords)}}});
    }
    int flatSeen = 0, angSeen = 0;
    for (size_t u = 0; u < n; ++u) {
      t.jetId.push_back(static_cast<int>(ctx->gens.size()));
      ctx->jetGen[u] = t.jetId.back();
      std::string nm = coords->isFlat(u) ? "dgamma[" + std::to_string(++flatSeen) + "]"
                                         : "dtheta[" + std::to_string(++angSeen) + "]";
      ctx->gens.push_back({nm, GenKind::Jet, 1, 0, false, static_cast<int>(u), {}});
    }
    t.ctx = ctx;
    for (size_t u = 0; u < n; ++u)
      ctx->table[{t.iotaGen[u], t.ctGen[u]}] = {FieldExpr::unit(ctx.get())};
    for (size_t u = 0; u < n; ++u)
      for (size_t v = 0; v < n; ++v) {
        DiffForm iuiv = contract(VectorField::unitDir(coords, static_cast<int>(u)),
                                 contract(VectorField::unitDir(coords, static_cast<int>(v)), tw.H));
        // note: i_u i_v H = i_u(i_v H)
        if (!iuiv.isZero())
          ctx->table[{t.lGen[u], t.iotaGen[v]}] = {t.formField(iuiv)};
        if (u < v) {
          DiffForm diuiv = iuiv.d();
          if (!diuiv.isZero()) ctx->table[{t.lGen[u], t.lGen[v]}] = {t.formField(diuiv)};
        }
        if (u == v) {
          DiffForm diuiu = iuiv.d();
          if (!diuiu.isZero()) ctx->table[{t.lGen[u], t.lGen[u]}] = {t.formField(diuiu)};
        }
      }
    ctx->validate();
    return t;
  }

  // The differential of the twisted chart: D(iota_u) = l_u - (i_u H)~,
  // D(l_u) = (d i_u H)~, D(ct) = 0, D(jet) = d(ct), D(f) = (df)~.
  FieldExpr D(const FieldExpr& x) const {
    std::map<int, FieldExpr> img;
    for (size_t u = 0; u < n(); ++u) {
      DiffForm iuH = contract(VectorField::unitDir(ctx->coords, static_cast<int>(u)), H);
      img[iotaGen[u]] = l(static_cast<int>(u)) - formField(iuH);
      img[ctGen[u]] = FieldExpr::zero(c());
      img[lGen[u]] = formField(iuH.d());
      img[jetId[u]] = derivative(ct(static_cast<int>(u)));
    }
    auto coeffRule = [this](const CoeffFn& f) {
      FieldExpr r = FieldExpr::zero(c());
      for (size_t u = 0; u < n(); ++u) {
        CoeffFn df = f.partial(static_cast<int>(u));
        if (!df.isZero()) r += FieldExpr::mono(c(), df, {Factor{0, ctGen[u]}});
      }
      return r;
    };
    return applyOddDerivation(img, coeffRule, x);
  }

  // Map from the free chart into this one: b -> iota, c -> ct,
  // beta_u -> l_u - (i_u H)~, jets -> jets.
  FieldExpr fromUntwisted(const Patch& p, const FieldExpr& x) const {
    std::map<int, FieldExpr> img;
    for (size_t u = 0; u < n(); ++u) {
      DiffForm iuH = contract(VectorField::unitDir(ctx->coords, static_cast<int>(u)), H);
      img[p.bGen[u]] = iota(static_cast<int>(u));
      img[p.cGen[u]] = ct(static_cast<int>(u));
      img[p.betaGen[u]] = l(static_cast<int>(u)) - formField(iuH);
      img[p.jetId[u]] = jet(static_cast<int>(u));
    }
    auto coeffMap = [](const CoeffFn& f) { return f; };
    return applyHom(c(), img, coeffMap, x);
  }

  // Inverse direction onto the free chart: iota -> b, ct -> c, l_u -> beta_u + (i_u H)~.
  FieldExpr untwist(const Patch& p, const FieldExpr& x) const {
    std::map<int, FieldExpr> img;
    for (size_t u = 0; u < n(); ++u) {
      img[iotaGen[u]] = p.b(static_cast<int>(u));
      img[ctGen[u]] = p.cf(static_cast<int>(u));
      DiffForm iuH = contract(VectorField::unitDir(ctx->coords, static_cast<int>(u)), H);
      img[lGen[u]] = p.beta(static_cast<int>(u)) + p.formField(iuH);
      img[jetId[u]] = p.jet(static_cast<int>(u));
    }
    auto coeffMap = [](const CoeffFn& f) { return f; };
    return applyHom(p.c(), img, coeffMap, x);
  }
};

}  // namespace vaw
