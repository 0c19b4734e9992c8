#pragma once
// The vertex-algebra calculus engine.
//
// A Context declares generators (weight, Z-degree, parity), their primitive
// pairwise lambda-brackets, and how each generator acts on coefficient
// functions (a derivation; this generalizes [beta_u lam f] = df/dgamma_u).
// Elements are canonical sums of normally ordered monomials
//     f ∘ (F1 ∘ (F2 ∘ ( ... ∘ 1)))        (right-nested Wick products)
// with f a coefficient function and factors F = d-th derivative of a
// generator, sorted by (generator, derivative order).  Repeated odd factors
// vanish.  All operations below preserve this canonical form, so equality of
// FieldExpr is literal equality of representations.
//
// The recursion kernel:
//   * sesquilinearity       [da l b] = -l [a l b],   [a l db] = (l+d)[a l b]
//   * skew-symmetry         [b l a] = -(-1)^{|a||b|} [a -l-d b]
//   * non-commutative Wick  [a l :uv:] = :[a l u]v: + p :u[a l v]:
//                              + sum_{j+m+1=p} C(p,j) (a(j)u)(m)v  at entry p
//   * quasi-associativity   :(:uv:)w: = :u(:vw:): + corrections
//   * the exact swap rule   :u(:vw:): = p(u,v) :v(:uw:): + :Q{u,v}w:
//     with Q{u,v} = :uv: - p(u,v):vu: = sum_n (-1)^n d^{n+1}(u(n)v)/(n+1)!
// Each rewrite is an identity of vertex algebras, so the canonical form is
// reached without approximation; a depth guard catches non-terminating
// generator tables (none of the shipped contexts trigger it).

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vaw/coefffn.hpp"

namespace vaw {

enum class GenKind { B, C, Beta, Jet, Abstract };

struct GenInfo {
  std::string name;
  GenKind kind = GenKind::Abstract;
  int weight = 0;
  int degree = 0;
  bool odd = false;
  int jetCoord = -1;  // >= 0: this generator is the field d(coordinate)/dz
  // Action on coefficient functions: [g lam f] = sum_u action[u] * df/du.
  std::vector<std::pair<int, CoeffFn>> action;
};

struct Factor {
  int d = 0;   // derivative order
  int gen = 0;
  bool operator==(const Factor&) const = default;
  // Canonical order inside a monomial: by generator, then derivative order.
  auto key() const { return std::pair<int, int>(gen, d); }
};
inline bool factorLess(const Factor& a, const Factor& b) { return a.key() < b.key(); }

struct Context;

struct Monomial {
  CoeffFn coeff;
  std::vector<Factor> factors;
};

class FieldExpr;
class LambdaPoly;

struct Context {
  std::string name;
  CoordsPtr coords;
  std::vector<GenInfo> gens;
  std::vector<int> jetGen;  // coordinate index -> jet generator id
  // Primitive brackets, one orientation per pair; entry k of [g lam h].
  std::map<std::pair<int, int>, std::vector<FieldExpr>> table;
  bool strictGrading = true;

  Context() = default;
  Context(const Context&) = delete;
  Context& operator=(const Context&) = delete;

  int genByName(const std::string& n) const {
    for (size_t g = 0; g < gens.size(); ++g)
      if (gens[g].name == n) return static_cast<int>(g);
    return -1;
  }
  bool isJet(int g) const { return gens[g].jetCoord >= 0; }
  bool hasAction(int g) const { return !gens[g].action.empty(); }
  void validate() const;  // grading consistency of the declared table
};

using ContextPtr = std::shared_ptr<Context>;

namespace detail {
inline Rat factorial(int n) {
  Rat r(1);
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}
inline Rat binom(int n, int k) {
  return factorial(n) / (factorial(k) * factorial(n - k));
}
struct DepthGuard {
  static thread_local int depth;
  DepthGuard() {
    if (++depth > 512) throw Error("engine: rewrite depth exceeded (non-terminating table?)");
  }
  ~DepthGuard() { --depth; }
};
inline thread_local int DepthGuard::depth = 0;
}  // namespace detail

class FieldExpr {
 public:
  const Context* ctx = nullptr;
  std::vector<Monomial> terms;  // sorted by factor list, coefficients nonzero

  FieldExpr() = default;
  explicit FieldExpr(const Context* c) : ctx(c) {}

  static FieldExpr zero(const Context* c) { return FieldExpr(c); }
  static FieldExpr fromCoeff(const Context* c, CoeffFn f) {
    FieldExpr e(c);
    if (!f.isZero()) e.terms.push_back({std::move(f), {}});
    return e;
  }
  static FieldExpr unit(const Context* c) { return fromCoeff(c, CoeffFn::one(c->coords)); }
  static FieldExpr generator(const Context* c, int gen, int d = 0) {
    FieldExpr e(c);
    e.terms.push_back({CoeffFn::one(c->coords), {Factor{d, gen}}});
    return e;
  }
  static FieldExpr mono(const Context* c, CoeffFn f, std::vector<Factor> fs) {
    FieldExpr e(c);
    if (!f.isZero()) e.terms.push_back({std::move(f), std::move(fs)});
    return e;
  }

  bool isZero() const { return terms.empty(); }

  void normalize() {
    std::sort(terms.begin(), terms.end(),
              [](const Monomial& a, const Monomial& b) {
                return std::lexicographical_compare(
                    a.factors.begin(), a.factors.end(), b.factors.begin(), b.factors.end(),
                    factorLess);
              });
    std::vector<Monomial> out;
    for (auto& t : terms) {
      if (t.coeff.isZero()) continue;
      if (!out.empty() && out.back().factors == t.factors) {
        out.back().coeff = out.back().coeff + t.coeff;
        if (out.back().coeff.isZero()) out.pop_back();
      } else {
        out.push_back(std::move(t));
      }
    }
    terms = std::move(out);
  }

  FieldExpr operator-() const {
    FieldExpr r = *this;
    for (auto& t : r.terms) t.coeff = -t.coeff;
    return r;
  }
  FieldExpr operator+(const FieldExpr& o) const {
    requireCtx(o);
    FieldExpr r = *this;
    if (!r.ctx) r.ctx = o.ctx;
    r.terms.insert(r.terms.end(), o.terms.begin(), o.terms.end());
    r.normalize();
    return r;
  }
  FieldExpr operator-(const FieldExpr& o) const { return *this + (-o); }
  FieldExpr operator*(const Scalar& s) const {
    FieldExpr r(ctx);
    if (s.isZero()) return r;
    r = *this;
    for (auto& t : r.terms) t.coeff = t.coeff * s;
    return r;
  }
  FieldExpr& operator+=(const FieldExpr& o) { return *this = *this + o; }
  FieldExpr& operator-=(const FieldExpr& o) { return *this = *this - o; }
  bool operator==(const FieldExpr& o) const {
    if (terms.size() != o.terms.size()) return false;
    for (size_t t = 0; t < terms.size(); ++t)
      if (!(terms[t].factors == o.terms[t].factors && terms[t].coeff == o.terms[t].coeff))
        return false;
    return true;
  }

 private:
  void requireCtx(const FieldExpr& o) const {
    if (ctx && o.ctx && ctx != o.ctx) throw Error("field: context mismatch");
  }
};

class LambdaPoly {
 public:
  const Context* ctx = nullptr;
  std::vector<FieldExpr> ent;  // ent[k] = a(k)b, the coefficient of lam^k/k!

  LambdaPoly() = default;
  explicit LambdaPoly(const Context* c) : ctx(c) {}

  FieldExpr entry(int k) const {
    if (k < 0 || static_cast<size_t>(k) >= ent.size()) return FieldExpr::zero(ctx);
    return ent[k];
  }
  void set(int k, FieldExpr e) {
    if (static_cast<size_t>(k) >= ent.size()) ent.resize(k + 1, FieldExpr::zero(ctx));
    ent[k] = std::move(e);
  }
  void add(int k, const FieldExpr& e) { set(k, entry(k) + e); }
  void trim() {
    while (!ent.empty() && ent.back().isZero()) ent.pop_back();
  }
  int size() const { return static_cast<int>(ent.size()); }
  bool isZero() const {
    for (const auto& e : ent)
      if (!e.isZero()) return false;
    return true;
  }
  LambdaPoly operator+(const LambdaPoly& o) const {
    LambdaPoly r = *this;
    if (!r.ctx) r.ctx = o.ctx;
    for (int k = 0; k < o.size(); ++k) r.add(k, o.ent[k]);
    r.trim();
    return r;
  }
  LambdaPoly operator*(const Scalar& s) const {
    LambdaPoly r = *this;
    for (auto& e : r.ent) e = e * s;
    r.trim();
    return r;
  }
  LambdaPoly operator-() const { return *this * Scalar(-1); }
  bool operator==(const LambdaPoly& o) const {
    int n = std::max(size(), o.size());
    for (int k = 0; k < n; ++k)
      if (!(entry(k) == o.entry(k))) return false;
    return true;
  }
};

// ---- forward declarations of the mutually recursive kernel ----
LambdaPoly bracket(const FieldExpr& a, const FieldExpr& b);
FieldExpr wick(const FieldExpr& a, const FieldExpr& b);
FieldExpr derivative(const FieldExpr& a, int times = 1);
FieldExpr circle(const FieldExpr& a, int n, const FieldExpr& b);

// ---- grading ----
inline int monoWeight(const Context* c, const Monomial& m) {
  int w = 0;
  for (const auto& f : m.factors) w += f.d + c->gens[f.gen].weight;
  return w;
}
inline int monoDegree(const Context* c, const Monomial& m) {
  int d = 0;
  for (const auto& f : m.factors) d += c->gens[f.gen].degree;
  return d;
}
inline int monoParity(const Context* c, const Monomial& m) {
  int p = 0;
  for (const auto& f : m.factors) p ^= c->gens[f.gen].odd ? 1 : 0;
  return p;
}
inline std::optional<int> weightOf(const FieldExpr& a) {
  std::optional<int> w;
  for (const auto& t : a.terms) {
    int tw = monoWeight(a.ctx, t);
    if (w && *w != tw) return std::nullopt;
    w = tw;
  }
  return a.terms.empty() ? std::optional<int>(0) : w;
}
inline std::optional<int> degreeOf(const FieldExpr& a) {
  std::optional<int> d;
  for (const auto& t : a.terms) {
    int td = monoDegree(a.ctx, t);
    if (d && *d != td) return std::nullopt;
    d = td;
  }
  return a.terms.empty() ? std::optional<int>(0) : d;
}
inline std::optional<int> parityOf(const FieldExpr& a) {
  std::optional<int> p;
  for (const auto& t : a.terms) {
    int tp = monoParity(a.ctx, t);
    if (p && *p != tp) return std::nullopt;
    p = tp;
  }
  return a.terms.empty() ? std::optional<int>(0) : p;
}
// Bigraded decomposition; pairs ((weight, degree), component).
inline std::vector<std::pair<std::pair<int, int>, FieldExpr>> grade(const FieldExpr& a) {
  std::map<std::pair<int, int>, FieldExpr> parts;
  for (const auto& t : a.terms) {
    auto key = std::make_pair(monoWeight(a.ctx, t), monoDegree(a.ctx, t));
    auto it = parts.find(key);
    if (it == parts.end()) it = parts.emplace(key, FieldExpr(a.ctx)).first;
    it->second.terms.push_back(t);
  }
  std::vector<std::pair<std::pair<int, int>, FieldExpr>> out;
  for (auto& [k, e] : parts) {
    e.normalize();
    out.emplace_back(k, std::move(e));
  }
  return out;
}
inline FieldExpr degreePart(const FieldExpr& a, int deg) {
  FieldExpr r(a.ctx);
  for (const auto& t : a.terms)
    if (monoDegree(a.ctx, t) == deg) r.terms.push_back(t);
  r.normalize();
  return r;
}

namespace detail {

// ---- lambda-variable calculus ----

// Multiply by (-lam)^d:  entry p picks up (-1)^d p!/(p-d)! from entry p-d.
inline LambdaPoly shiftLambdaLeft(int d, const LambdaPoly& L) {
  if (d == 0) return L;
  LambdaPoly r(L.ctx);
  for (int k = 0; k < L.size(); ++k) {
    if (L.ent[k].isZero()) continue;
    int p = k + d;
    Rat c = factorial(p) / factorial(k);
    if (d % 2) c = -c;
    r.add(p, L.ent[k] * Scalar(c));
  }
  r.trim();
  return r;
}

// Apply (lam + d/dz) e times.
inline LambdaPoly lamPlusDeriv(int e, const LambdaPoly& L) {
  LambdaPoly cur = L;
  for (int rep = 0; rep < e; ++rep) {
    LambdaPoly r(cur.ctx);
    for (int k = 0; k < cur.size(); ++k) {
      if (cur.ent[k].isZero()) continue;
      r.add(k + 1, cur.ent[k] * Scalar(k + 1));  // lam * lam^k/k! = (k+1) lam^{k+1}/(k+1)!
      r.add(k, derivative(cur.ent[k]));
    }
    r.trim();
    cur = std::move(r);
  }
  return cur;
}

// Substitute lam -> -lam - d/dz:  entry j gets sum_{k>=j} (-1)^k d^{k-j}(e_k)/(k-j)!.
inline LambdaPoly substNegLamMinusDeriv(const LambdaPoly& L) {
  LambdaPoly r(L.ctx);
  for (int k = 0; k < L.size(); ++k) {
    if (L.ent[k].isZero()) continue;
    for (int j = k; j >= 0; --j) {
      FieldExpr piece = derivative(L.ent[k], k - j) * Scalar(Rat(1) / factorial(k - j));
      if (k % 2) piece = -piece;
      r.add(j, piece);
    }
  }
  r.trim();
  return r;
}

// [b lam a] from [a lam b] by skew-symmetry.
inline LambdaPoly skewFlip(const LambdaPoly& L, int parityA, int parityB) {
  LambdaPoly r = substNegLamMinusDeriv(L);
  Scalar s = (parityA && parityB) ? Scalar(1) : Scalar(-1);
  return r * s;
}

inline LambdaPoly constPoly(FieldExpr e) {
  LambdaPoly L(e.ctx);
  if (!e.isZero()) L.set(0, std::move(e));
  L.trim();
  return L;
}

// Action of generator g on a coefficient function.
inline CoeffFn actionOn(const Context* c, int g, const CoeffFn& f) {
  CoeffFn r(f.cs);
  for (const auto& [u, cf] : c->gens[g].action) r = r + cf * f.partial(u);
  return r;
}
// The coefficient component of g's action on coordinate u.
inline CoeffFn actionComponent(const Context* c, int g, int u) {
  for (const auto& [v, cf] : c->gens[g].action)
    if (v == u) return cf;
  return CoeffFn::zero(c->coords);
}

// Primitive bracket of two underived generators.
inline LambdaPoly atomBase(const Context* c, int g, int h) {
  if (auto it = c->table.find({g, h}); it != c->table.end()) {
    LambdaPoly L(c);
    L.ent = it->second;
    L.trim();
    return L;
  }
  if (auto it = c->table.find({h, g}); it != c->table.end()) {
    LambdaPoly L(c);
    L.ent = it->second;
    L.trim();
    return skewFlip(L, c->gens[h].odd, c->gens[g].odd);
  }
  if (c->isJet(h)) {
    CoeffFn comp = actionComponent(c, g, c->gens[h].jetCoord);
    if (comp.isZero()) return LambdaPoly(c);
    return lamPlusDeriv(1, constPoly(FieldExpr::fromCoeff(c, comp)));
  }
  if (c->isJet(g)) {
    return skewFlip(atomBase(c, h, g), c->gens[h].odd, c->gens[g].odd);
  }
  return LambdaPoly(c);
}

FieldExpr insertFactor(const Context* c, const Factor& P, const Monomial& K);

inline FieldExpr monoField(const Context* c, const Monomial& m) {
  FieldExpr e(c);
  if (!m.coeff.isZero()) e.terms.push_back(m);
  return e;
}
inline Monomial restOf(const Monomial& m) {
  Monomial r;
  r.coeff = m.coeff;
  r.factors.assign(m.factors.begin() + 1, m.factors.end());
  return r;
}

// Q{a,b} = :ab: - p(a,b):ba: = sum_n (-1)^n d^{n+1}(a(n)b)/(n+1)!.
inline FieldExpr quasiCommutator(const FieldExpr& a, const FieldExpr& b) {
  LambdaPoly L = bracket(a, b);
  FieldExpr r(a.ctx ? a.ctx : b.ctx);
  for (int n = 0; n < L.size(); ++n) {
    if (L.ent[n].isZero()) continue;
    FieldExpr piece = derivative(L.ent[n], n + 1) * Scalar(Rat(1) / factorial(n + 1));
    if (n % 2) piece = -piece;
    r += piece;
  }
  return r;
}

// Field derivative of a coefficient function: sum_u (df/du) * jet_u.
inline FieldExpr coeffDerivField(const Context* c, const CoeffFn& f) {
  FieldExpr r(c);
  for (size_t u = 0; u < c->coords->size(); ++u) {
    CoeffFn df = f.partial(static_cast<int>(u));
    if (df.isZero()) continue;
    if (c->jetGen[u] < 0) throw Error("engine: coordinate has no jet generator");
    r += FieldExpr::mono(c, df, {Factor{0, c->jetGen[u]}});
  }
  return r;
}

inline bool hasActingFactor(const Context* c, const Monomial& m) {
  for (const auto& f : m.factors)
    if (c->hasAction(f.gen)) return true;
  return false;
}

// :f N: for a bare coefficient f — merge into N's coefficient with
// quasi-associativity corrections (nonzero only against acting atoms).
inline FieldExpr wickCoeff(const Context* c, const CoeffFn& f, const Monomial& N) {
  if (N.factors.empty()) return FieldExpr::fromCoeff(c, f * N.coeff);
  FieldExpr r = FieldExpr::mono(c, f * N.coeff, N.factors);
  if (!hasActingFactor(c, N)) return r;
  Monomial X{CoeffFn::one(c->coords), N.factors};
  FieldExpr fF = FieldExpr::fromCoeff(c, f);
  FieldExpr gF = FieldExpr::fromCoeff(c, N.coeff);
  FieldExpr Xf = monoField(c, X);
  if (!f.isConstant()) {
    LambdaPoly A = bracket(gF, Xf);
    FieldExpr dcur = fF;
    for (int j = 0; j < A.size(); ++j) {
      dcur = derivative(dcur);
      if (A.ent[j].isZero()) continue;
      r -= wick(dcur * Scalar(Rat(1) / factorial(j + 1)), A.ent[j]);
    }
  }
  if (!N.coeff.isConstant()) {
    LambdaPoly B = bracket(fF, Xf);
    FieldExpr dcur = gF;
    for (int j = 0; j < B.size(); ++j) {
      dcur = derivative(dcur);
      if (B.ent[j].isZero()) continue;
      r -= wick(dcur * Scalar(Rat(1) / factorial(j + 1)), B.ent[j]);
    }
  }
  return r;
}

// :P K: for a single factor P against a canonical monomial K.
inline FieldExpr insertFactor(const Context* c, const Factor& P, const Monomial& K) {
  DepthGuard guard;
  FieldExpr Pf = FieldExpr::generator(c, P.gen, P.d);
  // Pull the coefficient of K to the left first.
  if (!K.coeff.isConstant() || !K.coeff.constantValue().isOne()) {
    Monomial X{CoeffFn::one(c->coords), K.factors};
    FieldExpr gF = FieldExpr::fromCoeff(c, K.coeff);
    FieldExpr swapped(c);
    for (const auto& t : insertFactor(c, P, X).terms)
      swapped += wickCoeff(c, K.coeff, t);
    if (c->hasAction(P.gen) && !K.coeff.isConstant()) {
      FieldExpr Q = quasiCommutator(Pf, gF);
      swapped += wick(Q, monoField(c, X));
    }
    return swapped;
  }
  if (K.factors.empty()) return Pf;
  const Factor& F1 = K.factors.front();
  if (P.key() < F1.key() || (P.key() == F1.key() && !c->gens[P.gen].odd)) {
    Monomial out;
    out.coeff = K.coeff;
    out.factors.reserve(K.factors.size() + 1);
    out.factors.push_back(P);
    out.factors.insert(out.factors.end(), K.factors.begin(), K.factors.end());
    return monoField(c, out);
  }
  if (P.key() == F1.key()) return FieldExpr::zero(c);  // repeated odd factor
  // Swap P past F1: :P(:F1 R:): = p :F1(:P R:): + :Q{P,F1} R:.
  Monomial R = restOf(K);
  FieldExpr inner = insertFactor(c, P, R);
  FieldExpr part(c);
  for (const auto& t : inner.terms) part += insertFactor(c, F1, t);
  if (c->gens[P.gen].odd && c->gens[F1.gen].odd) part = -part;
  FieldExpr F1f = FieldExpr::generator(c, F1.gen, F1.d);
  FieldExpr Q = quasiCommutator(Pf, F1f);
  if (!Q.isZero()) part += wick(Q, monoField(c, R));
  return part;
}

inline FieldExpr wickMono(const Context* c, const Monomial& M, const Monomial& N) {
  DepthGuard guard;
  if (M.factors.empty()) return wickCoeff(c, M.coeff, N);
  bool coeffTrivial = M.coeff.isConstant() && M.coeff.constantValue().isOne();
  FieldExpr Nf = monoField(c, N);
  if (!coeffTrivial) {
    // :(:fX:)N: = :f(:XN:): + integral corrections.
    Monomial X{CoeffFn::one(c->coords), M.factors};
    FieldExpr base(c);
    for (const auto& t : wickMono(c, X, N).terms) base += wickCoeff(c, M.coeff, t);
    FieldExpr fF = FieldExpr::fromCoeff(c, M.coeff);
    LambdaPoly XN = bracket(monoField(c, X), Nf);
    FieldExpr dcur = fF;
    for (int j = 0; j < XN.size(); ++j) {
      dcur = derivative(dcur);
      if (XN.ent[j].isZero()) continue;
      base += wick(dcur * Scalar(Rat(1) / factorial(j + 1)), XN.ent[j]);
    }
    if (!M.coeff.isConstant()) {
      LambdaPoly fN = bracket(fF, Nf);
      FieldExpr dX = monoField(c, X);
      for (int j = 0; j < fN.size(); ++j) {
        dX = derivative(dX);
        if (fN.ent[j].isZero()) continue;
        base += wick(dX * Scalar(Rat(1) / factorial(j + 1)), fN.ent[j]);
      }
    }
    return base;
  }
  if (M.factors.size() == 1) return insertFactor(c, M.factors.front(), N);
  // :(:F1 T:)N: = :F1(:T N:): + integral corrections.
  Factor F1 = M.factors.front();
  Monomial T = restOf(M);
  FieldExpr base(c);
  for (const auto& t : wickMono(c, T, N).terms) base += insertFactor(c, F1, t);
  FieldExpr F1f = FieldExpr::generator(c, F1.gen, F1.d);
  FieldExpr Tf = monoField(c, T);
  LambdaPoly TN = bracket(Tf, Nf);
  FieldExpr dF1 = F1f;
  for (int j = 0; j < TN.size(); ++j) {
    dF1 = derivative(dF1);
    if (TN.ent[j].isZero()) continue;
    base += wick(dF1 * Scalar(Rat(1) / factorial(j + 1)), TN.ent[j]);
  }
  LambdaPoly F1N = bracket(F1f, Nf);
  FieldExpr dT = Tf;
  int signP = (c->gens[F1.gen].odd && monoParity(c, T)) ? -1 : 1;
  for (int j = 0; j < F1N.size(); ++j) {
    dT = derivative(dT);
    if (F1N.ent[j].isZero()) continue;
    base += wick(dT * Scalar(Rat(signP) / factorial(j + 1)), F1N.ent[j]);
  }
  return base;
}

// [M lam N] where N is peeled as :u v: (u = coefficient or head factor).
inline LambdaPoly bracketPeel(const Context* c, const Monomial& M, const Monomial& N) {
  DepthGuard guard;
  FieldExpr Mf = monoField(c, M);
  FieldExpr uF;
  Monomial v;
  int parityU = 0;
  bool coeffTrivial = N.coeff.isConstant() && N.coeff.constantValue().isOne();
  if (!coeffTrivial) {
    uF = FieldExpr::fromCoeff(c, N.coeff);
    v = Monomial{CoeffFn::one(c->coords), N.factors};
  } else {
    const Factor& F1 = N.factors.front();
    uF = FieldExpr::generator(c, F1.gen, F1.d);
    parityU = c->gens[F1.gen].odd ? 1 : 0;
    v = restOf(N);
  }
  FieldExpr vF = monoField(c, v);
  LambdaPoly Mu = bracket(Mf, uF);
  LambdaPoly Mv = bracket(Mf, vF);
  LambdaPoly out(c);
  for (int k = 0; k < Mu.size(); ++k)
    if (!Mu.ent[k].isZero()) out.add(k, wick(Mu.ent[k], vF));
  int parityM = monoParity(c, M);
  Scalar sgn((parityM && parityU) ? -1 : 1);
  for (int k = 0; k < Mv.size(); ++k)
    if (!Mv.ent[k].isZero()) out.add(k, wick(uF, Mv.ent[k]) * sgn);
  // Integral term: entry p += sum_{j+m+1=p} C(p,j) (M(j)u)(m)v.
  for (int j = 0; j < Mu.size(); ++j) {
    if (Mu.ent[j].isZero()) continue;
    LambdaPoly inner = bracket(Mu.ent[j], vF);
    for (int m = 0; m < inner.size(); ++m) {
      if (inner.ent[m].isZero()) continue;
      int p = j + m + 1;
      out.add(p, inner.ent[m] * Scalar(binom(p, j)));
    }
  }
  out.trim();
  return out;
}

inline LambdaPoly bracketMono(const Context* c, const Monomial& M, const Monomial& N) {
  DepthGuard guard;
  bool mCoeffOnly = M.factors.empty();
  bool nCoeffOnly = N.factors.empty();
  if (mCoeffOnly && nCoeffOnly) return LambdaPoly(c);
  bool mAtomic = M.factors.size() == 1 && M.coeff.isConstant() && M.coeff.constantValue().isOne();
  bool nSimple = nCoeffOnly ||
                 (N.factors.size() == 1 && N.coeff.isConstant() && N.coeff.constantValue().isOne());
  if (mAtomic) {
    const Factor& P = M.factors.front();
    if (P.d > 0) {
      Monomial M0{M.coeff, {Factor{0, P.gen}}};
      return shiftLambdaLeft(P.d, bracketMono(c, M0, N));
    }
    if (nCoeffOnly) {
      CoeffFn act = actionOn(c, P.gen, N.coeff);
      if (act.isZero()) return LambdaPoly(c);
      return constPoly(FieldExpr::fromCoeff(c, act));
    }
    if (nSimple) {
      const Factor& Hf = N.factors.front();
      LambdaPoly base = atomBase(c, P.gen, Hf.gen);
      return lamPlusDeriv(Hf.d, base);
    }
    return bracketPeel(c, M, N);
  }
  if (nSimple) {
    // Flip so the simple side is on the left, then peel the composite.
    LambdaPoly L = bracketMono(c, N, M);
    return skewFlip(L, monoParity(c, N), monoParity(c, M));
  }
  return bracketPeel(c, M, N);
}

}  // namespace detail

inline LambdaPoly bracket(const FieldExpr& a, const FieldExpr& b) {
  const Context* c = a.ctx ? a.ctx : b.ctx;
  LambdaPoly out(c);
  if (a.ctx && b.ctx && a.ctx != b.ctx) throw Error("bracket: context mismatch");
  for (const auto& m : a.terms)
    for (const auto& n : b.terms) out = out + detail::bracketMono(c, m, n);
  out.trim();
  return out;
}

inline FieldExpr wick(const FieldExpr& a, const FieldExpr& b) {
  const Context* c = a.ctx ? a.ctx : b.ctx;
  if (a.ctx && b.ctx && a.ctx != b.ctx) throw Error("wick: context mismatch");
  FieldExpr out(c);
  for (const auto& m : a.terms)
    for (const auto& n : b.terms) out += detail::wickMono(c, m, n);
  return out;
}

inline FieldExpr derivative(const FieldExpr& a, int times) {
  FieldExpr cur = a;
  for (int rep = 0; rep < times; ++rep) {
    FieldExpr next(cur.ctx);
    for (const auto& t : cur.terms) {
      // d(f ∘ X) = (df) ∘ X + f ∘ dX.
      FieldExpr df = detail::coeffDerivField(cur.ctx, t.coeff);
      if (!df.isZero())
        next += wick(df, detail::monoField(cur.ctx, Monomial{CoeffFn::one(cur.ctx->coords), t.factors}));
      for (size_t i = 0; i < t.factors.size(); ++i) {
        std::vector<Factor> fs = t.factors;
        fs[i].d += 1;
        bool sorted = true;
        for (size_t j = 0; j + 1 < fs.size(); ++j) {
          if (!factorLess(fs[j], fs[j + 1]) && !(fs[j] == fs[j + 1])) { sorted = false; break; }
          if (fs[j] == fs[j + 1] && cur.ctx->gens[fs[j].gen].odd) { sorted = false; break; }
        }
        if (sorted) {
          next += FieldExpr::mono(cur.ctx, t.coeff, fs);
        } else {
          // Rebuild canonically (signs and corrections via the insert kernel).
          FieldExpr acc = FieldExpr::unit(cur.ctx);
          for (auto it = fs.rbegin(); it != fs.rend(); ++it) {
            FieldExpr stepped(cur.ctx);
            for (const auto& kt : acc.terms) stepped += detail::insertFactor(cur.ctx, *it, kt);
            acc = std::move(stepped);
          }
          FieldExpr withCoeff(cur.ctx);
          for (const auto& kt : acc.terms) withCoeff += detail::wickCoeff(cur.ctx, t.coeff, kt);
          next += withCoeff;
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

inline FieldExpr circle(const FieldExpr& a, int n, const FieldExpr& b) {
  if (n >= 0) return bracket(a, b).entry(n);
  if (n == -1) return wick(a, b);
  int k = -n - 1;
  return wick(derivative(a, k) * Scalar(Rat(1) / detail::factorial(k)), b);
}

// Shifted mode a_n = a(n + wt a - 1); requires weight-homogeneous a.
inline FieldExpr modeApply(const FieldExpr& a, int n, const FieldExpr& b) {
  auto w = weightOf(a);
  if (!w) throw Error("mode: input is not weight-homogeneous");
  return circle(a, n + *w - 1, b);
}

inline FieldExpr wickChain(const std::vector<FieldExpr>& xs) {
  if (xs.empty()) throw Error("wickChain: empty");
  FieldExpr acc = xs.back();
  for (auto it = xs.rbegin() + 1; it != xs.rend(); ++it) acc = wick(*it, acc);
  return acc;
}

// ---- printing (expression mini-language) ----
inline std::string factorStr(const Context* c, const Factor& f) {
  const GenInfo& g = c->gens[f.gen];
  if (g.jetCoord >= 0) {
    std::string base = g.name;  // "dgamma[u]" or "dtheta[v]"
    if (f.d == 0) return base;
    auto br = base.find(']');
    return base.substr(0, br) + "," + std::to_string(f.d + 1) + "]";
  }
  std::string s = g.name;
  if (f.d > 0) s = "d^" + std::to_string(f.d) + " " + s;
  return s;
}

inline std::string str(const FieldExpr& a) {
  if (a.isZero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& t : a.terms) {
    std::string piece;
    std::string cs = t.coeff.str();
    bool coeffNeedsParens = cs.find(" + ") != std::string::npos ||
                            cs.find(" - ") != std::string::npos;
    if (t.factors.empty()) {
      piece = coeffNeedsParens ? "(" + cs + ")" : cs;
    } else {
      std::string body;
      for (const auto& f : t.factors) {
        if (!body.empty()) body += " ";
        body += factorStr(a.ctx, f);
      }
      std::string grouped = t.factors.size() > 1 ? ":" + body + ":" : body;
      if (t.coeff.isConstant()) {
        Scalar v = t.coeff.constantValue();
        if (v.isOne()) piece = grouped;
        else if ((-v).isOne()) piece = "-" + grouped;
        else piece = toString(v) + "*" + grouped;
      } else {
        if (coeffNeedsParens) cs = "(" + cs + ")";
        piece = ":" + cs + " " + body + ":";
      }
    }
    if (!first) out += " + ";
    out += piece;
    first = false;
  }
  return out;
}

inline std::string str(const LambdaPoly& L) {
  std::string out;
  for (int k = 0; k < L.size(); ++k) {
    if (L.ent[k].isZero()) continue;
    std::string e = "(" + str(L.ent[k]) + ")";
    std::string head;
    if (k == 1) head = "lam*";
    else if (k > 1) {
      head = "lam^" + std::to_string(k);
      Rat f = detail::factorial(k);
      head += "/" + toString(f) + "*";
    }
    if (!out.empty()) out += " + ";
    out += head + e;
  }
  return out.empty() ? "0" : out;
}

inline void Context::validate() const {
  for (const auto& [pair, entries] : table) {
    const GenInfo& a = gens[pair.first];
    const GenInfo& b = gens[pair.second];
    for (size_t k = 0; k < entries.size(); ++k) {
      const FieldExpr& e = entries[k];
      for (const auto& t : e.terms) {
        if (monoParity(this, t) != ((a.odd ? 1 : 0) ^ (b.odd ? 1 : 0)))
          throw Error("context '" + name + "': bracket table entry violates parity for " +
                      a.name + "," + b.name);
        if (strictGrading) {
          if (monoWeight(this, t) != a.weight + b.weight - static_cast<int>(k) - 1)
            throw Error("context '" + name + "': bracket table entry violates weight for " +
                        a.name + "," + b.name);
          if (monoDegree(this, t) != a.degree + b.degree)
            throw Error("context '" + name + "': bracket table entry violates degree for " +
                        a.name + "," + b.name);
        }
      }
    }
  }
}

// ---- algebra homomorphisms and derivations ----

// Apply a generator substitution: each generator id maps to an expression in
// the target context; coefficients pass through coeffMap.
inline FieldExpr applyHom(const Context* target,
                          const std::map<int, FieldExpr>& genImages,
                          const std::function<CoeffFn(const CoeffFn&)>& coeffMap,
                          const FieldExpr& x) {
  FieldExpr out(target);
  for (const auto& t : x.terms) {
    FieldExpr acc = FieldExpr::unit(target);
    for (auto it = t.factors.rbegin(); it != t.factors.rend(); ++it) {
      auto img = genImages.find(it->gen);
      if (img == genImages.end()) throw Error("hom: generator has no declared image");
      acc = wick(derivative(img->second, it->d), acc);
    }
    out += wick(FieldExpr::fromCoeff(target, coeffMap(t.coeff)), acc);
  }
  return out;
}

// Extend a map of generator images to an odd derivation (square-zero checks
// are up to the caller).  coeffRule gives the image of a bare coefficient.
inline FieldExpr applyOddDerivation(const std::map<int, FieldExpr>& genImages,
                                    const std::function<FieldExpr(const CoeffFn&)>& coeffRule,
                                    const FieldExpr& x) {
  const Context* c = x.ctx;
  std::function<FieldExpr(const Monomial&)> go = [&](const Monomial& m) -> FieldExpr {
    // D(f ∘ X) = D(f) ∘ X + f ∘ D(X);  D(F ∘ R) = D(F) ∘ R + (-1)^{|F|} F ∘ D(R).
    FieldExpr r(c);
    Monomial X{CoeffFn::one(c->coords), m.factors};
    FieldExpr Df = coeffRule(m.coeff);
    if (!Df.isZero()) r += wick(Df, detail::monoField(c, X));
    if (m.factors.empty()) return r;
    FieldExpr inner(c);
    std::function<FieldExpr(size_t)> rec = [&](size_t i) -> FieldExpr {
      FieldExpr res(c);
      if (i == m.factors.size()) return res;
      const Factor& F = m.factors[i];
      auto img = genImages.find(F.gen);
      if (img == genImages.end()) throw Error("derivation: generator has no declared image");
      FieldExpr DF = derivative(img->second, F.d);
      Monomial rest{CoeffFn::one(c->coords), {m.factors.begin() + i + 1, m.factors.end()}};
      res += wick(DF, detail::monoField(c, rest));
      FieldExpr tail = rec(i + 1);
      if (!tail.isZero()) {
        FieldExpr Ff = FieldExpr::generator(c, F.gen, F.d);
        FieldExpr part = wick(Ff, tail);
        if (c->gens[F.gen].odd) part = -part;
        res += part;
      }
      return res;
    };
    inner = rec(0);
    if (!inner.isZero()) r += wick(FieldExpr::fromCoeff(c, m.coeff), inner);
    return r;
  };
  FieldExpr out(c);
  for (const auto& t : x.terms) out += go(t);
  return out;
}

}  // namespace vaw
