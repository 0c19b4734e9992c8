#pragma once
// Generalized geometry on a chart: sections X + xi of TZ (+) T*Z, the
// H-twisted Courant bracket with its five axioms, the Clifford action on
// forms, dimension reduction along a trivialized circle direction, the
// section involution tau, and the Hori map on invariant forms.

#include <functional>
#include <utility>

#include "vaw/forms.hpp"

namespace vaw {

// Degree-0 coefficient of a form.
inline CoeffFn fnPart(const DiffForm& w) {
  auto it = w.terms.find(0);
  return it == w.terms.end() ? CoeffFn::zero(w.cs) : it->second;
}

inline DiffForm operator*(const CoeffFn& g, const DiffForm& w) {
  return DiffForm::wedge(DiffForm::fn(g), w);
}

struct CourantSection {
  VectorField X;
  DiffForm xi;

  CourantSection() = default;
  CourantSection(VectorField x, DiffForm f) : X(std::move(x)), xi(std::move(f)) {
    if (X.cs != xi.cs && xi.cs) throw Error("courant: section components on different charts");
    if (!xi.cs) xi = DiffForm::zero(X.cs);
    for (const auto& [m, c] : xi.terms)
      if (maskDegree(m) != 1) throw Error("courant: form component must have degree 1");
  }
  static CourantSection vec(const VectorField& x) { return {x, DiffForm::zero(x.cs)}; }
  static CourantSection form(const DiffForm& f) { return {VectorField(f.cs), f}; }

  CourantSection operator+(const CourantSection& o) const { return {X + o.X, xi + o.xi}; }
  CourantSection operator-(const CourantSection& o) const { return {X - o.X, xi - o.xi}; }
  CourantSection operator*(const Scalar& s) const { return {X * s, xi * s}; }
  CourantSection scale(const CoeffFn& g) const { return {X.scale(g), g * xi}; }
  bool operator==(const CourantSection& o) const { return X == o.X && xi == o.xi; }
};

inline void samePatch(const CourantSection& a, const CourantSection& b) {
  if (a.X.cs != b.X.cs) throw Error("courant: sections on different charts");
}

inline CoeffFn pairing(const CourantSection& a, const CourantSection& b) {
  samePatch(a, b);
  return (fnPart(contract(a.X, b.xi)) + fnPart(contract(b.X, a.xi))) * Scalar::ratio(1, 2);
}

// Induced differential as a section.  Under the pairing above, the defining
// property <df, Y+eta> = 1/2 Y(f) is met by the plain de Rham differential.
inline CourantSection dSec(const CoeffFn& f) {
  return CourantSection(VectorField(f.cs), DiffForm::fn(f).d());
}

inline CourantSection bracketH(const DiffForm& H, const CourantSection& a,
                               const CourantSection& b) {
  samePatch(a, b);
  DiffForm form = lieDerivative(a.X, b.xi) - lieDerivative(b.X, a.xi);
  CoeffFn cross = fnPart(contract(a.X, b.xi)) - fnPart(contract(b.X, a.xi));
  form = form - DiffForm::fn(cross).d() * Scalar::ratio(1, 2);
  form = form + contract(a.X, contract(b.X, H));
  return {vecBracket(a.X, b.X), form};
}

using BracketFn = std::function<CourantSection(const CourantSection&, const CourantSection&)>;

struct AxiomReport {
  bool anchor = false, jacobi = false, anchorD = false, leibniz = false, invariance = false;
  bool all() const { return anchor && jacobi && anchorD && leibniz && invariance; }
};

inline AxiomReport checkAxioms(const BracketFn& br, const CourantSection& A,
                               const CourantSection& B, const CourantSection& C,
                               const CoeffFn& f) {
  AxiomReport r;
  r.anchor = br(A, B).X == vecBracket(A.X, B.X);

  CourantSection jac = br(br(A, B), C) + br(br(B, C), A) + br(br(C, A), B);
  CoeffFn nij = (pairing(br(A, B), C) + pairing(br(B, C), A) + pairing(br(C, A), B)) *
                Scalar::ratio(1, 3);
  r.jacobi = jac == dSec(nij);

  r.anchorD = dSec(f).X.isZero();

  CourantSection lhs4 = br(A, B.scale(f));
  CourantSection rhs4 = B.scale(A.X.apply(f)) + br(A, B).scale(f) - dSec(f).scale(pairing(A, B));
  r.leibniz = lhs4 == rhs4;

  CoeffFn lhs5 = A.X.apply(pairing(B, C));
  CoeffFn rhs5 = pairing(br(A, B) + dSec(pairing(A, B)), C) +
                 pairing(B, br(A, C) + dSec(pairing(A, C)));
  r.invariance = lhs5 == rhs5;
  return r;
}

inline AxiomReport checkAxioms(const DiffForm& H, const CourantSection& A,
                               const CourantSection& B, const CourantSection& C,
                               const CoeffFn& f) {
  return checkAxioms([&H](const CourantSection& x, const CourantSection& y) {
    return bracketH(H, x, y);
  }, A, B, C, f);
}

inline DiffForm cliffordAct(const CourantSection& s, const DiffForm& w) {
  return contract(s.X, w) + DiffForm::wedge(s.xi, w);
}

inline DiffForm dTwisted(const DiffForm& H, const DiffForm& w) {
  return w.d() + DiffForm::wedge(H, w);
}

// Graded commutators of operators on forms: sections act oddly, d_H is odd,
// so [d_H, s] is an anticommutator and the outer bracket a commutator.
inline DiffForm dorfmanAct(const DiffForm& H, const CourantSection& s1,
                           const CourantSection& s2, const DiffForm& w) {
  auto dH = [&](const DiffForm& x) { return dTwisted(H, x); };
  auto inner = [&](const DiffForm& x) { return dH(cliffordAct(s1, x)) + cliffordAct(s1, dH(x)); };
  return inner(cliffordAct(s2, w)) - cliffordAct(s2, inner(w));
}

// Skew part of the Dorfman action recovers the Courant bracket; the Dorfman
// action itself differs from it by d<s1,s2> acting by wedge.
inline bool bracketCompat(const DiffForm& H, const CourantSection& s1,
                          const CourantSection& s2, const DiffForm& w) {
  DiffForm skew = (dorfmanAct(H, s1, s2, w) - dorfmanAct(H, s2, s1, w)) * Scalar::ratio(1, 2);
  if (!(skew == cliffordAct(bracketH(H, s1, s2), w))) return false;
  DiffForm dorf = dorfmanAct(H, s1, s2, w);
  CourantSection shifted = bracketH(H, s1, s2) + dSec(pairing(s1, s2));
  return dorf == cliffordAct(shifted, w);
}

// ---- dimension reduction along a trivialized circle direction ----
// Sections (X, f) + (omega, g) over the base; the connection A is a formal
// symbol with iota_A A = 1 and dA = F_A supplied as data.
struct ReducedSection {
  VectorField X;
  CoeffFn f;
  DiffForm omega;
  CoeffFn g;

  ReducedSection(VectorField x, CoeffFn ff, DiffForm w, CoeffFn gg)
      : X(std::move(x)), f(std::move(ff)), omega(std::move(w)), g(std::move(gg)) {
    for (const auto& [m, c] : omega.terms)
      if (maskDegree(m) != 1) throw Error("courant: reduced form component must have degree 1");
  }
  static ReducedSection zero(const CoordsPtr& cs) {
    return {VectorField(cs), CoeffFn::zero(cs), DiffForm::zero(cs), CoeffFn::zero(cs)};
  }

  ReducedSection operator+(const ReducedSection& o) const {
    return {X + o.X, f + o.f, omega + o.omega, g + o.g};
  }
  ReducedSection operator-(const ReducedSection& o) const {
    return {X - o.X, f - o.f, omega - o.omega, g - o.g};
  }
  bool operator==(const ReducedSection& o) const {
    return X == o.X && f == o.f && omega == o.omega && g == o.g;
  }
};

struct ReductionData {
  CoordsPtr base;
  DiffForm FA, H2, H3;

  ReductionData(CoordsPtr cs, DiffForm fa, DiffForm h2, DiffForm h3)
      : base(std::move(cs)), FA(std::move(fa)), H2(std::move(h2)), H3(std::move(h3)) {
    if (!FA.d().isZero()) throw Error("reduction: curvature not closed");
    if (!H2.d().isZero()) throw Error("reduction: 2-form flux not closed");
    if (!(H3.d() == DiffForm::wedge(FA, H2) * Scalar(-1)))
      throw Error("reduction: dH3 != -FA^H2");
  }

  // Dual-side data: curvature and 2-form flux trade places.
  ReductionData dual() const { return ReductionData(base, H2, FA, H3); }
};

inline ReducedSection reducedBracket(const ReductionData& rd, const ReducedSection& a,
                                     const ReducedSection& b) {
  VectorField xv = vecBracket(a.X, b.X);
  CoeffFn fv = a.X.apply(b.f) - b.X.apply(a.f) + fnPart(contract(a.X, contract(b.X, rd.FA)));
  DiffForm wv = lieDerivative(a.X, b.omega) - lieDerivative(b.X, a.omega);
  wv = wv + b.g * contract(a.X, rd.FA) - a.g * contract(b.X, rd.FA);
  CoeffFn cross = fnPart(contract(a.X, b.omega)) - fnPart(contract(b.X, a.omega));
  wv = wv - DiffForm::fn(cross).d() * Scalar::ratio(1, 2);
  DiffForm da = DiffForm::fn(a.f).d(), db = DiffForm::fn(b.f).d();
  DiffForm dga = DiffForm::fn(a.g).d(), dgb = DiffForm::fn(b.g).d();
  wv = wv + (b.g * da + b.f * dga - a.f * dgb - a.g * db) * Scalar::ratio(1, 2);
  wv = wv + contract(a.X, contract(b.X, rd.H3));
  wv = wv + b.f * contract(a.X, rd.H2) - a.f * contract(b.X, rd.H2);
  CoeffFn gv = a.X.apply(b.g) - b.X.apply(a.g) + fnPart(contract(a.X, contract(b.X, rd.H2)));
  return {xv, fv, wv, gv};
}

inline CoeffFn reducedPairing(const ReducedSection& a, const ReducedSection& b) {
  return (fnPart(contract(a.X, b.omega)) + fnPart(contract(b.X, a.omega)) + a.f * b.g +
          b.f * a.g) *
         Scalar::ratio(1, 2);
}

inline ReducedSection cgTau(const ReducedSection& r) { return {r.X, r.g, r.omega, r.f}; }

// ---- invariant forms G = G0 + A ^ G1 and the Hori map ----
struct InvariantForm {
  DiffForm g0, g1;

  InvariantForm(DiffForm a, DiffForm b) : g0(std::move(a)), g1(std::move(b)) {}
  static InvariantForm base(const DiffForm& w) { return {w, DiffForm::zero(w.cs)}; }

  InvariantForm operator+(const InvariantForm& o) const { return {g0 + o.g0, g1 + o.g1}; }
  InvariantForm operator-(const InvariantForm& o) const { return {g0 - o.g0, g1 - o.g1}; }
  InvariantForm operator*(const Scalar& s) const { return {g0 * s, g1 * s}; }
  bool operator==(const InvariantForm& o) const { return g0 == o.g0 && g1 == o.g1; }
};

// d_H(G0 + A^G1) with dA = F_A and H = H3 + A^H2, collected back into the
// same (base, A^base) shape.
inline InvariantForm dTwistedInv(const ReductionData& rd, const InvariantForm& G) {
  DiffForm top = G.g0.d() + DiffForm::wedge(rd.H3, G.g0) + DiffForm::wedge(rd.FA, G.g1);
  DiffForm fib = G.g1.d() * Scalar(-1) - DiffForm::wedge(rd.H3, G.g1) +
                 DiffForm::wedge(rd.H2, G.g0);
  return {top, fib};
}

// T(G0 + A^G1) = -G1 + A^^G0 on the dual side.
inline InvariantForm horiT(const InvariantForm& G) { return {G.g1 * Scalar(-1), G.g0}; }

// Clifford action of a reduced section on an invariant form.
inline InvariantForm cliffordActInv(const ReducedSection& s, const InvariantForm& G) {
  DiffForm top = contract(s.X, G.g0) + s.f * G.g1 + DiffForm::wedge(s.omega, G.g0);
  DiffForm fib = contract(s.X, G.g1) * Scalar(-1) - DiffForm::wedge(s.omega, G.g1) +
                 s.g * G.g0;
  return {top, fib};
}

}  // namespace vaw
