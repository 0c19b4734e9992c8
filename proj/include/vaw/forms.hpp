#pragma once
// Classical calculus on a coordinate chart: polynomial/Fourier differential
// forms and vector fields.  Wedge monomials are bitmasks over coordinates,
// kept in ascending order; all signs come from counting transpositions.

#include <cstdint>
#include <map>
#include <vector>

#include "vaw/coefffn.hpp"

namespace vaw {

using Mask = std::uint32_t;

inline int maskDegree(Mask m) { return __builtin_popcount(m); }

// Sign of merging ordered blocks S and T (disjoint) into ascending order.
inline int mergeSign(Mask s, Mask t) {
  int inv = 0;
  for (int b = 0; b < 32; ++b)
    if (t & (Mask(1) << b)) inv += __builtin_popcount(s >> (b + 1));
  return inv % 2 ? -1 : 1;
}

class DiffForm {
 public:
  CoordsPtr cs;
  std::map<Mask, CoeffFn> terms;  // mask -> coefficient, no zero entries

  DiffForm() = default;
  explicit DiffForm(CoordsPtr sys) : cs(std::move(sys)) {}

  static DiffForm zero(const CoordsPtr& cs) { return DiffForm(cs); }
  static DiffForm fn(const CoeffFn& f) {
    DiffForm w(f.cs);
    if (!f.isZero()) w.terms[0] = f;
    return w;
  }
  static DiffForm dcoord(const CoordsPtr& cs, int u) {
    DiffForm w(cs);
    w.terms[Mask(1) << u] = CoeffFn::one(cs);
    return w;
  }
  static DiffForm monomial(const CoeffFn& f, std::initializer_list<int> coords) {
    DiffForm w = fn(f);
    for (int u : coords) w = wedge(w, dcoord(f.cs, u));
    return w;
  }

  bool isZero() const { return terms.empty(); }
  void prune() {
    for (auto it = terms.begin(); it != terms.end();)
      it = it->second.isZero() ? terms.erase(it) : std::next(it);
  }

  DiffForm operator-() const {
    DiffForm r = *this;
    for (auto& [m, f] : r.terms) f = -f;
    return r;
  }
  DiffForm operator+(const DiffForm& o) const {
    DiffForm r = *this;
    if (!r.cs) r.cs = o.cs;
    for (const auto& [m, f] : o.terms) {
      auto it = r.terms.find(m);
      if (it == r.terms.end()) r.terms[m] = f;
      else it->second = it->second + f;
    }
    r.prune();
    return r;
  }
  DiffForm operator-(const DiffForm& o) const { return *this + (-o); }
  DiffForm operator*(const Scalar& s) const {
    DiffForm r = *this;
    for (auto& [m, f] : r.terms) f = f * s;
    r.prune();
    return r;
  }
  bool operator==(const DiffForm& o) const {
    DiffForm d = *this - o;
    return d.isZero();
  }

  static DiffForm wedge(const DiffForm& a, const DiffForm& b) {
    DiffForm r(a.cs ? a.cs : b.cs);
    for (const auto& [s, f] : a.terms)
      for (const auto& [t, g] : b.terms) {
        if (s & t) continue;
        CoeffFn piece = f * g * Scalar(mergeSign(s, t));
        auto it = r.terms.find(s | t);
        if (it == r.terms.end()) r.terms[s | t] = piece;
        else it->second = it->second + piece;
      }
    r.prune();
    return r;
  }

  DiffForm d() const {
    DiffForm r(cs);
    for (const auto& [m, f] : terms)
      for (size_t u = 0; u < cs->size(); ++u) {
        CoeffFn df = f.partial(static_cast<int>(u));
        if (df.isZero()) continue;
        Mask bit = Mask(1) << u;
        if (m & bit) continue;
        CoeffFn piece = df * Scalar(mergeSign(bit, m));
        auto it = r.terms.find(bit | m);
        if (it == r.terms.end()) r.terms[bit | m] = piece;
        else it->second = it->second + piece;
      }
    r.prune();
    return r;
  }

  // Restrict to homogeneous form degree k.
  DiffForm part(int k) const {
    DiffForm r(cs);
    for (const auto& [m, f] : terms)
      if (maskDegree(m) == k) r.terms[m] = f;
    return r;
  }
  int maxDegree() const {
    int k = 0;
    for (const auto& [m, f] : terms) k = std::max(k, maskDegree(m));
    return k;
  }

  std::string str() const {
    if (terms.empty()) return "0";
    std::string out;
    for (const auto& [m, f] : terms) {
      if (!out.empty()) out += " + ";
      std::string fs = f.str();
      bool parens = fs.find(" + ") != std::string::npos || fs.find(" - ") != std::string::npos;
      out += parens ? "(" + fs + ")" : fs;
      for (int b = 0; b < 32; ++b)
        if (m & (Mask(1) << b)) out += " d" + cs->names[b];
    }
    return out;
  }
};

struct VectorField {
  CoordsPtr cs;
  std::vector<CoeffFn> comp;  // components in the coordinate frame

  VectorField() = default;
  explicit VectorField(CoordsPtr sys)
      : cs(sys), comp(sys->size(), CoeffFn::zero(sys)) {}
  static VectorField unitDir(const CoordsPtr& cs, int u) {
    VectorField x(cs);
    x.comp[u] = CoeffFn::one(cs);
    return x;
  }

  bool isZero() const {
    for (const auto& f : comp)
      if (!f.isZero()) return false;
    return true;
  }
  VectorField operator+(const VectorField& o) const {
    VectorField r = *this;
    for (size_t u = 0; u < comp.size(); ++u) r.comp[u] = r.comp[u] + o.comp[u];
    return r;
  }
  VectorField operator-() const {
    VectorField r = *this;
    for (auto& f : r.comp) f = -f;
    return r;
  }
  VectorField operator-(const VectorField& o) const { return *this + (-o); }
  VectorField operator*(const Scalar& s) const {
    VectorField r = *this;
    for (auto& f : r.comp) f = f * s;
    return r;
  }
  VectorField scale(const CoeffFn& g) const {
    VectorField r = *this;
    for (auto& f : r.comp) f = g * f;
    return r;
  }
  bool operator==(const VectorField& o) const {
    for (size_t u = 0; u < comp.size(); ++u)
      if (!(comp[u] == o.comp[u])) return false;
    return true;
  }

  // X acting on a function.
  CoeffFn apply(const CoeffFn& f) const {
    CoeffFn r = CoeffFn::zero(cs);
    for (size_t u = 0; u < comp.size(); ++u)
      r = r + comp[u] * f.partial(static_cast<int>(u));
    return r;
  }
};

// iota_X(f dx^{u1<...<uk}) = f sum_j (-1)^{j-1} X^{uj} dx^{S minus uj}.
inline DiffForm contract(const VectorField& X, const DiffForm& w) {
  DiffForm r(w.cs);
  for (const auto& [m, f] : w.terms) {
    int j = 0;
    for (int b = 0; b < 32; ++b) {
      Mask bit = Mask(1) << b;
      if (!(m & bit)) continue;
      ++j;  // 1-based position of b inside the ordered mask
      if (X.comp[b].isZero()) continue;
      CoeffFn piece = f * X.comp[b] * Scalar(j % 2 ? 1 : -1);
      auto it = r.terms.find(m ^ bit);
      if (it == r.terms.end()) r.terms[m ^ bit] = piece;
      else it->second = it->second + piece;
    }
  }
  r.prune();
  return r;
}

inline DiffForm lieDerivative(const VectorField& X, const DiffForm& w) {
  return contract(X, w.d()) + contract(X, w).d();
}

inline VectorField vecBracket(const VectorField& X, const VectorField& Y) {
  VectorField r(X.cs);
  for (size_t w = 0; w < r.comp.size(); ++w)
    r.comp[w] = X.apply(Y.comp[w]) - Y.apply(X.comp[w]);
  return r;
}

}  // namespace vaw
