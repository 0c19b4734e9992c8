#pragma once
// Exact coefficient ring on a patch: polynomials in flat coordinates tensored
// with Fourier polynomials exp(i*k*theta) in angular coordinates.  This is the
// computable differential ring the engine uses in place of smooth functions;
// it is closed under products and all partial derivatives, and equality is
// decidable (canonical sorted-term form).

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "vaw/scalar.hpp"

namespace vaw {

enum class CoordKind { Flat, Angular };

struct CoordSystem {
  std::vector<std::string> names;
  std::vector<CoordKind> kinds;

  static CoordSystem flat(int n) {
    CoordSystem cs;
    for (int u = 0; u < n; ++u) {
      cs.names.push_back("gamma[" + std::to_string(u + 1) + "]");
      cs.kinds.push_back(CoordKind::Flat);
    }
    return cs;
  }
  static CoordSystem flatAngular(int n, int m) {
    CoordSystem cs = flat(n);
    for (int v = 0; v < m; ++v) {
      cs.names.push_back("theta" + std::to_string(v + 1));
      cs.kinds.push_back(CoordKind::Angular);
    }
    return cs;
  }

  size_t size() const { return names.size(); }
  bool isFlat(size_t u) const { return kinds[u] == CoordKind::Flat; }
  int indexOf(const std::string& name) const {
    for (size_t u = 0; u < names.size(); ++u)
      if (names[u] == name) return static_cast<int>(u);
    return -1;
  }
  bool operator==(const CoordSystem& o) const = default;
};

using CoordsPtr = std::shared_ptr<const CoordSystem>;

inline CoordsPtr makeCoords(CoordSystem cs) {
  return std::make_shared<const CoordSystem>(std::move(cs));
}

// One term: scalar * prod gamma_u^{e_u} * prod exp(i*e_v*theta_v).
// Flat exponents are >= 0; angular exponents (Fourier modes) range over Z.
struct CTerm {
  std::vector<int> e;
  Scalar c;
  bool operator==(const CTerm& o) const = default;
};

class CoeffFn {
 public:
  CoordsPtr cs;
  std::vector<CTerm> terms;  // sorted by exponent vector, merged, no zeros

  CoeffFn() = default;
  explicit CoeffFn(CoordsPtr sys) : cs(std::move(sys)) {}

  static CoeffFn zero(const CoordsPtr& cs) { return CoeffFn(cs); }
  static CoeffFn constant(const CoordsPtr& cs, Scalar v) {
    CoeffFn f(cs);
    if (!v.isZero()) f.terms.push_back({std::vector<int>(cs->size(), 0), std::move(v)});
    return f;
  }
  static CoeffFn one(const CoordsPtr& cs) { return constant(cs, Scalar(1)); }
  static CoeffFn monomial(const CoordsPtr& cs, std::vector<int> exps, Scalar v = Scalar(1)) {
    if (exps.size() != cs->size()) throw Error("coefffn: exponent arity mismatch");
    for (size_t u = 0; u < exps.size(); ++u)
      if (cs->isFlat(u) && exps[u] < 0) throw Error("coefffn: negative flat exponent");
    CoeffFn f(cs);
    if (!v.isZero()) f.terms.push_back({std::move(exps), std::move(v)});
    return f;
  }
  // The coordinate function gamma_u (flat coordinates only; angular
  // coordinates are multivalued and enter the ring only through exp).
  static CoeffFn coord(const CoordsPtr& cs, int u) {
    if (u < 0 || static_cast<size_t>(u) >= cs->size() || !cs->isFlat(u))
      throw Error("coefffn: not a flat coordinate");
    std::vector<int> e(cs->size(), 0);
    e[u] = 1;
    return monomial(cs, std::move(e));
  }
  static CoeffFn fourier(const CoordsPtr& cs, int v, int mode) {
    if (v < 0 || static_cast<size_t>(v) >= cs->size() || cs->isFlat(v))
      throw Error("coefffn: not an angular coordinate");
    std::vector<int> e(cs->size(), 0);
    e[v] = mode;
    return monomial(cs, std::move(e));
  }

  bool isZero() const { return terms.empty(); }
  bool sameSystem(const CoeffFn& o) const { return cs && o.cs && *cs == *o.cs; }

  void normalize() {
    std::sort(terms.begin(), terms.end(),
              [](const CTerm& a, const CTerm& b) { return a.e < b.e; });
    std::vector<CTerm> out;
    for (auto& t : terms) {
      if (!out.empty() && out.back().e == t.e)
        out.back().c += t.c;
      else
        out.push_back(std::move(t));
      if (!out.empty() && out.back().c.isZero()) out.pop_back();
    }
    terms = std::move(out);
  }

  CoeffFn operator-() const {
    CoeffFn r = *this;
    for (auto& t : r.terms) t.c = -t.c;
    return r;
  }
  CoeffFn operator+(const CoeffFn& o) const {
    requireSame(o);
    CoeffFn r = *this;
    r.terms.insert(r.terms.end(), o.terms.begin(), o.terms.end());
    r.normalize();
    return r;
  }
  CoeffFn operator-(const CoeffFn& o) const { return *this + (-o); }
  CoeffFn operator*(const CoeffFn& o) const {
    requireSame(o);
    CoeffFn r(cs);
    for (const auto& a : terms)
      for (const auto& b : o.terms) {
        CTerm t;
        t.e.resize(a.e.size());
        for (size_t u = 0; u < a.e.size(); ++u) t.e[u] = a.e[u] + b.e[u];
        t.c = a.c * b.c;
        r.terms.push_back(std::move(t));
      }
    r.normalize();
    return r;
  }
  CoeffFn operator*(const Scalar& s) const {
    CoeffFn r = *this;
    if (s.isZero()) return CoeffFn(cs);
    for (auto& t : r.terms) t.c *= s;
    return r;
  }
  bool operator==(const CoeffFn& o) const {
    return sameSystem(o) ? terms == o.terms : false;
  }

  CoeffFn partial(int u) const {
    if (u < 0 || static_cast<size_t>(u) >= cs->size())
      throw Error("coefffn: unknown coordinate id");
    CoeffFn r(cs);
    for (const auto& t : terms) {
      if (t.e[u] == 0) continue;
      CTerm d = t;
      if (cs->isFlat(u)) {
        d.c *= Scalar(d.e[u]);
        d.e[u] -= 1;
      } else {
        d.c *= Scalar(Rat(0), Rat(d.e[u]));  // d/dtheta exp(i k theta) = i k exp(...)
      }
      r.terms.push_back(std::move(d));
    }
    r.normalize();
    return r;
  }

  CoeffFn pow(int k) const {
    if (k < 0) throw Error("coefffn: negative power");
    CoeffFn r = one(cs);
    for (int j = 0; j < k; ++j) r = r * *this;
    return r;
  }

  // Polynomial composition f(images[0], ..., images[n-1]); flat-only.
  CoeffFn subst(const std::vector<CoeffFn>& images) const {
    if (images.size() != cs->size()) throw Error("coefffn: subst arity mismatch");
    CoeffFn r = images.empty() ? CoeffFn(cs) : CoeffFn(images[0].cs);
    if (images.empty()) return *this;
    for (const auto& t : terms) {
      CoeffFn m = constant(images[0].cs, t.c);
      for (size_t u = 0; u < t.e.size(); ++u) {
        if (t.e[u] == 0) continue;
        if (!cs->isFlat(u)) throw Error("coefffn: subst on angular coordinate");
        m = m * images[u].pow(t.e[u]);
      }
      r = r + m;
    }
    return r;
  }

  int maxFlatDegree() const {
    int d = 0;
    for (const auto& t : terms) {
      int s = 0;
      for (size_t u = 0; u < t.e.size(); ++u)
        if (cs->isFlat(u)) s += t.e[u];
      d = std::max(d, s);
    }
    return d;
  }

  bool isConstant() const {
    return terms.empty() ||
           (terms.size() == 1 &&
            std::all_of(terms[0].e.begin(), terms[0].e.end(), [](int e) { return e == 0; }));
  }
  Scalar constantValue() const {
    if (terms.empty()) return Scalar(0);
    if (!isConstant()) throw Error("coefffn: not a constant");
    return terms[0].c;
  }

  // Angular-mode sector of a term (subvector of angular exponents).
  std::vector<int> sectorOf(const CTerm& t) const {
    std::vector<int> s;
    for (size_t u = 0; u < t.e.size(); ++u)
      if (!cs->isFlat(u)) s.push_back(t.e[u]);
    return s;
  }
  std::map<std::vector<int>, CoeffFn> sectorDecompose() const {
    std::map<std::vector<int>, CoeffFn> out;
    for (const auto& t : terms) {
      auto key = sectorOf(t);
      auto it = out.find(key);
      if (it == out.end()) it = out.emplace(key, CoeffFn(cs)).first;
      it->second.terms.push_back(t);
    }
    for (auto& [k, f] : out) f.normalize();
    return out;
  }

  std::string str() const {
    if (terms.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& t : terms) {
      std::string body;
      for (size_t u = 0; u < t.e.size(); ++u) {
        if (t.e[u] == 0) continue;
        if (!body.empty()) body += "*";
        if (cs->isFlat(u)) {
          body += cs->names[u];
          if (t.e[u] != 1) body += "^" + std::to_string(t.e[u]);
        } else {
          int k = t.e[u];
          body += "exp(";
          body += (k > 0) ? "i" : "-i";
          int a = k > 0 ? k : -k;
          if (a != 1) body += "*" + std::to_string(a);
          body += "*" + cs->names[u] + ")";
        }
      }
      std::string coef = toString(t.c);
      std::string term;
      if (body.empty())
        term = coef;
      else if (t.c.isOne())
        term = body;
      else if (t.c == Scalar(-1))
        term = "-" + body;
      else
        term = coef + "*" + body;
      if (!first && !term.empty() && term[0] != '-') out += " + ";
      else if (!first) { out += " - "; term = term.substr(1); }
      out += term;
      first = false;
    }
    return out;
  }

 private:
  void requireSame(const CoeffFn& o) const {
    if (!sameSystem(o)) throw Error("coefffn: coordinate-system mismatch");
  }
};

}  // namespace vaw
