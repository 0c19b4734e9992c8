#pragma once

// Weight-graded linear algebra over the exact scalar field: basis enumeration,
// differential matrices, cohomology dimensions, and (q,z) character series.

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vaw/field.hpp"

namespace vaw {

struct BasisOptions {
  int maxPolyDeg = 0;              // coefficient degree cutoff on flat coordinates
  std::vector<int> sector;         // Fourier index per angular coordinate; empty = all zero
  std::function<bool(int)> atomFilter;  // generators allowed; default all
};

// Identity of a canonical monomial: coefficient exponents + factor list.
struct MonoKey {
  std::vector<int> e;
  std::vector<std::pair<int, int>> fs;
  auto operator<=>(const MonoKey&) const = default;
};

struct GradedBasis {
  const Context* ctx = nullptr;
  int weight = 0;
  std::vector<FieldExpr> vecs;
  std::map<MonoKey, int> index;

  // Sparse coordinates of x; a monomial outside the enumerated span is a hard
  // error, never a silent drop.
  std::map<int, Scalar> coords(const FieldExpr& x) const {
    std::map<int, Scalar> out;
    for (const auto& m : x.terms)
      for (const auto& t : m.coeff.terms) {
        MonoKey k;
        k.e = t.e;
        for (const auto& f : m.factors) k.fs.emplace_back(f.gen, f.d);
        auto it = index.find(k);
        if (it == index.end()) throw Error("basis: image leaves the enumerated span");
        auto& acc = out[it->second];
        acc += t.c;
        if (acc.isZero()) out.erase(it->second);
      }
    return out;
  }
};

namespace detail {

inline void enumCoeffs(const CoordsPtr& cs, int maxPolyDeg, const std::vector<int>& sector,
                       std::vector<CoeffFn>& out) {
  std::vector<size_t> flats, angs;
  for (size_t u = 0; u < cs->size(); ++u) (cs->isFlat(u) ? flats : angs).push_back(u);
  if (!sector.empty() && sector.size() != angs.size())
    throw Error("basis: sector length does not match the angular coordinates");
  std::vector<int> exps(cs->size(), 0);
  for (size_t j = 0; j < angs.size(); ++j) exps[angs[j]] = sector.empty() ? 0 : sector[j];
  std::function<void(size_t, int)> rec = [&](size_t i, int left) {
    if (i == flats.size()) {
      out.push_back(CoeffFn::monomial(cs, exps));
      return;
    }
    for (int p = 0; p <= left; ++p) {
      exps[flats[i]] = p;
      rec(i + 1, left - p);
    }
    exps[flats[i]] = 0;
  };
  rec(0, maxPolyDeg);
}

}  // namespace detail

// All canonical PBW monomials of exact weight w.  Weight-0 atoms must be odd,
// otherwise the space is infinite-dimensional and we refuse.
inline GradedBasis enumerateBasis(const ContextPtr& ctx, int w, BasisOptions opt = {}) {
  GradedBasis basis;
  basis.ctx = ctx.get();
  basis.weight = w;

  struct Atom {
    int gen, d, wt;
    bool odd;
  };
  std::vector<Atom> atoms;
  for (size_t g = 0; g < ctx->gens.size(); ++g) {
    if (opt.atomFilter && !opt.atomFilter(static_cast<int>(g))) continue;
    const auto& gi = ctx->gens[g];
    for (int d = 0; gi.weight + d <= w; ++d) {
      int aw = gi.weight + d;
      if (aw == 0 && !gi.odd) throw Error("basis: even weight-0 generator makes the space infinite");
      atoms.push_back({static_cast<int>(g), d, aw, gi.odd});
    }
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return std::pair(a.gen, a.d) < std::pair(b.gen, b.d); });

  std::vector<CoeffFn> coeffs;
  detail::enumCoeffs(ctx->coords, opt.maxPolyDeg, opt.sector, coeffs);

  std::vector<Factor> factors;
  std::function<void(size_t, int)> rec = [&](size_t i, int left) {
    if (i == atoms.size()) {
      if (left != 0) return;
      for (const auto& f : coeffs) {
        FieldExpr v = FieldExpr::mono(ctx.get(), f, factors);
        int idx = static_cast<int>(basis.vecs.size());
        basis.vecs.push_back(v);
        MonoKey k;
        k.e = f.terms[0].e;
        for (const auto& fc : factors) k.fs.emplace_back(fc.gen, fc.d);
        basis.index[k] = idx;
      }
      return;
    }
    const Atom& a = atoms[i];
    int maxMult = a.odd ? 1 : (a.wt > 0 ? left / a.wt : 0);
    for (int m = 0; m <= maxMult; ++m) {
      if (m > 0 && a.wt * m > left) break;
      for (int j = 0; j < m; ++j) factors.push_back(Factor{a.d, a.gen});
      rec(i + 1, left - a.wt * m);
      for (int j = 0; j < m; ++j) factors.pop_back();
    }
  };
  rec(0, w);
  return basis;
}

using Column = std::map<int, Scalar>;

// Rank by exact Gaussian elimination.
inline int rankOf(std::vector<Column> cols) {
  std::map<int, Column> pivots;  // pivot row -> normalized column
  int rank = 0;
  for (auto& col : cols) {
    for (;;) {
      if (col.empty()) break;
      int row = col.begin()->first;
      auto it = pivots.find(row);
      if (it == pivots.end()) {
        Scalar lead = col.begin()->second;
        for (auto& [r, v] : col) v = v / lead;
        pivots[row] = col;
        ++rank;
        break;
      }
      Scalar f = col.begin()->second;
      for (const auto& [r, v] : it->second) {
        auto& acc = col[r];
        acc -= f * v;
        if (acc.isZero()) col.erase(r);
      }
    }
  }
  return rank;
}

struct DiffMatrix {
  std::vector<Column> cols;  // one column per source basis vector
};

inline DiffMatrix matrixOf(const GradedBasis& src, const GradedBasis& dst,
                           const std::function<FieldExpr(const FieldExpr&)>& op) {
  DiffMatrix m;
  m.cols.reserve(src.vecs.size());
  for (const auto& v : src.vecs) m.cols.push_back(dst.coords(op(v)));
  return m;
}

// g after f; true iff the composite is the zero matrix.
inline bool composeIsZero(const DiffMatrix& f, const DiffMatrix& g) {
  for (const auto& col : f.cols) {
    Column acc;
    for (const auto& [row, v] : col)
      for (const auto& [r2, v2] : g.cols[row]) {
        auto& a = acc[r2];
        a += v * v2;
        if (a.isZero()) acc.erase(r2);
      }
    if (!acc.empty()) return false;
  }
  return true;
}

// Dimensions of ker/im cohomology per Z-degree for a degree-(+1) operator on a
// single weight-graded space.  Requires op to be weight-preserving.
inline std::map<int, int> cohomologyDimsByDegree(const GradedBasis& basis,
                                                 const std::function<FieldExpr(const FieldExpr&)>& op) {
  std::map<int, std::vector<int>> byDeg;
  for (size_t i = 0; i < basis.vecs.size(); ++i)
    byDeg[monoDegree(basis.ctx, basis.vecs[i].terms[0])].push_back(static_cast<int>(i));

  std::map<int, int> rank;  // degree d -> rank of op restricted to degree d
  for (const auto& [d, idxs] : byDeg) {
    std::vector<Column> cols;
    for (int i : idxs) {
      FieldExpr img = op(basis.vecs[i]);
      if (!img.isZero()) {
        auto dg = degreeOf(img);
        if (!dg || *dg != d + 1)
          throw Error("basis: operator is not degree-homogeneous of shift +1");
      }
      cols.push_back(basis.coords(img));
    }
    rank[d] = rankOf(std::move(cols));
  }
  std::map<int, int> dims;
  for (const auto& [d, idxs] : byDeg) {
    int rIn = rank.count(d - 1) ? rank[d - 1] : 0;
    dims[d] = static_cast<int>(idxs.size()) - rank[d] - rIn;
  }
  return dims;
}

// Mod-2 version for operators that only respect parity (e.g. D_H).
inline std::pair<int, int> cohomologyDimsMod2(const GradedBasis& basis,
                                              const std::function<FieldExpr(const FieldExpr&)>& op) {
  std::vector<int> even, odd;
  for (size_t i = 0; i < basis.vecs.size(); ++i)
    (monoParity(basis.ctx, basis.vecs[i].terms[0]) ? odd : even).push_back(static_cast<int>(i));
  auto rankOn = [&](const std::vector<int>& idxs) {
    std::vector<Column> cols;
    for (int i : idxs) cols.push_back(basis.coords(op(basis.vecs[i])));
    return rankOf(std::move(cols));
  };
  int re = rankOn(even), ro = rankOn(odd);
  return {static_cast<int>(even.size()) - re - ro, static_cast<int>(odd.size()) - ro - re};
}

// Mod-2 cohomology of a subcomplex given by an independent spanning list of
// parity-homogeneous vectors; op must preserve their span.
inline std::pair<int, int> cohomologyDimsMod2Span(const GradedBasis& amb,
                                                  const std::vector<FieldExpr>& spanVecs,
                                                  const std::function<FieldExpr(const FieldExpr&)>& op) {
  // Reduced columns with bookkeeping: each entry is (reduced column, expression
  // of that column in the original spanning vectors).
  struct Entry {
    Column red;
    Column rep;
  };
  std::map<int, Entry> pivots;  // pivot row -> entry
  auto reduce = [&](Column col, Column rep, bool insert) -> Column {
    for (;;) {
      if (col.empty()) return rep;
      int row = col.begin()->first;
      auto it = pivots.find(row);
      if (it == pivots.end()) {
        if (!insert) throw Error("basis: operator image leaves the subspace span");
        Scalar lead = col.begin()->second;
        for (auto& [r, v] : col) v = v / lead;
        for (auto& [r, v] : rep) v = v / lead;
        pivots[row] = {col, rep};
        return rep;
      }
      Scalar f = col.begin()->second;
      for (const auto& [r, v] : it->second.red) {
        auto& a = col[r];
        a -= f * v;
        if (a.isZero()) col.erase(r);
      }
      for (const auto& [r, v] : it->second.rep) {
        auto& a = rep[r];
        a -= f * v;
        if (a.isZero()) rep.erase(r);
      }
    }
  };
  for (size_t i = 0; i < spanVecs.size(); ++i) {
    size_t before = pivots.size();
    reduce(amb.coords(spanVecs[i]), Column{{static_cast<int>(i), Scalar(1)}}, true);
    if (pivots.size() == before) throw Error("basis: spanning vectors are dependent");
  }
  auto solve = [&](const FieldExpr& x) {
    // rep of x in spanVecs, negated by the reduction bookkeeping
    Column rep = reduce(amb.coords(x), Column{}, false);
    for (auto& [r, v] : rep) v = -v;
    return rep;
  };
  std::vector<int> even, odd;
  for (size_t i = 0; i < spanVecs.size(); ++i) {
    auto p = parityOf(spanVecs[i]);
    if (!p) throw Error("basis: spanning vector is not parity-homogeneous");
    (*p ? odd : even).push_back(static_cast<int>(i));
  }
  auto rankOn = [&](const std::vector<int>& idxs) {
    std::vector<Column> cols;
    for (int i : idxs) cols.push_back(solve(op(spanVecs[i])));
    return rankOf(std::move(cols));
  };
  int re = rankOn(even), ro = rankOn(odd);
  return {static_cast<int>(even.size()) - re - ro, static_cast<int>(odd.size()) - ro - re};
}

// ---- (q,z) character series, truncated in q ----
struct CharacterSeries {
  int N = 0;
  std::map<std::pair<int, int>, long long> c;  // (q power, z power) -> coefficient

  static CharacterSeries one(int N) {
    CharacterSeries s;
    s.N = N;
    s.c[{0, 0}] = 1;
    return s;
  }
  void add(int qp, int zp, long long v) {
    if (qp > N || v == 0) return;
    auto& a = c[{qp, zp}];
    a += v;
    if (a == 0) c.erase({qp, zp});
  }
  long long at(int qp, int zp) const {
    auto it = c.find({qp, zp});
    return it == c.end() ? 0 : it->second;
  }
  CharacterSeries mul(const CharacterSeries& o) const {
    CharacterSeries r;
    r.N = std::min(N, o.N);
    for (const auto& [a, va] : c)
      for (const auto& [b, vb] : o.c)
        r.add(a.first + b.first, a.second + b.second, va * vb);
    return r;
  }
  // multiply by (1 + q^n z^zp)
  CharacterSeries mulFactor(int n, int zp) const {
    CharacterSeries r = *this;
    for (const auto& [a, v] : c) r.add(a.first + n, a.second + zp, v);
    return r;
  }
  bool operator==(const CharacterSeries& o) const { return N == o.N && c == o.c; }

  // prod_{n>=1} (1+q^n z)(1+q^n z^{-1})
  static CharacterSeries fermionPair(int N) {
    CharacterSeries s = one(N);
    for (int n = 1; n <= N; ++n) s = s.mulFactor(n, 1).mulFactor(n, -1);
    return s;
  }
  // prod_{n>=1} (1+q^n z)
  static CharacterSeries freeOdd(int N) {
    CharacterSeries s = one(N);
    for (int n = 1; n <= N; ++n) s = s.mulFactor(n, 1);
    return s;
  }

  std::string str() const {
    int zmin = 0, zmax = 0;
    for (const auto& [k, v] : c) zmin = std::min(zmin, k.second), zmax = std::max(zmax, k.second);
    std::string out = "z\\q";
    for (int q = 0; q <= N; ++q) out += "\t" + std::to_string(q);
    out += "\n";
    for (int z = zmin; z <= zmax; ++z) {
      out += std::to_string(z);
      for (int q = 0; q <= N; ++q) out += "\t" + std::to_string(at(q, z));
      out += "\n";
    }
    return out;
  }
};

}  // namespace vaw
