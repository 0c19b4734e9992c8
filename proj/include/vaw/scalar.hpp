#pragma once
// Exact Gaussian-rational scalars: a + b*i with a,b arbitrary-precision rationals.
// Every computation in this library is exact; there is no floating point anywhere.

#include <boost/multiprecision/cpp_int.hpp>
#include <compare>
#include <stdexcept>
#include <string>

namespace vaw {

using Rat = boost::multiprecision::cpp_rational;
using Int = boost::multiprecision::cpp_int;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct Scalar {
  Rat re{0};
  Rat im{0};

  Scalar() = default;
  Scalar(long v) : re(v) {}  // NOLINT: implicit on purpose, mirrors numeric literals
  Scalar(Rat r) : re(std::move(r)) {}
  Scalar(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}

  static Scalar i() { return Scalar{Rat(0), Rat(1)}; }
  static Scalar ratio(long p, long q) {
    if (q == 0) throw Error("scalar: division by zero");
    return Scalar{Rat(p) / Rat(q)};
  }

  bool isZero() const { return re == 0 && im == 0; }
  bool isOne() const { return re == 1 && im == 0; }

  Scalar operator-() const { return {-re, -im}; }
  Scalar operator+(const Scalar& o) const { return {re + o.re, im + o.im}; }
  Scalar operator-(const Scalar& o) const { return {re - o.re, im - o.im}; }
  Scalar operator*(const Scalar& o) const {
    return {re * o.re - im * o.im, re * o.im + im * o.re};
  }
  Scalar operator/(const Scalar& o) const {
    Rat n = o.re * o.re + o.im * o.im;
    if (n == 0) throw Error("scalar: division by zero");
    return {(re * o.re + im * o.im) / n, (im * o.re - re * o.im) / n};
  }
  Scalar& operator+=(const Scalar& o) { re += o.re; im += o.im; return *this; }
  Scalar& operator-=(const Scalar& o) { re -= o.re; im -= o.im; return *this; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

  bool operator==(const Scalar& o) const { return re == o.re && im == o.im; }
  // Ordering is only used to make container iteration and printing deterministic.
  std::strong_ordering operator<=>(const Scalar& o) const {
    if (re < o.re) return std::strong_ordering::less;
    if (o.re < re) return std::strong_ordering::greater;
    if (im < o.im) return std::strong_ordering::less;
    if (o.im < im) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
};

inline std::string toString(const Rat& r) {
  std::string s = r.str();
  return s;
}

// Canonical print in the expression mini-language: "3", "-2/3", "i", "-i",
// "3*i", "(1+2*i)".  A parenthesized form is emitted whenever both parts are
// nonzero so the result can be re-parsed inside products.
inline std::string toString(const Scalar& s) {
  if (s.isZero()) return "0";
  auto imPart = [&](const Rat& v) -> std::string {
    if (v == 1) return "i";
    if (v == -1) return "-i";
    return toString(v) + "*i";
  };
  if (s.im == 0) return toString(s.re);
  if (s.re == 0) return imPart(s.im);
  std::string out = "(" + toString(s.re);
  out += (s.im > 0) ? "+" : "-";
  Rat a = s.im > 0 ? s.im : Rat(-s.im);
  out += (a == 1) ? "i" : toString(a) + "*i";
  return out + ")";
}

}  // namespace vaw
