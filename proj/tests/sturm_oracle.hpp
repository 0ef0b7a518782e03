#pragma once

// Exact count of distinct real roots in [lo, hi) by Sturm sequences over the
// rationals. Test-only reference for the floating-point root counter.

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <vector>

namespace sturm {

using Rational = boost::multiprecision::cpp_rational;
using Poly = std::vector<Rational>;  // ascending coefficients

inline void trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

inline Rational eval(const Poly& p, const Rational& x) {
  Rational v = 0;
  for (std::size_t k = p.size(); k-- > 0;) v = v * x + p[k];
  return v;
}

inline Poly derivative(const Poly& p) {
  Poly d;
  for (std::size_t k = 1; k < p.size(); ++k) d.push_back(p[k] * static_cast<int>(k));
  trim(d);
  return d;
}

inline Poly remainder(Poly a, const Poly& b) {
  trim(a);
  while (a.size() >= b.size() && !a.empty()) {
    const Rational f = a.back() / b.back();
    const std::size_t shift = a.size() - b.size();
    for (std::size_t k = 0; k < b.size(); ++k) a[k + shift] -= f * b[k];
    a.pop_back();
    trim(a);
  }
  return a;
}

// Divides p by (x - r); r must be a root.
inline Poly deflate(const Poly& p, const Rational& r) {
  Poly q(p.size() - 1);
  Rational carry = 0;
  for (std::size_t k = p.size(); k-- > 1;) {
    carry = carry * r + p[k];
    q[k - 1] = carry;
  }
  return q;
}

inline int sgn(const Rational& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

struct Point {
  bool infinite;
  int inf_sign;  // -1 or +1 when infinite
  Rational x;
};

inline int sign_at(const Poly& p, const Point& at) {
  if (!at.infinite) return sgn(eval(p, at.x));
  const int lead = sgn(p.back());
  const bool odd = (p.size() - 1) % 2 == 1;
  return at.inf_sign > 0 || !odd ? lead : -lead;
}

inline int variations(const std::vector<Poly>& chain, const Point& at) {
  int v = 0;
  int last = 0;
  for (const auto& p : chain) {
    const int s = sign_at(p, at);
    if (s == 0) continue;
    if (last != 0 && s != last) ++v;
    last = s;
  }
  return v;
}

// Distinct real roots of p in [lo, hi). p must not be identically zero.
inline int count(Poly p, const Point& lo, const Point& hi) {
  trim(p);
  int extra = 0;
  if (!lo.infinite && eval(p, lo.x) == 0) {
    extra = 1;
    while (p.size() > 1 && eval(p, lo.x) == 0) p = deflate(p, lo.x);
  }
  if (!hi.infinite) {
    while (p.size() > 1 && eval(p, hi.x) == 0) p = deflate(p, hi.x);
  }
  if (p.size() <= 1) return extra;
  std::vector<Poly> chain{p, derivative(p)};
  while (true) {
    Poly r = remainder(chain[chain.size() - 2], chain.back());
    if (r.empty()) break;
    for (auto& c : r) c = -c;
    chain.push_back(r);
  }
  return variations(chain, lo) - variations(chain, hi) + extra;
}

}  // namespace sturm
