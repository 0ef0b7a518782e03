#include "levelcross/roots.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "levelcross/errors.hpp"

namespace levelcross {

namespace {

using Ld = long double;

// Coefficients after trimming trailing zeros; zero_root set when x = 0 was
// factored out of the low end.
struct Reduced {
  std::vector<double> q;
  bool zero_root = false;
};

Reduced reduce(std::span<const double> coeffs) {
  std::size_t hi = coeffs.size();
  while (hi > 0 && coeffs[hi - 1] == 0.0) --hi;
  if (hi == 0) throw Error(ErrorCode::kDomain, "zero polynomial has no isolated roots");
  std::size_t lo = 0;
  while (coeffs[lo] == 0.0) ++lo;
  for (std::size_t k = 0; k < hi; ++k) {
    if (!std::isfinite(coeffs[k])) throw Error(ErrorCode::kDomain, "non-finite coefficient");
  }
  Reduced r;
  r.q.assign(coeffs.begin() + static_cast<std::ptrdiff_t>(lo),
             coeffs.begin() + static_cast<std::ptrdiff_t>(hi));
  r.zero_root = lo > 0;
  return r;
}

struct Horner {
  Ld p = 0;
  Ld d1 = 0;
  Ld d2 = 0;
};

Horner horner(const std::vector<double>& q, Ld x) {
  Horner h;
  for (std::size_t k = q.size(); k-- > 0;) {
    h.d2 = h.d2 * x + h.d1;
    h.d1 = h.d1 * x + h.p;
    h.p = h.p * x + q[k];
  }
  h.d2 *= 2;
  return h;
}

int sign_of(Ld v) { return (v > 0) - (v < 0); }

int psign(const std::vector<double>& q, double x) { return sign_of(horner(q, x).p); }

// Bisection on a sign change of f over [a, b]; sa is the sign at a.
template <typename F>
double bisect(F&& f, double a, double b, int sa) {
  for (int it = 0; it < 2200; ++it) {
    const double m = a + 0.5 * (b - a);
    if (!(m > a && m < b)) break;
    const int sm = f(m);
    if (sm == 0) return m;
    if (sm == sa) {
      a = m;
    } else {
      b = m;
    }
  }
  return a + 0.5 * (b - a);
}

std::vector<double> finish(std::vector<double> roots, bool zero_root) {
  if (zero_root) roots.push_back(0.0);
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots) {
    if (out.empty() || std::abs(r - out.back()) > 1e-13 * (1.0 + std::abs(r))) {
      out.push_back(r);
    }
  }
  return out;
}

struct Eigen2 {
  double re;
  double im;
};

std::vector<Eigen2> companion_eigenvalues(const std::vector<double>& q) {
  const std::size_t n = q.size() - 1;
  const double qn = q[n];
  double s = std::pow(std::abs(q[0]) / std::abs(qn), 1.0 / static_cast<double>(n));
  if (!std::isfinite(s) || s <= 0.0) s = 1.0;
  // Monic polynomial in u = x / s.
  std::vector<double> c(n);
  Ld sk = 1;
  const Ld sn = std::pow(static_cast<Ld>(s), static_cast<Ld>(n));
  for (std::size_t k = 0; k < n; ++k) {
    c[k] = static_cast<double>(q[k] * sk / (qn * sn));
    sk *= s;
  }
  const auto ni = static_cast<lapack_int>(n);
  std::vector<double> a(n * n, 0.0);  // column major
  for (std::size_t j = 0; j < n; ++j) a[j * n] = -c[n - 1 - j];
  for (std::size_t i = 1; i < n; ++i) a[(i - 1) * n + i] = 1.0;
  std::vector<double> scale(n);
  lapack_int ilo = 1, ihi = ni;
  if (LAPACKE_dgebal(LAPACK_COL_MAJOR, 'S', ni, a.data(), ni, &ilo, &ihi, scale.data()) != 0) {
    throw Error(ErrorCode::kRootFinding, "balancing failed");
  }
  std::vector<double> wr(n), wi(n);
  double dummy = 0.0;
  const lapack_int info = LAPACKE_dhseqr(LAPACK_COL_MAJOR, 'E', 'N', ni, ilo, ihi, a.data(), ni,
                                         wr.data(), wi.data(), &dummy, 1);
  if (info != 0) {
    throw Error(ErrorCode::kRootFinding,
                "companion eigenvalues did not converge (info " + std::to_string(info) + ")");
  }
  std::vector<Eigen2> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {wr[i] * s, wi[i] * s};
  return out;
}

}  // namespace

std::vector<double> real_roots_companion(std::span<const double> coeffs) {
  Reduced red = reduce(coeffs);
  const std::vector<double>& q = red.q;
  if (q.size() == 1) return finish({}, red.zero_root);
  if (q.size() == 2) return finish({-q[0] / q[1]}, red.zero_root);

  const auto eig = companion_eigenvalues(q);
  constexpr double kWindow = 1e-5;
  std::vector<double> cand;
  for (const auto& e : eig) {
    if (std::abs(e.im) <= kWindow * (1.0 + std::abs(e.re))) cand.push_back(e.re);
  }
  std::sort(cand.begin(), cand.end());
  struct Cluster {
    double lo, hi, mean;
    std::size_t size;
  };
  std::vector<Cluster> clusters;
  for (double x : cand) {
    if (!clusters.empty() && x - clusters.back().hi <= kWindow * (1.0 + std::abs(x))) {
      Cluster& c = clusters.back();
      c.hi = x;
      c.mean += (x - c.mean) / static_cast<double>(++c.size);
    } else {
      clusters.push_back({x, x, x, 1});
    }
  }

  auto f = [&q](double x) { return psign(q, x); };
  std::vector<double> roots;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const Cluster& c = clusters[i];
    const double left = i > 0 ? 0.5 * (clusters[i - 1].hi + c.lo)
                              : c.lo - std::max(1.0, 2.0 * std::abs(c.lo));
    const double right = i + 1 < clusters.size() ? 0.5 * (c.hi + clusters[i + 1].lo)
                                                 : c.hi + std::max(1.0, 2.0 * std::abs(c.hi));
    int sl = f(left);
    int sr = f(right);
    if (sl == 0) {
      roots.push_back(left);
      continue;
    }
    if (sr == 0) {
      roots.push_back(right);
      continue;
    }
    if (c.size % 2 == 1) {
      roots.push_back(sl != sr ? bisect(f, left, right, sl) : c.mean);
      continue;
    }
    if (sl != sr) {
      roots.push_back(bisect(f, left, right, sl));
      continue;
    }
    // Even cluster with equal end signs: two roots, a double root, or none.
    Ld x = c.mean;
    for (int it = 0; it < 20; ++it) {
      const Horner h = horner(q, x);
      if (h.d2 == 0) break;
      const Ld next = x - h.d1 / h.d2;
      if (!(next > left && next < right) || next == x) break;
      x = next;
    }
    const double cx = static_cast<double>(x);
    const Horner h = horner(q, x);
    const int sc = sign_of(h.p);
    if (sc == 0) {
      roots.push_back(cx);
    } else if (sc != sl) {
      roots.push_back(bisect(f, left, cx, sl));
      roots.push_back(bisect(f, cx, right, sc));
    } else {
      Ld mag = 0;
      Ld xk = 1;
      for (double qk : q) {
        mag += std::abs(static_cast<Ld>(qk)) * xk;
        xk *= std::abs(x);
      }
      if (std::abs(h.p) <= 1e3 * std::numeric_limits<double>::epsilon() * mag) {
        roots.push_back(cx);
      }
    }
  }
  return finish(std::move(roots), red.zero_root);
}

namespace {

// Roots of q in [-1, 1] by a graded grid with derivative-guarded checks.
void sweep_unit(const std::vector<double>& q, std::vector<double>& out, bool include_ends) {
  const std::size_t n = q.size() - 1;
  const double eta = 0.03;
  const double floor_step = 1.0 / static_cast<double>(std::max<std::size_t>(n, 1));
  auto f = [&q](double x) { return psign(q, x); };
  auto df = [&q](double x) { return sign_of(horner(q, x).d1); };

  std::vector<double> grid;
  for (double x = -1.0; x < 1.0;) {
    grid.push_back(x);
    x += eta * std::max(1.0 - std::abs(x), floor_step);
  }
  grid.push_back(1.0);

  Horner ha = horner(q, grid[0]);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = grid[i];
    const double b = grid[i + 1];
    const Horner hb = horner(q, b);
    const int sa = sign_of(ha.p);
    const int sb = sign_of(hb.p);
    if (sa == 0) {
      if (include_ends || i > 0) out.push_back(a);
    } else if (sb != 0 && sa != sb) {
      out.push_back(bisect(f, a, b, sa));
    } else if (sb != 0) {
      // Same sign: look for an interior extremum heading towards zero.
      const int da = sign_of(ha.d1);
      const int db = sign_of(hb.d1);
      if (da != 0 && db != 0 && da != db && da == -sa) {
        const double c = bisect(df, a, b, da);
        const int sc = f(c);
        if (sc == 0) {
          out.push_back(c);
        } else if (sc != sa) {
          out.push_back(bisect(f, a, c, sa));
          out.push_back(bisect(f, c, b, sc));
        }
      }
    }
    ha = hb;
  }
  if (include_ends && sign_of(ha.p) == 0) out.push_back(1.0);
}

}  // namespace

std::vector<double> real_roots_bracketing(std::span<const double> coeffs) {
  Reduced red = reduce(coeffs);
  const std::vector<double>& q = red.q;
  if (q.size() == 1) return finish({}, red.zero_root);
  std::vector<double> roots;
  sweep_unit(q, roots, true);
  // |x| > 1 through z = 1/x and the reversed polynomial.
  std::vector<double> rev(q.rbegin(), q.rend());
  std::vector<double> zs;
  sweep_unit(rev, zs, false);
  for (double z : zs) {
    if (z != 0.0 && std::abs(z) < 1.0) roots.push_back(1.0 / z);
  }
  // A root straddling |x| = 1 can be found from both sides.
  std::sort(roots.begin(), roots.end());
  std::vector<double> merged;
  for (double r : roots) {
    if (!merged.empty() && std::abs(r - merged.back()) <= 1e-10 * std::abs(r) &&
        std::abs(std::abs(r) - 1.0) < 1e-6) {
      continue;
    }
    merged.push_back(r);
  }
  return finish(std::move(merged), red.zero_root);
}

std::vector<double> real_roots(std::span<const double> coeffs) {
  std::size_t deg = coeffs.size();
  while (deg > 0 && coeffs[deg - 1] == 0.0) --deg;
  if (deg > kCompanionMaxDegree + 1) return real_roots_bracketing(coeffs);
  return real_roots_companion(coeffs);
}

void snap_roots(std::span<const double> coeffs, std::vector<double>& roots,
                std::span<const double> points) {
  const std::vector<double> q(coeffs.begin(), coeffs.end());
  for (double e : points) {
    if (!std::isfinite(e) || horner(q, e).p != 0) continue;
    for (double& r : roots) {
      if (std::abs(r - e) <= 1e-8 * (1.0 + std::abs(e))) r = e;
    }
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
}

}  // namespace levelcross
