#include "levelcross/quadrature.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "levelcross/errors.hpp"

namespace levelcross {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 15-point Kronrod extension of the 7-point Gauss rule. Nodes are stored
// as nonnegative abscissae; index 0 is the centre.
struct KronrodRule {
  std::array<double, 8> x{};
  std::array<double, 8> wk{};
  std::array<double, 8> wg{};  // zero on Kronrod-only nodes

  KronrodRule() {
    const auto& kx = boost::math::quadrature::gauss_kronrod<double, 15>::abscissa();
    const auto& kw = boost::math::quadrature::gauss_kronrod<double, 15>::weights();
    const auto& gx = boost::math::quadrature::gauss<double, 7>::abscissa();
    const auto& gw = boost::math::quadrature::gauss<double, 7>::weights();
    for (std::size_t i = 0; i < 8; ++i) {
      x[i] = kx[i];
      wk[i] = kw[i];
    }
    for (std::size_t j = 0; j < gx.size(); ++j) {
      for (std::size_t i = 0; i < 8; ++i) {
        if (std::abs(x[i] - gx[j]) < 1e-15) wg[i] = gw[j];
      }
    }
  }
};

const KronrodRule& kronrod() {
  static const KronrodRule rule;
  return rule;
}

struct Segment {
  double a;  // integration variable: x for inner, z for reciprocal
  double b;
  bool reciprocal;
};

struct Panel {
  double a;
  double b;
  std::size_t segment;
  double f1;
  double f2;
  double err;
  bool alive;
};

class KacRiceIntegrand {
 public:
  KacRiceIntegrand(const PolynomialEnsemble& e, CovarianceSequence gamma)
      : e_(e), gamma_(std::move(gamma)) {}

  IntegrandValue operator()(double t, bool reciprocal) {
    IntegrandValue v;
    if (reciprocal) {
      v = integrand(e_, moments_outer_scaled_direct(e_, gamma_, t), t);
    } else {
      v = integrand(e_, moments_direct(e_, gamma_, t));
    }
    if (v.regularized) ++regularized_;
    return v;
  }

  std::size_t regularized() const noexcept { return regularized_; }

 private:
  const PolynomialEnsemble& e_;
  CovarianceSequence gamma_;
  std::size_t regularized_ = 0;
};

void evaluate_panel(Panel& p, bool reciprocal, KacRiceIntegrand& f) {
  const KronrodRule& r = kronrod();
  const double c = 0.5 * (p.a + p.b);
  const double h = 0.5 * (p.b - p.a);
  double k1 = 0.0, k2 = 0.0, g1 = 0.0, g2 = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    const int reps = i == 0 ? 1 : 2;
    for (int s = 0; s < reps; ++s) {
      const double t = s == 0 ? c + h * r.x[i] : c - h * r.x[i];
      const IntegrandValue v = f(t, reciprocal);
      k1 += r.wk[i] * v.F1;
      k2 += r.wk[i] * v.F2;
      g1 += r.wg[i] * v.F1;
      g2 += r.wg[i] * v.F2;
    }
  }
  p.f1 = h * k1;
  p.f2 = h * k2;
  p.err = std::abs(h * (k1 - g1)) + std::abs(h * (k2 - g2));
}

// Splits [a, b] at the cut points strictly inside it.
void push_segments(std::vector<Segment>& out, double a, double b, std::vector<double> cuts,
                   bool reciprocal) {
  std::sort(cuts.begin(), cuts.end());
  double left = a;
  for (double c : cuts) {
    if (c > left && c < b) {
      out.push_back({left, c, reciprocal});
      left = c;
    }
  }
  out.push_back({left, b, reciprocal});
}

std::string fmt(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_endpoint(std::string_view tok) {
  if (tok == "inf" || tok == "+inf") return kInf;
  if (tok == "-inf") return -kInf;
  std::string s(tok);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kConfig, "interval: bad endpoint '" + s + "'");
  }
  return v;
}

}  // namespace

void IntervalSpec::validate() const {
  if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) {
    throw Error(ErrorCode::kDomain, "interval needs lo < hi, got " + to_string());
  }
}

IntervalSpec IntervalSpec::parse(std::string_view text) {
  const auto sep = text.find("..");
  if (sep == std::string_view::npos) {
    throw Error(ErrorCode::kConfig, "interval: expected 'a..b', got '" + std::string(text) + "'");
  }
  IntervalSpec s{parse_endpoint(text.substr(0, sep)), parse_endpoint(text.substr(sep + 2))};
  if (!(s.lo < s.hi)) {
    throw Error(ErrorCode::kConfig, "interval: need lo < hi in '" + std::string(text) + "'");
  }
  return s;
}

std::string IntervalSpec::to_string() const { return fmt(lo) + ".." + fmt(hi); }

Breakpoints breakpoints(std::size_t n) {
  if (n < 16) {
    throw Error(ErrorCode::kOrdering,
                "breakpoints need n >= 16 (log log n > 0 and ordering), got " + std::to_string(n));
  }
  const double nd = static_cast<double>(n);
  const double ln = std::log(nd);
  Breakpoints bp{1.0 - 1.0 / ln, 1.0 - std::log(ln) / nd};
  if (!(0.0 < bp.inner && bp.inner < bp.near_edge && bp.near_edge < 1.0)) {
    throw Error(ErrorCode::kOrdering, "breakpoints out of order for n=" + std::to_string(n));
  }
  return bp;
}

const char* to_string(Method m) noexcept {
  return m == Method::kKacRice ? "kac_rice" : "monte_carlo";
}

double CrossingEstimate::f1_part() const noexcept {
  double s = 0.0;
  for (const auto& p : pieces) s += p.f1;
  return s;
}

double CrossingEstimate::f2_part() const noexcept {
  double s = 0.0;
  for (const auto& p : pieces) s += p.f2;
  return s;
}

CrossingEstimate expected_crossings(const PolynomialEnsemble& e, const IntervalSpec& spec,
                                    const QuadratureOptions& opts) {
  e.validate();
  spec.validate();
  if (!(opts.tol > 0.0)) throw Error(ErrorCode::kDomain, "tol must be positive");
  if (!e.model.admits_density()) {
    throw Error(ErrorCode::kUnsupportedModel,
                "Kac-Rice quadrature needs a spectral density; " + e.model.label() +
                    " is Monte Carlo only");
  }

  // Mandatory cuts on (0, 1), mirrored as needed.
  std::vector<double> unit_cuts{1.0 - kEdgeGap};
  if (e.n >= 16) {
    const Breakpoints bp = breakpoints(e.n);
    unit_cuts.push_back(bp.inner);
    unit_cuts.push_back(bp.near_edge);
  }

  std::vector<Segment> segments;
  // x < -1 through z = 1/x in (-1, 0).
  if (spec.lo < -1.0) {
    const double zl = 1.0 / std::min(spec.hi, -1.0);
    const double zr = spec.lo == -kInf ? 0.0 : 1.0 / spec.lo;
    std::vector<double> cuts;
    for (double c : unit_cuts) cuts.push_back(-c);
    push_segments(segments, zl, zr, cuts, true);
  }
  // (-1, 1) directly.
  {
    const double a = std::max(spec.lo, -1.0);
    const double b = std::min(spec.hi, 1.0);
    if (a < b) {
      std::vector<double> cuts{0.0};
      for (double c : unit_cuts) {
        cuts.push_back(c);
        cuts.push_back(-c);
      }
      push_segments(segments, a, b, cuts, false);
    }
  }
  // x > 1 through z = 1/x in (0, 1).
  if (spec.hi > 1.0) {
    const double zl = spec.hi == kInf ? 0.0 : 1.0 / spec.hi;
    const double zr = 1.0 / std::max(spec.lo, 1.0);
    push_segments(segments, zl, zr, unit_cuts, true);
  }

  KacRiceIntegrand f(e, e.model.covariance(e.n));
  std::vector<Panel> panels;
  using Entry = std::pair<double, std::size_t>;  // (err, panel id); ties go to lower id
  auto cmp = [](const Entry& l, const Entry& r) {
    return l.first < r.first || (l.first == r.first && l.second > r.second);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> queue(cmp);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    Panel p{segments[s].a, segments[s].b, s, 0.0, 0.0, 0.0, true};
    evaluate_panel(p, segments[s].reciprocal, f);
    panels.push_back(p);
    queue.push({p.err, panels.size() - 1});
  }

  auto total_error = [&panels] {
    double t = 0.0;
    for (const auto& p : panels) {
      if (p.alive) t += p.err;
    }
    return t;
  };
  double total = total_error();
  std::size_t live = panels.size();
  std::size_t splits = 0;
  bool flagged = false;
  while (total > opts.tol) {
    if (queue.empty() || live >= opts.max_panels) {
      flagged = true;
      break;
    }
    const auto [err, id] = queue.top();
    queue.pop();
    const Panel worst = panels[id];
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) continue;  // cannot split further
    panels[id].alive = false;
    const bool rec = segments[worst.segment].reciprocal;
    Panel left{worst.a, mid, worst.segment, 0.0, 0.0, 0.0, true};
    Panel right{mid, worst.b, worst.segment, 0.0, 0.0, 0.0, true};
    evaluate_panel(left, rec, f);
    evaluate_panel(right, rec, f);
    panels.push_back(left);
    queue.push({left.err, panels.size() - 1});
    panels.push_back(right);
    queue.push({right.err, panels.size() - 1});
    ++live;
    total += left.err + right.err - worst.err;
    if (++splits % 64 == 0) total = total_error();
  }
  total = total_error();
  if (total > opts.tol) flagged = true;

  CrossingEstimate out;
  out.method = Method::kKacRice;
  out.flagged = flagged;
  out.regularized_points = f.regularized();
  out.abs_err = total;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    std::vector<const Panel*> mine;
    for (const auto& p : panels) {
      if (p.alive && p.segment == s) mine.push_back(&p);
    }
    std::sort(mine.begin(), mine.end(), [](const Panel* l, const Panel* r) { return l->a < r->a; });
    Piece piece;
    piece.reciprocal = segments[s].reciprocal;
    if (piece.reciprocal) {
      const double za = segments[s].a;
      const double zb = segments[s].b;
      piece.lo = zb == 0.0 ? -kInf : 1.0 / zb;
      piece.hi = za == 0.0 ? kInf : 1.0 / za;
    } else {
      piece.lo = segments[s].a;
      piece.hi = segments[s].b;
    }
    for (const Panel* p : mine) {
      piece.f1 += p->f1;
      piece.f2 += p->f2;
      piece.abs_err += p->err;
    }
    piece.panels = mine.size();
    out.pieces.push_back(piece);
  }
  std::stable_sort(out.pieces.begin(), out.pieces.end(),
                   [](const Piece& l, const Piece& r) { return l.lo < r.lo; });
  for (const auto& p : out.pieces) out.value += p.value();
  return out;
}

double KRule::level(std::size_t n) const {
  if (kind == Kind::kFixed) return value;
  const double nd = static_cast<double>(n);
  if (n < 16) throw Error(ErrorCode::kDomain, "growing K rule needs n >= 16");
  return value * std::sqrt(nd / std::log(std::log(nd))) / std::log(nd);
}

KRule KRule::parse(std::string_view text) {
  KRule r;
  std::string_view num = text;
  if (text.rfind("fixed:", 0) == 0) {
    num = text.substr(6);
  } else if (text.rfind("growing:", 0) == 0) {
    r.kind = Kind::kGrowing;
    num = text.substr(8);
  }
  std::string s(num);
  std::size_t used = 0;
  try {
    r.value = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(r.value)) {
    throw Error(ErrorCode::kConfig, "k: cannot parse '" + std::string(text) + "'");
  }
  return r;
}

std::string KRule::to_string() const {
  return (kind == Kind::kFixed ? "fixed:" : "growing:") + fmt(value);
}

std::vector<TableRow> crossing_table(const CovarianceModel& model,
                                     std::span<const std::size_t> ns, const KRule& rule,
                                     std::span<const IntervalSpec> intervals,
                                     const QuadratureOptions& opts) {
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (!(ns[i] > ns[i - 1])) throw Error(ErrorCode::kDomain, "n-list must be ascending");
  }
  const Smoothness smooth = model.smoothness();
  std::vector<TableRow> rows;
  for (std::size_t n : ns) {
    PolynomialEnsemble e{n, model, rule.level(n)};
    for (const auto& iv : intervals) {
      TableRow row;
      row.n = n;
      row.level = e.level;
      row.interval = iv;
      row.estimate = expected_crossings(e, iv, opts);
      const auto pred = interval_prediction(n, e.level, smooth, iv.lo, iv.hi);
      row.prediction = pred ? *pred : std::numeric_limits<double>::quiet_NaN();
      row.ratio = row.estimate.value / row.prediction;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<LogSlopeSample> log_slope_samples(std::span<const TableRow> rows,
                                              const IntervalSpec& interval) {
  std::vector<LogSlopeSample> out;
  for (const auto& r : rows) {
    if (r.interval == interval) {
      out.push_back({static_cast<double>(r.n), r.estimate.value});
    }
  }
  return out;
}

}  // namespace levelcross
