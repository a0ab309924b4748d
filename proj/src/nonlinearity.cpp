#include "nlsolve/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nlsolve/errors.hpp"

namespace nlsolve {

namespace {

double segment_k(double slope) { return std::max(slope, 1.0 / slope); }

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(std::string_view text, std::string_view what) {
  std::string s(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError("bad " + std::string(what) + " '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(value)) {
    throw ParseError("bad " + std::string(what) + " '" + s + "'");
  }
  return value;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 50);
}

}  // namespace

Nonlinearity::Nonlinearity(NonlinearityKind kind, std::vector<SlopeSegment> segments)
    : kind_(kind), segments_(std::move(segments)) {
  if (segments_.empty()) return;
  h_at_start_.resize(segments_.size());
  phi_at_start_.resize(segments_.size());
  h_at_start_[0] = 0.0;
  phi_at_start_[0] = 0.0;
  k_bound_ = segment_k(segments_[0].slope);
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    const double a = segments_[i - 1].start;
    const double b = segments_[i].start;
    const double s = segments_[i - 1].slope;
    h_at_start_[i] = h_at_start_[i - 1] + s * (b - a);
    phi_at_start_[i] = phi_at_start_[i - 1] + 0.5 * s * (b - a) * (b + a);
    k_bound_ = std::max(k_bound_, segment_k(segments_[i].slope));
  }
}

Nonlinearity Nonlinearity::identity() { return Nonlinearity(NonlinearityKind::Identity, {}); }

Nonlinearity Nonlinearity::two_slope(double k_param) {
  if (!(k_param >= 1.0) || !std::isfinite(k_param)) {
    throw std::invalid_argument("two_slope parameter must be a finite value >= 1");
  }
  Nonlinearity nl(NonlinearityKind::TwoSlope, {{0.0, 1.0 / k_param}, {1.0, 1.0}});
  nl.k_param_ = k_param;
  return nl;
}

Nonlinearity Nonlinearity::arctan_shift() {
  Nonlinearity nl(NonlinearityKind::ArctanShift, {});
  nl.k_bound_ = 2.0;  // h' = 1 + 1/(1+v^2) ranges over (1, 2]
  return nl;
}

Nonlinearity Nonlinearity::piecewise(std::vector<SlopeSegment> segments) {
  if (segments.empty() || segments.front().start != 0.0) {
    throw std::invalid_argument("piecewise segments must start at 0");
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!(segments[i].slope > 0.0) || !std::isfinite(segments[i].slope)) {
      throw std::invalid_argument("piecewise slopes must be positive and finite");
    }
    if (!std::isfinite(segments[i].start) ||
        (i > 0 && !(segments[i].start > segments[i - 1].start))) {
      throw std::invalid_argument("piecewise breakpoints must be finite and strictly increasing");
    }
  }
  return Nonlinearity(NonlinearityKind::PiecewiseLinear, std::move(segments));
}

Nonlinearity Nonlinearity::parse(std::string_view spec) {
  const auto tokens = split_ws(spec);
  if (tokens.empty()) throw ParseError("empty nonlinearity spec");
  const std::string_view id = tokens[0];
  auto expect_args = [&](std::size_t count) {
    if (tokens.size() != count + 1) {
      throw ParseError("nonlinearity '" + std::string(id) + "' expects " + std::to_string(count) +
                       " parameter(s)");
    }
  };
  if (id == "identity") {
    expect_args(0);
    return identity();
  }
  if (id == "arctan") {
    expect_args(0);
    return arctan_shift();
  }
  if (id == "two_slope") {
    expect_args(1);
    const double k = parse_real(tokens[1], "two_slope parameter");
    if (k < 1.0) throw ParseError("two_slope parameter must be >= 1");
    return two_slope(k);
  }
  if (id == "piecewise") {
    expect_args(1);
    std::vector<SlopeSegment> segments;
    std::string_view rest = tokens[1];
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      const std::size_t colon = item.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("piecewise segment '" + std::string(item) + "' is not v:slope");
      }
      segments.push_back({parse_real(item.substr(0, colon), "piecewise breakpoint"),
                          parse_real(item.substr(colon + 1), "piecewise slope")});
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    try {
      return piecewise(std::move(segments));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what());
    }
  }
  throw ParseError("unknown nonlinearity '" + std::string(id) + "'");
}

std::string Nonlinearity::to_spec() const {
  switch (kind_) {
    case NonlinearityKind::Identity:
      return "identity";
    case NonlinearityKind::ArctanShift:
      return "arctan";
    case NonlinearityKind::TwoSlope:
      return "two_slope " + format_real(k_param_);
    case NonlinearityKind::PiecewiseLinear: {
      std::string out = "piecewise ";
      for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (i) out += ',';
        out += format_real(segments_[i].start) + ':' + format_real(segments_[i].slope);
      }
      return out;
    }
  }
  return {};
}

std::size_t Nonlinearity::segment_at(double a) const {
  // Largest i with start_i < a; a == 0 maps to the first segment.
  const auto it = std::lower_bound(segments_.begin(), segments_.end(), a,
                                   [](const SlopeSegment& s, double x) { return s.start < x; });
  const auto idx = static_cast<std::size_t>(it - segments_.begin());
  return idx == 0 ? 0 : idx - 1;
}

double Nonlinearity::h(double v) const {
  switch (kind_) {
    case NonlinearityKind::Identity:
      return v;
    case NonlinearityKind::ArctanShift:
      return v + std::atan(v);
    case NonlinearityKind::TwoSlope:
    case NonlinearityKind::PiecewiseLinear: {
      const double a = std::abs(v);
      const std::size_t i = segment_at(a);
      const double mag = h_at_start_[i] + segments_[i].slope * (a - segments_[i].start);
      return std::copysign(mag, v);
    }
  }
  return v;
}

double Nonlinearity::arctan_inverse(double y) const {
  if (y == 0.0) return 0.0;
  const double target = std::abs(y);
  // 1 < h' <= 2 gives target/2 <= v <= target; also v >= target - pi/2.
  double lo = std::max(0.5 * target, target - std::numbers::pi / 2);
  double hi = target;
  double v = std::clamp(target - std::atan(target), lo, hi);
  for (int iter = 0; iter < 100; ++iter) {
    const double f = v + std::atan(v) - target;
    if (f == 0.0) break;
    if (f > 0.0) {
      hi = v;
    } else {
      lo = v;
    }
    const double fp = 1.0 + 1.0 / (1.0 + v * v);
    double next = v - f / fp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - v) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(v)) {
      v = next;
      break;
    }
    v = next;
  }
  return std::copysign(v, y);
}

double Nonlinearity::h_inv(double y) const {
  switch (kind_) {
    case NonlinearityKind::Identity:
      return y;
    case NonlinearityKind::ArctanShift:
      return arctan_inverse(y);
    case NonlinearityKind::TwoSlope:
    case NonlinearityKind::PiecewiseLinear: {
      const double a = std::abs(y);
      const auto it = std::lower_bound(h_at_start_.begin(), h_at_start_.end(), a);
      const std::size_t idx = static_cast<std::size_t>(it - h_at_start_.begin());
      const std::size_t i = idx == 0 ? 0 : idx - 1;
      const double mag = segments_[i].start + (a - h_at_start_[i]) / segments_[i].slope;
      return std::copysign(mag, y);
    }
  }
  return y;
}

double Nonlinearity::h_prime(double v) const {
  switch (kind_) {
    case NonlinearityKind::Identity:
      return 1.0;
    case NonlinearityKind::ArctanShift:
      return 1.0 + 1.0 / (1.0 + v * v);
    case NonlinearityKind::TwoSlope:
    case NonlinearityKind::PiecewiseLinear: {
      // Left limit: for v > 0 a breakpoint belongs to the inner segment, for
      // v < 0 to the outer one.
      if (v >= 0.0) return segments_[segment_at(v)].slope;
      const double a = -v;
      const auto it = std::upper_bound(segments_.begin(), segments_.end(), a,
                                       [](double x, const SlopeSegment& s) { return x < s.start; });
      return std::prev(it)->slope;
    }
  }
  return 1.0;
}

double Nonlinearity::phi(double g) const {
  switch (kind_) {
    case NonlinearityKind::Identity:
      return 0.5 * g * g;
    case NonlinearityKind::ArctanShift:
      return 0.5 * g * g + 0.5 * std::log1p(g * g);
    case NonlinearityKind::TwoSlope:
    case NonlinearityKind::PiecewiseLinear: {
      const double a = std::abs(g);
      const std::size_t i = segment_at(a);
      const double s0 = segments_[i].start;
      return phi_at_start_[i] + 0.5 * segments_[i].slope * (a - s0) * (a + s0);
    }
  }
  return 0.0;
}

double Nonlinearity::phi_difference(double a, double b) const {
  switch (kind_) {
    case NonlinearityKind::Identity:
      return 0.5 * (a - b) * (a + b);
    case NonlinearityKind::ArctanShift: {
      const double quad = (a - b) * (a + b);
      return 0.5 * quad + 0.5 * std::log1p(quad / (1.0 + b * b));
    }
    case NonlinearityKind::TwoSlope:
    case NonlinearityKind::PiecewiseLinear: {
      const double aa = std::abs(a);
      const double ab = std::abs(b);
      const std::size_t i = segment_at(aa);
      if (i == segment_at(ab)) return 0.5 * segments_[i].slope * (aa - ab) * (aa + ab);
      return phi(a) - phi(b);
    }
  }
  return phi(a) - phi(b);
}

double Nonlinearity::phi_by_quadrature(double g, double abs_tol) const {
  const double a = std::abs(g);
  if (a == 0.0) return 0.0;
  const std::function<double(double)> integrand = [this](double s) { return s * h_prime(s); };
  std::vector<double> cuts{0.0};
  for (const auto& seg : segments_) {
    if (seg.start > 0.0 && seg.start < a) cuts.push_back(seg.start);
  }
  cuts.push_back(a);
  const double piece_tol = abs_tol / static_cast<double>(cuts.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += simpson(integrand, cuts[i], cuts[i + 1], piece_tol);
  }
  return total;
}

std::string AdmissibilityReport::summary() const {
  if (ok()) return "admissible";
  std::ostringstream out;
  const char* sep = "";
  if (!antisymmetric) {
    out << sep << "antisymmetry fails at v=" << *antisymmetry_violation;
    sep = "; ";
  }
  if (!derivative_bounded) {
    out << sep << "derivative bound fails at v=" << *bound_violation;
    sep = "; ";
  }
  if (!v_hprime_increasing) {
    out << sep << "v*h'(v) not strictly increasing at v=" << *monotonicity_violation;
  }
  return out.str();
}

AdmissibilityReport validate_admissibility(const Nonlinearity& nl, double k,
                                           std::span<const double> grid) {
  if (!(k >= 1.0)) throw std::invalid_argument("k must be >= 1");
  if (grid.empty()) throw std::invalid_argument("admissibility grid must be nonempty");

  std::vector<double> points(grid.begin(), grid.end());
  for (const auto& seg : nl.segments()) {
    if (seg.start == 0.0) continue;
    const double eps = 1e-9 * std::max(1.0, seg.start);
    for (double p : {seg.start - eps, seg.start, seg.start + eps}) {
      points.push_back(p);
      points.push_back(-p);
    }
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  constexpr double kRel = 1e-12;
  AdmissibilityReport report;
  for (double v : points) {
    const double hv = nl.h(v);
    if (report.antisymmetric && std::abs(nl.h(-v) + hv) > kRel * (1.0 + std::abs(hv))) {
      report.antisymmetric = false;
      report.antisymmetry_violation = v;
    }
    const double d = nl.h_prime(v);
    if (report.derivative_bounded && (d * k < 1.0 - kRel || d > k * (1.0 + kRel))) {
      report.derivative_bounded = false;
      report.bound_violation = v;
    }
  }
  for (std::size_t i = 1; i < points.size() && report.v_hprime_increasing; ++i) {
    const double prev = points[i - 1] * nl.h_prime(points[i - 1]);
    const double cur = points[i] * nl.h_prime(points[i]);
    if (!(cur > prev)) {
      report.v_hprime_increasing = false;
      report.monotonicity_violation = points[i];
    }
  }
  return report;
}

std::vector<double> default_admissibility_grid(double limit) {
  std::vector<double> grid{0.0};
  for (int i = 1; i <= 200; ++i) {
    const double u = limit * static_cast<double>(i) / 200.0;
    grid.push_back(u);
    grid.push_back(-u);
  }
  for (int e = -8; e <= 2; ++e) {
    for (double m : {1.0, 2.0, 5.0}) {
      const double u = m * std::pow(10.0, e);
      if (u > limit) continue;
      grid.push_back(u);
      grid.push_back(-u);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace nlsolve
