#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nlsolve {

enum class NonlinearityKind { Identity, TwoSlope, ArctanShift, PiecewiseLinear };

/// One slope segment of a piecewise-linear response: h'(v) = slope for |v| past `start`
/// up to the next segment's start. The first segment must start at 0.
struct SlopeSegment {
  double start;
  double slope;
};

/// Per-edge response function h together with h^-1, the left-continuous h', and the
/// unweighted edge energy phi(g) = int_0^g s h'(s) ds.
///
/// h is odd and strictly increasing. Every family is evaluated in closed form except
/// the inverse of the arctan family, which uses a bracketed Newton iteration.
class Nonlinearity {
 public:
  static Nonlinearity identity();
  /// h' = 1/k_param on |v| <= 1 and 1 beyond.
  static Nonlinearity two_slope(double k_param);
  /// h(v) = v + arctan(v).
  static Nonlinearity arctan_shift();
  /// Throws std::invalid_argument unless segments start at 0, are strictly
  /// increasing in `start`, and have positive finite slopes.
  static Nonlinearity piecewise(std::vector<SlopeSegment> segments);

  /// Parses `identity`, `two_slope <k>`, `arctan`, `piecewise v1:s1,v2:s2,...`.
  /// Throws ParseError on unknown ids or bad parameters.
  static Nonlinearity parse(std::string_view spec);

  NonlinearityKind kind() const noexcept { return kind_; }
  /// Smallest k with 1/k <= h'(v) <= k everywhere.
  double k_bound() const noexcept { return k_bound_; }
  const std::vector<SlopeSegment>& segments() const noexcept { return segments_; }

  double h(double v) const;
  double h_inv(double y) const;
  double h_prime(double v) const;
  double phi(double g) const;

  /// phi(a) - phi(b), evaluated without cancellation when a and b are close.
  double phi_difference(double a, double b) const;

  /// Adaptive-Simpson evaluation of int_0^g s h'(s) ds; the generic path for
  /// families without a closed form. Splits at slope breakpoints.
  double phi_by_quadrature(double g, double abs_tol = 1e-12) const;

  /// Canonical text form, accepted back by parse().
  std::string to_spec() const;

 private:
  Nonlinearity(NonlinearityKind kind, std::vector<SlopeSegment> segments);

  // Index of the segment whose slope applies at |v| = a, with the breakpoint
  // itself belonging to the inner segment.
  std::size_t segment_at(double a) const;
  double arctan_inverse(double y) const;

  NonlinearityKind kind_;
  double k_bound_ = 1.0;
  double k_param_ = 1.0;
  std::vector<SlopeSegment> segments_;
  std::vector<double> h_at_start_;    // h(segments_[i].start)
  std::vector<double> phi_at_start_;  // phi(segments_[i].start)
};

/// Outcome of checking the admissibility conditions on a grid.
struct AdmissibilityReport {
  bool antisymmetric = true;
  bool derivative_bounded = true;
  bool v_hprime_increasing = true;
  std::optional<double> antisymmetry_violation;
  std::optional<double> bound_violation;
  std::optional<double> monotonicity_violation;

  bool ok() const noexcept { return antisymmetric && derivative_bounded && v_hprime_increasing; }
  std::string summary() const;
};

/// Checks h(-v) = -h(v), 1/k <= h'(v) <= k (non-strict), and strict growth of v h'(v)
/// over the sorted grid. For piecewise families the breakpoints and their neighbours
/// are added to the grid so the check is exact. Throws std::invalid_argument for
/// k < 1 or an empty grid.
AdmissibilityReport validate_admissibility(const Nonlinearity& nl, double k,
                                           std::span<const double> grid);

/// Symmetric grid on [-limit, limit] mixing uniform and logarithmic spacing.
std::vector<double> default_admissibility_grid(double limit = 100.0);

}  // namespace nlsolve
