#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>

#include "cgdms/system.hpp"

namespace cgdms {

// Borel test set for equidistribution counts. Interval regions live on the
// real axis (1D systems); membership is decided through a signed gap, so
// boundary grazes can be flagged uniformly.
struct BorelRegion {
  enum class Kind { whole, interval, box, disk, complement };
  Kind kind = Kind::whole;
  Interval iv;
  Interval box_x, box_y;
  Disk dk;
  std::shared_ptr<BorelRegion> inner;  // complement operand
  bool boundary_null_assumed = true;

  static BorelRegion whole();
  static BorelRegion interval(double lo, double hi);
  static BorelRegion box(double x0, double x1, double y0, double y1);
  static BorelRegion disk(Complex c, double r);
  static BorelRegion complement(BorelRegion b);

  // negative inside (depth to the boundary), positive outside (distance)
  double signed_gap(Complex p) const;
  bool contains(Complex p) const { return signed_gap(p) <= 0.0; }
};

// eventually periodic coding rho = pre . period^infinity
struct ReferenceCoding {
  Word pre;
  Word period;
};

// target set Y for diameter counts: a region tracked exactly through the
// maps, or a finite point set tracked pointwise
struct TargetSet {
  bool is_region = false;
  DomainRegion hull;
  std::vector<Complex> points;

  static TargetSet region(const DomainRegion& r);
  static TargetSet point_set(std::vector<Complex> pts);
};

struct CountOptions {
  std::vector<double> t_grid;  // strictly increasing thresholds; last entry is T_max
  BorelRegion region = BorelRegion::whole();
  double delta = std::numeric_limits<double>::quiet_NaN();  // normalization exponent
  std::int64_t node_budget = 50000000;
  int threads = 1;
};

struct CountingReport {
  std::vector<double> t_grid;
  std::vector<std::int64_t> counts;
  std::vector<double> normalized;  // counts * e^{-delta T} when delta was given
  double delta = std::numeric_limits<double>::quiet_NaN();
  double limit_estimate = std::numeric_limits<double>::quiet_NaN();
  double oscillation = std::numeric_limits<double>::quiet_NaN();  // trailing max/min - 1
  std::int64_t words_expanded = 0;
  std::int64_t boundary_hits = 0;  // region decisions within 1e-9 of the boundary
  bool truncated = false;
  std::string truncation_notes;
};

std::vector<double> uniform_grid(double t_min, double t_max, int points);

// N_rho(B,T): words closing into rho, lambda_rho(w) = -log|phi_w'(xi)| <= T,
// phi_w(xi) in B. Exact lambda prune (monotone under left extension).
CountingReport count_preimages(const GdmsSystem& system, const ReferenceCoding& rho,
                               const CountOptions& opt);

// N_p(B,T): closable words, lambda_p at the periodic point, region tests x_w.
// Pruned by the composite sup-derivative lower bound.
CountingReport count_periodic(const GdmsSystem& system, const CountOptions& opt);

enum class DiameterMode { point, hit };  // D: phi_w(xi) in B;  E: phi_w(Y) meets B

// D_Y / E_Y: words closing into rho with Delta(w) = -log diam(phi_w(Y)) <= T
CountingReport count_diameters(const GdmsSystem& system, const ReferenceCoding& rho,
                               const TargetSet& target, const CountOptions& opt,
                               DiameterMode mode);

// trailing least-squares slope of log counts against T; expected near delta
double growth_rate(const CountingReport& report);

}  // namespace cgdms
