#pragma once

#include <limits>

#include "cgdms/system.hpp"
#include "cgdms/thermo.hpp"

namespace cgdms {

// one induced letter: a parabolic block a^n followed by b (repeat n >= 1),
// or a surviving plain letter (repeat == 0, follower == the letter itself)
struct StarLetter {
  Edge parabolic = -1;
  int repeat = 0;
  Edge follower = -1;
};

// power-law fit of log sup|phi'_{a^n}| against log n: least squares for the
// residual, a dyadic Richardson step for the slope itself (the raw slope
// carries an O(1/n) bias large enough to corrupt the second digit of p)
struct IndexEstimate {
  double p = 0.0;         // parabolic index; slope = -(p+1)/p
  double slope = 0.0;     // bias-corrected exponent of the derivative decay
  double residual = 0.0;  // rms misfit of the plain least-squares line
  bool poor_fit = false;  // residual above 0.05, or a slope not below -1
};

// uniformly contracting jump system over the blocks a^n b: parabolic letters
// stop appearing as first letters and come back as bounded runs instead
struct InducedSystem {
  GdmsSystem base;
  GdmsSystem star;
  std::vector<StarLetter> letters;  // aligned with star edge indices
  std::vector<Edge> omega;          // parabolic base letters, sorted
  int n_cap = 0;                    // blocks kept per parabolic letter

  // decay law per omega entry, anchored at the truncation boundary so the
  // dropped-letter bound starts exactly where the kept letters stop
  std::vector<IndexEstimate> index;
  std::vector<double> tail_constant;  // sup||phi'_{a^{n_cap} b}|| = c * n_cap^slope
  std::vector<int> tail_degree;       // admissible followers per parabolic letter

  // bound on the sum over dropped blocks of sup||phi'||^s by the integral of
  // the fitted law; +inf at or below the convergence edge s = p/(p+1)
  double tail_bound(double s) const;
  // level-sum evaluator on the star system with the truncation tail wired in;
  // the result borrows the star system, so this object must stay alive
  PressureEvaluator pressure_evaluator(int level = 3) const;
};

// builds the jump system, verifying strict contraction of every kept block;
// a system without parabolic letters comes back unchanged
InducedSystem induce(const GdmsSystem& system, int n_cap = 200);

// decay exponent of n -> sup|phi'_{a^n}| over the admissible follower images,
// fitted on [n_lo, n_hi]; the Richardson step needs n_lo <= n_hi / 4
IndexEstimate estimate_parabolic_index(const GdmsSystem& system, Edge a, int n_lo = 20,
                                       int n_hi = 200);

struct ParabolicProfile {
  std::vector<Edge> omega;            // parabolic letters, sorted
  std::vector<double> indices;        // p_a, aligned with omega
  std::vector<Complex> fixed_points;  // x_a, aligned with omega
  double delta = std::numeric_limits<double>::quiet_NaN();
  std::vector<Edge> omega_infinity;  // {a : 2 p_a / (p_a + 1) >= delta}
  std::vector<Edge> boundary_cases;  // letters within tolerance of equality there
  bool measure_finite = false;       // delta > 2 p / (p + 1) at the largest index
};

// detects the parabolic letters and fits their indices; delta stays unset
// until classify_finiteness fills in the dimension-dependent fields
ParabolicProfile parabolic_profile(const GdmsSystem& system);
ParabolicProfile classify_finiteness(double delta, ParabolicProfile profile);

// whether the diameter-counting constant stays finite on Y: true when the
// closure of Y misses every omega_infinity fixed point, and otherwise exactly
// when delta beats every index whose fixed point lies in that closure among
// the parabolic letters that can precede the head of rho
bool diameter_constant_finite(const ParabolicProfile& profile, const IncidenceMatrix& incidence,
                              Edge rho_head, const DomainRegion& y_closure);

}  // namespace cgdms
