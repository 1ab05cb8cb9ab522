#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>

#include "cgdms/system.hpp"

namespace cgdms {

struct PressureResult {
  double value = 0.0;
  double error_bound = 0.0;
};

// level-sum pressure: (1/n) log sum over |w|=n of sup|phi_w'|^s, with the
// closed form log sum r_i^s for full-shift similarity systems
struct PressureEvaluator {
  const GdmsSystem* system = nullptr;
  int level = 12;
  // bound on sum over dropped letters of sup|phi'|^s for truncated families;
  // return +inf below the finiteness threshold
  std::function<double(double)> alphabet_tail;
  bool prefer_closed_form = true;
};

PressureResult pressure(const PressureEvaluator& ev, double s);

struct DimensionResult {
  double delta = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  double pressure_error = 0.0;  // propagated through the root by the local slope
};

struct SpectralOptions {
  int depth = 1;               // uniform cylinder depth when cover_epsilon == 0
  double cover_epsilon = 0.0;  // > 0: variable-depth first-hit diameter cover
  int cover_depth_cap = 24;
  bool averaged = false;       // 3-point Gauss-Legendre cell averages (1D only)
  bool gauss_tail = false;     // lumped state for the dropped letters x -> 1/(x+n), n > N
  int truncation = 0;          // N for the tail state
};

// finite surrogate of the transfer operator L_s: states are cylinder cells,
// transitions follow the shift, entries are |phi'_e|^s at anchors (or cell
// averages). All s-dependence lives in stored exponent/weight terms, so one
// build serves every s.
class SpectralModel {
 public:
  static SpectralModel build(const GdmsSystem& system, SpectralOptions opt);

  int state_count() const { return static_cast<int>(states_.size()) + (has_tail_ ? 1 : 0); }
  const std::vector<Word>& states() const { return states_; }
  const std::vector<Complex>& anchors() const { return anchor_; }
  bool has_tail() const { return has_tail_; }
  const GdmsSystem& system() const { return *system_; }

  struct EigenData {
    double lambda = 0.0;
    std::vector<double> mass;     // right eigenvector, normalized to total 1
    std::vector<double> density;  // left eigenvector, normalized against mass
    int iterations = 0;
  };
  EigenData eigen_real(double s) const;
  double log_leading(double s) const;
  // d/ds log lambda(s) through the left/right eigen-pairing of dL_s/ds;
  // expands to the stationary edge-measure average of log|phi'|
  double leading_log_derivative(double s) const;

  // spectral radius of the complexified matrix at s (dense eigen-solve)
  double radius_complex(Complex s) const;

  // index of a state word, -1 if absent
  int state_index(const Word& w) const;
  // log|phi'_e(x_beta)| for the anchored transition weight
  double transition_log(Edge e, int beta) const;

 private:
  const GdmsSystem* system_ = nullptr;
  SpectralOptions opt_;
  std::vector<Word> states_;
  std::vector<Complex> anchor_;
  std::vector<Interval> cell_;  // 1D cells for averaged/tail modes
  bool has_tail_ = false;

  // CSR transitions; entry(s) = sum_j w_j e^{s g_j} (kind 0) or
  // sum_j w_j zeta(2s, g_j) (kind 1, Gauss tail row)
  std::vector<int> row_ptr_;
  std::vector<int> col_;
  std::vector<std::uint8_t> kind_;
  std::vector<std::uint8_t> nterm_;
  std::vector<double> term_g_;  // 3 per transition
  std::vector<double> term_w_;

  void push_transition(int col, std::uint8_t kind, const double* g, const double* w, int n);
  std::vector<double> weights_at(double s) const;
  std::vector<Complex> weights_at(Complex s) const;
};

DimensionResult bowen_dimension(const PressureEvaluator& ev, double lo = 1e-3, double hi = 4.0);
DimensionResult bowen_dimension(const SpectralModel& model, double lo = 1e-3, double hi = 4.0);

// conformal + invariant cylinder masses from the depth-k eigenproblem at
// s = delta; longer words get Markov-product extensions (one anchored factor
// per extra letter), which keeps refinement sums exactly consistent
struct CylinderMeasure {
  int depth = 1;
  double delta = 0.0;
  double lambda = 1.0;
  std::shared_ptr<const SpectralModel> model;
  std::vector<double> mass;       // conformal masses of the state cylinders
  std::vector<double> invariant;  // shift-invariant masses
  std::vector<double> density;    // invariant/conformal ratio per state

  double mass_of(const Word& w) const;
  double invariant_of(const Word& w) const;
  // sup over tested words of the two-sided Gibbs ratio m([w]) / ||phi_w'||^delta
  double gibbs_constant(int max_len) const;
};

CylinderMeasure gibbs_measure(const GdmsSystem& system, double delta, int depth,
                              SpectralOptions opt = {});

struct LyapunovResult {
  double finite_difference = 0.0;
  double integral = 0.0;
  bool consistent = false;  // the two estimates agree within 1%
};

// chi = -P'(delta), by central differences on the model pressure and by the
// stationary edge-measure average of -log|phi'|
LyapunovResult lyapunov(const SpectralModel& model, double delta);

// sigma^2 = P''(delta), central second difference h = 1e-3, Richardson h/2
double variance(const SpectralModel& model, double delta);

struct ProbeResult {
  std::vector<double> epsilon;
  std::vector<double> scaled;  // epsilon * eta(delta + epsilon)
  double extrapolated = 0.0;
  bool reliable = true;  // truncation tail stayed under 10% everywhere
};

// localized Poincare series eta_rho(tau, s) = sum over words w admissible
// after tau and closing into rho of e^{-s lambda_rho(tau w)}; the scaled
// values converge to psi(rho) m([tau]) / chi as epsilon -> 0
ProbeResult poincare_residue_probe(const GdmsSystem& system, double delta, const Word& rho_pre,
                                   const Word& rho_period, const Word& tau,
                                   const std::vector<double>& epsilons, int level_cap = 22);

// evaluation point coded by the eventually periodic word rho
Complex reference_point(const GdmsSystem& system, const Word& rho_pre, const Word& rho_period);

}  // namespace cgdms
