#include "cgdms/thermo.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cgdms {

namespace {

constexpr double kPowerTol = 1e-12;
constexpr int kPowerCap = 100000;

bool full_shift_similarity(const GdmsSystem& sys) {
  if (sys.alphabet.vertex_count != 1) return false;
  for (const auto& b : sys.branch)
    if (!std::holds_alternative<Similarity>(b.rep)) return false;
  int n = sys.alphabet.edge_count();
  for (Edge a = 0; a < n; ++a)
    for (Edge b = 0; b < n; ++b)
      if (!sys.incidence.allows(a, b)) return false;
  return true;
}

// sup log|phi_w'| for every admissible word at the requested levels
std::vector<std::vector<double>> collect_sup_logs(const GdmsSystem& sys,
                                                  const std::vector<int>& levels) {
  int top = *std::max_element(levels.begin(), levels.end());
  std::vector<std::vector<double>> out(levels.size());
  Word word;
  auto record = [&](const ConformalMap& comp, Edge last) {
    for (size_t j = 0; j < levels.size(); ++j)
      if (levels[j] == static_cast<int>(word.size()))
        out[j].push_back(sup_log_derivative(comp, sys.terminal_region(last)));
  };
  std::function<void(const ConformalMap&, Edge)> grow = [&](const ConformalMap& comp, Edge last) {
    record(comp, last);
    if (static_cast<int>(word.size()) >= top) return;
    for (Edge f : sys.incidence.successors(last)) {
      word.push_back(f);
      grow(compose(comp, sys.branch[f]), f);
      word.pop_back();
    }
  };
  for (Edge e = 0; e < sys.alphabet.edge_count(); ++e) {
    word.assign(1, e);
    grow(sys.branch[e], e);
  }
  return out;
}

int clamped_level(const GdmsSystem& sys, int level) {
  double est = 1.0;
  int edges = std::max(1, sys.alphabet.edge_count());
  for (int n = 1; n <= level; ++n) {
    est *= edges;
    if (est > 3e6) return std::max(1, n - 1);
  }
  return level;
}

double log_sum_exp_scaled(const std::vector<double>& sups, double s) {
  // sum of exp(s * g); values stay in double range for our systems
  double total = 0.0;
  for (double g : sups) total += std::exp(s * g);
  return std::log(total);
}

// Hurwitz-style tail sum_{k>=0} (a+k)^(-s2) by Euler-Maclaurin
template <typename S>
S zeta_tail(S s2, double a) {
  constexpr int kDirect = 16;
  S sum{};
  for (int k = 0; k < kDirect; ++k) sum += std::pow(a + k, -s2);
  double m = a + kDirect;
  S p = std::pow(m, -s2);
  sum += p * m / (s2 - 1.0) + p * 0.5 + s2 * p / (12.0 * m);
  sum -= s2 * (s2 + 1.0) * (s2 + 2.0) * p / (720.0 * m * m * m);
  return sum;
}

// d/ds of zeta_tail(2s, a)
double zeta_tail_ds(double s, double a) {
  constexpr int kDirect = 16;
  double s2 = 2.0 * s;
  double sum = 0.0;
  for (int k = 0; k < kDirect; ++k) sum += -2.0 * std::log(a + k) * std::pow(a + k, -s2);
  double m = a + kDirect;
  double lg = std::log(m);
  double p = std::pow(m, -s2);
  sum += p * m * (-2.0 * lg / (s2 - 1.0) - 2.0 / ((s2 - 1.0) * (s2 - 1.0)));
  sum += 0.5 * p * (-2.0 * lg);
  sum += (2.0 * p + s2 * p * (-2.0 * lg)) / (12.0 * m);
  return sum;
}

constexpr double kGlNode = 0.7745966692414834;  // sqrt(3/5)
constexpr double kGlW0 = 5.0 / 18.0, kGlW1 = 8.0 / 18.0;

}  // namespace

PressureResult pressure(const PressureEvaluator& ev, double s) {
  const GdmsSystem& sys = *ev.system;
  if (ev.alphabet_tail) {
    double t = ev.alphabet_tail(s);
    if (!std::isfinite(t)) return {std::numeric_limits<double>::infinity(),
                                   std::numeric_limits<double>::infinity()};
  }
  if (ev.prefer_closed_form && full_shift_similarity(sys) && !ev.alphabet_tail) {
    double z = 0.0;
    for (const auto& b : sys.branch) z += std::pow(std::abs(std::get<Similarity>(b.rep).ratio), s);
    return {std::log(z), 0.0};
  }
  int n = std::max(2, clamped_level(sys, ev.level));
  auto sups = collect_sup_logs(sys, {n, n - 1, 1});
  double pn = log_sum_exp_scaled(sups[0], s) / n;
  double pn1 = log_sum_exp_scaled(sups[1], s) / (n - 1);
  double err = std::abs(pn - pn1);
  if (ev.alphabet_tail) {
    double z1 = std::exp(log_sum_exp_scaled(sups[2], s));
    err += std::log1p(ev.alphabet_tail(s) / z1);
  }
  for (const auto& b : sys.branch)
    if (!b.is_moebius_like()) {
      err += std::log(std::max(1.0, sys.distortion)) / n;  // chain sups are upper bounds
      break;
    }
  return {pn, err};
}

namespace {

struct RootScan {
  double lo, hi, f_lo, f_hi;
};

// decreasing function root bracket: scan right until the sign flips
template <typename F>
RootScan bracket_root(F&& f, double lo, double hi) {
  double flo = f(lo);
  if (!(flo > 0.0)) throw std::runtime_error("system not regular: P(s) <= 0 at scan start");
  constexpr int kGrid = 24;
  double prev = lo, fprev = flo;
  for (int i = 1; i <= kGrid; ++i) {
    double x = lo + (hi - lo) * i / kGrid;
    double fx = f(x);
    if (fx <= 0.0) return {prev, x, fprev, fx};
    prev = x;
    fprev = fx;
  }
  throw std::runtime_error("system not regular: no pressure sign change in scan range");
}

template <typename F>
DimensionResult root_by_bisection(F&& f, double lo, double hi, double err_at_root) {
  RootScan sc = bracket_root(f, lo, hi);
  for (int it = 0; it < 64 && sc.hi - sc.lo > 1e-9; ++it) {
    double mid = 0.5 * (sc.lo + sc.hi);
    double fm = f(mid);
    if (fm > 0.0) {
      sc.lo = mid;
      sc.f_lo = fm;
    } else {
      sc.hi = mid;
      sc.f_hi = fm;
    }
  }
  DimensionResult out;
  out.bracket_lo = sc.lo;
  out.bracket_hi = sc.hi;
  out.delta = 0.5 * (sc.lo + sc.hi);
  double slope = std::abs((sc.f_hi - sc.f_lo) / std::max(1e-30, sc.hi - sc.lo));
  if (slope < 1e-12) slope = 1.0;
  out.pressure_error = err_at_root / slope;
  return out;
}

}  // namespace

DimensionResult bowen_dimension(const PressureEvaluator& ev, double lo, double hi) {
  const GdmsSystem& sys = *ev.system;
  if (ev.prefer_closed_form && full_shift_similarity(sys) && !ev.alphabet_tail) {
    auto f = [&](double s) { return pressure(ev, s).value; };
    return root_by_bisection(f, lo, hi, 0.0);
  }
  int n = std::max(2, clamped_level(sys, ev.level));
  auto sups = collect_sup_logs(sys, {n, n - 1, 1});
  double err_root = 0.0;
  auto f = [&](double s) {
    if (ev.alphabet_tail && !std::isfinite(ev.alphabet_tail(s)))
      return std::numeric_limits<double>::infinity();
    return log_sum_exp_scaled(sups[0], s) / n;
  };
  DimensionResult out = root_by_bisection(f, lo, hi, 0.0);
  PressureResult at_root = pressure(ev, out.delta);
  err_root = at_root.error_bound;
  double slope = std::abs((f(out.delta + 0.05) - f(out.delta - 0.05)) / 0.1);
  out.pressure_error = err_root / std::max(slope, 1e-12);
  return out;
}

DimensionResult bowen_dimension(const SpectralModel& model, double lo, double hi) {
  auto f = [&](double s) { return model.log_leading(s); };
  return root_by_bisection(f, lo, hi, 0.0);
}

void SpectralModel::push_transition(int col, std::uint8_t kind, const double* g, const double* w,
                                    int n) {
  col_.push_back(col);
  kind_.push_back(kind);
  nterm_.push_back(static_cast<std::uint8_t>(n));
  for (int j = 0; j < 3; ++j) {
    term_g_.push_back(j < n ? g[j] : 0.0);
    term_w_.push_back(j < n ? w[j] : 0.0);
  }
}

SpectralModel SpectralModel::build(const GdmsSystem& system, SpectralOptions opt) {
  SpectralModel m;
  m.system_ = &system;
  m.opt_ = opt;
  const auto& inc = system.incidence;

  if (opt.gauss_tail) {
    if (opt.depth != 1 || opt.cover_epsilon > 0.0)
      throw std::invalid_argument("tail state requires a depth-1 model");
    opt.averaged = m.opt_.averaged = true;
  }
  if (opt.depth < 1) throw std::invalid_argument("model depth must be at least 1");
  if (opt.cover_epsilon > 0.0 && opt.averaged)
    throw std::invalid_argument("diameter covers use anchored entries");

  if (opt.cover_epsilon > 0.0) {
    // first-hit diameter cover: weak contraction makes it shift-compatible,
    // but only if no cell is forced out early by the depth cap
    Word word;
    std::function<void(const ConformalMap&, Edge)> grow = [&](const ConformalMap& comp,
                                                              Edge last) {
      double diam = image_region(comp, system.terminal_region(last)).diameter();
      if (diam <= opt.cover_epsilon || static_cast<int>(word.size()) >= opt.cover_depth_cap) {
        if (diam > opt.cover_epsilon)
          throw std::runtime_error("cover depth cap reached before the diameter target");
        m.states_.push_back(word);
        m.anchor_.push_back(cgdms::apply(comp, system.terminal_region(last).center()));
        return;
      }
      for (Edge f : inc.successors(last)) {
        word.push_back(f);
        grow(compose(comp, system.branch[f]), f);
        word.pop_back();
      }
    };
    for (Edge e = 0; e < system.alphabet.edge_count(); ++e) {
      word.assign(1, e);
      grow(system.branch[e], e);
    }
  } else {
    m.states_ = enumerate_words(inc, opt.depth);
    for (const Word& w : m.states_) {
      ConformalMap comp = system.word_map(w);
      m.anchor_.push_back(cgdms::apply(comp, system.word_domain(w).center()));
      if (opt.averaged || opt.gauss_tail) {
        if (system.word_domain(w).kind != DomainRegion::Kind::interval)
          throw std::invalid_argument("averaged entries need interval domains");
        m.cell_.push_back(image_interval(comp, system.word_domain(w).iv));
      }
    }
  }
  if (m.states_.empty()) throw std::invalid_argument("no admissible states at this depth");

  int regular = static_cast<int>(m.states_.size());
  m.has_tail_ = opt.gauss_tail;
  Interval tail_cell{0.0, 0.0};
  if (m.has_tail_) {
    // the dropped letters of x -> 1/(x+n) live on [0, 1/(N+1)]
    if (opt.truncation < 1) throw std::invalid_argument("tail state needs the truncation N");
    tail_cell = {0.0, 1.0 / (opt.truncation + 1)};
  }

  auto emit_entry = [&](Edge e, int target) {
    if (opt.averaged) {
      const Interval& iv = target < regular ? m.cell_[target] : tail_cell;
      double mid = iv.mid(), h = 0.5 * iv.length();
      double xs[3] = {mid - h * kGlNode, mid, mid + h * kGlNode};
      double g[3], w[3] = {kGlW0, kGlW1, kGlW0};
      for (int j = 0; j < 3; ++j) g[j] = log_abs_derivative(system.branch[e], {xs[j], 0.0});
      m.push_transition(target, 0, g, w, 3);
    } else {
      double g = log_abs_derivative(system.branch[e], m.anchor_[target]);
      double w = 1.0;
      m.push_transition(target, 0, &g, &w, 1);
    }
  };

  m.row_ptr_.push_back(0);
  for (int i = 0; i < regular; ++i) {
    const Word& v = m.states_[i];
    Edge head = v.front();
    if (v.size() > 1) {
      // targets are the states refining the shifted word
      Word p(v.begin() + 1, v.end());
      auto lb = std::lower_bound(m.states_.begin(), m.states_.end(), p);
      for (auto it = lb; it != m.states_.end(); ++it) {
        if (it->size() < p.size() || !std::equal(p.begin(), p.end(), it->begin())) break;
        emit_entry(head, static_cast<int>(it - m.states_.begin()));
      }
    } else {
      for (int t = 0; t < regular; ++t)
        if (inc.allows(head, m.states_[t].front())) emit_entry(head, t);
      if (m.has_tail_) emit_entry(head, regular);  // every letter sees the tail cell
    }
    m.row_ptr_.push_back(static_cast<int>(m.col_.size()));
  }

  if (m.has_tail_) {
    // mass recursion for the union of the dropped letters: the integrand is
    // the Hurwitz-type sum over n > N of (x+n)^(-2s)
    double base = opt.truncation + 1.0;
    auto emit_zeta = [&](int target) {
      const Interval& iv = target < regular ? m.cell_[target] : tail_cell;
      double mid = iv.mid(), h = 0.5 * iv.length();
      double g[3] = {mid - h * kGlNode + base, mid + base, mid + h * kGlNode + base};
      double w[3] = {kGlW0, kGlW1, kGlW0};
      m.push_transition(target, 1, g, w, 3);
    };
    for (int t = 0; t < regular; ++t) emit_zeta(t);
    emit_zeta(regular);
    m.row_ptr_.push_back(static_cast<int>(m.col_.size()));
  }
  return m;
}

std::vector<double> SpectralModel::weights_at(double s) const {
  std::vector<double> w(col_.size());
  for (size_t i = 0; i < col_.size(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < nterm_[i]; ++j) {
      double tg = term_g_[3 * i + j], tw = term_w_[3 * i + j];
      acc += kind_[i] == 0 ? tw * std::exp(s * tg) : tw * zeta_tail(2.0 * s, tg);
    }
    w[i] = acc;
  }
  return w;
}

std::vector<Complex> SpectralModel::weights_at(Complex s) const {
  std::vector<Complex> w(col_.size());
  for (size_t i = 0; i < col_.size(); ++i) {
    Complex acc = 0.0;
    for (int j = 0; j < nterm_[i]; ++j) {
      double tg = term_g_[3 * i + j], tw = term_w_[3 * i + j];
      acc += kind_[i] == 0 ? tw * std::exp(s * tg) : tw * zeta_tail(2.0 * s, tg);
    }
    w[i] = acc;
  }
  return w;
}

SpectralModel::EigenData SpectralModel::eigen_real(double s) const {
  int n = state_count();
  std::vector<double> w = weights_at(s);
  std::vector<double> v(n, 1.0 / n), nv(n), u(n, 1.0 / n), nu(n);
  double lambda = 0.0;
  int used = 0;
  for (int it = 0; it < kPowerCap; ++it) {
    std::fill(nv.begin(), nv.end(), 0.0);
    for (int r = 0; r < n; ++r)
      for (int i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) nv[r] += w[i] * v[col_[i]];
    double total = std::accumulate(nv.begin(), nv.end(), 0.0);
    for (double& x : nv) x /= total;
    used = it + 1;
    if (std::abs(total - lambda) <= kPowerTol * std::max(1.0, std::abs(total)) && it > 2) {
      lambda = total;
      v.swap(nv);
      break;
    }
    lambda = total;
    v.swap(nv);
  }
  if (used >= kPowerCap) throw std::runtime_error("power iteration failed to converge");
  for (int it = 0; it < kPowerCap; ++it) {
    std::fill(nu.begin(), nu.end(), 0.0);
    for (int r = 0; r < n; ++r)
      for (int i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) nu[col_[i]] += w[i] * u[r];
    double total = std::accumulate(nu.begin(), nu.end(), 0.0);
    for (double& x : nu) x /= total;
    double drift = 0.0;
    for (int r = 0; r < n; ++r) drift = std::max(drift, std::abs(nu[r] - u[r]));
    u.swap(nu);
    if (drift <= kPowerTol && it > 2) break;
    if (it + 1 >= kPowerCap) throw std::runtime_error("power iteration failed to converge");
  }
  EigenData out;
  out.lambda = lambda;
  out.iterations = used;
  out.mass = std::move(v);
  double pairing = 0.0;
  for (int r = 0; r < n; ++r) pairing += out.mass[r] * u[r];
  out.density.resize(n);
  for (int r = 0; r < n; ++r) out.density[r] = u[r] / pairing;
  return out;
}

double SpectralModel::log_leading(double s) const { return std::log(eigen_real(s).lambda); }

double SpectralModel::radius_complex(Complex s) const {
  int n = state_count();
  if (n > 2048) throw std::runtime_error("complex radius limited to 2048 states");
  std::vector<Complex> w = weights_at(s);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (int r = 0; r < n; ++r)
    for (int i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) a(r, col_[i]) += w[i];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(a, false);
  double radius = 0.0;
  for (int i = 0; i < n; ++i) radius = std::max(radius, std::abs(solver.eigenvalues()[i]));
  return radius;
}

int SpectralModel::state_index(const Word& w) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), w);
  if (it == states_.end() || *it != w) return -1;
  return static_cast<int>(it - states_.begin());
}

double SpectralModel::transition_log(Edge e, int beta) const {
  return log_abs_derivative(system_->branch[e], anchor_[beta]);
}

CylinderMeasure gibbs_measure(const GdmsSystem& system, double delta, int depth,
                              SpectralOptions opt) {
  if (opt.cover_epsilon > 0.0)
    throw std::invalid_argument("cylinder measures need a uniform depth");
  opt.depth = depth;
  auto model = std::make_shared<SpectralModel>(SpectralModel::build(system, opt));
  auto eig = model->eigen_real(delta);
  CylinderMeasure cm;
  cm.depth = depth;
  cm.delta = delta;
  cm.lambda = eig.lambda;
  cm.model = model;
  int regular = static_cast<int>(model->states().size());
  cm.mass.assign(eig.mass.begin(), eig.mass.begin() + regular);
  cm.density.assign(eig.density.begin(), eig.density.begin() + regular);
  double total = std::accumulate(cm.mass.begin(), cm.mass.end(), 0.0);
  for (double& x : cm.mass) x /= total;  // drop any tail mass from the distribution
  double itotal = 0.0;
  for (int i = 0; i < regular; ++i) itotal += cm.mass[i] * cm.density[i];
  for (double& x : cm.density) x /= itotal;
  cm.invariant.resize(regular);
  for (int i = 0; i < regular; ++i) cm.invariant[i] = cm.mass[i] * cm.density[i];
  return cm;
}

double CylinderMeasure::mass_of(const Word& w) const {
  const auto& states = model->states();
  int k = depth;
  if (static_cast<int>(w.size()) <= k) {
    double total = 0.0;
    for (size_t i = 0; i < states.size(); ++i) {
      const Word& st = states[i];
      if (st.size() < w.size()) continue;
      if (std::equal(w.begin(), w.end(), st.begin())) total += mass[i];
    }
    return total;
  }
  // Markov-product extension: one anchored factor per extra letter keeps
  // refinement sums consistent with the eigen-equation
  double logmass = 0.0;
  int n = static_cast<int>(w.size());
  for (int i = 0; i + k < n; ++i) {
    Word st(w.begin() + i + 1, w.begin() + i + 1 + k);
    int idx = model->state_index(st);
    if (idx < 0) throw std::invalid_argument("word not admissible for this model");
    logmass += delta * model->transition_log(w[i], idx) - std::log(lambda);
  }
  Word last(w.end() - k, w.end());
  int idx = model->state_index(last);
  if (idx < 0) throw std::invalid_argument("word not admissible for this model");
  return std::exp(logmass) * mass[idx];
}

double CylinderMeasure::invariant_of(const Word& w) const {
  if (static_cast<int>(w.size()) < depth) {
    const auto& states = model->states();
    double total = 0.0;
    for (size_t i = 0; i < states.size(); ++i)
      if (std::equal(w.begin(), w.end(), states[i].begin())) total += invariant[i];
    return total;
  }
  Word head(w.begin(), w.begin() + depth);
  int idx = model->state_index(head);
  if (idx < 0) throw std::invalid_argument("word not admissible for this model");
  return mass_of(w) * density[idx];
}

double CylinderMeasure::gibbs_constant(int max_len) const {
  const GdmsSystem& sys = model->system();
  double worst = 1.0;
  for (int n = 1; n <= max_len; ++n) {
    auto words = enumerate_words(sys.incidence, n);
    if (words.size() > 3000000) throw std::invalid_argument("gibbs scan too large");
    for (const Word& w : words) {
      double sup = sup_log_derivative(sys.word_map(w), sys.word_domain(w));
      double ratio = mass_of(w) / std::exp(delta * sup);
      worst = std::max(worst, std::max(ratio, 1.0 / ratio));
    }
  }
  return worst;
}

double SpectralModel::leading_log_derivative(double s) const {
  EigenData eig = eigen_real(s);
  const double* mass = eig.mass.data();
  double acc = 0.0;
  for (int r = 0; r < state_count(); ++r)
    for (int i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) {
      double d = 0.0;
      for (int j = 0; j < nterm_[i]; ++j) {
        double tg = term_g_[3 * i + j], tw = term_w_[3 * i + j];
        d += kind_[i] == 0 ? tw * tg * std::exp(s * tg) : tw * zeta_tail_ds(s, tg);
      }
      acc += eig.density[r] * d * mass[col_[i]];
    }
  return acc / eig.lambda;
}

LyapunovResult lyapunov(const SpectralModel& model, double delta) {
  LyapunovResult out;
  constexpr double h = 1e-4;
  out.finite_difference = -(model.log_leading(delta + h) - model.log_leading(delta - h)) / (2 * h);
  out.integral = -model.leading_log_derivative(delta);
  double scale = std::max(std::abs(out.finite_difference), std::abs(out.integral));
  out.consistent = std::abs(out.finite_difference - out.integral) <= 0.01 * scale;
  return out;
}

double variance(const SpectralModel& model, double delta) {
  auto second = [&](double h) {
    return (model.log_leading(delta + h) - 2.0 * model.log_leading(delta) +
            model.log_leading(delta - h)) /
           (h * h);
  };
  constexpr double h = 1e-3;
  double d1 = second(h), d2 = second(h / 2);
  double sigma2 = (4.0 * d2 - d1) / 3.0;
  if (sigma2 < -1e-6) throw std::runtime_error("negative variance estimate");
  return std::max(0.0, sigma2);
}

Complex reference_point(const GdmsSystem& system, const Word& rho_pre, const Word& rho_period) {
  if (rho_period.empty()) throw std::invalid_argument("reference coding needs a period");
  Word probe = rho_pre;
  probe.insert(probe.end(), rho_period.begin(), rho_period.end());
  if (!is_admissible(probe, system.incidence) ||
      !system.incidence.allows(rho_period.back(), rho_period.front()))
    throw std::invalid_argument("reference coding is not admissible");
  Complex fix = fixed_point(system.word_map(rho_period), system.word_domain(rho_period), 1e-13);
  return cgdms::apply(system.word_map(rho_pre), fix);
}

ProbeResult poincare_residue_probe(const GdmsSystem& system, double delta, const Word& rho_pre,
                                   const Word& rho_period, const Word& tau,
                                   const std::vector<double>& epsilons, int level_cap) {
  Complex xi = reference_point(system, rho_pre, rho_period);
  Edge rho_head = rho_pre.empty() ? rho_period.front() : rho_pre.front();
  if (!tau.empty() && !is_admissible(tau, system.incidence))
    throw std::invalid_argument("tau is not admissible");

  int edges = system.alphabet.edge_count();
  int cap = level_cap;
  {
    double est = 0.0, level = 1.0;
    cap = 0;
    while (cap < level_cap) {
      level *= edges;
      est += level;
      if (est > 6e6) break;
      ++cap;
    }
    cap = std::max(2, cap);
  }

  // lambda_rho(tau w) for every admissible closing word, grouped by |w|
  std::vector<std::vector<double>> by_level(cap + 1);
  ConformalMap base = system.word_map(tau);
  std::function<void(const ConformalMap&, Edge, int)> grow = [&](const ConformalMap& comp,
                                                                 Edge last, int len) {
    if (system.incidence.allows(last, rho_head))
      by_level[len].push_back(-log_abs_derivative(comp, xi));
    if (len >= cap) return;
    for (Edge f : system.incidence.successors(last)) grow(compose(comp, system.branch[f]), f, len + 1);
  };
  for (Edge e = 0; e < edges; ++e) {
    if (!tau.empty() && !system.incidence.allows(tau.back(), e)) continue;
    grow(compose(base, system.branch[e]), e, 1);
  }

  ProbeResult out;
  for (double eps : epsilons) {
    double s = delta + eps;
    std::vector<double> level_sum(cap + 1, 0.0);
    for (int n = 1; n <= cap; ++n)
      for (double lam : by_level[n]) level_sum[n] += std::exp(-s * lam);
    double partial = std::accumulate(level_sum.begin(), level_sum.end(), 0.0);
    double ratio = level_sum[cap - 1] > 0.0 ? level_sum[cap] / level_sum[cap - 1] : 0.0;
    double tail = ratio < 0.999 ? level_sum[cap] * ratio / (1.0 - ratio)
                                : std::numeric_limits<double>::infinity();
    double eta = partial + tail;
    out.epsilon.push_back(eps);
    out.scaled.push_back(eps * eta);
    if (!(tail <= 0.1 * eta)) out.reliable = false;
  }
  // polynomial extrapolation of (eps, scaled) to eps = 0
  std::vector<double> t = out.scaled;
  int m = static_cast<int>(t.size());
  for (int round = 1; round < m; ++round)
    for (int i = 0; i < m - round; ++i) {
      double e0 = out.epsilon[i], e1 = out.epsilon[i + round];
      t[i] = (e0 * t[i + 1] - e1 * t[i]) / (e0 - e1);
    }
  out.extrapolated = m > 0 ? t[0] : 0.0;
  return out;
}

}  // namespace cgdms
