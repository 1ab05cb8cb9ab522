#include "cgdms/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cgdms {

namespace {

constexpr double kPoorFitResidual = 0.05;
constexpr double kClassifyTol = 1e-3;  // snap width for boundary finiteness calls

// probe seeds spread over a region; endpoints catch the derivative extremes
std::vector<Complex> seed_points(const DomainRegion& r) {
  if (r.kind == DomainRegion::Kind::interval)
    return {{r.iv.lo, 0.0}, {r.iv.mid(), 0.0}, {r.iv.hi, 0.0}};
  const Disk& d = r.dk;
  return {d.center, d.center + Complex{d.radius, 0.0}, d.center - Complex{d.radius, 0.0},
          d.center + Complex{0.0, d.radius}, d.center - Complex{0.0, d.radius}};
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

// integral bound for sum_{n > cap} deg * (c n^slope)^s per parabolic letter
double law_tail(const std::vector<double>& q, const std::vector<double>& c,
                const std::vector<int>& deg, double cap, double s) {
  double total = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (!(s * q[k] > 1.0 + 1e-12)) return std::numeric_limits<double>::infinity();
    total += deg[k] * std::pow(c[k], s) * std::pow(cap, 1.0 - s * q[k]) / (s * q[k] - 1.0);
  }
  return total;
}

}  // namespace

IndexEstimate estimate_parabolic_index(const GdmsSystem& system, Edge a, int n_lo, int n_hi) {
  if (a < 0 || a >= system.alphabet.edge_count())
    throw std::invalid_argument("unknown letter for the index fit");
  if (n_lo < 1 || n_hi < 4 * n_lo)
    throw std::invalid_argument("index fit needs 1 <= n_lo <= n_hi / 4");
  SystemClass cls = detect_parabolic(system);
  if (!std::binary_search(cls.info.omega.begin(), cls.info.omega.end(), a))
    throw std::invalid_argument("letter is not parabolic");

  // probes live in the images of the other letters, away from the neutral
  // point; the decay exponent does not depend on the probe
  std::vector<Complex> probes;
  for (Edge b : system.incidence.successors(a)) {
    if (b == a) continue;
    for (Complex z : seed_points(system.terminal_region(b)))
      probes.push_back(apply(system.branch[b], z));
  }
  if (probes.empty()) throw std::invalid_argument("parabolic letter has no followers");

  // y(n) = max over probes of log|phi'_{a^n}(z)|, accumulated along the orbits
  std::vector<double> acc(probes.size(), 0.0);
  std::vector<double> logn, yv;
  const int n_half = n_hi / 2, n_quarter = n_hi / 4;
  double y_hi = 0.0, y_half = 0.0, y_quarter = 0.0;
  for (int n = 1; n <= n_hi; ++n) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < probes.size(); ++i) {
      acc[i] += log_abs_derivative(system.branch[a], probes[i]);
      probes[i] = apply(system.branch[a], probes[i]);
      best = std::max(best, acc[i]);
    }
    if (n >= n_lo) {
      logn.push_back(std::log(double(n)));
      yv.push_back(best);
    }
    if (n == n_hi) y_hi = best;
    if (n == n_half) y_half = best;
    if (n == n_quarter) y_quarter = best;
  }

  LineFit ls = fit_line(logn, yv);
  // two halving steps cancel the O(1/n) curvature of the log-log plot, which
  // the plain least-squares slope inherits in full
  double s_near = (y_hi - y_half) / std::log(double(n_hi) / n_half);
  double s_far = (y_half - y_quarter) / std::log(double(n_half) / n_quarter);
  double slope = 2.0 * s_near - s_far;

  IndexEstimate est;
  est.slope = slope;
  est.residual = ls.residual;
  est.poor_fit = ls.residual > kPoorFitResidual || !(slope < -1.0);
  est.p = slope < -1.0 ? -1.0 / (1.0 + slope) : std::numeric_limits<double>::quiet_NaN();
  return est;
}

InducedSystem induce(const GdmsSystem& system, int n_cap) {
  if (n_cap < 1) throw std::invalid_argument("block cap must be positive");
  InducedSystem out;
  out.base = system;
  out.n_cap = n_cap;
  SystemClass cls = detect_parabolic(system);
  out.omega = cls.info.omega;

  if (out.omega.empty()) {
    out.star = system;
    for (Edge e = 0; e < system.alphabet.edge_count(); ++e) out.letters.push_back({-1, 0, e});
    return out;  // nothing to induce away
  }

  auto is_parabolic = [&](Edge e) {
    return std::binary_search(out.omega.begin(), out.omega.end(), e);
  };

  // plain survivors keep their base order; blocks follow, grouped by
  // parabolic letter, then run length, then follower
  std::vector<StarLetter> letters;
  std::vector<ConformalMap> maps;
  Alphabet star_ab;
  star_ab.vertex_count = system.alphabet.vertex_count;
  auto add_edge = [&](StarLetter l, ConformalMap m, Vertex iv, Vertex tv) {
    letters.push_back(l);
    maps.push_back(std::move(m));
    star_ab.initial.push_back(iv);
    star_ab.terminal.push_back(tv);
  };
  for (Edge e = 0; e < system.alphabet.edge_count(); ++e)
    if (!is_parabolic(e))
      add_edge({-1, 0, e}, system.branch[e], system.alphabet.initial[e],
               system.alphabet.terminal[e]);
  for (Edge a : out.omega) {
    ConformalMap power = system.branch[a];
    for (int n = 1; n <= n_cap; ++n) {
      if (n > 1) power = compose(system.branch[a], power);
      for (Edge b : system.incidence.successors(a)) {
        if (b == a) continue;
        add_edge({a, n, b}, compose(power, system.branch[b]), system.alphabet.initial[a],
                 system.alphabet.terminal[b]);
      }
    }
  }

  GdmsSystem star;
  star.name = system.name.empty() ? "induced" : system.name + " induced";
  star.alphabet = star_ab;
  star.branch = std::move(maps);
  star.domain = system.domain;
  star.iterate_order = system.iterate_order;
  star.distortion = system.distortion;

  // transitions inherit from the base through the block boundaries; the base
  // rule already forces the vertices to match
  auto first_of = [&letters](Edge x) {
    return letters[x].repeat > 0 ? letters[x].parabolic : letters[x].follower;
  };
  star.incidence = IncidenceMatrix::from_rule(star_ab, [&](Edge x, Edge y) {
    return system.incidence.allows(letters[x].follower, first_of(y));
  });

  // every induced block must contract strictly; the sups at the cap double
  // as anchors for the dropped-letter law
  std::vector<double> sup_at_cap(out.omega.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < letters.size(); ++i) {
    const StarLetter& l = letters[i];
    if (l.repeat == 0) continue;
    Edge e = static_cast<Edge>(i);
    double sup = sup_log_derivative(star.branch[i], star.terminal_region(e));
    if (!(sup < 0.0)) throw std::runtime_error("induced block fails to contract");
    if (l.repeat == n_cap) {
      std::size_t k = std::lower_bound(out.omega.begin(), out.omega.end(), l.parabolic) -
                      out.omega.begin();
      sup_at_cap[k] = std::max(sup_at_cap[k], sup);
    }
  }

  out.star = std::move(star);
  out.letters = std::move(letters);
  for (std::size_t k = 0; k < out.omega.size(); ++k) {
    Edge a = out.omega[k];
    out.index.push_back(estimate_parabolic_index(system, a));
    int deg = 0;
    for (Edge b : system.incidence.successors(a)) deg += b != a ? 1 : 0;
    out.tail_degree.push_back(deg);
    out.tail_constant.push_back(
        std::exp(sup_at_cap[k] - out.index.back().slope * std::log(double(n_cap))));
  }
  return out;
}

double InducedSystem::tail_bound(double s) const {
  std::vector<double> q;
  for (const IndexEstimate& est : index) q.push_back(-est.slope);
  return law_tail(q, tail_constant, tail_degree, double(n_cap), s);
}

PressureEvaluator InducedSystem::pressure_evaluator(int level) const {
  PressureEvaluator ev;
  ev.system = &star;
  ev.level = level;
  if (!omega.empty()) {
    std::vector<double> q;
    for (const IndexEstimate& est : index) q.push_back(-est.slope);
    ev.alphabet_tail = [q, c = tail_constant, deg = tail_degree,
                        cap = double(n_cap)](double s) { return law_tail(q, c, deg, cap, s); };
  }
  return ev;
}

ParabolicProfile parabolic_profile(const GdmsSystem& system) {
  SystemClass cls = detect_parabolic(system);
  ParabolicProfile pr;
  pr.omega = cls.info.omega;
  pr.fixed_points = cls.info.fixed_point;
  for (Edge a : pr.omega) pr.indices.push_back(estimate_parabolic_index(system, a).p);
  return pr;
}

ParabolicProfile classify_finiteness(double delta, ParabolicProfile profile) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("finiteness needs a positive dimension");
  profile.delta = delta;
  profile.omega_infinity.clear();
  profile.boundary_cases.clear();
  double p_max = 0.0;
  for (std::size_t k = 0; k < profile.omega.size(); ++k) {
    double p = profile.indices[k];
    double threshold = 2.0 * p / (p + 1.0);
    // boundary calls snap toward membership (and toward an infinite measure
    // below), so equality within fit noise lands on the inclusive side
    if (threshold >= delta - kClassifyTol) profile.omega_infinity.push_back(profile.omega[k]);
    if (std::abs(threshold - delta) <= kClassifyTol)
      profile.boundary_cases.push_back(profile.omega[k]);
    p_max = std::max(p_max, p);
  }
  profile.measure_finite =
      profile.omega.empty() || delta > 2.0 * p_max / (p_max + 1.0) + kClassifyTol;
  return profile;
}

bool diameter_constant_finite(const ParabolicProfile& profile, const IncidenceMatrix& incidence,
                              Edge rho_head, const DomainRegion& y_closure) {
  if (std::isnan(profile.delta))
    throw std::invalid_argument("profile is unclassified; fill in the dimension first");
  if (rho_head < 0 || rho_head >= incidence.edge_count())
    throw std::invalid_argument("unknown head letter");

  bool clear_of_infinity = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < profile.omega.size(); ++k) {
    Edge a = profile.omega[k];
    if (!y_closure.contains(profile.fixed_points[k])) continue;
    if (std::binary_search(profile.omega_infinity.begin(), profile.omega_infinity.end(), a))
      clear_of_infinity = false;
    if (incidence.allows(a, rho_head)) worst = std::max(worst, profile.indices[k]);
  }
  // the dimension must clearly beat every index that can feed the head
  // letter from inside the target; ties go to the infinite side
  return clear_of_infinity || profile.delta > worst + kClassifyTol;
}

}  // namespace cgdms
