#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numeric>

#include "cgdms/thermo.hpp"
#include "doctest.h"

using namespace cgdms;

namespace {

GdmsSystem similarity_system(const std::vector<double>& ratios) {
  GdmsSystem sys;
  sys.name = "similarity";
  sys.alphabet = Alphabet::ifs(static_cast<int>(ratios.size()));
  sys.incidence = IncidenceMatrix::full_shift(sys.alphabet);
  sys.domain = {DomainRegion::interval(0.0, 1.0)};
  double at = 0.0;
  for (double r : ratios) {
    sys.branch.push_back(ConformalMap{Similarity{r, at}});
    at += r;
  }
  return sys;
}

GdmsSystem gauss_system(int n_max) {
  GdmsSystem sys;
  sys.name = "gauss";
  sys.alphabet = Alphabet::ifs(n_max);
  sys.incidence = IncidenceMatrix::full_shift(sys.alphabet);
  sys.domain = {DomainRegion::interval(0.0, 1.0)};
  for (int n = 1; n <= n_max; ++n)
    sys.branch.push_back(ConformalMap{Moebius::from_coeffs(0.0, 1.0, 1.0, n)});
  sys.iterate_order = 2;
  return sys;
}

// root of 2^-s + 3^-s = 1, independent of the library root finder
double pair_delta_oracle() {
  double lo = 0.5, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (std::pow(2.0, -mid) + std::pow(3.0, -mid) > 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double word_ratio(const GdmsSystem& sys, const Word& w) {
  double r = 1.0;
  for (Edge e : w) r *= std::get<Similarity>(sys.branch[e].rep).ratio;
  return r;
}

}  // namespace

TEST_CASE("pressure closed form and level sums on similarity pairs") {
  GdmsSystem sys = similarity_system({0.5, 1.0 / 3.0});
  PressureEvaluator ev{&sys};

  CHECK(pressure(ev, 1.0).value == doctest::Approx(std::log(5.0 / 6.0)).epsilon(1e-12));
  CHECK(pressure(ev, 1.0).error_bound == 0.0);

  double dstar = pair_delta_oracle();
  CHECK(std::abs(pressure(ev, dstar).value) < 1e-12);

  PressureEvaluator lvl{&sys};
  lvl.prefer_closed_form = false;
  lvl.level = 12;
  // sup|phi_w'| is exact for similarities, so level sums reproduce log sum r^s
  CHECK(pressure(lvl, 1.0).value == doctest::Approx(std::log(5.0 / 6.0)).epsilon(1e-12));
  CHECK(pressure(lvl, 1.0).error_bound < 1e-9);

  GdmsSystem one = similarity_system({0.5});
  PressureEvaluator ev1{&one};
  CHECK(pressure(ev1, 0.3).value == doctest::Approx(0.3 * std::log(0.5)).epsilon(1e-12));
  CHECK(pressure(ev1, 1.7).value == doctest::Approx(1.7 * std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("bowen dimension recovers the similarity roots") {
  GdmsSystem sys = similarity_system({0.5, 1.0 / 3.0});
  double dstar = pair_delta_oracle();

  DimensionResult closed = bowen_dimension(PressureEvaluator{&sys});
  CHECK(closed.delta == doctest::Approx(dstar).epsilon(1e-9));
  CHECK(closed.bracket_lo <= dstar);
  CHECK(closed.bracket_hi >= dstar);

  PressureEvaluator lvl{&sys};
  lvl.prefer_closed_form = false;
  DimensionResult sums = bowen_dimension(lvl);
  CHECK(sums.delta == doctest::Approx(dstar).epsilon(1e-8));
  CHECK(sums.pressure_error >= 0.0);

  GdmsSystem eq = similarity_system({0.3, 0.3, 0.3});
  double deq = std::log(3.0) / std::log(10.0 / 3.0);
  CHECK(bowen_dimension(PressureEvaluator{&eq}).delta == doctest::Approx(deq).epsilon(1e-9));

  // a single contraction has no positive pressure zero
  GdmsSystem one = similarity_system({0.5});
  CHECK_THROWS_AS(bowen_dimension(PressureEvaluator{&one}), std::runtime_error);
}

TEST_CASE("spectral model reproduces the closed-form leading eigenvalue") {
  GdmsSystem sys = similarity_system({0.5, 1.0 / 3.0});
  double dstar = pair_delta_oracle();
  for (int depth = 1; depth <= 3; ++depth) {
    SpectralModel model = SpectralModel::build(sys, SpectralOptions{depth});
    CHECK(model.state_count() == (1 << depth));
    for (double s : {0.5, dstar, 1.2}) {
      double expect = std::pow(2.0, -s) + std::pow(3.0, -s);
      CHECK(model.eigen_real(s).lambda == doctest::Approx(expect).epsilon(1e-10));
    }
    DimensionResult dim = bowen_dimension(model);
    CHECK(dim.delta == doctest::Approx(dstar).epsilon(1e-8));
  }
}

TEST_CASE("first-hit cover model tiles shifted cells and finds the root") {
  GdmsSystem sys = similarity_system({0.5, 1.0 / 3.0});
  double dstar = pair_delta_oracle();
  SpectralOptions opt;
  opt.cover_epsilon = 0.07;
  SpectralModel model = SpectralModel::build(sys, opt);
  const auto& states = model.states();
  CHECK(states.size() > 4);

  for (const Word& v : states) {
    CHECK(word_ratio(sys, v) <= opt.cover_epsilon);
    Word parent(v.begin(), v.end() - 1);
    if (!parent.empty()) CHECK(word_ratio(sys, parent) > opt.cover_epsilon);
  }

  // the cells extending shift(v) cover its subtree exactly once: Bernoulli
  // weights at delta are conservative under branching, so they must add up
  auto bernoulli = [&](const Word& w) {
    double m = 1.0;
    for (Edge e : w) m *= std::pow(word_ratio(sys, {e}), dstar);
    return m;
  };
  for (const Word& v : states) {
    if (v.size() < 2) continue;
    Word p(v.begin() + 1, v.end());
    double total = 0.0;
    for (const Word& b : states)
      if (b.size() >= p.size() && std::equal(p.begin(), p.end(), b.begin()))
        total += bernoulli(b);
    CHECK(total == doctest::Approx(bernoulli(p)).epsilon(1e-12));
  }

  CHECK(model.eigen_real(dstar).lambda == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(bowen_dimension(model).delta == doctest::Approx(dstar).epsilon(1e-8));
}

TEST_CASE("gibbs measure masses, refinement, and sandwich on the pair system") {
  GdmsSystem sys = similarity_system({0.5, 1.0 / 3.0});
  double dstar = pair_delta_oracle();
  CylinderMeasure gm = gibbs_measure(sys, dstar, 3);

  double p1 = std::pow(2.0, -dstar), p2 = std::pow(3.0, -dstar);
  CHECK(gm.lambda == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(gm.mass_of({0}) == doctest::Approx(p1).epsilon(1e-9));
  CHECK(gm.mass_of({1}) == doctest::Approx(p2).epsilon(1e-9));
  CHECK(gm.mass_of({0, 1, 1, 0, 1}) ==
        doctest::Approx(p1 * p2 * p2 * p1 * p2).epsilon(1e-9));

  // refinement consistency across the depth boundary
  std::vector<Word> stack = {{}};
  while (!stack.empty()) {
    Word w = stack.back();
    stack.pop_back();
    if (w.size() >= 5) continue;
    double parent = w.empty() ? 1.0 : gm.mass_of(w);
    double sum = 0.0;
    for (Edge e : {0, 1}) {
      Word we = w;
      we.push_back(e);
      sum += gm.mass_of(we);
      stack.push_back(we);
    }
    CHECK(std::abs(sum - parent) <= 1e-10 * parent);
  }

  // full-shift similarity has constant density, so both measures coincide
  CHECK(std::accumulate(gm.invariant.begin(), gm.invariant.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gm.invariant_of({0}) == doctest::Approx(gm.mass_of({0})).epsilon(1e-9));

  CHECK(gm.gibbs_constant(5) <= 1.0001);
}

TEST_CASE("truncated continued-fraction model with lumped tail") {
  GdmsSystem sys = gauss_system(30);
  SpectralOptions opt;
  opt.averaged = true;
  opt.gauss_tail = true;
  opt.truncation = 30;
  SpectralModel model = SpectralModel::build(sys, opt);
  CHECK(model.state_count() == 31);

  // at s = 1 the surrogate is the exact transfer operator on the partition,
  // with Lebesgue cell lengths as the right eigenvector
  auto eig = model.eigen_real(1.0);
  CHECK(eig.lambda == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(eig.mass[0] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(eig.mass[2] == doctest::Approx(1.0 / 12.0).epsilon(1e-4));

  DimensionResult dim = bowen_dimension(model, 0.6, 1.6);
  CHECK(dim.delta == doctest::Approx(1.0).epsilon(1e-5));

  // dropping the tail loses dimension
  SpectralOptions bare;
  bare.averaged = true;
  SpectralModel plain = SpectralModel::build(sys, bare);
  DimensionResult trunc = bowen_dimension(plain, 0.6, 1.6);
  CHECK(trunc.delta < dim.delta);
  CHECK(trunc.delta > 0.9);
}

TEST_CASE("lyapunov exponent and variance against bernoulli closed forms") {
  GdmsSystem sys = similarity_system({0.5, 1.0 / 3.0});
  double dstar = pair_delta_oracle();
  double p1 = std::pow(2.0, -dstar), p2 = std::pow(3.0, -dstar);
  double chi = p1 * std::log(2.0) + p2 * std::log(3.0);
  double sig2 = p1 * p2 * std::pow(std::log(3.0 / 2.0), 2);

  SpectralModel model = SpectralModel::build(sys, SpectralOptions{2});
  LyapunovResult ly = lyapunov(model, dstar);
  CHECK(ly.finite_difference == doctest::Approx(chi).epsilon(1e-6));
  CHECK(ly.integral == doctest::Approx(chi).epsilon(1e-9));
  CHECK(ly.consistent);

  CHECK(variance(model, dstar) == doctest::Approx(sig2).epsilon(1e-4));

  // analytic zeta-tail derivative must track the finite difference
  GdmsSystem gauss = gauss_system(30);
  SpectralOptions opt;
  opt.averaged = true;
  opt.gauss_tail = true;
  opt.truncation = 30;
  SpectralModel gmodel = SpectralModel::build(gauss, opt);
  double gdelta = bowen_dimension(gmodel, 0.6, 1.6).delta;
  LyapunovResult gly = lyapunov(gmodel, gdelta);
  CHECK(gly.consistent);
  CHECK(gly.integral == doctest::Approx(M_PI * M_PI / (6.0 * std::log(2.0))).epsilon(0.05));
}

TEST_CASE("complex radius: decay off the axis, lattice resonance on it") {
  GdmsSystem sys = similarity_system({0.5, 1.0 / 3.0});
  double dstar = pair_delta_oracle();
  SpectralModel model = SpectralModel::build(sys, SpectralOptions{6});
  double base = model.eigen_real(dstar).lambda;
  CHECK(model.radius_complex(Complex{dstar, 0.0}) / base == doctest::Approx(1.0).epsilon(1e-8));
  for (double t : {0.5, 1.0, 2.0})
    CHECK(model.radius_complex(Complex{dstar, t}) / base < 0.999);

  GdmsSystem lat = similarity_system({0.5, 0.5});
  SpectralModel lmodel = SpectralModel::build(lat, SpectralOptions{6});
  double lbase = lmodel.eigen_real(1.0).lambda;
  double t0 = 2.0 * M_PI / std::log(2.0);
  CHECK(lmodel.radius_complex(Complex{1.0, t0}) / lbase == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pressure is decreasing and convex along sample points") {
  GdmsSystem sys = similarity_system({0.5, 1.0 / 3.0});
  PressureEvaluator ev{&sys};
  double prev = pressure(ev, 0.2).value;
  for (double s = 0.4; s <= 1.6; s += 0.2) {
    double cur = pressure(ev, s).value;
    CHECK(cur < prev);
    prev = cur;
  }
  for (double s = 0.4; s <= 1.2; s += 0.2) {
    double mid2 = 2.0 * pressure(ev, s).value;
    CHECK(mid2 < pressure(ev, s - 0.2).value + pressure(ev, s + 0.2).value);
  }
}

TEST_CASE("poincare residue probe on the full shift") {
  GdmsSystem sys = similarity_system({0.5, 1.0 / 3.0});
  double dstar = pair_delta_oracle();
  double p2 = std::pow(3.0, -dstar);
  double chi = std::pow(2.0, -dstar) * std::log(2.0) + p2 * std::log(3.0);

  ProbeResult full = poincare_residue_probe(sys, dstar, {}, {0}, {}, {0.4, 0.3, 0.2});
  CHECK(full.reliable);
  CHECK(full.extrapolated == doctest::Approx(1.0 / chi).epsilon(0.1));

  // a cylinder restriction scales the residue by its conformal mass
  ProbeResult cyl = poincare_residue_probe(sys, dstar, {}, {0}, {1}, {0.4, 0.3, 0.2});
  CHECK(cyl.extrapolated == doctest::Approx(p2 / chi).epsilon(0.12));

  // shallow truncation with a slowly converging series must self-report
  ProbeResult shallow = poincare_residue_probe(sys, dstar, {}, {0}, {}, {0.05}, 4);
  CHECK_FALSE(shallow.reliable);
}

TEST_CASE("reference points coded by eventually periodic words") {
  GdmsSystem sys = similarity_system({0.5, 1.0 / 3.0});
  CHECK(std::abs(reference_point(sys, {}, {0})) < 1e-12);
  CHECK(reference_point(sys, {1}, {0}).real() == doctest::Approx(0.5).epsilon(1e-12));

  GdmsSystem gauss = gauss_system(5);
  Complex golden = reference_point(gauss, {}, {0});
  CHECK(golden.real() == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-10));

  GdmsSystem swap = similarity_system({0.5, 1.0 / 3.0});
  swap.incidence = IncidenceMatrix::dense(swap.alphabet, {0, 1, 1, 0});
  CHECK_THROWS_AS(reference_point(swap, {}, {0}), std::invalid_argument);
  CHECK_NOTHROW(reference_point(swap, {}, {0, 1}));
}
