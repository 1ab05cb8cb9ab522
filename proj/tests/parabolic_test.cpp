#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cgdms/parabolic.hpp"
#include "cgdms/thermo.hpp"

using namespace cgdms;

namespace {

GdmsSystem similarity_system(std::vector<double> ratios, std::vector<double> shifts) {
  GdmsSystem s;
  s.name = "similarities";
  s.alphabet = Alphabet::ifs(static_cast<int>(ratios.size()));
  s.incidence = IncidenceMatrix::full_shift(s.alphabet);
  for (size_t i = 0; i < ratios.size(); ++i)
    s.branch.emplace_back(Similarity{ratios[i], shifts[i]});
  s.domain = {DomainRegion::interval(0.0, 1.0)};
  return s;
}

GdmsSystem farey_system() {
  GdmsSystem s;
  s.name = "farey";
  s.alphabet = Alphabet::ifs(2);
  s.incidence = IncidenceMatrix::full_shift(s.alphabet);
  s.branch.emplace_back(Moebius::from_coeffs({1, 0}, {0, 0}, {1, 0}, {1, 0}));  // x/(1+x)
  s.branch.emplace_back(Moebius::from_coeffs({0, 0}, {1, 0}, {1, 0}, {1, 0}));  // 1/(1+x)
  s.domain = {DomainRegion::interval(0.0, 1.0)};
  s.iterate_order = 2;
  return s;
}

GdmsSystem mp_system(double alpha) {
  auto fwd = [alpha](double x) { return x + std::pow(x, 1.0 + alpha); };
  auto dfwd = [alpha](double x) { return 1.0 + (1.0 + alpha) * std::pow(x, alpha); };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (fwd(mid) < 1.0 ? lo : hi) = mid;
  }
  NumericBranch b0{fwd, dfwd, {0.0, hi}, {0.0, 1.0}};
  NumericBranch b1{[fwd](double x) { return fwd(x) - 1.0; }, dfwd, {hi, 1.0}, {0.0, 1.0}};
  GdmsSystem s;
  s.name = "manneville_pomeau";
  s.alphabet = Alphabet::ifs(2);
  s.incidence = IncidenceMatrix::full_shift(s.alphabet);
  s.branch.emplace_back(std::move(b0));
  s.branch.emplace_back(std::move(b1));
  s.domain = {DomainRegion::interval(0.0, 1.0)};
  s.iterate_order = 2;
  return s;
}

// parabolic letter 0 with a single admissible follower (1, not 2), so the
// induced alphabet and the head-dependent finiteness calls have real holes
GdmsSystem restricted_system() {
  GdmsSystem s;
  s.name = "restricted";
  s.alphabet = Alphabet::ifs(3);
  s.incidence = IncidenceMatrix::dense(s.alphabet, {1, 1, 0, 1, 1, 1, 1, 0, 1});
  s.branch.emplace_back(Moebius::from_coeffs({1, 0}, {0, 0}, {1, 0}, {1, 0}));
  s.branch.emplace_back(Similarity{0.2, 0.55});
  s.branch.emplace_back(Similarity{0.2, 0.78});
  s.domain = {DomainRegion::interval(0.0, 1.0)};
  s.iterate_order = 2;
  return s;
}

}  // namespace

TEST_CASE("inducing the farey system reproduces the gauss family") {
  auto ind = induce(farey_system(), 30);
  REQUIRE(ind.omega == std::vector<Edge>{0});
  REQUIRE(ind.star.alphabet.edge_count() == 31);
  REQUIRE(ind.letters.size() == 31);
  CHECK(ind.letters[0].repeat == 0);
  CHECK(ind.letters[0].follower == 1);

  // plain letter 1 is 1/(x+1); the block 0^n 1 collapses to 1/(x+n+1)
  for (Edge e = 0; e < 31; ++e) {
    int m = e == 0 ? 1 : ind.letters[e].repeat + 1;
    if (e > 0) {
      CHECK(ind.letters[e].parabolic == 0);
      CHECK(ind.letters[e].follower == 1);
    }
    auto gauss = ConformalMap(Moebius::from_coeffs({0, 0}, {1, 0}, {1, 0}, {double(m), 0}));
    for (double x : {0.0, 0.17, 0.5, 0.83, 1.0})
      CHECK(std::abs(apply_real(ind.star.branch[e], x) - apply_real(gauss, x)) < 1e-12);
  }

  // the induced shift is full, and every block contracts strictly
  CHECK(ind.star.incidence.successors(0).size() == 31);
  CHECK(ind.star.incidence.allows(30, 1));
  for (Edge e = 1; e < 31; ++e)
    CHECK(sup_log_derivative(ind.star.branch[e], ind.star.terminal_region(e)) < 0.0);
}

TEST_CASE("attracting systems come back unchanged") {
  auto s = similarity_system({0.5, 1.0 / 3.0}, {0.0, 2.0 / 3.0});
  auto ind = induce(s, 50);
  CHECK(ind.omega.empty());
  REQUIRE(ind.star.alphabet.edge_count() == 2);
  for (Edge e = 0; e < 2; ++e) {
    CHECK(ind.letters[e].repeat == 0);
    CHECK(ind.letters[e].follower == e);
    for (double x : {0.0, 0.3, 1.0})
      CHECK(apply_real(ind.star.branch[e], x) == apply_real(s.branch[e], x));
  }
  CHECK(ind.tail_bound(0.7) == 0.0);
  CHECK_FALSE(static_cast<bool>(ind.pressure_evaluator().alphabet_tail));
}

TEST_CASE("restricted transitions inherit through the blocks") {
  auto ind = induce(restricted_system(), 4);
  REQUIRE(ind.omega == std::vector<Edge>{0});
  // plain letters 1, 2 then blocks 0^n 1; follower 2 is inadmissible after 0
  REQUIRE(ind.star.alphabet.edge_count() == 6);
  CHECK(ind.tail_degree == std::vector<int>{1});
  for (const StarLetter& l : ind.letters)
    if (l.repeat > 0) CHECK(l.follower == 1);

  const auto& A = ind.star.incidence;
  CHECK(A.allows(2, 3));        // block -> block reads A(1, 0) = 1
  CHECK(A.allows(2, 0));        // block -> plain 1
  CHECK(A.allows(5, 1));        // block -> plain 2
  CHECK(A.allows(0, 2));        // plain 1 -> block
  CHECK(A.allows(1, 2));        // plain 2 -> block reads A(2, 0) = 1
  CHECK_FALSE(A.allows(1, 0));  // plain 2 -> plain 1 stays forbidden
}

TEST_CASE("parabolic index fits land on the known exponents") {
  auto farey = estimate_parabolic_index(farey_system(), 0);
  CHECK(farey.p == doctest::Approx(1.0).epsilon(0.05));
  CHECK(farey.slope == doctest::Approx(-2.0).epsilon(0.025));
  CHECK(farey.residual < 0.05);
  CHECK_FALSE(farey.poor_fit);

  auto mp_half = estimate_parabolic_index(mp_system(0.5), 0);
  CHECK(mp_half.p == doctest::Approx(0.5).epsilon(0.1));
  CHECK(mp_half.slope == doctest::Approx(-3.0).epsilon(0.07));
  CHECK_FALSE(mp_half.poor_fit);

  auto mp_two = estimate_parabolic_index(mp_system(2.0), 0);
  CHECK(mp_two.p == doctest::Approx(2.0).epsilon(0.075));
  CHECK(mp_two.slope == doctest::Approx(-1.5).epsilon(0.05));
}

TEST_CASE("manneville-pomeau blocks decay at the index rate") {
  auto ind = induce(mp_system(0.5), 48);
  REQUIRE(ind.star.alphabet.edge_count() == 49);
  // block 0^n 1 sits at star edge n; sup||phi'|| falls like n^-3, with the
  // usual O(1/n) shortfall in the local slope at this range
  double s24 = sup_log_derivative(ind.star.branch[24], ind.star.terminal_region(24));
  double s48 = sup_log_derivative(ind.star.branch[48], ind.star.terminal_region(48));
  CHECK(s48 < 0.0);
  double local_slope = (s48 - s24) / std::log(2.0);
  CHECK(local_slope > -3.25);
  CHECK(local_slope < -2.65);
}

TEST_CASE("induced farey dimension is one") {
  auto ind = induce(farey_system(), 30);
  SpectralOptions opt;
  opt.depth = 1;
  opt.averaged = true;
  opt.gauss_tail = true;
  opt.truncation = 31;  // kept letters are 1/(x+m) for m <= 31
  auto model = SpectralModel::build(ind.star, opt);
  // the tail entries only converge above s = p/(p+1), so scan from there
  auto dim = bowen_dimension(model, 0.6, 1.6);
  CHECK(dim.delta == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("dropped-letter tails feed the pressure error") {
  auto ind = induce(farey_system(), 30);
  double t1 = ind.tail_bound(1.0);
  CHECK(t1 > 0.0);
  CHECK(t1 < 0.05);
  CHECK(ind.tail_bound(0.8) > ind.tail_bound(1.2));
  CHECK(std::isinf(ind.tail_bound(0.45)));  // at and below s = p/(p+1)
  CHECK(std::isfinite(ind.tail_bound(0.56)));

  auto ev = ind.pressure_evaluator(3);
  PressureEvaluator bare;
  bare.system = &ind.star;
  bare.level = 3;
  auto with_tail = pressure(ev, 1.0);
  auto without = pressure(bare, 1.0);
  CHECK(with_tail.value == doctest::Approx(without.value));
  CHECK(with_tail.error_bound > without.error_bound);
  CHECK(std::isinf(pressure(ev, 0.45).value));
}

TEST_CASE("induced systems test as generic") {
  auto farey = is_D_generic(induce(farey_system(), 8).star, 2);
  CHECK(farey.tag == GenericityDecision::Tag::generic);
  auto mp = is_D_generic(induce(mp_system(0.5), 8).star, 2);
  CHECK(mp.tag == GenericityDecision::Tag::generic);
}

TEST_CASE("finiteness classification matches the boundary rules") {
  auto farey = classify_finiteness(1.0, parabolic_profile(farey_system()));
  CHECK(farey.omega_infinity == std::vector<Edge>{0});
  CHECK(farey.boundary_cases == std::vector<Edge>{0});  // 2p/(p+1) == delta here
  CHECK_FALSE(farey.measure_finite);

  auto mp = classify_finiteness(1.0, parabolic_profile(mp_system(2.0)));
  CHECK(mp.omega_infinity == std::vector<Edge>{0});  // 4/3 >= 1, clear of the boundary
  CHECK(mp.boundary_cases.empty());
  CHECK_FALSE(mp.measure_finite);

  ParabolicProfile synthetic;
  synthetic.omega = {0};
  synthetic.indices = {1.0};
  synthetic.fixed_points = {{0.0, 0.0}};
  auto packed = classify_finiteness(1.30561, synthetic);
  CHECK(packed.omega_infinity.empty());
  CHECK(packed.boundary_cases.empty());
  CHECK(packed.measure_finite);

  auto shallow = classify_finiteness(0.9, synthetic);
  CHECK(shallow.omega_infinity == std::vector<Edge>{0});
  CHECK(shallow.boundary_cases.empty());
  CHECK_FALSE(shallow.measure_finite);

  auto attracting =
      classify_finiteness(0.78, parabolic_profile(similarity_system({0.5, 0.25}, {0.0, 0.5})));
  CHECK(attracting.omega_infinity.empty());
  CHECK(attracting.measure_finite);
}

TEST_CASE("diameter constant finiteness follows the parabolic points") {
  auto farey = farey_system();
  auto profile = classify_finiteness(1.0, parabolic_profile(farey));
  CHECK(diameter_constant_finite(profile, farey.incidence, 1,
                                 DomainRegion::interval(0.2, 0.8)));
  CHECK_FALSE(diameter_constant_finite(profile, farey.incidence, 1,
                                       DomainRegion::interval(0.0, 0.5)));

  // a dimension clearly above the index keeps the constant finite even when
  // the target touches the parabolic point
  ParabolicProfile synthetic;
  synthetic.omega = {0};
  synthetic.indices = {1.0};
  synthetic.fixed_points = {{0.0, 0.0}};
  auto packed = classify_finiteness(1.30561, synthetic);
  CHECK(diameter_constant_finite(packed, farey.incidence, 0,
                                 DomainRegion::interval(0.0, 0.5)));

  // heads the parabolic letter cannot precede do not constrain the constant
  auto restricted = restricted_system();
  auto rp = classify_finiteness(0.9, parabolic_profile(restricted));
  REQUIRE(rp.omega_infinity == std::vector<Edge>{0});
  CHECK(diameter_constant_finite(rp, restricted.incidence, 2,
                                 DomainRegion::interval(0.0, 0.3)));
  CHECK_FALSE(diameter_constant_finite(rp, restricted.incidence, 1,
                                       DomainRegion::interval(0.0, 0.3)));
}

TEST_CASE("parabolic interfaces validate their inputs") {
  auto farey = farey_system();
  auto plain = similarity_system({0.5, 0.25}, {0.0, 0.5});
  CHECK_THROWS_AS(estimate_parabolic_index(farey, 5), std::invalid_argument);
  CHECK_THROWS_AS(estimate_parabolic_index(plain, 0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_parabolic_index(farey, 0, 30, 100), std::invalid_argument);
  CHECK_THROWS_AS(induce(farey, 0), std::invalid_argument);

  ParabolicProfile profile = parabolic_profile(farey);
  CHECK_THROWS_AS(classify_finiteness(-1.0, profile), std::invalid_argument);
  CHECK_THROWS_AS(
      diameter_constant_finite(profile, farey.incidence, 1, DomainRegion::interval(0, 1)),
      std::invalid_argument);  // unclassified profile
  auto classified = classify_finiteness(1.0, profile);
  CHECK_THROWS_AS(
      diameter_constant_finite(classified, farey.incidence, 7, DomainRegion::interval(0, 1)),
      std::invalid_argument);
}
