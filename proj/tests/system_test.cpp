#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cgdms/system.hpp"

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

GdmsSystem gauss_system(int truncation, int order) {
  GdmsSystem s;
  s.name = "gauss";
  s.alphabet = Alphabet::ifs(truncation);
  s.incidence = IncidenceMatrix::full_shift(s.alphabet);
  for (int n = 1; n <= truncation; ++n)
    s.branch.emplace_back(Moebius::from_coeffs({0, 0}, {1, 0}, {1, 0}, {double(n), 0}));
  s.domain = {DomainRegion::interval(0.0, 1.0)};
  s.iterate_order = order;
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
  return s;
}

}  // namespace

TEST_CASE("disjoint similarities validate cleanly") {
  auto s = similarity_system({0.5, 1.0 / 3.0}, {0.0, 2.0 / 3.0});
  auto report = validate(s);
  CHECK(report.all_pass());
  REQUIRE(report.find("strict_contraction") != nullptr);
  CHECK(report.find("strict_contraction")->pass);
  CHECK(std::abs(s.kappa - 0.5) < 1e-12);
  CHECK(s.distortion == doctest::Approx(1.1));
}

TEST_CASE("overlapping similarities fail the open set condition") {
  auto s = similarity_system({0.7, 0.7}, {0.0, 0.3});
  auto report = validate(s);
  REQUIRE(report.find("open_set_condition") != nullptr);
  CHECK_FALSE(report.find("open_set_condition")->pass);
  CHECK_FALSE(report.all_pass());
}

TEST_CASE("structural inconsistencies throw") {
  auto s = similarity_system({0.5, 0.25}, {0.0, 0.5});
  s.branch.pop_back();
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
}

TEST_CASE("Gauss contraction appears at iterate order two") {
  auto first = gauss_system(20, 1);
  auto report1 = validate(first);
  CHECK(report1.all_pass());
  CHECK(report1.find("weak_contraction")->pass);
  CHECK_FALSE(report1.find("strict_contraction")->pass);

  auto second = gauss_system(20, 2);
  auto report2 = validate(second);
  CHECK(report2.find("strict_contraction")->pass);
  CHECK(std::abs(second.kappa - 0.25) < 1e-9);  // attained by the word 1.1 at x=0
}

TEST_CASE("diameters contract like kappa^(n/q)") {
  auto s = gauss_system(5, 2);
  validate(s);
  double maxdiam = s.domain[0].diameter();
  for (int n = 1; n <= 6; ++n) {
    for (const Word& w : enumerate_words(s.incidence, n)) {
      double d = image_region(s.word_map(w), s.word_domain(w)).diameter();
      CHECK(d <= std::pow(s.kappa, n / 2) * maxdiam + 1e-12);
    }
  }
}

TEST_CASE("parabolic detection: Farey left branch, neutral at zero") {
  auto farey = farey_system();
  validate(farey);
  auto cls = detect_parabolic(farey);
  REQUIRE(cls.parabolic);
  REQUIRE(cls.info.omega == std::vector<Edge>{0});
  CHECK(std::abs(cls.info.fixed_point[0]) < 1e-9);

  auto gauss = gauss_system(20, 2);
  validate(gauss);
  CHECK_FALSE(detect_parabolic(gauss).parabolic);
}

TEST_CASE("parabolic detection snaps numeric branches to the boundary") {
  auto mp = mp_system(0.5);
  validate(mp);
  auto cls = detect_parabolic(mp);
  REQUIRE(cls.parabolic);
  // branch 1 also fixes a boundary point (x = 1) but is strictly contracting there
  CHECK(cls.info.omega == std::vector<Edge>{0});
  CHECK(std::abs(cls.info.fixed_point[0]) < 1e-9);
}

TEST_CASE("periodic multipliers: closed forms and cyclic invariance") {
  auto s = similarity_system({0.5, 0.25}, {0.0, 0.75});
  CHECK(std::abs(periodic_multiplier(s, {0}) - std::log(2.0)) < 1e-12);
  CHECK(std::abs(periodic_multiplier(s, {0, 1}) - 3 * std::log(2.0)) < 1e-12);

  auto gauss = gauss_system(6, 2);
  Word w = {0, 1, 2};
  double base = periodic_multiplier(gauss, w);
  Word rot1 = {1, 2, 0}, rot2 = {2, 0, 1};
  CHECK(std::abs(periodic_multiplier(gauss, rot1) - base) < 1e-10);
  CHECK(std::abs(periodic_multiplier(gauss, rot2) - base) < 1e-10);

  CHECK_THROWS_AS(periodic_multiplier(s, {}), std::invalid_argument);
}

TEST_CASE("powers-of-two similarities form a lattice with generator log 2") {
  // phi_i(x) = (x+1)/2^i
  auto s = similarity_system({0.5, 0.25}, {0.5, 0.25});
  auto dec = is_D_generic(s, 5);
  REQUIRE(dec.tag == GenericityDecision::Tag::lattice);
  CHECK(std::abs(dec.generator - std::log(2.0)) < 1e-8);

  // common rescaling keeps the verdict, doubles the generator
  auto scaled = similarity_system({0.25, 0.0625}, {0.25, 0.0625});
  auto dec2 = is_D_generic(scaled, 5);
  REQUIRE(dec2.tag == GenericityDecision::Tag::lattice);
  CHECK(std::abs(dec2.generator - 2.0 * std::log(2.0)) < 1e-8);
}

TEST_CASE("half-third similarities are generic: log2/log3 is irrational") {
  auto s = similarity_system({0.5, 1.0 / 3.0}, {0.0, 2.0 / 3.0});
  auto dec = is_D_generic(s, 5);
  CHECK(dec.tag == GenericityDecision::Tag::generic);
  CHECK_FALSE(dec.basis_ratios.empty());
}
