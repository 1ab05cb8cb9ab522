#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "cgdms/symbolic.hpp"

namespace cgdms {

using Complex = std::complex<double>;

struct Interval {
  double lo = 0.0, hi = 1.0;
  double length() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
};

struct Disk {
  Complex center{0.0, 0.0};
  double radius = 1.0;
};

// closed interval on the real line or closed disk in the plane
struct DomainRegion {
  enum class Kind { interval, disk } kind = Kind::interval;
  Interval iv;
  Disk dk;

  static DomainRegion interval(double lo, double hi);
  static DomainRegion disk(Complex c, double r);

  bool contains(Complex p, double slack = 1e-9) const;
  double diameter() const;
  Complex center() const;
};

// x -> r*x + c on the line
struct Similarity {
  double ratio = 0.5;
  double shift = 0.0;
};

// z -> (az+b)/(cz+d), applied to conj(z) first when conj is set
// (orientation-reversing maps such as circle inversions). Determinant is
// normalized to 1 at construction; composition parity follows
// (M1,s1)(M2,s2) = (M1 * M2^(conj if s1), s1 xor s2).
struct Moebius {
  Complex a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{1.0, 0.0};
  bool conj = false;

  static Moebius identity() { return {}; }
  static Moebius from_coeffs(Complex a, Complex b, Complex c, Complex d, bool conj = false);
  static Moebius inversion(const Disk& circle);  // z -> center + r^2 / conj(z - center)
  // unique orientation-preserving map sending z1,z2,z3 to w1,w2,w3
  static Moebius through_points(Complex z1, Complex z2, Complex z3,
                                Complex w1, Complex w2, Complex w3);

  Moebius inverse() const;
  Complex pole() const;  // point sent to infinity (of the holomorphic part)
};

Moebius compose(const Moebius& f, const Moebius& g);  // f after g

// inverse branch of a monotone 1D forward map, given by the forward map,
// its derivative, and the bracket the branch inverts into
struct NumericBranch {
  std::function<double(double)> forward;
  std::function<double(double)> forward_derivative;
  Interval bracket;     // branch image: branch(value_interval) == bracket
  Interval values;      // branch domain on the line
};

struct ConformalMap;

// composition chain, factors applied right to left (factors[0] outermost),
// used only when a factor has no closed-form representation
struct Chain {
  std::vector<ConformalMap> factors;
};

struct ConformalMap {
  std::variant<Similarity, Moebius, NumericBranch, Chain> rep;

  ConformalMap() : rep(Moebius::identity()) {}
  ConformalMap(Similarity s) : rep(s) {}
  ConformalMap(Moebius m) : rep(m) {}
  ConformalMap(NumericBranch n) : rep(std::move(n)) {}
  ConformalMap(Chain c) : rep(std::move(c)) {}

  bool is_moebius_like() const;  // similarity or moebius, i.e. closed-form composites
};

Complex apply(const ConformalMap& m, Complex x);
double apply_real(const ConformalMap& m, double x);

// log of the conformal scaling factor |m'(x)|
double log_abs_derivative(const ConformalMap& m, Complex x);

// f after g; merges closed forms, otherwise builds a flattened chain
ConformalMap compose(const ConformalMap& f, const ConformalMap& g);

// phi_w = phi_{w1} o ... o phi_{wn}; empty word gives the identity
ConformalMap compose_word(const Word& w, const std::vector<ConformalMap>& branch);

// x with |m(x)-x| <= tol. Moebius maps use the closed-form root selected
// inside the region (attracting one when both qualify); everything else runs
// Banach iteration from the region center and throws on non-convergence.
Complex fixed_point(const ConformalMap& m, const DomainRegion& domain, double tol = 1e-12);

// upper bound for log|m'| over the region; exact for similarities and for
// Moebius maps (boundary extremal analysis), grid + local-variation pad for
// numeric branches, factorwise sum with image tracking for chains
double sup_log_derivative(const ConformalMap& m, const DomainRegion& domain);

// empirical bounded-distortion constant: sup over branches and sampled point
// pairs of |phi'(x)|/|phi'(y)|, padded by 10%
double distortion_constant(const std::vector<ConformalMap>& branch,
                           const std::vector<DomainRegion>& domain_of_branch);

// exact Moebius images of disks and intervals; throw if the pole meets the set
Disk image_disk(const Moebius& m, const Disk& d);
Interval image_interval(const ConformalMap& m, const Interval& iv);
DomainRegion image_region(const ConformalMap& m, const DomainRegion& r);

}  // namespace cgdms
