#include "cgdms/maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cgdms {

namespace {

constexpr double kSingularDet = 1e-14;

Complex conj_if(Complex z, bool flip) { return flip ? std::conj(z) : z; }

bool is_identity(const Moebius& m) {
  return !m.conj && std::abs(m.b) < 1e-15 && std::abs(m.c) < 1e-15 &&
         std::abs(m.a - m.d) < 1e-15;
}

}  // namespace

DomainRegion DomainRegion::interval(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("interval needs lo < hi");
  DomainRegion r;
  r.kind = Kind::interval;
  r.iv = {lo, hi};
  return r;
}

DomainRegion DomainRegion::disk(Complex c, double rad) {
  if (!(rad > 0.0)) throw std::invalid_argument("disk needs positive radius");
  DomainRegion r;
  r.kind = Kind::disk;
  r.dk = {c, rad};
  return r;
}

bool DomainRegion::contains(Complex p, double slack) const {
  if (kind == Kind::interval)
    return std::abs(p.imag()) <= slack && p.real() >= iv.lo - slack && p.real() <= iv.hi + slack;
  return std::abs(p - dk.center) <= dk.radius + slack;
}

double DomainRegion::diameter() const {
  return kind == Kind::interval ? iv.length() : 2.0 * dk.radius;
}

Complex DomainRegion::center() const {
  return kind == Kind::interval ? Complex(iv.mid(), 0.0) : dk.center;
}

Moebius Moebius::from_coeffs(Complex a, Complex b, Complex c, Complex d, bool conj) {
  Complex det = a * d - b * c;
  if (std::abs(det) < kSingularDet) throw std::invalid_argument("singular moebius matrix");
  Complex s = std::sqrt(det);
  Moebius m;
  m.a = a / s;
  m.b = b / s;
  m.c = c / s;
  m.d = d / s;
  m.conj = conj;
  return m;
}

Moebius Moebius::inversion(const Disk& circle) {
  Complex a = circle.center;
  double r = circle.radius;
  // z -> a + r^2/conj(z - a), matrix acting on conj(z)
  return from_coeffs(a, Complex(r * r, 0.0) - a * std::conj(a), {1.0, 0.0}, -std::conj(a), true);
}

Moebius Moebius::through_points(Complex z1, Complex z2, Complex z3,
                                Complex w1, Complex w2, Complex w3) {
  // S z = cross ratio map sending z1,z2,z3 to 0,1,infinity
  auto to_standard = [](Complex p1, Complex p2, Complex p3) {
    Complex num = p2 - p3, den = p2 - p1;
    return Moebius::from_coeffs(num, -p1 * num, den, -p3 * den);
  };
  Moebius s = to_standard(z1, z2, z3);
  Moebius t = to_standard(w1, w2, w3);
  return cgdms::compose(t.inverse(), s);
}

Moebius Moebius::inverse() const {
  if (!conj) return from_coeffs(d, -b, -c, a);
  // w = M(conj z)  =>  inverse sends w to conj(M^-1 w)
  return from_coeffs(std::conj(d), -std::conj(b), -std::conj(c), std::conj(a), true);
}

Complex Moebius::pole() const {
  if (std::abs(c) < kSingularDet) return {std::numeric_limits<double>::infinity(), 0.0};
  return -d / c;
}

Moebius compose(const Moebius& f, const Moebius& g) {
  Complex ga = conj_if(g.a, f.conj), gb = conj_if(g.b, f.conj);
  Complex gc = conj_if(g.c, f.conj), gd = conj_if(g.d, f.conj);
  return Moebius::from_coeffs(f.a * ga + f.b * gc, f.a * gb + f.b * gd,
                              f.c * ga + f.d * gc, f.c * gb + f.d * gd,
                              f.conj != g.conj);
}

bool ConformalMap::is_moebius_like() const {
  return std::holds_alternative<Similarity>(rep) || std::holds_alternative<Moebius>(rep);
}

namespace {

Moebius promote(const ConformalMap& m) {
  if (const auto* s = std::get_if<Similarity>(&m.rep))
    return Moebius::from_coeffs({s->ratio, 0.0}, {s->shift, 0.0}, {0.0, 0.0}, {1.0, 0.0});
  return std::get<Moebius>(m.rep);
}

double invert_branch(const NumericBranch& nb, double y) {
  double vlo = std::min(nb.values.lo, nb.values.hi), vhi = std::max(nb.values.lo, nb.values.hi);
  if (y < vlo - 1e-9 || y > vhi + 1e-9)
    throw std::invalid_argument("numeric branch evaluated outside its value interval");
  y = std::clamp(y, vlo, vhi);
  double xl = nb.bracket.lo, xh = nb.bracket.hi;
  double fl = nb.forward(xl) - y, fh = nb.forward(xh) - y;
  double edge_slack = 1e-9 * std::max(1.0, std::abs(y));
  if (std::abs(fl) <= edge_slack && std::abs(fl) <= std::abs(fh)) return xl;
  if (std::abs(fh) <= edge_slack) return xh;
  if (fl * fh > 0.0) throw std::invalid_argument("numeric branch bracket does not straddle value");
  double x = 0.5 * (xl + xh);
  for (int it = 0; it < 200; ++it) {
    double fx = nb.forward(x) - y;
    if (fx == 0.0) return x;
    if ((fx < 0.0) == (fl < 0.0)) {
      xl = x;
      fl = fx;
    } else {
      xh = x;
    }
    double dfx = nb.forward_derivative(x);
    double step = dfx != 0.0 ? fx / dfx : std::numeric_limits<double>::infinity();
    double xn = x - step;
    if (!(xn > xl && xn < xh)) xn = 0.5 * (xl + xh);  // Newton left the bracket
    if (std::abs(xn - x) < 1e-13 * std::max(1.0, std::abs(x))) return xn;
    x = xn;
  }
  return x;
}

}  // namespace

Complex apply(const ConformalMap& m, Complex x) {
  if (const auto* s = std::get_if<Similarity>(&m.rep)) return s->ratio * x + s->shift;
  if (const auto* mb = std::get_if<Moebius>(&m.rep)) {
    Complex u = conj_if(x, mb->conj);
    return (mb->a * u + mb->b) / (mb->c * u + mb->d);
  }
  if (const auto* nb = std::get_if<NumericBranch>(&m.rep))
    return {invert_branch(*nb, x.real()), 0.0};
  const auto& ch = std::get<Chain>(m.rep);
  for (auto it = ch.factors.rbegin(); it != ch.factors.rend(); ++it) x = apply(*it, x);
  return x;
}

double apply_real(const ConformalMap& m, double x) { return apply(m, {x, 0.0}).real(); }

double log_abs_derivative(const ConformalMap& m, Complex x) {
  if (const auto* s = std::get_if<Similarity>(&m.rep)) return std::log(std::abs(s->ratio));
  if (const auto* mb = std::get_if<Moebius>(&m.rep)) {
    if (std::abs(mb->c) < kSingularDet) return std::log(std::abs(mb->a / mb->d));
    Complex u = conj_if(x, mb->conj);
    return -2.0 * std::log(std::abs(mb->c * u + mb->d));
  }
  if (const auto* nb = std::get_if<NumericBranch>(&m.rep)) {
    double pre = invert_branch(*nb, x.real());
    return -std::log(std::abs(nb->forward_derivative(pre)));
  }
  const auto& ch = std::get<Chain>(m.rep);
  double total = 0.0;
  for (auto it = ch.factors.rbegin(); it != ch.factors.rend(); ++it) {
    total += log_abs_derivative(*it, x);
    x = apply(*it, x);
  }
  return total;
}

ConformalMap compose(const ConformalMap& f, const ConformalMap& g) {
  if (const auto* mb = std::get_if<Moebius>(&f.rep); mb && is_identity(*mb)) return g;
  if (const auto* mb = std::get_if<Moebius>(&g.rep); mb && is_identity(*mb)) return f;
  const auto* fs = std::get_if<Similarity>(&f.rep);
  const auto* gs = std::get_if<Similarity>(&g.rep);
  if (fs && gs)
    return ConformalMap(Similarity{fs->ratio * gs->ratio, fs->ratio * gs->shift + fs->shift});
  if (f.is_moebius_like() && g.is_moebius_like())
    return ConformalMap(compose(promote(f), promote(g)));

  Chain out;
  auto push = [&out](const ConformalMap& m) {
    if (const auto* ch = std::get_if<Chain>(&m.rep)) {
      for (const auto& fac : ch->factors) out.factors.push_back(fac);
    } else {
      out.factors.push_back(m);
    }
  };
  push(f);
  push(g);
  // merge adjacent closed-form factors so chains stay short
  std::vector<ConformalMap> merged;
  for (auto& fac : out.factors) {
    if (!merged.empty() && merged.back().is_moebius_like() && fac.is_moebius_like())
      merged.back() = ConformalMap(compose(promote(merged.back()), promote(fac)));
    else
      merged.push_back(std::move(fac));
  }
  if (merged.size() == 1) return merged.front();
  return ConformalMap(Chain{std::move(merged)});
}

ConformalMap compose_word(const Word& w, const std::vector<ConformalMap>& branch) {
  ConformalMap acc;
  for (Edge e : w) {
    if (e < 0 || e >= static_cast<Edge>(branch.size()))
      throw std::invalid_argument("word refers to unknown branch");
    acc = compose(acc, branch[e]);
  }
  return acc;
}

Complex fixed_point(const ConformalMap& m, const DomainRegion& domain, double tol) {
  if (const auto* mb = std::get_if<Moebius>(&m.rep); mb && !mb->conj) {
    // solutions of c z^2 + (d-a) z - b = 0
    std::vector<Complex> roots;
    if (std::abs(mb->c) < kSingularDet) {
      if (std::abs(mb->a - mb->d) > kSingularDet) roots.push_back(mb->b / (mb->a - mb->d));
    } else {
      Complex disc2 = (mb->d - mb->a) * (mb->d - mb->a) + 4.0 * mb->c * mb->b;
      double coeff2 = std::max(std::abs((mb->d - mb->a) * (mb->d - mb->a)),
                               std::abs(4.0 * mb->c * mb->b));
      if (std::abs(disc2) <= 1e-14 * coeff2) {
        // near-double root: the sqrt would amplify rounding noise into a
        // spurious split, so take the midpoint, where the derivative modulus
        // reflects only the matrix-level parabolicity defect
        roots.push_back((mb->a - mb->d) / (2.0 * mb->c));
      } else {
        Complex disc = std::sqrt(disc2);
        roots.push_back(((mb->a - mb->d) + disc) / (2.0 * mb->c));
        roots.push_back(((mb->a - mb->d) - disc) / (2.0 * mb->c));
      }
    }
    const Complex* best = nullptr;
    double best_rate = std::numeric_limits<double>::infinity();
    double slack = 1e-7 * domain.diameter() + 1e-12;
    for (const Complex& r : roots) {
      if (!domain.contains(r, slack)) continue;
      double rate = log_abs_derivative(m, r);
      if (rate < best_rate) {
        best_rate = rate;
        best = &r;
      }
    }
    if (best) return *best;
    // fall through to iteration when rounding pushed both roots outside
  }

  Complex x = domain.center();
  if (domain.kind == DomainRegion::Kind::interval) {
    // secant iteration on h(x) = m(x) - x, geometric even at neutral roots
    double x0 = domain.iv.lo + 0.4 * domain.iv.length();
    double x1 = domain.iv.lo + 0.6 * domain.iv.length();
    double h0 = apply_real(m, x0) - x0;
    for (int it = 0; it < 400; ++it) {
      double h1 = apply_real(m, x1) - x1;
      if (std::abs(h1) <= tol) return {x1, 0.0};
      double denom = h1 - h0;
      double x2 = denom != 0.0 ? x1 - h1 * (x1 - x0) / denom : apply_real(m, x1);
      x2 = std::clamp(x2, domain.iv.lo, domain.iv.hi);
      x0 = x1;
      h0 = h1;
      x1 = x2;
    }
    if (std::abs(apply_real(m, x1) - x1) <= 1e3 * tol) return {x1, 0.0};
    throw std::runtime_error("fixed point iteration failed to converge");
  }
  for (int it = 0; it < 200000; ++it) {
    Complex next = apply(m, x);
    if (std::abs(next - x) <= tol) return next;
    x = next;
  }
  throw std::runtime_error("fixed point iteration failed to converge");
}

namespace {

double min_abs_on_region(Complex c, Complex d, const DomainRegion& region, bool conj) {
  // min over the region of |c u + d| with u = conj(z) or z
  if (region.kind == DomainRegion::Kind::interval) {
    double lo = region.iv.lo, hi = region.iv.hi;  // real axis is conj-invariant
    double cc = std::norm(c);
    double t = -std::real(std::conj(c) * d) / cc;
    t = std::clamp(t, lo, hi);
    double best = std::abs(c * Complex(t, 0.0) + d);
    best = std::min(best, std::abs(c * Complex(lo, 0.0) + d));
    return std::min(best, std::abs(c * Complex(hi, 0.0) + d));
  }
  Complex center = conj ? std::conj(region.dk.center) : region.dk.center;
  double dist = std::abs(center - (-d / c));
  return std::abs(c) * std::max(0.0, dist - region.dk.radius);
}

}  // namespace

double sup_log_derivative(const ConformalMap& m, const DomainRegion& domain) {
  if (const auto* s = std::get_if<Similarity>(&m.rep)) return std::log(std::abs(s->ratio));
  if (const auto* mb = std::get_if<Moebius>(&m.rep)) {
    if (std::abs(mb->c) < kSingularDet) return std::log(std::abs(mb->a / mb->d));
    double lowest = min_abs_on_region(mb->c, mb->d, domain, mb->conj);
    if (lowest <= 0.0) return std::numeric_limits<double>::infinity();
    return -2.0 * std::log(lowest);
  }
  if (const auto* nb = std::get_if<NumericBranch>(&m.rep)) {
    if (domain.kind != DomainRegion::Kind::interval)
      throw std::invalid_argument("numeric branches are one dimensional");
    double lo = std::max(domain.iv.lo, std::min(nb->values.lo, nb->values.hi));
    double hi = std::min(domain.iv.hi, std::max(nb->values.lo, nb->values.hi));
    if (!(lo <= hi)) throw std::invalid_argument("region misses branch values");
    constexpr int kGrid = 129;
    double best = -std::numeric_limits<double>::infinity(), pad = 0.0, prev = 0.0;
    for (int i = 0; i < kGrid; ++i) {
      double y = lo + (hi - lo) * i / (kGrid - 1);
      double g = log_abs_derivative(m, {y, 0.0});
      best = std::max(best, g);
      if (i > 0) pad = std::max(pad, std::abs(g - prev));
      prev = g;
    }
    return best + pad;
  }
  const auto& ch = std::get<Chain>(m.rep);
  double total = 0.0;
  DomainRegion region = domain;
  for (auto it = ch.factors.rbegin(); it != ch.factors.rend(); ++it) {
    total += sup_log_derivative(*it, region);
    region = image_region(*it, region);
  }
  return total;
}

double distortion_constant(const std::vector<ConformalMap>& branch,
                           const std::vector<DomainRegion>& domain_of_branch) {
  if (branch.size() != domain_of_branch.size())
    throw std::invalid_argument("one domain per branch required");
  double worst = 1.0;
  for (size_t e = 0; e < branch.size(); ++e) {
    const DomainRegion& dom = domain_of_branch[e];
    std::vector<Complex> pts;
    if (dom.kind == DomainRegion::Kind::interval) {
      constexpr int kSamples = 33;
      for (int i = 0; i < kSamples; ++i)
        pts.emplace_back(dom.iv.lo + dom.iv.length() * i / (kSamples - 1), 0.0);
    } else {
      pts.push_back(dom.dk.center);
      for (double frac : {0.5, 0.95}) {
        for (int k = 0; k < 8; ++k) {
          double th = 2.0 * M_PI * k / 8;
          pts.push_back(dom.dk.center + frac * dom.dk.radius * Complex(std::cos(th), std::sin(th)));
        }
      }
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Complex p : pts) {
      double g = log_abs_derivative(branch[e], p);
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    worst = std::max(worst, std::exp(hi - lo));
  }
  return 1.1 * worst;
}

Disk image_disk(const Moebius& m, const Disk& d) {
  Disk in = m.conj ? Disk{std::conj(d.center), d.radius} : d;
  if (std::abs(m.c) < kSingularDet) {
    Complex scale = m.a / m.d;
    return {scale * in.center + m.b / m.d, std::abs(scale) * in.radius};
  }
  Complex pole = -m.d / m.c;
  Complex p = in.center - pole;
  double margin = std::norm(p) - in.radius * in.radius;
  if (margin <= kSingularDet * std::max(1.0, std::norm(p)))
    throw std::invalid_argument("moebius pole meets disk");
  // w = a/c - (1/c^2)/(z - pole) for a unit determinant matrix
  Complex inv_center = std::conj(p) / margin;
  double inv_radius = in.radius / std::abs(margin);
  Complex scale = -1.0 / (m.c * m.c);
  return {m.a / m.c + scale * inv_center, std::abs(scale) * inv_radius};
}

Interval image_interval(const ConformalMap& m, const Interval& iv) {
  if (const auto* mb = std::get_if<Moebius>(&m.rep)) {
    if (std::abs(mb->c) >= kSingularDet) {
      Complex pole = mb->pole();
      if (std::abs(pole.imag()) < 1e-12 && pole.real() > iv.lo - 1e-12 &&
          pole.real() < iv.hi + 1e-12)
        throw std::invalid_argument("moebius pole meets interval");
    }
  } else if (std::holds_alternative<Chain>(m.rep)) {
    const auto& ch = std::get<Chain>(m.rep);
    Interval cur = iv;
    for (auto it = ch.factors.rbegin(); it != ch.factors.rend(); ++it)
      cur = image_interval(*it, cur);
    return cur;
  }
  double w1 = apply_real(m, iv.lo), w2 = apply_real(m, iv.hi);
  return {std::min(w1, w2), std::max(w1, w2)};
}

DomainRegion image_region(const ConformalMap& m, const DomainRegion& r) {
  DomainRegion out;
  if (r.kind == DomainRegion::Kind::interval) {
    out.kind = DomainRegion::Kind::interval;
    out.iv = image_interval(m, r.iv);
    return out;
  }
  out.kind = DomainRegion::Kind::disk;
  if (const auto* mb = std::get_if<Moebius>(&m.rep)) {
    out.dk = image_disk(*mb, r.dk);
    return out;
  }
  if (const auto* s = std::get_if<Similarity>(&m.rep)) {
    out.dk = {s->ratio * r.dk.center + s->shift, std::abs(s->ratio) * r.dk.radius};
    return out;
  }
  throw std::invalid_argument("disk images need closed-form maps");
}

}  // namespace cgdms
