#include "cgdms/counting.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "cgdms/thermo.hpp"

namespace cgdms {

namespace {

constexpr double kPruneSlack = 1e-7;   // absorbs the 1e-9 weak-contraction slack per letter
constexpr double kBoundaryTol = 1e-9;

double point_segment_distance(Complex p, const Interval& seg) {
  double x = std::clamp(p.real(), seg.lo, seg.hi);
  return std::abs(p - Complex{x, 0.0});
}

double box_gap(const Interval& bx, const Interval& by, Complex p) {
  double gx = std::max(bx.lo - p.real(), p.real() - bx.hi);
  double gy = std::max(by.lo - p.imag(), p.imag() - by.hi);
  if (gx > 0.0 || gy > 0.0) return std::hypot(std::max(gx, 0.0), std::max(gy, 0.0));
  return std::max(gx, gy);
}

// <= 0 iff the set S meets the region; positive values are separation
double set_gap(const BorelRegion& b, const DomainRegion& s) {
  if (b.kind == BorelRegion::Kind::whole) return -std::numeric_limits<double>::infinity();
  if (s.kind == DomainRegion::Kind::interval) {
    const Interval& t = s.iv;
    switch (b.kind) {
      case BorelRegion::Kind::interval:
        return std::max(b.iv.lo - t.hi, t.lo - b.iv.hi);
      case BorelRegion::Kind::disk:
        return point_segment_distance(b.dk.center, t) - b.dk.radius;
      case BorelRegion::Kind::box: {
        double gx = std::max(b.box_x.lo - t.hi, t.lo - b.box_x.hi);
        double gy = std::max(b.box_y.lo, -b.box_y.hi);
        if (gx > 0.0 || gy > 0.0) return std::hypot(std::max(gx, 0.0), std::max(gy, 0.0));
        return std::max(gx, gy);
      }
      case BorelRegion::Kind::complement: {
        const BorelRegion& in = *b.inner;
        if (in.kind == BorelRegion::Kind::interval)
          return std::min(t.lo - in.iv.lo, in.iv.hi - t.hi);
        if (in.kind == BorelRegion::Kind::disk)
          return in.dk.radius -
                 std::max(std::abs(Complex{t.lo, 0.0} - in.dk.center),
                          std::abs(Complex{t.hi, 0.0} - in.dk.center));
        throw std::invalid_argument("unsupported complement/interval pairing");
      }
      default:
        break;
    }
  }
  if (s.kind == DomainRegion::Kind::disk) {
    const Disk& d = s.dk;
    switch (b.kind) {
      case BorelRegion::Kind::interval:
        return point_segment_distance(d.center, b.iv) - d.radius;
      case BorelRegion::Kind::disk:
        return std::abs(d.center - b.dk.center) - d.radius - b.dk.radius;
      case BorelRegion::Kind::box:
        return box_gap(b.box_x, b.box_y, d.center) - d.radius;
      case BorelRegion::Kind::complement: {
        const BorelRegion& in = *b.inner;
        if (in.kind == BorelRegion::Kind::disk)
          return in.dk.radius - std::abs(d.center - in.dk.center) - d.radius;
        if (in.kind == BorelRegion::Kind::box)
          return -box_gap(in.box_x, in.box_y, d.center) - d.radius;
        if (in.kind == BorelRegion::Kind::interval)
          return -d.radius;  // a disk always pokes out of the real line
        throw std::invalid_argument("unsupported complement/disk pairing");
      }
      default:
        break;
    }
  }
  throw std::invalid_argument("unsupported region/image pairing");
}

struct Tally {
  std::vector<std::int64_t> bucket;
  std::int64_t expanded = 0;
  std::int64_t boundary = 0;

  explicit Tally(size_t grid) : bucket(grid, 0) {}

  void add(const std::vector<double>& grid, double value) {
    size_t i = std::lower_bound(grid.begin(), grid.end(), value) - grid.begin();
    if (i < bucket.size()) ++bucket[i];
  }
};

struct Budget {
  std::atomic<std::int64_t> remaining;
  std::atomic<bool> exceeded{false};

  bool take() {
    if (remaining.fetch_sub(1, std::memory_order_relaxed) <= 0) {
      exceeded.store(true, std::memory_order_relaxed);
      return false;
    }
    return true;
  }
};

void check_options(const CountOptions& opt) {
  if (opt.t_grid.empty()) throw std::invalid_argument("empty T grid");
  for (size_t i = 1; i < opt.t_grid.size(); ++i)
    if (!(opt.t_grid[i] > opt.t_grid[i - 1]))
      throw std::invalid_argument("T grid must be strictly increasing");
  if (opt.threads < 1) throw std::invalid_argument("thread count must be positive");
}

CountingReport finalize(std::vector<Tally> parts, const CountOptions& opt, bool truncated,
                        const char* note) {
  CountingReport r;
  r.t_grid = opt.t_grid;
  r.counts.assign(opt.t_grid.size(), 0);
  for (const Tally& t : parts) {
    for (size_t i = 0; i < r.counts.size(); ++i) r.counts[i] += t.bucket[i];
    r.words_expanded += t.expanded;
    r.boundary_hits += t.boundary;
  }
  std::partial_sum(r.counts.begin(), r.counts.end(), r.counts.begin());
  r.truncated = truncated;
  if (truncated) r.truncation_notes = note;
  r.delta = opt.delta;
  if (!std::isnan(opt.delta)) {
    r.normalized.resize(r.counts.size());
    for (size_t i = 0; i < r.counts.size(); ++i)
      r.normalized[i] = r.counts[i] * std::exp(-opt.delta * r.t_grid[i]);
    size_t n = r.normalized.size();
    size_t start = n - std::max<size_t>(2, n / 3);
    if (start < n - 1) {
      double lo = r.normalized[start], hi = r.normalized[start], sum = 0.0;
      for (size_t i = start; i < n; ++i) {
        lo = std::min(lo, r.normalized[i]);
        hi = std::max(hi, r.normalized[i]);
        sum += r.normalized[i];
      }
      r.limit_estimate = sum / (n - start);
      r.oscillation = lo > 0.0 ? hi / lo - 1.0 : std::numeric_limits<double>::infinity();
    }
  }
  return r;
}

// runs fn(root_edge, tally) over the given roots, split round-robin by thread
template <typename Fn>
std::vector<Tally> run_over_roots(const std::vector<Edge>& roots, const CountOptions& opt,
                                  Fn&& fn) {
  int workers = std::max(1, std::min<int>(opt.threads, static_cast<int>(roots.size())));
  std::vector<Tally> parts(workers, Tally(opt.t_grid.size()));
  if (workers == 1) {
    for (Edge e : roots) fn(e, parts[0]);
    return parts;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (size_t i = w; i < roots.size(); i += workers) fn(roots[i], parts[w]);
    });
  for (auto& t : pool) t.join();
  return parts;
}

Edge coding_head(const ReferenceCoding& rho) {
  if (rho.period.empty()) throw std::invalid_argument("reference coding needs a period");
  return rho.pre.empty() ? rho.period.front() : rho.pre.front();
}

}  // namespace

BorelRegion BorelRegion::whole() { return {}; }

BorelRegion BorelRegion::interval(double lo, double hi) {
  BorelRegion b;
  b.kind = Kind::interval;
  b.iv = {lo, hi};
  return b;
}

BorelRegion BorelRegion::box(double x0, double x1, double y0, double y1) {
  BorelRegion b;
  b.kind = Kind::box;
  b.box_x = {x0, x1};
  b.box_y = {y0, y1};
  return b;
}

BorelRegion BorelRegion::disk(Complex c, double r) {
  BorelRegion b;
  b.kind = Kind::disk;
  b.dk = {c, r};
  return b;
}

BorelRegion BorelRegion::complement(BorelRegion inner) {
  BorelRegion b;
  b.kind = Kind::complement;
  b.inner = std::make_shared<BorelRegion>(std::move(inner));
  return b;
}

double BorelRegion::signed_gap(Complex p) const {
  switch (kind) {
    case Kind::whole:
      return -std::numeric_limits<double>::infinity();
    case Kind::interval: {
      double gx = std::max(iv.lo - p.real(), p.real() - iv.hi);
      double gy = std::abs(p.imag());
      if (gx > 0.0 || gy > 0.0) return std::hypot(std::max(gx, 0.0), gy);
      return gx;
    }
    case Kind::box:
      return box_gap(box_x, box_y, p);
    case Kind::disk:
      return std::abs(p - dk.center) - dk.radius;
    case Kind::complement:
      return -inner->signed_gap(p);
  }
  return 0.0;
}

TargetSet TargetSet::region(const DomainRegion& r) {
  if (!(r.diameter() > 0.0)) throw std::invalid_argument("target region must have positive size");
  TargetSet t;
  t.is_region = true;
  t.hull = r;
  return t;
}

TargetSet TargetSet::point_set(std::vector<Complex> pts) {
  if (pts.size() < 2) throw std::invalid_argument("target set needs at least 2 points");
  TargetSet t;
  t.points = std::move(pts);
  return t;
}

std::vector<double> uniform_grid(double t_min, double t_max, int points) {
  if (points < 1 || !(t_max > t_min)) throw std::invalid_argument("bad grid request");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i)
    g[i] = points == 1 ? t_max : t_min + (t_max - t_min) * i / (points - 1);
  return g;
}

CountingReport count_preimages(const GdmsSystem& system, const ReferenceCoding& rho,
                               const CountOptions& opt) {
  check_options(opt);
  Complex xi = reference_point(system, rho.pre, rho.period);
  Edge head = coding_head(rho);
  double t_max = opt.t_grid.back();
  Budget budget{{opt.node_budget}, {}};

  std::vector<Edge> roots;
  for (Edge e = 0; e < system.alphabet.edge_count(); ++e)
    if (system.incidence.allows(e, head)) roots.push_back(e);

  struct Node {
    Edge first;
    Complex x;
    double lam;
  };
  auto walk = [&](Edge root, Tally& tally) {
    std::vector<Node> stack;
    stack.push_back({root, cgdms::apply(system.branch[root], xi),
                     -log_abs_derivative(system.branch[root], xi)});
    if (stack.back().lam > t_max + kPruneSlack) return;
    while (!stack.empty()) {
      Node node = stack.back();
      stack.pop_back();
      if (!budget.take()) return;
      ++tally.expanded;
      if (node.lam <= t_max) {
        double gap = opt.region.signed_gap(node.x);
        if (gap < kBoundaryTol) {
          tally.add(opt.t_grid, node.lam);
          if (std::abs(gap) < kBoundaryTol) ++tally.boundary;
        }
      }
      for (Edge e : system.incidence.predecessors(node.first)) {
        double lam = node.lam - log_abs_derivative(system.branch[e], node.x);
        if (lam > t_max + kPruneSlack) continue;
        stack.push_back({e, cgdms::apply(system.branch[e], node.x), lam});
      }
    }
  };
  auto parts = run_over_roots(roots, opt, walk);
  return finalize(std::move(parts), opt, budget.exceeded.load(),
                  "node budget exhausted; counts are a lower bound");
}

CountingReport count_periodic(const GdmsSystem& system, const CountOptions& opt) {
  check_options(opt);
  double t_max = opt.t_grid.back();
  Budget budget{{opt.node_budget}, {}};

  std::vector<Edge> roots(system.alphabet.edge_count());
  std::iota(roots.begin(), roots.end(), 0);

  struct Node {
    Edge first;
    ConformalMap comp;
  };
  auto walk = [&](Edge root, Tally& tally) {
    const DomainRegion& dom = system.terminal_region(root);
    std::vector<Node> stack;
    stack.push_back({root, system.branch[root]});
    if (-sup_log_derivative(stack.back().comp, dom) > t_max + kPruneSlack) return;
    while (!stack.empty()) {
      Node node = std::move(stack.back());
      stack.pop_back();
      if (!budget.take()) return;
      ++tally.expanded;
      if (system.incidence.allows(root, node.first)) {
        Complex x = fixed_point(node.comp, dom, 1e-13);
        double lam = -log_abs_derivative(node.comp, x);
        if (lam <= t_max) {
          double gap = opt.region.signed_gap(x);
          if (gap < kBoundaryTol) {
            tally.add(opt.t_grid, lam);
            if (std::abs(gap) < kBoundaryTol) ++tally.boundary;
          }
        }
      }
      for (Edge e : system.incidence.predecessors(node.first)) {
        ConformalMap comp = compose(system.branch[e], node.comp);
        if (-sup_log_derivative(comp, dom) > t_max + kPruneSlack) continue;
        stack.push_back({e, std::move(comp)});
      }
    }
  };
  auto parts = run_over_roots(roots, opt, walk);
  return finalize(std::move(parts), opt, budget.exceeded.load(),
                  "node budget exhausted; counts are a lower bound");
}

CountingReport count_diameters(const GdmsSystem& system, const ReferenceCoding& rho,
                               const TargetSet& target, const CountOptions& opt,
                               DiameterMode mode) {
  check_options(opt);
  Complex xi = reference_point(system, rho.pre, rho.period);
  Edge head = coding_head(rho);
  double t_max = opt.t_grid.back();
  Budget budget{{opt.node_budget}, {}};

  std::vector<Edge> roots;
  for (Edge e = 0; e < system.alphabet.edge_count(); ++e)
    if (system.incidence.allows(e, head)) roots.push_back(e);

  struct Node {
    Edge first;
    Complex x;
    DomainRegion img;
    std::vector<Complex> pts;
  };
  auto hull_diameter = [](const std::vector<Complex>& pts) {
    double d = 0.0;
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, std::abs(pts[i] - pts[j]));
    return d;
  };
  auto delta_of = [&](const Node& n) {
    return -std::log(target.is_region ? n.img.diameter() : hull_diameter(n.pts));
  };
  auto walk = [&](Edge root, Tally& tally) {
    Node seed;
    seed.first = root;
    seed.x = cgdms::apply(system.branch[root], xi);
    if (target.is_region) {
      seed.img = image_region(system.branch[root], target.hull);
    } else {
      for (Complex p : target.points) seed.pts.push_back(cgdms::apply(system.branch[root], p));
    }
    if (delta_of(seed) > t_max + kPruneSlack) return;
    std::vector<Node> stack;
    stack.push_back(std::move(seed));
    while (!stack.empty()) {
      Node node = std::move(stack.back());
      stack.pop_back();
      if (!budget.take()) return;
      ++tally.expanded;
      double dv = delta_of(node);
      if (dv <= t_max) {
        double gap = mode == DiameterMode::point
                         ? opt.region.signed_gap(node.x)
                         : (target.is_region ? set_gap(opt.region, node.img)
                                             : [&] {
                                                 double g = std::numeric_limits<double>::max();
                                                 for (Complex p : node.pts)
                                                   g = std::min(g, opt.region.signed_gap(p));
                                                 return g;
                                               }());
        if (gap < kBoundaryTol) {
          tally.add(opt.t_grid, dv);
          if (std::abs(gap) < kBoundaryTol) ++tally.boundary;
        }
      }
      for (Edge e : system.incidence.predecessors(node.first)) {
        Node child;
        child.first = e;
        child.x = cgdms::apply(system.branch[e], node.x);
        if (target.is_region) {
          child.img = image_region(system.branch[e], node.img);
        } else {
          child.pts.reserve(node.pts.size());
          for (Complex p : node.pts) child.pts.push_back(cgdms::apply(system.branch[e], p));
        }
        if (delta_of(child) > t_max + kPruneSlack) continue;
        stack.push_back(std::move(child));
      }
    }
  };
  auto parts = run_over_roots(roots, opt, walk);
  return finalize(std::move(parts), opt, budget.exceeded.load(),
                  "node budget exhausted; counts are a lower bound");
}

double growth_rate(const CountingReport& report) {
  if (report.t_grid.size() < 5) throw std::invalid_argument("growth fit needs >= 5 grid points");
  size_t n = report.t_grid.size();
  // trailing half: lattice staircases need several full periods to fit flat
  size_t start = n - std::max<size_t>(3, n / 2);
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  int m = 0;
  for (size_t i = start; i < n; ++i) {
    if (report.counts[i] <= 0) continue;
    double t = report.t_grid[i], y = std::log(static_cast<double>(report.counts[i]));
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  return (m * sty - st * sy) / (m * stt - st * st);
}

}  // namespace cgdms
