#include "cgdms/kleinian.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

namespace cgdms {
namespace {

constexpr double kGeomTol = 1e-9;

double scale_of(const Circle& c) { return c.is_line() ? 1.0 : std::max(1.0, c.radius); }

Complex mob(const Moebius& m, Complex z) { return cgdms::apply(ConformalMap(m), z); }

const Moebius& moebius_rep(const ConformalMap& f, const char* what) {
  const Moebius* m = std::get_if<Moebius>(&f.rep);
  if (!m) throw std::invalid_argument(std::string(what) + " must be a Moebius map");
  return *m;
}

// how far p sits outside the region named by rim.side; negative means inside
double side_clearance(const Circle& rim, Complex p) {
  if (rim.is_line()) {
    double left = ((p - rim.center) / rim.axis).imag();
    return rim.side == Circle::Side::interior ? -left : left;
  }
  double d = std::abs(p - rim.center);
  return rim.side == Circle::Side::interior ? d - rim.radius : rim.radius - d;
}

std::array<Complex, 3> rim_points(const Circle& rim) {
  if (rim.is_line())
    return {rim.center - rim.axis, rim.center, rim.center + rim.axis};
  Complex c = rim.center;
  double r = rim.radius;
  return {c + r, c + r * Complex(-0.5, 0.8660254037844386),
          c + r * Complex(-0.5, -0.8660254037844386)};
}

// a point one radius-independent step into the region
Complex region_sample(const Circle& rim) {
  if (rim.is_line()) {
    Complex left = Complex(0.0, 1.0) * rim.axis;
    return rim.side == Circle::Side::interior ? rim.center + left : rim.center - left;
  }
  if (rim.side == Circle::Side::interior) return rim.center;
  return rim.center + Complex(3.0 * rim.radius, 0.0);
}

// distance of the configuration from tangency, infinite when impossible
double tangency_residual(const Circle& a, const Circle& b) {
  if (a.is_line() && b.is_line()) return std::numeric_limits<double>::infinity();
  if (a.is_line() || b.is_line()) {
    const Circle& line = a.is_line() ? a : b;
    const Circle& circ = a.is_line() ? b : a;
    double dist = std::abs(((circ.center - line.center) / line.axis).imag());
    return std::abs(dist - circ.radius);
  }
  bool ax = a.side == Circle::Side::exterior, bx = b.side == Circle::Side::exterior;
  if (ax && bx) return std::numeric_limits<double>::infinity();
  double d = std::abs(b.center - a.center);
  if (!ax && !bx) return std::abs(d - (a.radius + b.radius));
  const Circle& outer = ax ? a : b;
  const Circle& inner = ax ? b : a;
  return std::abs(d - (outer.radius - inner.radius));
}

// the bounding curves never meet: separate, nested, or line clear of circle
bool curves_disjoint(const Circle& a, const Circle& b) {
  double scale = std::max(scale_of(a), scale_of(b));
  if (a.is_line() && b.is_line()) return false;
  if (a.is_line() || b.is_line()) {
    const Circle& line = a.is_line() ? a : b;
    const Circle& circ = a.is_line() ? b : a;
    double dist = std::abs(((circ.center - line.center) / line.axis).imag());
    return dist > circ.radius + kGeomTol * scale;
  }
  double d = std::abs(b.center - a.center);
  return d > a.radius + b.radius + kGeomTol * scale ||
         d < std::abs(a.radius - b.radius) - kGeomTol * scale;
}

// inversion in a circle rim, reflection when the rim is a line
Moebius rim_inversion(const Circle& rim) {
  if (!rim.is_line()) return Moebius::inversion({rim.center, rim.radius});
  Complex u2 = rim.axis * rim.axis;
  return Moebius::from_coeffs(u2, rim.center - u2 * std::conj(rim.center), {0.0, 0.0},
                              {1.0, 0.0}, true);
}

// image of the region bounded by rim under h, as an honest disk; the pole of
// h must lie strictly in the complementary side
Disk image_region_disk(const Moebius& h, const Circle& rim) {
  auto pts = rim_points(rim);
  ConformalMap hm(h);
  Circle img = circle_through(cgdms::apply(hm, pts[0]), cgdms::apply(hm, pts[1]), cgdms::apply(hm, pts[2]));
  if (img.is_line()) throw std::invalid_argument("region image is not a disk");
  if (std::abs(cgdms::apply(hm, region_sample(rim)) - img.center) > img.radius)
    throw std::invalid_argument("region image is unbounded");
  return {img.center, img.radius};
}

// both circles tangent to a mutually tangent triple (the Descartes
// relation), verified against the inputs before being returned
std::vector<Circle> tangent_fillers(const Circle& a, const Circle& b, const Circle& c) {
  const Circle* in[3] = {&a, &b, &c};
  double k[3];
  Complex z[3];
  double scale = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (in[i]->is_line()) throw std::invalid_argument("filler circles need honest circles");
    k[i] = in[i]->curvature();
    z[i] = in[i]->center;
    scale = std::max(scale, scale_of(*in[i]));
  }
  double e = k[0] * k[1] + k[1] * k[2] + k[2] * k[0];
  double root = std::sqrt(std::max(0.0, e));
  Complex ez = k[0] * k[1] * z[0] * z[1] + k[1] * k[2] * z[1] * z[2] + k[2] * k[0] * z[2] * z[0];
  Complex zroot = std::sqrt(ez);
  std::vector<Circle> out;
  for (double s1 : {1.0, -1.0}) {
    double k0 = k[0] + k[1] + k[2] + s1 * 2.0 * root;
    if (std::abs(k0) < kGeomTol) continue;  // the filler degenerates to a line
    for (double s2 : {1.0, -1.0}) {
      Complex z0 = (k[0] * z[0] + k[1] * z[1] + k[2] * z[2] + s2 * 2.0 * zroot) / k0;
      Circle cand{z0, 1.0 / std::abs(k0),
                  k0 > 0.0 ? Circle::Side::interior : Circle::Side::exterior};
      double resid = 0.0;
      for (int i = 0; i < 3; ++i) resid = std::max(resid, tangency_residual(cand, *in[i]));
      if (resid > 1e-7 * scale) continue;
      bool dup = false;
      for (const Circle& seen : out)
        dup = dup || (std::abs(seen.center - cand.center) <= 1e-8 * scale &&
                      std::abs(seen.radius - cand.radius) <= 1e-8 * scale);
      if (!dup) out.push_back(cand);
    }
  }
  if (out.empty())
    throw std::invalid_argument("triple has no tangent filler: circles are not mutually tangent");
  return out;
}

// the filler that is not the omitted member of the tangent quadruple
Circle gasket_seed(const Circle& a, const Circle& b, const Circle& c, const Circle& omitted,
                   double scale) {
  for (const Circle& cand : tangent_fillers(a, b, c)) {
    bool same = !omitted.is_line() &&
                std::abs(cand.center - omitted.center) <= 1e-6 * scale &&
                std::abs(cand.radius - omitted.radius) <= 1e-6 * scale;
    if (!same) return cand;
  }
  throw std::invalid_argument("gasket seed not found: quadruple is not tangent");
}

struct TriangleMaps {
  std::array<Moebius, 3> map;
  std::array<Complex, 3> vertex;
};

// map i fixes the tangency of the other two circles and carries the other
// vertices onto the tangency points of the inscribed circle
TriangleMaps triangle_maps(const Circle& c1, const Circle& c2, const Circle& c3,
                           const Circle& inner) {
  const Circle* c[3] = {&c1, &c2, &c3};
  TriangleMaps tm;
  tm.vertex[0] = tangency_point(c2, c3);
  tm.vertex[1] = tangency_point(c1, c3);
  tm.vertex[2] = tangency_point(c1, c2);
  Complex touch[3];
  for (int i = 0; i < 3; ++i) touch[i] = tangency_point(inner, *c[i]);
  for (int i = 0; i < 3; ++i) {
    // the side (i, j) runs along the circle both endpoints share, c[kk], so
    // its image must end at the inscribed tangency with that same circle
    int j = (i + 1) % 3, kk = (i + 2) % 3;
    tm.map[i] = Moebius::through_points(tm.vertex[i], tm.vertex[j], tm.vertex[kk],
                                        tm.vertex[i], touch[kk], touch[j]);
  }
  return tm;
}

// ---- packing enumeration ----

struct EnumBudget {
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

struct GasketSpec {
  std::array<Moebius, 3> maps;
  Disk seed;
  Word prefix;  // letters recorded ahead of the branch letters
  int gen_offset = 0;
};

void check_packing_options(const PackingOptions& opt) {
  if ((opt.generation >= 0) == (opt.t_max >= 0.0))
    throw std::invalid_argument("select exactly one of generation or t_max");
  if (opt.node_budget <= 0) throw std::invalid_argument("node budget must be positive");
  if (opt.threads < 1) throw std::invalid_argument("thread count must be positive");
}

// depth-first walk over phi_w(seed); max_len < 0 lifts the length cut,
// min_diam < 0 lifts the diameter cut; the node's circle is the inscribed
// circle of its curvilinear triangle, hence the largest circle anywhere in
// that triangle, so once it falls under the cut the whole subtree does
template <typename Visit>
void walk_gasket(const std::array<Moebius, 3>& f, const Moebius& root, const Disk& seed,
                 int max_len, double min_diam, Word& word, int base_len, int gen_offset,
                 EnumBudget& budget, Visit&& visit) {
  struct Frame {
    Moebius comp;
    int next = 0;
    bool is_root = false;
  };
  auto enter = [&](const Moebius& comp) -> bool {
    if (!budget.take()) return false;
    Disk circle;
    try {
      circle = image_disk(comp, seed);
    } catch (const std::invalid_argument&) {
      return false;  // precision exhausted far below any useful cut
    }
    if (min_diam >= 0.0 && 2.0 * circle.radius < min_diam) return false;
    int len = static_cast<int>(word.size()) - base_len;
    visit(circle, gen_offset + len, word);
    return !(max_len >= 0 && len >= max_len);
  };
  if (!enter(root)) return;
  std::vector<Frame> stack;
  stack.push_back({root, 0, true});
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next == 3) {
      bool is_root = top.is_root;
      stack.pop_back();
      if (!is_root) word.pop_back();
      continue;
    }
    int letter = top.next++;
    Moebius child = compose(top.comp, f[letter]);
    word.push_back(letter);
    if (enter(child))
      stack.push_back({child, 0, false});
    else
      word.pop_back();
  }
}

// head circles first, then each gasket in order, each gasket split into its
// seed node plus three subtrees so threads can share the work; parts are
// concatenated in task order, so the listing is deterministic
Packing run_gaskets(const std::vector<GasketSpec>& gaskets, const std::vector<PackingEntry>& head,
                    const PackingOptions& opt) {
  check_packing_options(opt);
  double min_diam = opt.t_max >= 0.0 ? std::exp(-opt.t_max) : -1.0;
  EnumBudget budget{{opt.node_budget}, {}};

  Packing out;
  for (const PackingEntry& e : head) {
    if (!budget.take()) break;
    bool keep = opt.generation >= 0 ? e.generation <= opt.generation
                                    : 2.0 * e.circle.radius >= min_diam;
    if (keep) out.circles.push_back(e);
  }

  struct Task {
    int gasket;
    int letter;  // -1 visits just the seed node
  };
  std::vector<Task> tasks;
  for (int g = 0; g < static_cast<int>(gaskets.size()); ++g) {
    if (opt.generation >= 0 && gaskets[g].gen_offset > opt.generation) continue;
    tasks.push_back({g, -1});
    for (int l = 0; l < 3; ++l) tasks.push_back({g, l});
  }

  std::vector<std::vector<PackingEntry>> parts(tasks.size());
  auto run_task = [&](size_t ti) {
    const GasketSpec& gs = gaskets[tasks[ti].gasket];
    int letter = tasks[ti].letter;
    int max_len = opt.generation >= 0 ? opt.generation - gs.gen_offset : -1;
    Word word = gs.prefix;
    auto visit = [&parts, ti](const Disk& d, int gen, const Word& w) {
      parts[ti].push_back({Circle{d.center, d.radius, Circle::Side::interior}, gen, w});
    };
    if (letter < 0) {
      walk_gasket(gs.maps, Moebius::identity(), gs.seed, 0, min_diam, word,
                  static_cast<int>(gs.prefix.size()), gs.gen_offset, budget, visit);
    } else {
      if (max_len == 0) return;
      word.push_back(letter);
      walk_gasket(gs.maps, gs.maps[letter], gs.seed, max_len, min_diam, word,
                  static_cast<int>(gs.prefix.size()), gs.gen_offset, budget, visit);
    }
  };

  int workers = std::max(1, std::min<int>(opt.threads, static_cast<int>(tasks.size())));
  if (workers == 1) {
    for (size_t ti = 0; ti < tasks.size(); ++ti) run_task(ti);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (size_t ti = static_cast<size_t>(w); ti < tasks.size(); ti += workers) run_task(ti);
      });
    for (auto& t : pool) t.join();
  }

  for (auto& part : parts)
    out.circles.insert(out.circles.end(), part.begin(), part.end());
  if (budget.exceeded.load()) {
    out.truncated = true;
    out.note = "node budget exhausted; the listing is a prefix";
  }
  return out;
}

}  // namespace

Disk Circle::disk() const {
  if (is_line()) throw std::invalid_argument("a line bounds no disk");
  return {center, radius};
}

Circle Circle::line(Complex point, Complex direction) {
  double n = std::abs(direction);
  if (!(n > 0.0)) throw std::invalid_argument("line direction must be nonzero");
  return {point, std::numeric_limits<double>::infinity(), Side::interior, direction / n};
}

Complex tangency_point(const Circle& a, const Circle& b) {
  double scale = std::max(scale_of(a), scale_of(b));
  if (tangency_residual(a, b) > kGeomTol * scale)
    throw std::invalid_argument("circles are not tangent: invalid geometry");
  if (a.is_line() || b.is_line()) {
    const Circle& line = a.is_line() ? a : b;
    const Circle& circ = a.is_line() ? b : a;
    double along = ((circ.center - line.center) / line.axis).real();
    return line.center + line.axis * along;
  }
  bool ax = a.side == Circle::Side::exterior, bx = b.side == Circle::Side::exterior;
  double d = std::abs(b.center - a.center);
  if (d < kGeomTol * scale)
    throw std::invalid_argument("concentric circles are not tangent");
  if (!ax && !bx) return a.center + (a.radius / d) * (b.center - a.center);
  const Circle& outer = ax ? a : b;
  const Circle& inner = ax ? b : a;
  return outer.center + (outer.radius / d) * (inner.center - outer.center);
}

Circle circle_through(Complex p, Complex q, Complex r) {
  double scale = std::max({std::abs(q - p), std::abs(r - p), std::abs(r - q)});
  double least = std::min({std::abs(q - p), std::abs(r - p), std::abs(r - q)});
  if (!(scale > 0.0) || least <= 1e-12 * scale)
    throw std::invalid_argument("circle through coincident points");
  double cross = ((q - p) * std::conj(r - p)).imag();
  if (std::abs(cross) <= 1e-10 * scale * scale) return Circle::line(p, q - p);
  double ax = 2.0 * (q.real() - p.real()), ay = 2.0 * (q.imag() - p.imag());
  double bx = 2.0 * (r.real() - p.real()), by = 2.0 * (r.imag() - p.imag());
  double c1 = std::norm(q) - std::norm(p);
  double c2 = std::norm(r) - std::norm(p);
  double det = ax * by - ay * bx;
  Complex z{(c1 * by - c2 * ay) / det, (ax * c2 - bx * c1) / det};
  return {z, std::abs(z - p), Circle::Side::interior};
}

Edge SchottkyGdms::edge_index(int a, int b) const {
  for (size_t e = 0; e < pair_of_edge.size(); ++e)
    if (pair_of_edge[e].first == a && pair_of_edge[e].second == b)
      return static_cast<Edge>(e);
  return -1;
}

SchottkyGdms build_schottky_gdms(const SchottkyData& data) {
  const int q = static_cast<int>(data.generator.size());
  if (q == 0 || data.ball.size() != data.generator.size() ||
      data.mirror.size() != data.generator.size())
    throw std::invalid_argument("schottky data needs matching ball, mirror, and generator lists");

  std::vector<Moebius> fwd, back;
  for (int j = 0; j < q; ++j) {
    fwd.push_back(moebius_rep(data.generator[j], "schottky generator"));
    back.push_back(fwd.back().inverse());
  }

  std::vector<int> labels;
  for (int j = 1; j <= q; ++j) {
    labels.push_back(j);
    labels.push_back(-j);
  }
  auto ball_of = [&](int lab) -> const Disk& {
    return lab > 0 ? data.ball[lab - 1] : data.mirror[-lab - 1];
  };
  auto map_of = [&](int lab) -> const Moebius& {
    return lab > 0 ? fwd[lab - 1] : back[-lab - 1];
  };
  auto vertex_of = [&](int lab) -> Vertex {
    return lab > 0 ? 2 * (lab - 1) : 2 * (-lab - 1) + 1;
  };

  double scale = 1.0;
  for (int lab : labels) scale = std::max(scale, ball_of(lab).radius);

  // open balls pairwise disjoint; closures may touch only when allowed
  for (size_t i = 0; i < labels.size(); ++i)
    for (size_t j = i + 1; j < labels.size(); ++j) {
      const Disk& A = ball_of(labels[i]);
      const Disk& B = ball_of(labels[j]);
      double d = std::abs(A.center - B.center);
      if (d < A.radius + B.radius - kGeomTol * scale)
        throw std::invalid_argument("schottky balls overlap: invalid geometry");
      if (!data.tangency_allowed && d < A.radius + B.radius + kGeomTol * scale)
        throw std::invalid_argument("schottky ball closures touch: invalid geometry");
    }

  // each generator carries the mirror boundary onto the ball boundary and
  // the far exterior into the ball
  for (int j = 0; j < q; ++j) {
    const Disk& src = data.mirror[j];
    const Disk& dst = data.ball[j];
    for (int k = 0; k < 12; ++k) {
      double th = 2.0 * 3.14159265358979323846 * k / 12.0;
      Complex x = src.center + src.radius * Complex(std::cos(th), std::sin(th));
      Complex y = mob(fwd[j], x);
      if (std::abs(std::abs(y - dst.center) - dst.radius) > kGeomTol * scale)
        throw std::invalid_argument("schottky pairing breaks on the boundary: invalid geometry");
    }
    Complex far = src.center + Complex(4.0 * src.radius, 0.0);
    if (std::abs(mob(fwd[j], far) - dst.center) > dst.radius + kGeomTol * scale)
      throw std::invalid_argument("schottky pairing is inverted: invalid geometry");
  }

  GdmsSystem sys;
  sys.name = "schottky";
  sys.domain.resize(2 * q);
  for (int lab : labels) {
    const Disk& d = ball_of(lab);
    sys.domain[vertex_of(lab)] = DomainRegion::disk(d.center, d.radius);
  }

  Alphabet alpha;
  alpha.vertex_count = 2 * q;
  std::vector<std::pair<int, int>> pairs;
  for (int la : labels)
    for (int lb : labels) {
      if (lb == -la) continue;
      pairs.push_back({la, lb});
      alpha.initial.push_back(vertex_of(la));
      alpha.terminal.push_back(vertex_of(lb));
      sys.branch.push_back(ConformalMap(map_of(la)));
    }
  sys.alphabet = alpha;
  sys.incidence = IncidenceMatrix::from_rule(
      alpha, [&pairs](Edge x, Edge y) { return pairs[x].second == pairs[y].first; });
  sys.iterate_order = data.tangency_allowed ? 2 : 1;

  SchottkyGdms out{std::move(sys), std::move(pairs)};

  // declare the tangency words this geometry certifies as neutral
  if (data.tangency_allowed) {
    auto declare = [&](Word w, Complex t) {
      for (Edge e : w)
        if (e < 0) return;
      ConformalMap m = out.system.word_map(w);
      if (std::abs(cgdms::apply(m, t) - t) > 1e-7 * scale) return;
      if (std::abs(log_abs_derivative(m, t)) > 1e-7) return;
      out.system.declared_parabolic.push_back(std::move(w));
    };
    for (size_t i = 0; i < labels.size(); ++i)
      for (size_t j = i + 1; j < labels.size(); ++j) {
        int p = labels[i], r = labels[j];
        const Disk& A = ball_of(p);
        const Disk& B = ball_of(r);
        double d = std::abs(A.center - B.center);
        if (std::abs(d - (A.radius + B.radius)) > kGeomTol * scale) continue;
        Complex t = A.center + (A.radius / d) * (B.center - A.center);
        if (r == -p) {
          declare({out.edge_index(p, p)}, t);
          declare({out.edge_index(-p, -p)}, t);
        } else {
          declare({out.edge_index(p, -r), out.edge_index(-r, p)}, t);
          declare({out.edge_index(r, -p), out.edge_index(-p, r)}, t);
        }
      }
  }
  return out;
}

ApollonianGroup build_apollonian(const Circle& c1, const Circle& c2, const Circle& c3,
                                 const Circle& c4) {
  std::array<Circle, 4> c{c1, c2, c3, c4};
  if (c4.side != Circle::Side::exterior)
    throw std::invalid_argument("the bounding circle goes last and carries Side::exterior");
  for (int i = 0; i < 3; ++i)
    if (c[i].side != Circle::Side::interior || c[i].is_line())
      throw std::invalid_argument("the first three circles must be interior disks");
  if (c4.is_line()) throw std::invalid_argument("the bounding circle must be an honest circle");
  double scale = c4.radius;

  Complex t[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) t[i][j] = t[j][i] = tangency_point(c[i], c[j]);

  ApollonianGroup g;
  for (int i = 0; i < 4; ++i) {
    int o[3], n = 0;
    for (int j = 0; j < 4; ++j)
      if (j != i) o[n++] = j;
    g.dual[i] = circle_through(t[o[0]][o[1]], t[o[0]][o[2]], t[o[1]][o[2]]);
    if (!curves_disjoint(g.dual[i], c[i]))
      throw std::invalid_argument("dual circle meets its seed circle: invalid geometry");
  }
  if (g.dual[3].is_line())
    throw std::invalid_argument("central dual circle degenerates: invalid geometry");

  std::array<Moebius, 4> inv;
  for (int i = 0; i < 4; ++i) {
    inv[i] = rim_inversion(g.dual[i]);
    g.mirror[i] = ConformalMap(inv[i]);
  }

  std::array<Moebius, 3> gam;
  for (int i = 0; i < 3; ++i) {
    gam[i] = compose(inv[3], inv[i]);
    g.generator[i] = ConformalMap(gam[i]);
    int j = (i + 1) % 3, kk = (i + 2) % 3;
    Complex x = t[j][kk];
    if (std::abs(mob(gam[i], x) - x) > 1e-8 * scale ||
        std::abs(log_abs_derivative(g.generator[i], x)) > 1e-7)
      throw std::invalid_argument("generator is not parabolic at its tangency: invalid geometry");
  }
  // the mixed classes gamma_i gamma_j^{-1} pinch the g_4 image of the
  // opposite tangency point
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      int kk = 3 - i - j;
      Complex w = mob(inv[3], t[kk][3]);
      Moebius h = compose(gam[i], gam[j].inverse());
      if (std::abs(mob(h, w) - w) > 1e-8 * scale ||
          std::abs(log_abs_derivative(ConformalMap(h), w)) > 1e-7)
        throw std::invalid_argument("mixed class is not parabolic: invalid geometry");
    }

  // mirror-side balls: the side of each dual circle away from its seed
  std::array<Circle, 3> minus_ball;
  for (int i = 0; i < 3; ++i) {
    Circle rim = g.dual[i];
    rim.side = Circle::Side::interior;
    if (side_clearance(rim, c[i].center) <= 0.0) rim.side = Circle::Side::exterior;
    if (side_clearance(rim, c[i].center) <= kGeomTol * scale)
      throw std::invalid_argument("seed circle meets its dual ball: invalid geometry");
    minus_ball[i] = rim;
  }

  // plus-side balls are the g_4 images; the inversion pole has to clear the
  // mirror regions for the images to be disks
  std::array<Disk, 3> plus_ball;
  for (int i = 0; i < 3; ++i) {
    if (side_clearance(minus_ball[i], g.dual[3].center) <= kGeomTol * scale)
      throw std::invalid_argument("central dual pole meets a mirror ball: invalid geometry");
    plus_ball[i] = image_region_disk(inv[3], minus_ball[i]);
  }

  // chart pole: a point clear of all six balls, so one inversion carries
  // every ball to an honest disk
  std::vector<Complex> candidates{c[0].center, c[1].center, c[2].center,
                                  (t[1][2] + t[0][2] + t[0][1]) / 3.0};
  Complex pole{0.0, 0.0};
  double best = -std::numeric_limits<double>::infinity();
  for (Complex cand : candidates) {
    double clear = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      clear = std::min(clear, side_clearance(minus_ball[i], cand));
      clear = std::min(clear, side_clearance(
                                  {plus_ball[i].center, plus_ball[i].radius,
                                   Circle::Side::interior},
                                  cand));
    }
    if (clear > best) {
      best = clear;
      pole = cand;
    }
  }
  if (best <= 1e-6 * scale)
    throw std::invalid_argument("no chart pole clears the schottky balls: invalid geometry");

  Moebius chart = Moebius::inversion({pole, scale});
  g.chart = ConformalMap(chart);

  SchottkyData data;
  data.tangency_allowed = true;
  for (int i = 0; i < 3; ++i) {
    data.ball.push_back(image_region_disk(
        chart, {plus_ball[i].center, plus_ball[i].radius, Circle::Side::interior}));
    data.mirror.push_back(image_region_disk(chart, minus_ball[i]));
    data.generator.push_back(
        ConformalMap(compose(compose(chart, gam[i]), chart.inverse())));
  }
  g.gdms = build_schottky_gdms(data);
  g.gdms.system.name = "apollonian";
  return g;
}

TriangleIfs apollonian_triangle_ifs(const Circle& c1, const Circle& c2, const Circle& c3) {
  const Circle* c[3] = {&c1, &c2, &c3};
  for (int i = 0; i < 3; ++i)
    if (c[i]->side != Circle::Side::interior || c[i]->is_line())
      throw std::invalid_argument("triangle circles must be interior disks");

  const Circle* inner = nullptr;
  auto fillers = tangent_fillers(c1, c2, c3);
  for (const Circle& cand : fillers)
    if (cand.side == Circle::Side::interior && (!inner || cand.radius < inner->radius))
      inner = &cand;
  if (!inner)
    throw std::invalid_argument("triple has no inscribed circle: invalid geometry");

  TriangleMaps tm = triangle_maps(c1, c2, c3, *inner);
  Circle rim = circle_through(tm.vertex[0], tm.vertex[1], tm.vertex[2]);
  if (rim.is_line())
    throw std::invalid_argument("collinear tangency points: invalid geometry");

  TriangleIfs out;
  for (int i = 0; i < 3; ++i) out.map[i] = ConformalMap(tm.map[i]);
  out.vertex = tm.vertex;
  out.inner = *inner;

  GdmsSystem sys;
  sys.name = "apollonian-triangle";
  sys.alphabet = Alphabet::ifs(3);
  sys.incidence = IncidenceMatrix::full_shift(sys.alphabet);
  sys.branch = {out.map[0], out.map[1], out.map[2]};
  sys.domain = {DomainRegion::disk(rim.center, rim.radius)};
  sys.iterate_order = 2;
  sys.declared_parabolic = {{0}, {1}, {2}};
  out.system = std::move(sys);
  return out;
}

Packing enumerate_packing(const TriangleIfs& ifs, const PackingOptions& opt) {
  GasketSpec gs;
  for (int i = 0; i < 3; ++i) gs.maps[i] = moebius_rep(ifs.map[i], "triangle branch");
  gs.seed = ifs.inner.disk();
  gs.gen_offset = 0;
  return run_gaskets({gs}, {}, opt);
}

Packing enumerate_full_packing(const Circle& c1, const Circle& c2, const Circle& c3,
                               const Circle& c4, const PackingOptions& opt) {
  std::array<Circle, 4> c{c1, c2, c3, c4};
  if (c4.side != Circle::Side::exterior)
    throw std::invalid_argument("the bounding circle goes last and carries Side::exterior");
  for (int i = 0; i < 4; ++i)
    if (c[i].is_line())
      throw std::invalid_argument("packing seeds must be honest circles");
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) tangency_point(c[i], c[j]);  // throws if not tangent
  double scale = c4.radius;

  std::vector<PackingEntry> head;
  for (int i = 0; i < 4; ++i) head.push_back({c[i], 0, {}});

  // gasket 0 fills the central triangle; gasket i fills the triangle that
  // omits seed i
  std::vector<GasketSpec> gaskets;
  int omit[4] = {3, 0, 1, 2};
  for (int gidx = 0; gidx < 4; ++gidx) {
    int skip = omit[gidx];
    const Circle* tri[3];
    int n = 0;
    for (int i = 0; i < 4; ++i)
      if (i != skip) tri[n++] = &c[i];
    Circle seed = gasket_seed(*tri[0], *tri[1], *tri[2], c[skip], scale);
    TriangleMaps tm = triangle_maps(*tri[0], *tri[1], *tri[2], seed);
    GasketSpec gs;
    gs.maps = tm.map;
    gs.seed = seed.disk();
    gs.prefix = {gidx};
    gs.gen_offset = 1;
    gaskets.push_back(std::move(gs));
  }

  Packing out = run_gaskets(gaskets, head, opt);
  std::string convention =
      "word column lists the gasket index and then the branch letters";
  out.note = out.note.empty() ? convention : out.note + "; " + convention;
  return out;
}

std::string packing_csv(const Packing& packing) {
  std::string out = "cx,cy,r,generation,word\n";
  char buf[96];
  for (const PackingEntry& e : packing.circles) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,", e.circle.center.real(),
                  e.circle.center.imag(), e.circle.radius, e.generation);
    out += buf;
    for (size_t i = 0; i < e.word.size(); ++i) {
      if (i) out += '.';
      out += std::to_string(e.word[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace cgdms
