#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cgdms/maps.hpp"
#include "cgdms/system.hpp"

namespace cgdms {

// oriented generalized circle: side selects which complementary component
// counts as the enclosed region (exterior marks a bounding circle whose
// packing sits inside it); an infinite radius encodes a line through center
// along axis, with side interior naming the left half plane
struct Circle {
  Complex center{0.0, 0.0};
  double radius = 1.0;
  enum class Side { interior, exterior } side = Side::interior;
  Complex axis{1.0, 0.0};  // unit tangent, lines only

  bool is_line() const { return !(radius < std::numeric_limits<double>::infinity()); }
  double curvature() const {
    return is_line() ? 0.0 : (side == Side::interior ? 1.0 : -1.0) / radius;
  }
  Disk disk() const;  // throws for lines

  static Circle line(Complex point, Complex direction);
};

// point of tangency of two generalized circles (external, or internal when
// one side is exterior, or line against circle); throws invalid_argument
// when the configuration misses tangency by more than 1e-9
Complex tangency_point(const Circle& a, const Circle& b);

// circle through three points, degenerating to a line when they are
// collinear; throws only when two of the points coincide
Circle circle_through(Complex p, Complex q, Complex r);

// free group data: q generator balls with mirrors, g_j carrying the
// complement of mirror[j] onto the closure of ball[j]; g_{-j} = g_j^{-1}
struct SchottkyData {
  std::vector<Disk> ball;
  std::vector<Disk> mirror;
  std::vector<ConformalMap> generator;
  bool tangency_allowed = false;
};

// pair-alphabet system: one edge per ordered ball pair (a, b), b != -a, with
// branch g_a restricted to ball b; edges chain when labels match
struct SchottkyGdms {
  GdmsSystem system;
  std::vector<std::pair<int, int>> pair_of_edge;  // signed ball labels

  // -1 when the pair is not an edge
  Edge edge_index(int a, int b) const;
};

// validates ball disjointness and the boundary pairing, assembles the
// system, and declares the tangency words it verifies as neutral; throws
// invalid_argument on geometry violations
SchottkyGdms build_schottky_gdms(const SchottkyData& data);

// inversion group of a bounded tangent circle quadruple: dual circles
// through the complementary tangency triples, their inversions, and the
// three-generator free subgroup gamma_i = g_4 o g_i; a dual circle may
// degenerate to a line, so the pair-alphabet system is built in chart
// coordinates where every ball is an honest disk
struct ApollonianGroup {
  std::array<Circle, 4> dual;
  std::array<ConformalMap, 4> mirror;     // inversion in dual[i]
  std::array<ConformalMap, 3> generator;  // gamma_i, parabolic
  ConformalMap chart;                     // carries packing coordinates into gdms coordinates
  SchottkyGdms gdms;
};

// c4 must carry Side::exterior and enclose the other three; throws
// invalid_argument when the quadruple is not mutually tangent
ApollonianGroup build_apollonian(const Circle& c1, const Circle& c2, const Circle& c3,
                                 const Circle& c4);

// parabolic three-map system filling the curvilinear triangle between
// mutually tangent circles: map[i] fixes vertex[i] (the tangency of the
// other two circles) and carries the opposite vertices onto the tangency
// points of the inscribed circle
struct TriangleIfs {
  std::array<ConformalMap, 3> map;
  std::array<Complex, 3> vertex;
  Circle inner;        // inscribed circle, the seed of the gasket
  GdmsSystem system;   // full 3-shift on the circumdisk of the vertices
};

TriangleIfs apollonian_triangle_ifs(const Circle& c1, const Circle& c2, const Circle& c3);

struct PackingEntry {
  Circle circle;
  int generation = 0;
  Word word;  // letters of the producing composite, outermost first
};

struct Packing {
  std::vector<PackingEntry> circles;
  bool truncated = false;  // node budget hit before the cut was exhausted
  std::string note;
};

// exactly one of generation / t_max selects the cut
struct PackingOptions {
  int generation = -1;    // >= 0: keep words of length up to this bound
  double t_max = -1.0;    // >= 0: keep circles of diameter >= exp(-t_max)
  std::int64_t node_budget = 50'000'000;
  int threads = 1;
};

// gasket of one curvilinear triangle: images phi_w(inner) tagged with the
// word length as generation
Packing enumerate_packing(const TriangleIfs& ifs, const PackingOptions& opt);

// whole bounded packing: the four seed circles at generation 0 plus the
// gasket of each of the four curvilinear triangles, word length g entering
// at generation g + 1
Packing enumerate_full_packing(const Circle& c1, const Circle& c2, const Circle& c3,
                               const Circle& c4, const PackingOptions& opt);

// rows cx, cy, r, generation, word
std::string packing_csv(const Packing& packing);

}  // namespace cgdms
