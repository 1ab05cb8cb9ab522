#pragma once

#include <optional>
#include <string>

#include "cgdms/maps.hpp"
#include "cgdms/symbolic.hpp"

namespace cgdms {

struct ValidationReport {
  struct Item {
    std::string name;
    bool pass = false;
    bool sampled_only = false;
    std::string detail;
  };
  std::vector<Item> items;

  // structural soundness; strict contraction is reported but not required
  // here, since parabolic systems are weakly contracting by design
  bool all_pass() const;
  const Item* find(const std::string& name) const;
};

struct ParabolicInfo {
  std::vector<Edge> omega;          // parabolic edges, sorted
  std::vector<Complex> fixed_point;  // aligned with omega
};

struct SystemClass {
  bool parabolic = false;
  ParabolicInfo info;
};

struct GenericityDecision {
  enum class Tag { lattice, generic, inconclusive } tag = Tag::inconclusive;
  double generator = 0.0;            // lattice case: additive generator of the multipliers
  std::vector<double> basis_ratios;  // multiplier ratios the verdict rests on
  std::string evidence;
};

// validated graph directed system: one contracting branch per edge, one
// bounded region per vertex, phi_e mapping X_{t(e)} into X_{i(e)}
struct GdmsSystem {
  std::string name;
  Alphabet alphabet;
  IncidenceMatrix incidence = IncidenceMatrix::full_shift(Alphabet::ifs(1));
  std::vector<ConformalMap> branch;
  std::vector<DomainRegion> domain;  // indexed by vertex
  int iterate_order = 1;  // q: contraction certified for q-letter blocks

  // words a geometric constructor certifies as neutral (tangency classes);
  // informational only, detect_parabolic stays the single-letter authority
  std::vector<Word> declared_parabolic;

  // filled in by validate()
  double kappa = 1.0;       // q-block contraction bound, 1.0 when only weak
  double distortion = 1.0;  // empirical bounded-distortion constant

  const DomainRegion& initial_region(Edge e) const { return domain[alphabet.initial[e]]; }
  const DomainRegion& terminal_region(Edge e) const { return domain[alphabet.terminal[e]]; }
  // domain of the composite phi_w, i.e. X_{t(last letter)}
  const DomainRegion& word_domain(const Word& w) const;
  ConformalMap word_map(const Word& w) const { return compose_word(w, branch); }
};

// contraction, open set condition, codomain nesting, distortion; throws on
// structural inconsistency, reports everything else as items
ValidationReport validate(GdmsSystem& system);

// parabolic edges: self-composable with a neutral fixed point, |log|phi'||
// at the fixed point below 1e-9 (evaluated at exact boundary points when
// the iteration only reaches the neighborhood)
SystemClass detect_parabolic(const GdmsSystem& system);

// lambda_p(w) = -log|phi_w'(x_w)| at the fixed point of the closable word w
double periodic_multiplier(const GdmsSystem& system, const Word& w);

// lattice vs generic through continued-fraction rationality of multiplier
// ratios (denominator cap 1e6, tolerance 1e-10); numeric evidence, not proof
GenericityDecision is_D_generic(const GdmsSystem& system, int word_budget);

}  // namespace cgdms
