#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace cgdms {

using Edge = std::int32_t;
using Vertex = std::int32_t;
using Word = std::vector<Edge>;  // edge indices; the empty word acts as identity

// Directed multigraph bookkeeping. Branch maps run against the arrows: the
// contraction attached to e sends X_{terminal(e)} into X_{initial(e)}, so a
// two-letter word ab is composable exactly when terminal(a) == initial(b).
struct Alphabet {
  std::vector<Vertex> initial;
  std::vector<Vertex> terminal;
  Vertex vertex_count = 1;

  int edge_count() const { return static_cast<int>(initial.size()); }

  // single-vertex alphabet, the plain IFS case
  static Alphabet ifs(int edges);
};

// prefix ω identifying the cylinder [ω] = {τ : τ starts with ω}
struct CylinderSpec {
  Word prefix;
};

// 0/1 transition structure over edge pairs, stored dense. Construction
// rejects entries that violate graph compatibility (see Alphabet note).
class IncidenceMatrix {
 public:
  IncidenceMatrix() = default;

  static IncidenceMatrix full_shift(const Alphabet& a);
  static IncidenceMatrix dense(const Alphabet& a, std::vector<std::uint8_t> row_major);
  static IncidenceMatrix from_rule(const Alphabet& a,
                                   const std::function<bool(Edge, Edge)>& rule);

  bool allows(Edge a, Edge b) const {
    return entries_[static_cast<std::size_t>(a) * n_ + b] != 0;
  }
  int edge_count() const { return n_; }
  const std::vector<Edge>& successors(Edge a) const { return succ_[a]; }
  const std::vector<Edge>& predecessors(Edge b) const { return pred_[b]; }

 private:
  IncidenceMatrix(const Alphabet& a, std::vector<std::uint8_t> entries);

  int n_ = 0;
  std::vector<std::uint8_t> entries_;
  std::vector<std::vector<Edge>> succ_;
  std::vector<std::vector<Edge>> pred_;
};

// true iff every adjacent pair passes A; empty and length-1 words are
// admissible by convention. Unknown symbols throw std::invalid_argument.
bool is_admissible(const Word& w, const IncidenceMatrix& A);

struct IrreducibilityDecision {
  bool decided = false;              // false = unknown within search depth
  std::vector<Word> witnesses;       // connector set: for all a,b some ω here has aωb admissible
};

// semi-decision: searches connector words of length <= search_depth for
// every ordered edge pair. Never reports a negative.
IrreducibilityDecision is_finitely_irreducible(const IncidenceMatrix& A, int search_depth);

// all admissible words of exactly length n, lexicographic in edge index
std::vector<Word> enumerate_words(const IncidenceMatrix& A, int n);

// admissible words of length n that close up (A allows last->first),
// lexicographic; n == 0 throws
std::vector<Word> periodic_words(const IncidenceMatrix& A, int n);

}  // namespace cgdms
