#include "cgdms/symbolic.hpp"

#include <stdexcept>

namespace cgdms {

Alphabet Alphabet::ifs(int edges) {
  Alphabet a;
  a.initial.assign(edges, 0);
  a.terminal.assign(edges, 0);
  a.vertex_count = 1;
  return a;
}

IncidenceMatrix::IncidenceMatrix(const Alphabet& a, std::vector<std::uint8_t> entries)
    : n_(a.edge_count()), entries_(std::move(entries)) {
  if (entries_.size() != static_cast<std::size_t>(n_) * n_)
    throw std::invalid_argument("incidence matrix size mismatch");
  succ_.resize(n_);
  pred_.resize(n_);
  for (Edge x = 0; x < n_; ++x)
    for (Edge y = 0; y < n_; ++y)
      if (entries_[static_cast<std::size_t>(x) * n_ + y]) {
        if (a.terminal[x] != a.initial[y])
          throw std::invalid_argument("incidence entry violates graph compatibility");
        succ_[x].push_back(y);
        pred_[y].push_back(x);
      }
}

IncidenceMatrix IncidenceMatrix::full_shift(const Alphabet& a) {
  const int n = a.edge_count();
  std::vector<std::uint8_t> e(static_cast<std::size_t>(n) * n, 0);
  for (Edge x = 0; x < n; ++x)
    for (Edge y = 0; y < n; ++y)
      e[static_cast<std::size_t>(x) * n + y] = a.terminal[x] == a.initial[y] ? 1 : 0;
  return IncidenceMatrix(a, std::move(e));
}

IncidenceMatrix IncidenceMatrix::dense(const Alphabet& a, std::vector<std::uint8_t> row_major) {
  return IncidenceMatrix(a, std::move(row_major));
}

IncidenceMatrix IncidenceMatrix::from_rule(const Alphabet& a,
                                           const std::function<bool(Edge, Edge)>& rule) {
  const int n = a.edge_count();
  std::vector<std::uint8_t> e(static_cast<std::size_t>(n) * n, 0);
  for (Edge x = 0; x < n; ++x)
    for (Edge y = 0; y < n; ++y)
      e[static_cast<std::size_t>(x) * n + y] = rule(x, y) ? 1 : 0;
  return IncidenceMatrix(a, std::move(e));
}

bool is_admissible(const Word& w, const IncidenceMatrix& A) {
  for (Edge e : w)
    if (e < 0 || e >= A.edge_count()) throw std::invalid_argument("unknown symbol in word");
  for (std::size_t j = 0; j + 1 < w.size(); ++j)
    if (!A.allows(w[j], w[j + 1])) return false;
  return true;
}

namespace {

// connector from a to b of length <= depth, shortest first; empty optional
// conventions are handled by the caller
bool find_connector(const IncidenceMatrix& A, Edge a, Edge b, int depth, Word& out) {
  // length-0 connector: ab itself admissible
  if (A.allows(a, b)) {
    out.clear();
    return true;
  }
  // BFS over (last edge of the partial connector)
  std::vector<Word> frontier;
  for (Edge e : A.successors(a)) frontier.push_back({e});
  for (int len = 1; len <= depth; ++len) {
    std::vector<Word> next;
    for (const Word& w : frontier) {
      if (A.allows(w.back(), b)) {
        out = w;
        return true;
      }
      if (len < depth)
        for (Edge e : A.successors(w.back())) {
          Word ext = w;
          ext.push_back(e);
          next.push_back(std::move(ext));
        }
    }
    frontier = std::move(next);
  }
  return false;
}

}  // namespace

IrreducibilityDecision is_finitely_irreducible(const IncidenceMatrix& A, int search_depth) {
  IrreducibilityDecision d;
  const int n = A.edge_count();
  std::vector<Word> found;
  for (Edge a = 0; a < n; ++a)
    for (Edge b = 0; b < n; ++b) {
      Word w;
      if (!find_connector(A, a, b, search_depth, w)) return d;  // unknown
      bool dup = false;
      for (const Word& u : found) dup = dup || u == w;
      if (!dup) found.push_back(w);
    }
  d.decided = true;
  d.witnesses = std::move(found);
  return d;
}

namespace {

void dfs_words(const IncidenceMatrix& A, int n, Word& w, std::vector<Word>& out,
               bool closing_only) {
  if (static_cast<int>(w.size()) == n) {
    if (!closing_only || A.allows(w.back(), w.front())) out.push_back(w);
    return;
  }
  if (w.empty()) {
    for (Edge e = 0; e < A.edge_count(); ++e) {
      w.push_back(e);
      dfs_words(A, n, w, out, closing_only);
      w.pop_back();
    }
  } else {
    for (Edge e : A.successors(w.back())) {
      w.push_back(e);
      dfs_words(A, n, w, out, closing_only);
      w.pop_back();
    }
  }
}

}  // namespace

std::vector<Word> enumerate_words(const IncidenceMatrix& A, int n) {
  if (n < 0) throw std::invalid_argument("negative word length");
  if (n == 0) return {Word{}};
  std::vector<Word> out;
  Word w;
  dfs_words(A, n, w, out, false);
  return out;
}

std::vector<Word> periodic_words(const IncidenceMatrix& A, int n) {
  if (n < 1) throw std::invalid_argument("periodic words need n >= 1");
  std::vector<Word> out;
  Word w;
  dfs_words(A, n, w, out, true);
  return out;
}

}  // namespace cgdms
