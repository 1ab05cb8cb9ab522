#include "cgdms/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace cgdms {
namespace {

// admissible length-n words whose last letter may precede head, counted with
// saturation so the budget test cannot overflow
std::int64_t closing_word_count(const IncidenceMatrix& A, Edge head, int n, std::int64_t cap) {
  int edges = A.edge_count();
  std::vector<std::int64_t> ways(edges, 0);
  for (Edge e = 0; e < edges; ++e) ways[e] = A.allows(e, head) ? 1 : 0;
  for (int k = 1; k < n; ++k) {
    std::vector<std::int64_t> next(edges, 0);
    for (Edge a = 0; a < edges; ++a) {
      std::int64_t sum = 0;
      for (Edge b : A.successors(a)) {
        sum += ways[b];
        if (sum > cap) {
          sum = cap + 1;
          break;
        }
      }
      next[a] = sum;
    }
    ways = std::move(next);
  }
  std::int64_t total = 0;
  for (Edge e = 0; e < edges; ++e) {
    total += ways[e];
    if (total > cap) return cap + 1;
  }
  return total;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

DistributionTable exact_counting_distribution(const GdmsSystem& system,
                                              const ReferenceCoding& rho, int n, double delta,
                                              double chi, std::int64_t word_budget) {
  if (n < 1) throw std::invalid_argument("depth must be at least one");
  if (!(std::isfinite(delta) && std::isfinite(chi)))
    throw std::invalid_argument("delta and chi must be finite");
  if (rho.pre.empty() && rho.period.empty())
    throw std::invalid_argument("reference coding names no letters");
  if (word_budget < 1) throw std::invalid_argument("word budget must be positive");

  const IncidenceMatrix& A = system.incidence;
  Edge head = rho.pre.empty() ? rho.period.front() : rho.pre.front();
  if (closing_word_count(A, head, n, word_budget) > word_budget)
    throw std::invalid_argument("word budget exceeded: lower n or raise the budget");

  Complex xi = reference_point(system, rho.pre, rho.period);

  // build words right to left so lambda accumulates by the chain rule on the
  // forward orbit of xi; no composite maps are ever formed
  struct Frame {
    Edge first;
    Complex x;
    double lam;
    int depth;
    size_t next = 0;  // cursor into predecessors(first)
  };
  std::vector<std::pair<double, double>> atoms;  // (value, weight)
  double sqrt_n = std::sqrt(static_cast<double>(n));
  std::vector<Frame> stack;
  auto emit_or_push = [&](Edge a, Complex x, double lam, int depth) {
    Complex ax = cgdms::apply(system.branch[a], x);
    double alam = lam - log_abs_derivative(system.branch[a], x);
    if (depth == n)
      atoms.emplace_back((alam - chi * n) / sqrt_n, std::exp(-delta * alam));
    else
      stack.push_back({a, ax, alam, depth, 0});
  };
  for (Edge e = 0; e < A.edge_count(); ++e)
    if (A.allows(e, head)) emit_or_push(e, xi, 0.0, 1);
  while (!stack.empty()) {
    Frame& top = stack.back();
    const std::vector<Edge>& pred = A.predecessors(top.first);
    if (top.next == pred.size()) {
      stack.pop_back();
      continue;
    }
    Edge a = pred[top.next++];
    emit_or_push(a, top.x, top.lam, top.depth + 1);
  }

  std::sort(atoms.begin(), atoms.end());
  DistributionTable out;
  out.n = n;
  for (const auto& [v, w] : atoms) {
    out.raw_total += w;
    // pool values equal up to rounding so lattice atoms keep one honest jump
    if (!out.value.empty() && v - out.value.back() <= 1e-9 * (1.0 + std::abs(v))) {
      double pooled = out.weight.back() + w;
      out.value.back() = (out.value.back() * out.weight.back() + v * w) / pooled;
      out.weight.back() = pooled;
    } else {
      out.value.push_back(v);
      out.weight.push_back(w);
    }
  }
  if (out.raw_total <= 0.0) throw std::invalid_argument("no admissible words close into rho");
  for (double& w : out.weight) w /= out.raw_total;
  return out;
}

double table_mean(const DistributionTable& table) {
  double total = 0.0, sum = 0.0;
  for (size_t i = 0; i < table.value.size(); ++i) {
    total += table.weight[i];
    sum += table.weight[i] * table.value[i];
  }
  return sum / total;
}

double table_variance(const DistributionTable& table) {
  double mean = table_mean(table);
  double total = 0.0, sum = 0.0;
  for (size_t i = 0; i < table.value.size(); ++i) {
    total += table.weight[i];
    sum += table.weight[i] * (table.value[i] - mean) * (table.value[i] - mean);
  }
  return sum / total;
}

KsResult ks_distance(const DistributionTable& table, double sigma) {
  if (table.value.empty()) throw std::invalid_argument("distribution table is empty");
  // deviations at rounding scale mean P'' vanished: the reference normal is
  // lattice-degenerate and the comparison meaningless
  if (!(sigma > 1e-8))
    throw std::invalid_argument("sigma must be positive: lattice-degenerate comparison");

  std::vector<size_t> order(table.value.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return table.value[a] < table.value[b]; });
  double total = 0.0;
  for (double w : table.weight) total += w;

  KsResult out;
  double cdf = 0.0;
  for (size_t i : order) {
    double phi = normal_cdf(table.value[i] / sigma);
    double lo = cdf, hi = cdf + table.weight[i] / total;
    out.sup = std::max({out.sup, std::abs(lo - phi), std::abs(hi - phi)});
    out.midpoint = std::max(out.midpoint, std::abs(0.5 * (lo + hi) - phi));
    cdf = hi;
  }
  return out;
}

ChainSample gibbs_chain_sample(const CylinderMeasure& measure, std::int64_t length,
                               std::uint64_t seed) {
  if (length < 1) throw std::invalid_argument("chain length must be positive");
  if (!measure.model) throw std::invalid_argument("measure carries no cylinder model");
  const SpectralModel& model = *measure.model;
  if (model.has_tail())
    throw std::invalid_argument("chain sampling needs a fully enumerated cylinder model");
  const std::vector<Word>& states = model.states();
  if (states.empty()) throw std::invalid_argument("cylinder model has no states");
  const IncidenceMatrix& A = model.system().incidence;

  // flatten the per-state transition rows once: targets, cumulative masses
  // from the one-letter-deeper invariant conditionals, and the -log|phi'|
  // increments anchored the same way the stationary average is
  std::vector<int> row_ptr{0};
  std::vector<int> target;
  std::vector<double> cum;
  std::vector<double> inc;
  for (size_t i = 0; i < states.size(); ++i) {
    const Word& w = states[i];
    double row_total = 0.0;
    Word v(w.begin() + 1, w.end());
    v.push_back(0);
    Word ext = w;
    ext.push_back(0);
    for (Edge b : A.successors(w.back())) {
      v.back() = b;
      ext.back() = b;
      int j = model.state_index(v);
      if (j < 0) continue;
      double mass = measure.invariant_of(ext);
      if (!(mass > 0.0)) continue;
      row_total += mass;
      target.push_back(j);
      cum.push_back(row_total);
      inc.push_back(-model.transition_log(w.front(), j));
    }
    if (measure.invariant[i] > 0.0 && row_total <= 0.0)
      throw std::invalid_argument("invariant measure strands a reachable state");
    for (int k = row_ptr.back(); k < static_cast<int>(cum.size()); ++k) cum[k] /= row_total;
    row_ptr.push_back(static_cast<int>(target.size()));
  }

  std::mt19937_64 rng(seed);
  auto draw = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  // start from the stationary state distribution
  double total_inv = 0.0;
  for (double m : measure.invariant) total_inv += m;
  double u = draw() * total_inv;
  size_t cur = 0;
  for (; cur + 1 < states.size(); ++cur) {
    u -= measure.invariant[cur];
    if (u <= 0.0) break;
  }

  ChainSample out;
  out.letters.reserve(static_cast<size_t>(length));
  out.birkhoff.reserve(static_cast<size_t>(length));
  double running = 0.0;
  for (std::int64_t t = 0; t < length; ++t) {
    int lo = row_ptr[cur], hi = row_ptr[cur + 1];
    if (lo == hi) throw std::invalid_argument("chain entered a state with no successors");
    double r = draw();
    int pick = lo + static_cast<int>(std::upper_bound(cum.begin() + lo, cum.begin() + hi, r) -
                                     (cum.begin() + lo));
    if (pick >= hi) pick = hi - 1;
    out.letters.push_back(states[cur].front());
    running += inc[pick];
    out.birkhoff.push_back(running);
    cur = static_cast<size_t>(target[pick]);
  }
  out.mean = running / static_cast<double>(length);
  return out;
}

HistogramResult apollonian_histogram(const Packing& packing, const HistogramSpec& spec,
                                     double delta) {
  if (spec.bin_count < 1) throw std::invalid_argument("histogram needs at least one bin");
  if (!spec.auto_range && !(spec.lo < spec.hi))
    throw std::invalid_argument("histogram range must satisfy lo < hi");
  if (packing.circles.empty()) throw std::invalid_argument("packing is empty");

  int gen = 0;
  for (const PackingEntry& e : packing.circles) gen = std::max(gen, e.generation);

  std::vector<double> x;  // -log r over the deepest generation
  std::vector<double> w;
  for (const PackingEntry& e : packing.circles) {
    if (e.generation != gen) continue;
    double v = -std::log(e.circle.radius);
    x.push_back(v);
    w.push_back(spec.delta_weights ? std::exp(-delta * v) : 1.0);
  }
  if (x.empty()) throw std::invalid_argument("packing is empty");

  HistogramResult out;
  out.generation = gen;
  out.circle_count = static_cast<std::int64_t>(x.size());
  double m1 = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    out.total += w[i];
    m1 += w[i] * x[i];
  }
  out.mean = m1 / out.total;
  double m2 = 0.0, m3 = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - out.mean;
    m2 += w[i] * d * d;
    m3 += w[i] * d * d * d;
  }
  out.variance = m2 / out.total;
  out.skewness = out.variance > 0.0 ? (m3 / out.total) / std::pow(out.variance, 1.5) : 0.0;

  double lo = spec.lo, hi = spec.hi;
  if (spec.auto_range) {
    lo = *std::min_element(x.begin(), x.end());
    hi = *std::max_element(x.begin(), x.end());
    if (!(lo < hi)) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  out.edge.resize(spec.bin_count + 1);
  for (int i = 0; i <= spec.bin_count; ++i)
    out.edge[i] = lo + (hi - lo) * i / static_cast<double>(spec.bin_count);
  out.edge.back() = hi;
  out.weight.assign(spec.bin_count, 0.0);
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo || x[i] > hi) continue;
    int b = static_cast<int>((x[i] - lo) / (hi - lo) * spec.bin_count);
    if (b >= spec.bin_count) b = spec.bin_count - 1;
    out.weight[b] += w[i];
  }
  return out;
}

std::string distribution_csv(const DistributionTable& table) {
  std::string out = "value,weight\n";
  char buf[80];
  for (size_t i = 0; i < table.value.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", table.value[i], table.weight[i]);
    out += buf;
  }
  return out;
}

std::string histogram_csv(const HistogramResult& histogram) {
  std::string out = "bin_lo,bin_hi,weight\n";
  char buf[120];
  for (size_t i = 0; i < histogram.weight.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", histogram.edge[i],
                  histogram.edge[i + 1], histogram.weight[i]);
    out += buf;
  }
  return out;
}

}  // namespace cgdms
