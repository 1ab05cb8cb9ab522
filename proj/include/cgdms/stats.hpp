#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cgdms/counting.hpp"
#include "cgdms/kleinian.hpp"
#include "cgdms/thermo.hpp"

namespace cgdms {

// atoms of the standardized log-derivative distribution at depth n: values
// (lambda_rho(w) - chi n) / sqrt(n), weights e^{-delta lambda} normalized.
// Values equal within 1e-9 pool their weight into one atom, so lattice
// systems keep honest jump sizes instead of float-jitter micro-steps.
struct DistributionTable {
  std::vector<double> value;   // sorted ascending
  std::vector<double> weight;  // positive, sums to 1
  double raw_total = 0.0;      // weight sum before normalization, ~ e^{n P(delta)}
  int n = 0;
};

// exact distribution over the admissible length-n words that close into rho,
// anchored at the point rho codes; throws when the word count would pass
// word_budget or the inputs are inconsistent
DistributionTable exact_counting_distribution(const GdmsSystem& system,
                                              const ReferenceCoding& rho, int n, double delta,
                                              double chi,
                                              std::int64_t word_budget = 50'000'000);

// weighted first moment of the atom values
double table_mean(const DistributionTable& table);
// weighted second central moment
double table_variance(const DistributionTable& table);

// distance to the centered normal CDF with deviation sigma. sup takes the
// worst atom edge (the classical statistic, floored at half the largest atom
// mass), midpoint compares jump midpoints and so measures placement alone.
// sigma below rounding scale (1e-8) is rejected as lattice-degenerate
struct KsResult {
  double sup = 0.0;
  double midpoint = 0.0;
};

KsResult ks_distance(const DistributionTable& table, double sigma);

// realized Markov chain over the measure's cylinder states with transitions
// from the one-letter-deeper invariant conditionals; letters[t] is the letter
// the orbit consumes at step t and birkhoff[t] the running sum of -log|phi'|
struct ChainSample {
  std::vector<Edge> letters;
  std::vector<double> birkhoff;
  double mean = 0.0;  // birkhoff.back() / length
};

ChainSample gibbs_chain_sample(const CylinderMeasure& measure, std::int64_t length,
                               std::uint64_t seed);

struct HistogramSpec {
  int bin_count = 46;
  double lo = 0.0;
  double hi = 0.0;
  bool auto_range = true;     // stretch [lo, hi] over the observed values
  bool delta_weights = true;  // weight each circle by r^delta, else by 1
};

// weighted histogram of -log r over the deepest generation in the packing,
// with moments of the same weighted distribution taken over every circle of
// that generation whether or not the range clips it
struct HistogramResult {
  std::vector<double> edge;    // bin_count + 1 ascending edges
  std::vector<double> weight;  // per bin
  int generation = 0;
  std::int64_t circle_count = 0;
  double total = 0.0;  // weight over all circles of the generation
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
};

HistogramResult apollonian_histogram(const Packing& packing, const HistogramSpec& spec,
                                     double delta);

// value,weight rows; bin_lo,bin_hi,weight rows
std::string distribution_csv(const DistributionTable& table);
std::string histogram_csv(const HistogramResult& histogram);

}  // namespace cgdms
