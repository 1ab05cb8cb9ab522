#include "cgdms/system.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cgdms {

namespace {

constexpr double kOscMargin = 1e-7;
constexpr double kNestSlack = 1e-9;
constexpr double kParabolicTol = 1e-9;
constexpr double kRatioTol = 1e-10;
constexpr long kDenomCap = 1000000;

std::string word_text(const Word& w) {
  std::ostringstream os;
  for (size_t i = 0; i < w.size(); ++i) os << (i ? "." : "") << w[i];
  return os.str();
}

bool region_nested(const DomainRegion& inner, const DomainRegion& outer) {
  if (inner.kind != outer.kind) return false;
  if (inner.kind == DomainRegion::Kind::interval)
    return inner.iv.lo >= outer.iv.lo - kNestSlack && inner.iv.hi <= outer.iv.hi + kNestSlack;
  return std::abs(inner.dk.center - outer.dk.center) + inner.dk.radius <=
         outer.dk.radius + kNestSlack;
}

// continued-fraction rationality: rational iff the expansion terminates
// (remainder <= tol) before the denominator cap. Testing the remainder
// rather than |x - p/q| matters: good convergents of irrational ratios
// approximate to 1e-10 well before q = 1e6, but their remainders stay large.
bool nearly_rational(double x, long cap, double tol, long* num, long* den) {
  double frac = std::abs(x);
  long p0 = 1, q0 = 0;
  long p1 = static_cast<long>(std::floor(frac)), q1 = 1;
  frac -= std::floor(frac);
  for (int it = 0; it < 64; ++it) {
    if (frac <= tol) {
      *num = p1;
      *den = q1;
      return true;
    }
    frac = 1.0 / frac;
    long a = static_cast<long>(std::floor(frac));
    frac -= a;
    long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > cap || q2 <= 0) return false;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
  }
  return false;
}

}  // namespace

bool ValidationReport::all_pass() const {
  for (const auto& it : items)
    if (it.name != "strict_contraction" && !it.pass) return false;
  return true;
}

const ValidationReport::Item* ValidationReport::find(const std::string& name) const {
  for (const auto& it : items)
    if (it.name == name) return &it;
  return nullptr;
}

const DomainRegion& GdmsSystem::word_domain(const Word& w) const {
  if (w.empty()) throw std::invalid_argument("empty word has no distinguished domain");
  return terminal_region(w.back());
}

ValidationReport validate(GdmsSystem& system) {
  int edges = system.alphabet.edge_count();
  if (edges == 0) throw std::invalid_argument("system without edges");
  if (static_cast<int>(system.branch.size()) != edges)
    throw std::invalid_argument("one branch per edge required");
  if (static_cast<int>(system.domain.size()) != system.alphabet.vertex_count)
    throw std::invalid_argument("one region per vertex required");
  if (system.incidence.edge_count() != edges)
    throw std::invalid_argument("incidence size does not match alphabet");
  if (system.iterate_order < 1) throw std::invalid_argument("iterate order must be positive");

  ValidationReport report;

  {  // codomain nesting: phi_e(X_t(e)) inside X_i(e), exact region images
    ValidationReport::Item item{"codomain_nesting", true, false, ""};
    for (Edge e = 0; e < edges; ++e) {
      bool numeric = std::holds_alternative<NumericBranch>(system.branch[e].rep) ||
                     std::holds_alternative<Chain>(system.branch[e].rep);
      item.sampled_only = item.sampled_only || numeric;
      DomainRegion img = image_region(system.branch[e], system.terminal_region(e));
      if (!region_nested(img, system.initial_region(e))) {
        item.pass = false;
        item.detail = "edge " + std::to_string(e) + " escapes its codomain";
        break;
      }
    }
    report.items.push_back(std::move(item));
  }

  {  // open set condition: first-level images with a common initial vertex
    ValidationReport::Item item{"open_set_condition", true, false, ""};
    for (Vertex v = 0; v < system.alphabet.vertex_count && item.pass; ++v) {
      std::vector<DomainRegion> images;
      std::vector<Edge> owner;
      for (Edge e = 0; e < edges; ++e)
        if (system.alphabet.initial[e] == v) {
          images.push_back(image_region(system.branch[e], system.terminal_region(e)));
          owner.push_back(e);
        }
      for (size_t i = 0; i < images.size() && item.pass; ++i)
        for (size_t j = i + 1; j < images.size(); ++j) {
          double overlap;
          if (images[i].kind == DomainRegion::Kind::interval) {
            overlap = std::min(images[i].iv.hi, images[j].iv.hi) -
                      std::max(images[i].iv.lo, images[j].iv.lo);
          } else {
            overlap = images[i].dk.radius + images[j].dk.radius -
                      std::abs(images[i].dk.center - images[j].dk.center);
          }
          if (overlap > kOscMargin) {
            item.pass = false;
            item.detail = "images of edges " + std::to_string(owner[i]) + " and " +
                          std::to_string(owner[j]) + " overlap by " + std::to_string(overlap);
            break;
          }
        }
    }
    report.items.push_back(std::move(item));
  }

  {  // weak contraction: no branch expands anywhere on its domain
    ValidationReport::Item item{"weak_contraction", true, false, ""};
    for (Edge e = 0; e < edges; ++e) {
      double s = sup_log_derivative(system.branch[e], system.terminal_region(e));
      if (s > 1e-9) {
        item.pass = false;
        item.detail = "edge " + std::to_string(e) + " has sup log|phi'| = " + std::to_string(s);
        break;
      }
    }
    report.items.push_back(std::move(item));
  }

  {  // strict contraction of q-letter blocks; records kappa
    ValidationReport::Item item{"strict_contraction", true, false, ""};
    double worst = -std::numeric_limits<double>::infinity();
    Word worst_word;
    for (const Word& w : enumerate_words(system.incidence, system.iterate_order)) {
      double s = sup_log_derivative(system.word_map(w), system.word_domain(w));
      if (s > worst) {
        worst = s;
        worst_word = w;
      }
    }
    system.kappa = std::exp(worst);
    item.pass = worst < 0.0;
    item.detail = "kappa(q=" + std::to_string(system.iterate_order) +
                  ") = " + std::to_string(system.kappa) + " at word " + word_text(worst_word);
    report.items.push_back(std::move(item));
  }

  {  // bounded distortion, empirical
    ValidationReport::Item item{"distortion", true, true, ""};
    std::vector<DomainRegion> doms;
    for (Edge e = 0; e < edges; ++e) doms.push_back(system.terminal_region(e));
    system.distortion = distortion_constant(system.branch, doms);
    item.pass = std::isfinite(system.distortion) && system.distortion < 1e6;
    item.detail = "K = " + std::to_string(system.distortion);
    report.items.push_back(std::move(item));
  }

  return report;
}

SystemClass detect_parabolic(const GdmsSystem& system) {
  SystemClass out;
  for (Edge e = 0; e < system.alphabet.edge_count(); ++e) {
    if (!system.incidence.allows(e, e)) continue;
    const DomainRegion& dom = system.terminal_region(e);
    std::vector<Complex> candidates;
    try {
      candidates.push_back(fixed_point(system.branch[e], dom, 1e-12));
    } catch (const std::runtime_error&) {
      // fall back to boundary candidates below
    }
    if (dom.kind == DomainRegion::Kind::interval) {
      candidates.emplace_back(dom.iv.lo, 0.0);
      candidates.emplace_back(dom.iv.hi, 0.0);
    }
    double scale = std::max(1.0, dom.diameter());
    for (Complex p : candidates) {
      if (std::abs(apply(system.branch[e], p) - p) > kParabolicTol * scale) continue;
      if (std::abs(log_abs_derivative(system.branch[e], p)) <= kParabolicTol) {
        out.info.omega.push_back(e);
        out.info.fixed_point.push_back(p);
        break;
      }
    }
  }
  out.parabolic = !out.info.omega.empty();
  return out;
}

double periodic_multiplier(const GdmsSystem& system, const Word& w) {
  if (w.empty()) throw std::invalid_argument("periodic multiplier needs a nonempty word");
  if (!is_admissible(w, system.incidence) || !system.incidence.allows(w.back(), w.front()))
    throw std::invalid_argument("word is not closable");
  ConformalMap m = system.word_map(w);
  Complex x = fixed_point(m, system.word_domain(w), 1e-13);
  return -log_abs_derivative(m, x);
}

GenericityDecision is_D_generic(const GdmsSystem& system, int word_budget) {
  GenericityDecision out;
  constexpr size_t kWordCap = 5000;
  std::vector<double> multipliers;
  for (int n = 1; n <= word_budget && multipliers.size() < kWordCap; ++n) {
    for (const Word& w : periodic_words(system.incidence, n)) {
      multipliers.push_back(periodic_multiplier(system, w));
      if (multipliers.size() >= kWordCap) break;
    }
  }
  if (multipliers.empty()) {
    out.evidence = "no periodic words up to length " + std::to_string(word_budget);
    return out;
  }
  std::sort(multipliers.begin(), multipliers.end());
  std::vector<double> distinct;
  for (double v : multipliers)
    if (distinct.empty() || v - distinct.back() > 1e-12) distinct.push_back(v);

  double base = distinct.front();
  double generator = base;
  for (size_t i = 1; i < distinct.size(); ++i) {
    double ratio = distinct[i] / base;
    out.basis_ratios.push_back(ratio);
    long num = 0, den = 1;
    if (!nearly_rational(ratio, kDenomCap, kRatioTol, &num, &den)) {
      out.tag = GenericityDecision::Tag::generic;
      out.evidence = "ratio " + std::to_string(ratio) + " admits no small rational approximation";
      return out;
    }
    // common generator via a tolerant Euclid on the pair (generator, multiplier)
    double a = std::max(generator, distinct[i]), b = std::min(generator, distinct[i]);
    while (b > 1e-9) {
      double r = std::fmod(a, b);
      if (r > b - 1e-9) r = 0.0;
      a = b;
      b = r;
    }
    generator = a;
  }
  out.tag = GenericityDecision::Tag::lattice;
  out.generator = generator;
  out.evidence = "all " + std::to_string(out.basis_ratios.size()) + " ratios rational";
  return out;
}

}  // namespace cgdms
